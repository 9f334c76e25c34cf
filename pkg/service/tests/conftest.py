import pytest

from progsvc import BackendConfig

from support_service import FIXTURES, run_service


@pytest.fixture(scope="session")
def instances_path():
    return str(FIXTURES / "instances.jsonl")


@pytest.fixture(scope="session")
def echo_service():
    with run_service(BackendConfig(mode="echo")) as endpoint:
        yield endpoint


@pytest.fixture(scope="session")
def oracle_service(instances_path):
    with run_service(
        BackendConfig(mode="oracle", gold_path=instances_path)
    ) as endpoint:
        yield endpoint


@pytest.fixture(scope="session")
def faulty_service(instances_path):
    with run_service(
        BackendConfig(mode="oracle", gold_path=instances_path, misalign_flags=True)
    ) as endpoint:
        yield endpoint
