import pytest

from sgrefine.dataio import load_instances
from sgrefine.graph import canonicalize, parse_graph

from support_primary import FIXTURES


@pytest.fixture(scope="session")
def fixture_instances():
    return load_instances(FIXTURES / "instances.jsonl")


@pytest.fixture(scope="session")
def figure_initial():
    text = (FIXTURES / "figure_initial.txt").read_text(encoding="utf-8").strip()
    return canonicalize(parse_graph(text, "lenient"))


@pytest.fixture(scope="session")
def ferry_instance(fixture_instances):
    return next(i for i in fixture_instances if i.id == "ferry-terminal")
