"""Wire-protocol conformance, exercised through real HTTP with the client
library on the other end."""

import json

import pytest
import requests

from sgrefine.dataio import build_edit_dataset, load_edit_tuples, load_instances
from sgrefine.edits import CorruptionConfig, derive_edits
from sgrefine.merge import generate_initial
from sgrefine.refine import (
    ProgrammerProtocolError,
    RefinementConfig,
    RemoteProgrammer,
    refine,
)

from support_service import run_service
from progsvc import BackendConfig


def _post_edits(endpoint, row_id, caption, graph):
    return requests.post(
        f"{endpoint}/v1/edits",
        json={
            "id": row_id,
            "caption": caption,
            "graph": [[t.subject, t.relation, t.object] for t in graph.triples],
        },
        timeout=10,
    )


class TestOracleConformance:
    def test_byte_match_on_50_fixtures(self, tmp_path, oracle_service, instances_path):
        instances = load_instances(instances_path)
        golds = {inst.id: inst for inst in instances}
        edits_path = tmp_path / "edits.jsonl"
        rows = build_edit_dataset(
            instances,
            CorruptionConfig(n_variants=5, seed=21),
            edits_path,
            include_merged=False,
        )
        assert rows == 50
        for row in load_edit_tuples(edits_path):
            inst = golds[row.id.split("#")[0]]
            response = _post_edits(oracle_service, row.id, inst.caption, row.initial_graph)
            assert response.status_code == 200
            expected = derive_edits(row.initial_graph, inst.gold_graph)
            expected_body = {
                "delete": list(expected.delete_flags),
                "insert": [[t.subject, t.relation, t.object] for t in expected.insertions],
            }
            assert json.dumps(response.json(), sort_keys=True).encode() == json.dumps(
                expected_body, sort_keys=True
            ).encode()

    def test_remote_oracle_refines_to_gold(self, oracle_service, instances_path):
        instances = [i for i in load_instances(instances_path) if i.sentence_graphs]
        for inst in instances:
            y0 = generate_initial(inst).graph
            client = RemoteProgrammer(oracle_service, instance_id=inst.id)
            final, trace = refine(inst, y0, RefinementConfig(iterations=1), client)
            assert final.triple_set() == inst.gold_graph.triple_set()
            assert not trace.degraded

    def test_unknown_instance_404(self, oracle_service, instances_path):
        inst = load_instances(instances_path)[0]
        response = _post_edits(oracle_service, "no-such-id", inst.caption, inst.gold_graph)
        assert response.status_code == 404


class TestSchemaViolation:
    def test_misaligned_flags_raise_client_protocol_error(
        self, faulty_service, instances_path
    ):
        inst = load_instances(instances_path)[0]
        client = RemoteProgrammer(
            faulty_service, instance_id=inst.id, retries=1, backoff=0.01
        )
        with pytest.raises(ProgrammerProtocolError):
            client(inst.gold_graph, inst.caption)

    def test_bad_request_schema_400(self, echo_service):
        response = requests.post(
            f"{echo_service}/v1/edits", json={"caption": "missing id"}, timeout=10
        )
        assert response.status_code == 400
        response = requests.post(
            f"{echo_service}/v1/edits",
            json={"id": "x", "caption": "c", "graph": [["only", "two"]]},
            timeout=10,
        )
        assert response.status_code == 400


class TestEchoMode:
    def test_full_refine_is_identity(self, echo_service, instances_path):
        cfg = RefinementConfig(iterations=2)
        for inst in load_instances(instances_path):
            y0 = inst.gold_graph
            client = RemoteProgrammer(echo_service, instance_id=inst.id)
            final, trace = refine(inst, y0, cfg, client)
            assert final.triple_set() == y0.triple_set()
            assert not trace.degraded

    def test_health(self, echo_service):
        body = requests.get(f"{echo_service}/v1/health", timeout=10).json()
        assert body == {"status": "ok", "mode": "echo"}


class TestReplayMode:
    def test_replay_serves_recorded_edits(self, tmp_path, instances_path):
        instances = load_instances(instances_path)
        edits_path = tmp_path / "edits.jsonl"
        build_edit_dataset(
            instances, CorruptionConfig(n_variants=1, seed=3), edits_path
        )
        rows = load_edit_tuples(edits_path)
        with run_service(
            BackendConfig(mode="replay", edits_path=str(edits_path))
        ) as endpoint:
            golds = {inst.id: inst for inst in instances}
            for row in rows[:5]:
                inst = golds[row.id.split("#")[0]]
                response = _post_edits(endpoint, row.id, inst.caption, row.initial_graph)
                assert response.status_code == 200
                body = response.json()
                expected = derive_edits(row.initial_graph, inst.gold_graph)
                assert body["delete"] == list(expected.delete_flags)


class TestModelMode:
    def test_unloaded_model_503_and_health(self, instances_path):
        from progsvc.backends import build_backend

        config = BackendConfig(mode="model", model_id="missing/checkpoint")
        backend = build_backend(config)  # never loaded -> not ready
        with run_service(config, backend) as endpoint:
            health = requests.get(f"{endpoint}/v1/health", timeout=10).json()
            assert health == {"status": "loading", "mode": "model"}
            response = requests.post(
                f"{endpoint}/v1/edits",
                json={"id": "x", "caption": "c", "graph": []},
                timeout=10,
            )
            assert response.status_code == 503
