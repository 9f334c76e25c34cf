import json

import pytest

from progsvc import export_supervision
from progsvc.supervision import SupervisionError
from progsvc.wire import parse_flat_graph

from sgrefine.dataio import edit_tuple_to_record
from sgrefine.edits import as_edit_tuple
from sgrefine.graph import parse_graph

from support_service import FIXTURES


def _write_rows(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


class TestExportSupervision:
    def test_empty_edits_give_zero_targets(self, tmp_path):
        src = tmp_path / "edits.jsonl"
        _write_rows(
            src,
            [
                {
                    "id": "a",
                    "caption": "A cat on a mat.",
                    "initial_graph": "( cat , on , mat )",
                    "delete": [],
                    "insert": [],
                }
            ],
        )
        out = tmp_path / "train.jsonl"
        assert export_supervision(src, out) == 1
        (example,) = [json.loads(l) for l in out.read_text().splitlines()]
        assert example["delete_targets"] == [0]
        assert example["insert_target"] == ""
        assert example["input"] == "A cat on a mat. </s> ( cat , on , mat )"

    def test_figure_case_insertion_target(self, tmp_path):
        initial = parse_graph(
            (FIXTURES / "figure_initial.txt").read_text().strip(), "lenient"
        )
        instances = [
            json.loads(l)
            for l in (FIXTURES / "instances.jsonl").read_text().splitlines()
        ]
        ferry = next(r for r in instances if r["id"] == "ferry-terminal")
        gold = parse_graph(ferry["graph"], "strict")
        row = as_edit_tuple("ferry-terminal", ferry["caption"], initial, gold)
        src = tmp_path / "edits.jsonl"
        _write_rows(src, [edit_tuple_to_record(row)])
        out = tmp_path / "train.jsonl"
        export_supervision(src, out)
        (example,) = [json.loads(l) for l in out.read_text().splitlines()]
        assert "( buildings , near , ferry terminal )" in example["insert_target"]
        assert sum(example["delete_targets"]) == len(row.delete_gt)

    def test_insert_target_round_trips(self, tmp_path):
        src = tmp_path / "edits.jsonl"
        _write_rows(
            src,
            [
                {
                    "id": "a",
                    "caption": "c",
                    "initial_graph": "( cat , on , mat )",
                    "delete": ["( cat , on , mat )"],
                    "insert": ["( dog , under , table )", "( sky , is , blue )"],
                }
            ],
        )
        out = tmp_path / "train.jsonl"
        export_supervision(src, out)
        (example,) = [json.loads(l) for l in out.read_text().splitlines()]
        assert parse_flat_graph(example["insert_target"]) == [
            ("dog", "under", "table"),
            ("sky", "is", "blue"),
        ]
        assert example["delete_targets"] == [1]

    def test_errors_carry_line_numbers(self, tmp_path):
        src = tmp_path / "edits.jsonl"
        _write_rows(
            src,
            [
                {
                    "id": "ok",
                    "caption": "c",
                    "initial_graph": "( a , r , b )",
                    "delete": [],
                    "insert": [],
                },
                {"id": "bad", "caption": "c"},
            ],
        )
        with pytest.raises(SupervisionError, match="line 2"):
            export_supervision(src, tmp_path / "train.jsonl")

    def test_delete_outside_initial_rejected(self, tmp_path):
        src = tmp_path / "edits.jsonl"
        _write_rows(
            src,
            [
                {
                    "id": "a",
                    "caption": "c",
                    "initial_graph": "( a , r , b )",
                    "delete": ["( x , y , z )"],
                    "insert": [],
                }
            ],
        )
        with pytest.raises(SupervisionError, match="line 1"):
            export_supervision(src, tmp_path / "train.jsonl")
