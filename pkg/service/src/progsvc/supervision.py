"""Materialize model training files from edit-supervision JSONL.

Input rows: {"id", "caption", "initial_graph", "delete": [units], "insert":
[units]}.  Output rows pair one encoder input with two targets::

    {"id",
     "input": caption + " </s> " + flattened initial graph,
     "delete_targets": [0/1, ...] aligned to the initial graph order,
     "insert_target": flattened string of the missing triples ("" when none)}

Training itself (multitask deletion/insertion losses) is out of scope here.
"""

from __future__ import annotations

import json
from typing import Dict, List

from .wire import parse_flat_graph, serialize_flat_graph


class SupervisionError(ValueError):
    """Input rows failed validation; message carries line numbers."""


def _row_to_example(record: Dict, line_no: int) -> Dict:
    for required in ("id", "caption", "initial_graph", "delete", "insert"):
        if required not in record:
            raise SupervisionError(f"line {line_no}: missing field {required!r}")
    initial = parse_flat_graph(record["initial_graph"])
    deletes = set()
    for unit in record["delete"]:
        parsed = parse_flat_graph(unit)
        if len(parsed) != 1:
            raise SupervisionError(
                f"line {line_no}: delete unit is not a single triple: {unit!r}"
            )
        deletes.add(parsed[0])
    unknown = deletes - set(initial)
    if unknown:
        raise SupervisionError(
            f"line {line_no}: delete targets not present in the initial graph: "
            f"{sorted(unknown)}"
        )
    inserts = []
    for unit in record["insert"]:
        parsed = parse_flat_graph(unit)
        if len(parsed) != 1:
            raise SupervisionError(
                f"line {line_no}: insert unit is not a single triple: {unit!r}"
            )
        inserts.append(parsed[0])
    return {
        "id": record["id"],
        "input": f"{record['caption']} </s> {serialize_flat_graph(initial)}",
        "delete_targets": [1 if t in deletes else 0 for t in initial],
        "insert_target": serialize_flat_graph(inserts),
    }


def export_supervision(edits_path, out_path) -> int:
    """Convert an edit-tuple JSONL file into training examples; returns the
    number of rows written."""
    rows = 0
    with open(edits_path, encoding="utf-8") as fh, open(
        out_path, "w", encoding="utf-8"
    ) as out:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SupervisionError(f"line {line_no}: invalid JSON: {exc}") from exc
            out.write(json.dumps(_row_to_example(record, line_no)) + "\n")
            rows += 1
    return rows
