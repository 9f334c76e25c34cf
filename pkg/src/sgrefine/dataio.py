"""Canonical on-disk formats: instance JSONL, edit-supervision JSONL,
per-dataset manifests, and the eval-file readers.

Instance JSONL record::

    {"id", "caption", "sentences": [..]?, "graph": flattened?, "sentence_graphs": [..]?}

Edit-supervision JSONL record (this file IS the edit dataset artifact)::

    {"id", "caption", "initial_graph": flattened, "delete": [units], "insert": [units]}
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

from .edits import CorruptionConfig, EditTuple, apply_edits, as_edit_tuple, corrupt, derive_edits
from .graph import (
    DEFAULT_POLICY,
    SceneGraph,
    StrictParseError,
    canonicalize,
    parse_graph,
    serialize_graph,
)
from .merge import Instance, MissingSentenceGraphs, generate_initial

FORMAT_VERSION = "1.0"


class DataError(ValueError):
    """A dataset file failed validation; message carries line numbers."""


class DuplicateId(DataError):
    pass


@dataclass
class DatasetManifest:
    name: str
    splits: Dict[str, int]
    normalization_policy: str = "default"
    format_version: str = FORMAT_VERSION

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        version = data.get("format_version", "")
        if version.split(".")[0] != FORMAT_VERSION.split(".")[0]:
            raise DataError(f"unsupported format version {version!r}")
        return cls(**data)


def _parse_record_graph(raw: str, line_no: int, field_name: str) -> SceneGraph:
    try:
        return canonicalize(parse_graph(raw, "strict"), DEFAULT_POLICY)
    except StrictParseError as exc:
        raise DataError(f"line {line_no}: bad {field_name}: {exc}") from exc


def load_instances(path, fail_fast: bool = True) -> List[Instance]:
    """Load and validate an instance JSONL file.

    Graphs are parsed strictly and canonicalized; ids must be unique;
    sentences are auto-split when absent.  With ``fail_fast`` off, bad lines
    are skipped and collected into the raised error only at the end if all
    lines fail.
    """
    instances: List[Instance] = []
    ids_seen: Dict[str, int] = {}
    errors: List[str] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                instances.append(_load_instance_line(line, line_no, ids_seen))
            except DataError as exc:
                if fail_fast:
                    raise
                errors.append(str(exc))
    if errors and not instances:
        raise DataError("; ".join(errors))
    return instances


def _load_instance_line(line: str, line_no: int, ids_seen: Dict[str, int]) -> Instance:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"line {line_no}: invalid JSON: {exc}") from exc
    for required in ("id", "caption"):
        if required not in record:
            raise DataError(f"line {line_no}: missing field {required!r}")
    inst_id = record["id"]
    if inst_id in ids_seen:
        raise DuplicateId(
            f"line {line_no}: duplicate id {inst_id!r} (first seen on line {ids_seen[inst_id]})"
        )
    ids_seen[inst_id] = line_no
    gold = None
    if record.get("graph") is not None:
        gold = _parse_record_graph(record["graph"], line_no, "graph")
    sentence_graphs = None
    if record.get("sentence_graphs") is not None:
        sentence_graphs = [
            canonicalize(parse_graph(s, "lenient"), DEFAULT_POLICY)
            for s in record["sentence_graphs"]
        ]
    try:
        return Instance(
            id=inst_id,
            caption=record["caption"],
            sentences=record.get("sentences") or [],
            sentence_graphs=sentence_graphs,
            gold_graph=gold,
        )
    except ValueError as exc:
        raise DataError(f"line {line_no}: {exc}") from exc


def save_instances(instances: Sequence[Instance], path):
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            record = {"id": inst.id, "caption": inst.caption, "sentences": inst.sentences}
            if inst.gold_graph is not None:
                record["graph"] = serialize_graph(inst.gold_graph)
            if inst.sentence_graphs is not None:
                record["sentence_graphs"] = [serialize_graph(g) for g in inst.sentence_graphs]
            fh.write(json.dumps(record) + "\n")


def edit_tuple_to_record(t: EditTuple) -> Dict:
    return {
        "id": t.id,
        "caption": t.caption,
        "initial_graph": serialize_graph(t.initial_graph),
        "delete": [tr.serialize() for tr in t.delete_gt],
        "insert": [tr.serialize() for tr in t.insert_gt],
    }


def load_edit_tuples(path) -> List[EditTuple]:
    tuples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            initial = _parse_record_graph(record["initial_graph"], line_no, "initial_graph")
            deletes = tuple(
                _single_triple(u, line_no, "delete") for u in record["delete"]
            )
            inserts = tuple(
                _single_triple(u, line_no, "insert") for u in record["insert"]
            )
            tuples.append(
                EditTuple(record["id"], record["caption"], initial, deletes, inserts)
            )
    return tuples


def _single_triple(unit: str, line_no: int, field_name: str):
    g = _parse_record_graph(unit, line_no, field_name)
    if len(g) != 1:
        raise DataError(f"line {line_no}: {field_name} unit is not a single triple: {unit!r}")
    return g.triples[0]


def build_edit_dataset(
    instances: Sequence[Instance],
    cfg: CorruptionConfig,
    out_path,
    include_merged: bool = True,
    verify_fraction: float = 0.01,
) -> int:
    """Derive and write edit-supervision rows for every gold-bearing instance.

    Per instance: one row from the merged initial graph (when sentence graphs
    exist) plus ``cfg.n_variants`` rows from corrupted gold copies.  A sampled
    fraction of rows is re-checked (apply(derive) == gold) before writing.
    Byte-identical across runs for the same seed and inputs.
    """
    pool = [inst.gold_graph for inst in instances if inst.gold_graph is not None]
    verify_rng = random.Random(cfg.seed)
    rows = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for inst in instances:
            if inst.gold_graph is None:
                raise DataError(f"instance {inst.id!r} has no gold graph")
            initials: List[SceneGraph] = []
            tags: List[str] = []
            if include_merged and inst.sentence_graphs is not None:
                try:
                    initials.append(generate_initial(inst).graph)
                    tags.append("merged")
                except MissingSentenceGraphs:
                    pass
            variant_pool = [g for g in pool if g is not inst.gold_graph]
            for v, variant in enumerate(corrupt(inst.gold_graph, cfg, variant_pool)):
                initials.append(variant)
                tags.append(f"corrupt-{v}")
            for tag, initial in zip(tags, initials):
                row = as_edit_tuple(f"{inst.id}#{tag}", inst.caption, initial, inst.gold_graph)
                if verify_rng.random() < verify_fraction:
                    _verify_row(row, inst.gold_graph)
                fh.write(json.dumps(edit_tuple_to_record(row)) + "\n")
                rows += 1
    return rows


def _verify_row(row: EditTuple, gold: SceneGraph):
    actions = derive_edits(row.initial_graph, gold)
    result = apply_edits(row.initial_graph, actions)
    if result.triple_set() != gold.triple_set():
        raise DataError(f"row {row.id}: derived edits do not reproduce the gold graph")


def load_dfoil(path):
    """D-FOIL JSONL: {"id", "hallucinated_graph", "corrected_graph",
    "reference_graph"} as flattened strings."""
    from .evalsuite import DFoilItem

    items = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            items.append(
                DFoilItem(
                    id=record["id"],
                    hallucinated_caption_graph=_parse_record_graph(
                        record["hallucinated_graph"], line_no, "hallucinated_graph"
                    ),
                    corrected_caption_graph=_parse_record_graph(
                        record["corrected_graph"], line_no, "corrected_graph"
                    ),
                    reference_graph=_parse_record_graph(
                        record["reference_graph"], line_no, "reference_graph"
                    ),
                )
            )
    return items


def load_error_annotations(path):
    """Error-annotation JSONL: {"id", "cross", "long", "implicit", "coherence"}."""
    from .evalsuite import ErrorAnnotation

    annotations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            annotations.append(
                ErrorAnnotation(
                    id=record["id"],
                    cross_sentence_coreference=bool(record.get("cross", False)),
                    long_range_dependency=bool(record.get("long", False)),
                    implicit_inference=bool(record.get("implicit", False)),
                    graph_coherence=bool(record.get("coherence", False)),
                )
            )
    return annotations
