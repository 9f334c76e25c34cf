"""Initial-graph generation: sentence splitting and per-sentence graph merging.

Sentence-level parsing is a port, not an implementation: per-sentence graphs
come either precomputed on the instance, or from a file-backed source keyed
by instance id (JSONL records ``{"id": ..., "sentence_graphs": ["( ... )", ...]}``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .graph import (
    DEFAULT_POLICY,
    NormalizationPolicy,
    SceneGraph,
    canonicalize,
    parse_graph,
)


class MissingSentenceGraphs(RuntimeError):
    """Neither precomputed sentence graphs nor a parser port is available."""


@dataclass
class Instance:
    """One caption with optional gold graph and per-sentence graphs."""

    id: str
    caption: str
    sentences: List[str] = field(default_factory=list)
    sentence_graphs: Optional[List[SceneGraph]] = None
    gold_graph: Optional[SceneGraph] = None

    def __post_init__(self):
        if not self.sentences and self.caption:
            self.sentences = split_sentences(self.caption)
        if self.sentence_graphs is not None and len(self.sentence_graphs) != len(self.sentences):
            raise ValueError(
                f"instance {self.id}: {len(self.sentence_graphs)} sentence graphs "
                f"for {len(self.sentences)} sentences"
            )


# Tokens that end with a period without terminating a sentence.  Single-letter
# tokens ("m.", "s.") are guarded by rule, not by list.
_ABBREVIATIONS = frozenset(
    {
        "approx.", "etc.", "e.g.", "i.e.", "cf.", "vs.", "fig.", "no.",
        "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.",
        "inc.", "ltd.", "co.", "dept.", "est.", "min.", "max.",
    }
)

_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s|$)")


def split_sentences(caption: str) -> List[str]:
    """Deterministic rule-based split on terminal punctuation.

    A period does not split when the token it ends is a known abbreviation or
    a single letter (units like "5 m. wide").  A caption with no terminal
    punctuation comes back as one sentence.
    """
    sentences = []
    start = 0
    for m in _BOUNDARY_RE.finditer(caption):
        if m.group().endswith("."):
            word = caption[start : m.end()].rsplit(None, 1)[-1].lower()
            bare = word.lstrip("\"'([")
            if bare in _ABBREVIATIONS or len(bare) == 2:
                continue
        chunk = caption[start : m.end()].strip()
        if chunk:
            sentences.append(chunk)
        start = m.end()
    tail = caption[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences or [caption.strip()]


def merge_graphs(
    graphs: Sequence[SceneGraph],
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> SceneGraph:
    """Union of all triples after canonicalization; identical names are
    treated as co-referent, so duplicates collapse.  First-seen order."""
    triples = []
    malformed = []
    for g in graphs:
        cg = canonicalize(g, policy)
        triples.extend(cg.triples)
        malformed.extend(cg.malformed_units)
    return SceneGraph.from_triples(triples, malformed)


@dataclass
class MergeResult:
    """Merged initial graph plus provenance: triple -> sentence indices
    that produced it."""

    graph: SceneGraph
    provenance: Dict = field(default_factory=dict)


# A parser port maps an instance to its per-sentence graphs.
SentenceParserPort = Callable[[Instance], List[SceneGraph]]


class FileSentenceParser:
    """File-backed parser port reading a sentence-graph fixture JSONL."""

    def __init__(self, path):
        self._graphs = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self._graphs[record["id"]] = [
                    parse_graph(s, "lenient") for s in record["sentence_graphs"]
                ]

    def __call__(self, inst: Instance) -> List[SceneGraph]:
        try:
            return self._graphs[inst.id]
        except KeyError:
            raise MissingSentenceGraphs(f"no sentence graphs on file for id {inst.id!r}")


def generate_initial(
    inst: Instance,
    parser: Optional[SentenceParserPort] = None,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> MergeResult:
    """Build the initial graph by merging per-sentence graphs.

    Uses precomputed ``inst.sentence_graphs`` when present, otherwise the
    parser port.  Provenance records, per merged triple, every sentence index
    whose graph contained it.
    """
    if inst.sentence_graphs is not None:
        graphs = inst.sentence_graphs
    elif parser is not None:
        graphs = parser(inst)
    else:
        raise MissingSentenceGraphs(
            f"instance {inst.id!r} has no sentence graphs and no parser port is configured"
        )
    merged = merge_graphs(graphs, policy)
    provenance: Dict = {t: [] for t in merged.triples}
    for i, g in enumerate(graphs):
        for t in canonicalize(g, policy).triples:
            if t in provenance:
                provenance[t].append(i)
    return MergeResult(graph=merged, provenance=provenance)
