"""Edit actions: derivation from (initial, gold) pairs, synthetic corruption,
and deterministic application (delete first, then insert)."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

from .graph import SceneGraph, Triple, parse_graph

logger = logging.getLogger(__name__)


class FlagLengthMismatch(ValueError):
    """Delete-flag count does not match the target graph's triple count."""


class EmptyPool(ValueError):
    """Corpus insertion requested but the distractor pool is empty."""


@dataclass(frozen=True)
class EditActions:
    """Per-triple keep/delete flags aligned to a target graph, plus insertions.

    ``flagged_triples``, when present, snapshots the triples the flags refer
    to.  Deletions whose snapshot no longer matches the graph at application
    time (stale edits from a remote programmer) are skipped, not fatal.
    """

    delete_flags: Tuple[bool, ...]
    insertions: Tuple[Triple, ...]
    flagged_triples: Optional[Tuple[Triple, ...]] = None

    @property
    def is_empty(self) -> bool:
        return not any(self.delete_flags) and not self.insertions

    def edit_count(self) -> int:
        return sum(self.delete_flags) + len(self.insertions)


@dataclass(frozen=True)
class EditTuple:
    """One supervision row: caption, initial graph, and the ground-truth
    delete/insert sets relating it to the gold graph."""

    id: str
    caption: str
    initial_graph: SceneGraph
    delete_gt: Tuple[Triple, ...]
    insert_gt: Tuple[Triple, ...]

    def __post_init__(self):
        initial = self.initial_graph.triple_set()
        if not set(self.delete_gt) <= initial:
            raise ValueError(f"{self.id}: delete_gt not a subset of the initial graph")
        if set(self.insert_gt) & initial:
            raise ValueError(f"{self.id}: insert_gt overlaps the initial graph")


@dataclass(frozen=True)
class CorruptionConfig:
    """Knobs for synthetic corruption of gold graphs.

    Defaults: a third of the triples deleted and a third inserted (roughly
    the deletion load observed in merged initial parses), 15 variants per
    gold graph.
    """

    n_variants: int = 15
    delete_fraction: float = 1 / 3
    insert_fraction: float = 1 / 3
    insertion_pool: str = "corpus"  # "corpus" | "perturb"
    seed: int = 0

    def __post_init__(self):
        if self.n_variants < 1:
            raise ValueError("n_variants must be >= 1")
        for name in ("delete_fraction", "insert_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.insertion_pool not in ("corpus", "perturb"):
            raise ValueError(f"unknown insertion_pool {self.insertion_pool!r}")


def derive_edits(initial: SceneGraph, gold: SceneGraph) -> EditActions:
    """Ground-truth edits: flag exactly the triples present in the initial
    graph but not in gold; insert exactly gold minus initial (gold order).

    Applying the result to ``initial`` yields ``gold``.
    """
    gold_set = gold.triple_set()
    initial_set = initial.triple_set()
    flags = tuple(t not in gold_set for t in initial.triples)
    inserts = tuple(t for t in gold.triples if t not in initial_set)
    return EditActions(flags, inserts, flagged_triples=initial.triples)


def as_edit_tuple(
    instance_id: str, caption: str, initial: SceneGraph, gold: SceneGraph
) -> EditTuple:
    """EditTuple view of ``derive_edits`` for dataset rows."""
    actions = derive_edits(initial, gold)
    deletes = tuple(t for t, f in zip(initial.triples, actions.delete_flags) if f)
    return EditTuple(instance_id, caption, initial, deletes, actions.insertions)


def apply_edits(g: SceneGraph, a: EditActions) -> SceneGraph:
    """Delete-first-then-insert: remove flagged triples, then union the
    insertions (deduped against survivors).  Deterministic."""
    if len(a.delete_flags) != len(g.triples):
        raise FlagLengthMismatch(
            f"{len(a.delete_flags)} delete flags for {len(g.triples)} triples"
        )
    survivors = []
    for i, (t, flagged) in enumerate(zip(g.triples, a.delete_flags)):
        if flagged and a.flagged_triples is not None and a.flagged_triples[i] != t:
            logger.warning("stale delete flag at index %d (%s); skipping", i, t)
            survivors.append(t)
        elif not flagged:
            survivors.append(t)
    return SceneGraph.from_triples(list(survivors) + list(a.insertions), g.malformed_units)


def validate_insertions(raw) -> Tuple[List[Triple], List[str]]:
    """Split raw insertion output into well-formed triples and rejects.

    Accepts a flattened string, a list of unit strings, or a list of
    [s, r, o] field sequences.  Total: never raises.
    """
    accepted: List[Triple] = []
    rejected: List[str] = []

    def _take(text: str):
        g = parse_graph(text, "lenient")
        accepted.extend(g.triples)
        rejected.extend(f"{u}: wrong arity or empty field" for u in g.malformed_units)

    if isinstance(raw, str):
        _take(raw)
    else:
        for item in raw:
            if isinstance(item, str):
                _take(item)
            else:
                fields = [str(f).strip() for f in item]
                if len(fields) == 3 and all(fields):
                    try:
                        accepted.append(Triple(*fields))
                    except ValueError as exc:
                        rejected.append(f"{fields}: {exc}")
                else:
                    rejected.append(f"{fields}: wrong arity or empty field")
    return accepted, rejected


def corrupt(
    gold: SceneGraph,
    cfg: CorruptionConfig,
    pool: Optional[Sequence[SceneGraph]] = None,
) -> List[SceneGraph]:
    """Produce ``cfg.n_variants`` corrupted copies of a gold graph.

    Each variant removes ``round(delete_fraction * |gold|)`` uniformly chosen
    triples and adds ``round(insert_fraction * |gold|)`` distractors not in
    gold.  Fully determined by (gold, cfg, pool): variant ``i`` draws from a
    substream seeded with ``cfg.seed ^ i``.
    """
    if len(gold) == 0:
        raise ValueError("gold graph is empty")
    pool_triples: List[Triple] = []
    if cfg.insertion_pool == "corpus":
        gold_set = gold.triple_set()
        seen: Set[Triple] = set()
        for g in pool or ():
            for t in g.triples:
                if t not in gold_set and t not in seen:
                    seen.add(t)
                    pool_triples.append(t)
        if not pool_triples and cfg.insert_fraction > 0:
            raise EmptyPool("corpus insertion requested with an empty distractor pool")

    n_delete = int(round(cfg.delete_fraction * len(gold)))
    n_insert = int(round(cfg.insert_fraction * len(gold)))

    variants = []
    for i in range(cfg.n_variants):
        rng = random.Random(cfg.seed ^ i)
        keep = set(range(len(gold)))
        for idx in rng.sample(sorted(keep), n_delete):
            keep.discard(idx)
        triples = [t for j, t in enumerate(gold.triples) if j in keep]
        if n_insert:
            if cfg.insertion_pool == "corpus":
                k = min(n_insert, len(pool_triples))
                if k < n_insert:
                    logger.warning(
                        "distractor pool exhausted: %d of %d insertions", k, n_insert
                    )
                triples.extend(rng.sample(pool_triples, k))
            else:
                triples.extend(_perturb_distractors(gold, n_insert, rng))
        variants.append(SceneGraph.from_triples(triples))
    return variants


def _perturb_distractors(gold: SceneGraph, n: int, rng: random.Random) -> List[Triple]:
    """Distractors made by swapping one field of a gold triple with a token
    drawn from the gold graph's own vocabulary."""
    tokens = sorted({f for t in gold.triples for f in (t.subject, t.object)})
    gold_set = gold.triple_set()
    out: List[Triple] = []
    made: Set[Triple] = set()
    attempts = 0
    while len(out) < n and attempts < 50 * n:
        attempts += 1
        base = gold.triples[rng.randrange(len(gold))]
        slot = rng.choice(("subject", "relation", "object"))
        token = tokens[rng.randrange(len(tokens))]
        fields = {
            "subject": base.subject,
            "relation": base.relation,
            "object": base.object,
        }
        fields[slot] = token
        cand = Triple(fields["subject"], fields["relation"], fields["object"])
        if cand not in gold_set and cand not in made:
            made.add(cand)
            out.append(cand)
    return out
