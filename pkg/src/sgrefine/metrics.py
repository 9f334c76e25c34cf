"""Graph similarity scoring: exact/synonym triple F1 and the soft embedding
variants (directed soft score and its symmetric harmonic mean)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import SceneGraph, Triple


@dataclass
class SynonymLexicon:
    """Synonym classes over entity strings.

    Overlapping classes are merged on load, so membership is symmetric,
    reflexive, and transitive.
    """

    sets: List[frozenset] = field(default_factory=list)
    _class_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        merged: List[set] = []
        for s in self.sets:
            s = set(s)
            overlapping = [m for m in merged if m & s]
            for m in overlapping:
                s |= m
                merged.remove(m)
            merged.append(s)
        self.sets = [frozenset(m) for m in merged]
        self._class_of = {}
        for i, m in enumerate(self.sets):
            for member in m:
                self._class_of[member] = i

    @classmethod
    def empty(cls) -> "SynonymLexicon":
        return cls([])

    @classmethod
    def load(cls, path) -> "SynonymLexicon":
        """One synonym class per line, members tab-separated."""
        sets = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                members = [m.strip() for m in line.rstrip("\n").split("\t") if m.strip()]
                if members:
                    sets.append(frozenset(members))
        return cls(sets)

    def same(self, a: str, b: str) -> bool:
        if a == b:
            return True
        ca = self._class_of.get(a)
        return ca is not None and ca == self._class_of.get(b)


@dataclass
class ScoreReport:
    """Metric outputs with match diagnostics.

    ``f1`` is the harmonic mean of precision and recall (0 when both are 0);
    ``bsspice`` is the harmonic mean of the two directed soft scores.
    """

    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    soft_forward: Optional[float] = None
    soft_backward: Optional[float] = None
    bsspice: Optional[float] = None
    matched_pairs: List[Tuple[Triple, Triple]] = field(default_factory=list)


# An embedding port maps a phrase to a unit-norm vector of fixed dimension.
EmbeddingPort = Callable[[str], np.ndarray]

_EMBED_DIM = 2048


def _token_bucket(token: str) -> int:
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % _EMBED_DIM


def default_embedder() -> EmbeddingPort:
    """Deterministic hashed token-count embedder.

    Bag-of-tokens: order-free, stable across runs, L2-normalized.  The empty
    phrase maps to the zero vector (cosine 0 against anything).  An external
    provider with the same signature can replace it.
    """

    def embed(phrase: str) -> np.ndarray:
        vec = np.zeros(_EMBED_DIM)
        for token in phrase.split():
            vec[_token_bucket(token)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    return embed


def _harmonic(a: float, b: float) -> float:
    if a + b == 0:
        return 0.0
    return 2 * a * b / (a + b)


def triples_match(pred: Triple, gold: Triple, lex: SynonymLexicon) -> bool:
    """Entity slots match exactly or as synonym-class co-members; the
    relation must match exactly."""
    return (
        pred.relation == gold.relation
        and lex.same(pred.subject, gold.subject)
        and lex.same(pred.object, gold.object)
    )


def spice(
    pred: SceneGraph, gold: SceneGraph, lex: Optional[SynonymLexicon] = None
) -> ScoreReport:
    """Triple-overlap F1 with synonym matching on entity slots.

    The intersection size is a maximum bipartite matching, so each gold
    triple is consumed at most once even under overlapping synonym classes.
    Conventions: both graphs empty -> F1 = 1; exactly one empty -> F1 = 0.
    """
    lex = lex or SynonymLexicon.empty()
    if len(pred) == 0 and len(gold) == 0:
        return ScoreReport(precision=1.0, recall=1.0, f1=1.0)
    if len(pred) == 0 or len(gold) == 0:
        return ScoreReport()

    compat = np.zeros((len(pred), len(gold)), dtype=float)
    for i, p in enumerate(pred.triples):
        for j, g in enumerate(gold.triples):
            if triples_match(p, g, lex):
                compat[i, j] = 1.0
    rows, cols = linear_sum_assignment(compat, maximize=True)
    pairs = [
        (pred.triples[i], gold.triples[j])
        for i, j in zip(rows, cols)
        if compat[i, j] > 0
    ]
    matched = len(pairs)
    precision = matched / len(pred)
    recall = matched / len(gold)
    return ScoreReport(
        precision=precision,
        recall=recall,
        f1=_harmonic(precision, recall),
        matched_pairs=pairs,
    )


def soft_spice_directed(
    src: SceneGraph, dst: SceneGraph, emb: Optional[EmbeddingPort] = None
) -> float:
    """Mean over source triples of the best clamped cosine against any
    destination triple, on space-joined triple phrases."""
    emb = emb or default_embedder()
    if len(src) == 0 and len(dst) == 0:
        return 1.0
    if len(src) == 0 or len(dst) == 0:
        return 0.0
    src_vecs = np.stack([emb(t.phrase()) for t in src.triples])
    dst_vecs = np.stack([emb(t.phrase()) for t in dst.triples])
    sims = np.clip(src_vecs @ dst_vecs.T, 0.0, None)
    return float(np.mean(np.max(sims, axis=1)))


def bsspice(
    g1: SceneGraph, g2: SceneGraph, emb: Optional[EmbeddingPort] = None
) -> float:
    """Harmonic mean of the two directed soft scores; 0 if either is 0."""
    emb = emb or default_embedder()
    return _harmonic(soft_spice_directed(g1, g2, emb), soft_spice_directed(g2, g1, emb))


def score_graphs(
    pred: SceneGraph,
    gold: SceneGraph,
    lex: Optional[SynonymLexicon] = None,
    emb: Optional[EmbeddingPort] = None,
) -> ScoreReport:
    """Full report: exact/synonym F1 plus both soft directions."""
    emb = emb or default_embedder()
    report = spice(pred, gold, lex)
    report.soft_forward = soft_spice_directed(pred, gold, emb)
    report.soft_backward = soft_spice_directed(gold, pred, emb)
    report.bsspice = _harmonic(report.soft_forward, report.soft_backward)
    return report
