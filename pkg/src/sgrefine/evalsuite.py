"""Downstream evaluation: rank correlations, pairwise agreement, paired
hallucination accuracy, error-annotation tallies, corpus statistics, lexical
diversity, and TF-IDF selection/retrieval."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from .graph import SceneGraph
from .merge import Instance
from .metrics import SynonymLexicon, bsspice, spice


class DegenerateInput(ValueError):
    """Statistic undefined for this input (constant list, zero factors, ...)."""


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class RankedPair:
    """Aligned metric and reference score lists."""

    metric_scores: Tuple[float, ...]
    reference_scores: Tuple[float, ...]

    def __post_init__(self):
        if len(self.metric_scores) != len(self.reference_scores):
            raise ValueError("score lists must have equal length")
        if len(self.metric_scores) < 2:
            raise ValueError("need at least 2 score pairs")


@dataclass(frozen=True)
class DFoilItem:
    """A hallucinated/corrected caption-graph pair against one reference."""

    id: str
    hallucinated_caption_graph: SceneGraph
    corrected_caption_graph: SceneGraph
    reference_graph: SceneGraph


@dataclass(frozen=True)
class ErrorAnnotation:
    """Presence/absence flags for the four discourse error categories."""

    id: str
    cross_sentence_coreference: bool = False
    long_range_dependency: bool = False
    implicit_inference: bool = False
    graph_coherence: bool = False


def _check_not_constant(pairs: RankedPair):
    for name, values in (
        ("metric_scores", pairs.metric_scores),
        ("reference_scores", pairs.reference_scores),
    ):
        if len(set(values)) == 1:
            raise DegenerateInput(f"{name} is constant; correlation undefined")


def kendall_tau_b(pairs: RankedPair) -> float:
    """Kendall's tau with tie corrections (the tau-b variant)."""
    _check_not_constant(pairs)
    tau, _ = stats.kendalltau(pairs.metric_scores, pairs.reference_scores, variant="b")
    return float(tau)


def spearman_rho(pairs: RankedPair) -> float:
    """Spearman's rho: Pearson correlation of average-rank vectors."""
    _check_not_constant(pairs)
    rho, _ = stats.spearmanr(pairs.metric_scores, pairs.reference_scores)
    return float(rho)


def pairwise_agreement(
    preferences: Sequence[Tuple[float, float]],
) -> Tuple[float, int]:
    """Fraction of (winner, loser) score pairs where the winner scores
    strictly higher.  Ties count as incorrect and are tallied separately."""
    if not preferences:
        return 0.0, 0
    correct = sum(1 for w, l in preferences if w > l)
    ties = sum(1 for w, l in preferences if w == l)
    return correct / len(preferences), ties


def dfoil_accuracy(
    items: Sequence[DFoilItem],
    scorer: str = "spice",
    lex: SynonymLexicon = None,
) -> Tuple[float, int]:
    """Accuracy at ranking the corrected graph strictly above the
    hallucinated one against the reference.  Ties are incorrect."""
    if scorer == "spice":
        score: Callable = lambda g, ref: spice(g, ref, lex).f1
    elif scorer == "bsspice":
        score = bsspice
    else:
        raise ValueError(f"unknown scorer {scorer!r}")
    pairs = [
        (
            score(item.corrected_caption_graph, item.reference_graph),
            score(item.hallucinated_caption_graph, item.reference_graph),
        )
        for item in items
    ]
    return pairwise_agreement(pairs)


def error_rates(annotations: Sequence[ErrorAnnotation]) -> Dict[str, float]:
    """Percentage of instances flagged per category.  An error type counts
    once per instance regardless of how often it occurs."""
    categories = (
        "cross_sentence_coreference",
        "long_range_dependency",
        "implicit_inference",
        "graph_coherence",
    )
    n = len(annotations)
    if n == 0:
        return {c: 0.0 for c in categories}
    return {
        c: 100.0 * sum(1 for a in annotations if getattr(a, c)) / n for c in categories
    }


@dataclass(frozen=True)
class CorpusStats:
    """One stats-table row over a corpus of instances."""

    n_instances: int
    avg_len: float
    avg_triples: float
    avg_objects: float
    avg_relations: float
    total_triples: int


def _instance_objects(g: SceneGraph) -> set:
    """Distinct entity strings: subject/object slots of relation triples
    plus subjects of attribute triples."""
    objects = set()
    for t in g.triples:
        if t.is_attribute:
            objects.add(t.subject)
        else:
            objects.add(t.subject)
            objects.add(t.object)
    return objects


def corpus_stats(instances: Sequence[Instance]) -> CorpusStats:
    if not instances:
        return CorpusStats(0, 0.0, 0.0, 0.0, 0.0, 0)
    lens, trps, objs, rels = [], [], [], []
    total = 0
    for inst in instances:
        g = inst.gold_graph or SceneGraph()
        lens.append(len(inst.caption.split()))
        trps.append(len(g))
        objs.append(len(_instance_objects(g)))
        rels.append(len({t.relation for t in g.triples if not t.is_attribute}))
        total += len(g)
    n = len(instances)
    return CorpusStats(
        n_instances=n,
        avg_len=sum(lens) / n,
        avg_triples=sum(trps) / n,
        avg_objects=sum(objs) / n,
        avg_relations=sum(rels) / n,
        total_triples=total,
    )


def mattr(tokens: Sequence[str], window: int = 50) -> float:
    """Moving-average type/token ratio over all windows of the given size;
    plain TTR when the text is shorter than the window."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if not tokens:
        raise EmptyInput("no tokens")
    if len(tokens) < window:
        return len(set(tokens)) / len(tokens)
    counts = Counter(tokens[:window])
    ratios = [len(counts) / window]
    for i in range(window, len(tokens)):
        out, new = tokens[i - window], tokens[i]
        counts[out] -= 1
        if counts[out] == 0:
            del counts[out]
        counts[new] += 1
        ratios.append(len(counts) / window)
    return sum(ratios) / len(ratios)


def _mtld_factors(tokens: Sequence[str], threshold: float) -> float:
    factors = 0.0
    types = set()
    count = 0
    ttr = 1.0
    for tok in tokens:
        count += 1
        types.add(tok)
        ttr = len(types) / count
        if ttr < threshold:
            factors += 1.0
            types.clear()
            count = 0
            ttr = 1.0
    if count > 0:
        factors += (1.0 - ttr) / (1.0 - threshold)
    return factors


def mtld(tokens: Sequence[str], threshold: float = 0.72) -> float:
    """Mean factor length: tokens consumed before the running TTR drops
    below the threshold, averaged over forward and reversed passes."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if not tokens:
        raise EmptyInput("no tokens")
    values = []
    for seq in (list(tokens), list(reversed(tokens))):
        factors = _mtld_factors(seq, threshold)
        if factors > 0:
            values.append(len(seq) / factors)
    if not values:
        raise DegenerateInput("running TTR never drops below threshold in either pass")
    return sum(values) / len(values)


def _tokenize(text: str) -> List[str]:
    return text.lower().split()


def _tfidf_matrix(docs: Sequence[str]) -> Tuple[np.ndarray, Dict[str, int]]:
    """Term-frequency x smoothed idf (log((N+1)/(df+1)) + 1), L2-normalized
    rows."""
    vocab: Dict[str, int] = {}
    token_lists = []
    for doc in docs:
        toks = _tokenize(doc)
        token_lists.append(toks)
        for tok in toks:
            vocab.setdefault(tok, len(vocab))
    n_docs = len(docs)
    df = np.zeros(len(vocab))
    for toks in token_lists:
        for tok in set(toks):
            df[vocab[tok]] += 1
    idf = np.log((n_docs + 1) / (df + 1)) + 1
    mat = np.zeros((n_docs, len(vocab)))
    for i, toks in enumerate(token_lists):
        for tok, c in Counter(toks).items():
            j = vocab[tok]
            mat[i, j] = c * idf[j]
        norm = np.linalg.norm(mat[i])
        if norm > 0:
            mat[i] /= norm
    return mat, vocab


def _embed_query(query: str, vocab: Dict[str, int], n_docs: int, df: np.ndarray) -> np.ndarray:
    vec = np.zeros(len(vocab))
    for tok, c in Counter(_tokenize(query)).items():
        j = vocab.get(tok)
        if j is not None:
            vec[j] = c * (np.log((n_docs + 1) / (df[j] + 1)) + 1)
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def tfidf_retrieve(query: str, corpus: Sequence[str], k: int = 3) -> List[int]:
    """Top-k corpus indices by TF-IDF cosine similarity to the query.
    Deterministic tie-break by index."""
    if not corpus:
        raise ValueError("corpus is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    mat, vocab = _tfidf_matrix(corpus)
    df = np.zeros(len(vocab))
    for doc in corpus:
        for tok in set(_tokenize(doc)):
            df[vocab[tok]] += 1
    qvec = _embed_query(query, vocab, len(corpus), df)
    sims = mat @ qvec
    order = sorted(range(len(corpus)), key=lambda i: (-sims[i], i))
    return order[: min(k, len(corpus))]


def select_diverse(corpus: Sequence[str], k: int, seed: int = 0) -> List[int]:
    """Greedy farthest-point selection in TF-IDF cosine distance, starting
    from a seeded random document.  Distance ties break by index."""
    if k > len(corpus):
        raise ValueError("k exceeds corpus size")
    if k < 1:
        return []
    mat, _ = _tfidf_matrix(corpus)
    n = len(corpus)
    rng = random.Random(seed)
    selected = [rng.randrange(n)]
    min_dist = 1.0 - mat @ mat[selected[0]]
    while len(selected) < k:
        min_dist[selected] = -math.inf
        best = int(np.argmax(min_dist))
        selected.append(best)
        min_dist = np.minimum(min_dist, 1.0 - mat @ mat[best])
    return selected
