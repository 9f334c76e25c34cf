import itertools
import math
import random

import pytest

from sgrefine.evalsuite import (
    CorpusStats,
    DegenerateInput,
    DFoilItem,
    EmptyInput,
    ErrorAnnotation,
    RankedPair,
    corpus_stats,
    dfoil_accuracy,
    error_rates,
    kendall_tau_b,
    mattr,
    mtld,
    pairwise_agreement,
    select_diverse,
    spearman_rho,
    tfidf_retrieve,
)
from sgrefine.graph import SceneGraph, Triple


def graph(*units):
    return SceneGraph.from_triples(Triple(*u) for u in units)


def brute_tau_b(x, y):
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i, j in itertools.combinations(range(n), 2):
        dx = x[i] - x[j]
        dy = y[i] - y[j]
        if dx == 0 and dy == 0:
            ties_x += 1
            ties_y += 1
        elif dx == 0:
            ties_x += 1
        elif dy == 0:
            ties_y += 1
        elif dx * dy > 0:
            concordant += 1
        else:
            discordant += 1
    n0 = n * (n - 1) / 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    return (concordant - discordant) / denom


def brute_spearman(x, y):
    def ranks(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        result = [0.0] * len(values)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for k in range(i, j + 1):
                result[order[k]] = avg
            i = j + 1
        return result

    rx, ry = ranks(x), ranks(y)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))
    return num / den


class TestRankCorrelations:
    def test_perfect_and_reversed(self):
        x = (1.0, 2.0, 3.0, 4.0)
        assert kendall_tau_b(RankedPair(x, x)) == pytest.approx(1.0)
        assert kendall_tau_b(RankedPair(x, x[::-1])) == pytest.approx(-1.0)
        assert spearman_rho(RankedPair(x, x)) == pytest.approx(1.0)
        assert spearman_rho(RankedPair(x, x[::-1])) == pytest.approx(-1.0)

    def test_against_brute_force(self):
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(3, 8)
            x = tuple(rng.randint(0, 4) * 1.0 for _ in range(n))
            y = tuple(rng.randint(0, 4) * 1.0 for _ in range(n))
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            pair = RankedPair(x, y)
            assert kendall_tau_b(pair) == pytest.approx(brute_tau_b(x, y), abs=1e-12)
            assert spearman_rho(pair) == pytest.approx(brute_spearman(x, y), abs=1e-12)

    def test_degenerate_constant(self):
        with pytest.raises(DegenerateInput):
            kendall_tau_b(RankedPair((1.0, 1.0, 1.0), (1.0, 2.0, 3.0)))
        with pytest.raises(DegenerateInput):
            spearman_rho(RankedPair((1.0, 2.0), (5.0, 5.0)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            RankedPair((1.0,), (1.0, 2.0))


class TestPairwiseAgreement:
    def test_ties_count_against(self):
        # winner scores strictly higher twice, ties once, loses once
        pairs = [(0.9, 0.1), (0.5, 0.5), (0.2, 0.8), (0.7, 0.3)]
        acc, ties = pairwise_agreement(pairs)
        assert acc == pytest.approx(0.5)
        assert ties == 1

    def test_empty(self):
        assert pairwise_agreement([]) == (0.0, 0)


class TestDFoil:
    REF = graph(("cat", "on", "mat"), ("cat", "is", "black"))
    GOOD = graph(("cat", "on", "mat"))
    BAD = graph(("dog", "under", "table"))

    def test_perfect(self):
        items = [DFoilItem(str(i), self.BAD, self.GOOD, self.REF) for i in range(5)]
        for scorer in ("spice", "bsspice"):
            acc, ties = dfoil_accuracy(items, scorer=scorer)
            assert acc == pytest.approx(1.0)
            assert ties == 0

    def test_ties_incorrect(self):
        items = [
            DFoilItem("a", self.GOOD, self.GOOD, self.REF),
            DFoilItem("b", self.BAD, self.GOOD, self.REF),
        ]
        acc, ties = dfoil_accuracy(items)
        assert acc == pytest.approx(0.5)
        assert ties == 1

    def test_unknown_scorer(self):
        with pytest.raises(ValueError):
            dfoil_accuracy([], scorer="bleu")


class TestErrorRates:
    def test_percentages(self):
        anns = [
            ErrorAnnotation("a", cross_sentence_coreference=True, graph_coherence=True),
            ErrorAnnotation("b", cross_sentence_coreference=True, long_range_dependency=True),
            ErrorAnnotation("c"),
            ErrorAnnotation("d", cross_sentence_coreference=True, implicit_inference=True),
        ]
        rates = error_rates(anns)
        assert rates["cross_sentence_coreference"] == pytest.approx(75.0)
        assert rates["long_range_dependency"] == pytest.approx(25.0)
        assert rates["implicit_inference"] == pytest.approx(25.0)
        assert rates["graph_coherence"] == pytest.approx(25.0)

    def test_empty(self):
        assert all(v == 0.0 for v in error_rates([]).values())


class TestCorpusStats:
    def test_frozen_fixture_row(self, fixture_instances):
        stats = corpus_stats(fixture_instances)
        assert stats == CorpusStats(
            n_instances=10,
            avg_len=27.5,
            avg_triples=4.5,
            avg_objects=3.8,
            avg_relations=2.2,
            total_triples=45,
        )

    def test_empty(self):
        assert corpus_stats([]).n_instances == 0


class TestMattr:
    def test_window_one_is_one(self):
        rng = random.Random(3)
        vocab = ["a", "b", "c", "d"]
        for _ in range(50):
            tokens = [rng.choice(vocab) for _ in range(rng.randint(1, 30))]
            assert mattr(tokens, window=1) == pytest.approx(1.0)

    def test_short_text_plain_ttr(self):
        assert mattr(["a", "b", "a"], window=10) == pytest.approx(2 / 3)

    def test_sliding_window(self):
        # windows of size 2 over "a a b": TTRs 1/2, 1 -> mean 3/4
        assert mattr(["a", "a", "b"], window=2) == pytest.approx(0.75)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            mattr([], window=5)


class TestMtld:
    def test_uniform_repetition(self):
        # TTR drops below 0.72 at the 2nd token every time, both directions:
        # 3 factors of length 2 over 6 tokens -> 6/3 = 2.0
        assert mtld(["a"] * 6) == pytest.approx(2.0)

    def test_hand_traced(self):
        # forward over a b a b ...: TTR hits 2/3 < 0.72 at every 3rd token,
        # giving 4 full factors over 12 tokens; the reversed pass is the same
        # sequence shape, so MTLD = 12/4 = 3.0
        assert mtld(["a", "b"] * 6) == pytest.approx(3.0)

    def test_reversal_invariance(self):
        rng = random.Random(9)
        vocab = list("abcdefg")
        for _ in range(50):
            tokens = [rng.choice(vocab) for _ in range(rng.randint(10, 40))]
            try:
                forward = mtld(tokens)
            except DegenerateInput:
                continue
            assert forward == pytest.approx(mtld(list(reversed(tokens))), abs=1e-12)

    def test_all_distinct_degenerate(self):
        with pytest.raises(DegenerateInput):
            mtld(["a", "b", "c", "d", "e", "f"])


class TestRetrieval:
    CORPUS = [
        "the cat sat on the mat",
        "a dog runs in the park",
        "the cat chased the dog",
        "rain falls on the city",
    ]

    def test_exact_match_first(self):
        hits = tfidf_retrieve("cat mat", self.CORPUS, k=2)
        assert hits[0] == 0

    def test_k_clamped_to_corpus(self):
        assert len(tfidf_retrieve("cat", self.CORPUS, k=10)) == 4

    def test_tie_break_by_index(self):
        corpus = ["x y", "x y", "z"]
        assert tfidf_retrieve("x", corpus, k=2) == [0, 1]

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            tfidf_retrieve("x", [], k=1)

    def test_diverse_selection_spreads(self):
        corpus = ["apple fruit", "apple fruit red", "quantum physics", "quantum physics lab"]
        picked = select_diverse(corpus, k=2, seed=0)
        # one document from each topic cluster
        assert {p // 2 for p in picked} == {0, 1}

    def test_diverse_k_too_large(self):
        with pytest.raises(ValueError):
            select_diverse(["a", "b"], k=5, seed=0)

    def test_diverse_deterministic(self):
        assert select_diverse(self.CORPUS, k=3, seed=7) == select_diverse(
            self.CORPUS, k=3, seed=7
        )
