import itertools
import random

import numpy as np
import pytest

from sgrefine.graph import SceneGraph, Triple
from sgrefine.metrics import (
    SynonymLexicon,
    bsspice,
    default_embedder,
    score_graphs,
    soft_spice_directed,
    spice,
    triples_match,
)

from support_primary import FIXTURES, random_graph


def graph(*units):
    return SceneGraph.from_triples(Triple(*u) for u in units)


def brute_force_f1(pred, gold, lex):
    """Exhaustive maximum matching: enumerate all injective pred->gold
    assignments.  Only viable for graphs with <= 6 triples."""
    if len(pred) == 0 and len(gold) == 0:
        return 1.0
    if len(pred) == 0 or len(gold) == 0:
        return 0.0
    best = 0
    gold_idx = range(len(gold.triples))
    for size in range(min(len(pred), len(gold)), 0, -1):
        for pred_sub in itertools.combinations(range(len(pred.triples)), size):
            for gold_perm in itertools.permutations(gold_idx, size):
                if all(
                    triples_match(pred.triples[i], gold.triples[j], lex)
                    for i, j in zip(pred_sub, gold_perm)
                ):
                    best = size
                    break
            if best == size:
                break
        if best == size:
            break
    p = best / len(pred)
    r = best / len(gold)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


class TestSpice:
    def test_identity(self):
        g = graph(("a", "r", "b"), ("c", "s", "d"), ("e", "t", "f"), ("g", "u", "h"))
        report = spice(g, g)
        assert report.precision == report.recall == report.f1 == 1.0

    def test_half_recall(self):
        gold = graph(("a", "r", "b"), ("c", "s", "d"), ("e", "t", "f"), ("g", "u", "h"))
        pred = graph(("a", "r", "b"), ("c", "s", "d"))
        report = spice(pred, gold)
        assert report.precision == 1.0
        assert report.recall == 0.5
        assert report.f1 == pytest.approx(2 / 3)

    def test_synonym_match(self):
        lex = SynonymLexicon([frozenset({"person", "human"})])
        pred = graph(("person", "hold", "cup"))
        gold = graph(("human", "hold", "cup"))
        assert spice(pred, gold, lex).f1 == 1.0

    def test_relation_must_match_exactly(self):
        lex = SynonymLexicon([frozenset({"hold", "carry"})])
        pred = graph(("person", "hold", "cup"))
        gold = graph(("person", "carry", "cup"))
        assert spice(pred, gold, lex).f1 == 0.0

    def test_empty_conventions(self):
        g = graph(("a", "r", "b"))
        assert spice(SceneGraph(), SceneGraph()).f1 == 1.0
        assert spice(g, SceneGraph()).f1 == 0.0
        assert spice(SceneGraph(), g).f1 == 0.0

    def test_symmetry(self):
        rng = random.Random(13)
        for _ in range(50):
            a, b = random_graph(rng), random_graph(rng)
            assert spice(a, b).f1 == pytest.approx(spice(b, a).f1)

    def test_matches_brute_force(self):
        rng = random.Random(21)
        lex = SynonymLexicon([frozenset({"cat", "dog"}), frozenset({"mat", "hat"})])
        for _ in range(100):
            pred = random_graph(rng, 0, 6)
            gold = random_graph(rng, 0, 6)
            expected = brute_force_f1(pred, gold, lex)
            assert spice(pred, gold, lex).f1 == pytest.approx(expected, abs=1e-9)

    def test_overlapping_synonyms_no_double_count(self):
        # Both pred triples can only match the single gold triple once.
        lex = SynonymLexicon([frozenset({"cat", "kitten", "feline"})])
        pred = graph(("cat", "on", "mat"), ("kitten", "on", "mat"))
        gold = graph(("feline", "on", "mat"))
        report = spice(pred, gold, lex)
        assert report.precision == 0.5
        assert report.recall == 1.0

    def test_lexicon_load_merges_overlaps(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("a\tb\nb\tc\n", encoding="utf-8")
        lex = SynonymLexicon.load(path)
        assert lex.same("a", "c")

    def test_monotone_repair(self):
        rng = random.Random(31)
        for _ in range(200):
            gold = random_graph(rng, 1, 8)
            pred = random_graph(rng, 0, 8)
            base = spice(pred, gold).f1
            missing = [t for t in gold.triples if t not in pred.triple_set()]
            if missing:
                grown = SceneGraph.from_triples(list(pred.triples) + [missing[0]])
                assert spice(grown, gold).f1 >= base
            spurious = [t for t in pred.triples if t not in gold.triple_set()]
            if spurious:
                shrunk = SceneGraph.from_triples(
                    t for t in pred.triples if t != spurious[0]
                )
                assert spice(shrunk, gold).f1 >= base


class TestDefaultEmbedder:
    def test_unit_norm(self):
        emb = default_embedder()
        assert np.linalg.norm(emb("cat on mat")) == pytest.approx(1.0)

    def test_deterministic(self):
        e1, e2 = default_embedder(), default_embedder()
        assert np.array_equal(e1("red hat on pier"), e2("red hat on pier"))

    def test_bag_is_order_free(self):
        emb = default_embedder()
        assert float(emb("red hat") @ emb("hat red")) == pytest.approx(1.0)

    def test_empty_phrase_is_zero(self):
        emb = default_embedder()
        assert np.linalg.norm(emb("")) == 0.0


class TestSoftScores:
    def test_self_similarity(self):
        g = graph(("a", "r", "b"), ("c", "s", "d"))
        assert soft_spice_directed(g, g) == pytest.approx(1.0)

    def test_token_disjoint_graphs(self):
        src = graph(("cat", "on", "mat"))
        dst = graph(("boat", "near", "pier"))
        assert soft_spice_directed(src, dst) == pytest.approx(0.0)

    def test_subset_scores_one(self):
        dst = graph(("a", "r", "b"), ("c", "s", "d"), ("e", "t", "f"))
        src = graph(("a", "r", "b"), ("c", "s", "d"))
        assert soft_spice_directed(src, dst) == pytest.approx(1.0)

    def test_empty_conventions(self):
        g = graph(("a", "r", "b"))
        assert soft_spice_directed(SceneGraph(), SceneGraph()) == 1.0
        assert soft_spice_directed(g, SceneGraph()) == 0.0
        assert soft_spice_directed(SceneGraph(), g) == 0.0

    def test_bsspice_identity_and_symmetry(self):
        rng = random.Random(17)
        g = random_graph(rng, 1, 6)
        assert bsspice(g, g) == pytest.approx(1.0)
        for _ in range(50):
            a, b = random_graph(rng), random_graph(rng)
            assert bsspice(a, b) == pytest.approx(bsspice(b, a), abs=1e-9)

    def test_harmonic_mean_arithmetic(self):
        # forward 1.0, backward 0.5 -> 2/3: strict subset of half the size.
        dst = graph(("a", "r", "b"), ("c", "s", "d"))
        src = graph(("a", "r", "b"))
        assert soft_spice_directed(src, dst) == pytest.approx(1.0)
        backward = soft_spice_directed(dst, src)
        forward = soft_spice_directed(src, dst)
        expected = 2 * forward * backward / (forward + backward)
        assert bsspice(src, dst) == pytest.approx(expected, abs=1e-12)

    def test_score_graphs_full_report(self):
        pred = graph(("a", "r", "b"))
        gold = graph(("a", "r", "b"), ("c", "s", "d"))
        report = score_graphs(pred, gold)
        assert report.f1 == pytest.approx(2 / 3)
        assert report.soft_forward == pytest.approx(1.0)
        assert 0.0 <= report.bsspice <= 1.0

    def test_external_provider_keeps_invariants(self):
        rng = np.random.default_rng(0)
        table = {}

        def provider(phrase):
            if phrase not in table:
                v = rng.normal(size=64)
                table[phrase] = v / np.linalg.norm(v)
            return table[phrase]

        g = graph(("a", "r", "b"), ("c", "s", "d"))
        assert soft_spice_directed(g, g, provider) == pytest.approx(1.0)
        h = graph(("e", "t", "f"))
        assert 0.0 <= bsspice(g, h, provider) <= 1.0
