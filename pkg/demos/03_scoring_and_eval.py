"""Walkthrough: graph similarity scoring and the evaluation suite.

Run from the repository root:  python3 demos/03_scoring_and_eval.py
"""

from sgrefine import (
    RankedPair,
    SynonymLexicon,
    bsspice,
    kendall_tau_b,
    mattr,
    mtld,
    parse_graph,
    spearman_rho,
    spice,
    tfidf_retrieve,
)

gold = parse_graph("( cat , on , mat ) , ( cat , is , black )")
pred = parse_graph("( kitten , on , mat ) , ( dog , is , brown )")

# --- SPICE: F1 over bipartite-matched triples -------------------------------
# Entity slots may match through synonym classes; relations must match exactly.

plain = spice(pred, gold)
lex = SynonymLexicon([{"cat", "kitten"}])
with_lex = spice(pred, gold, lex)
print(f"SPICE without lexicon: {100 * plain.f1:.1f}")
print(f"SPICE with cat~kitten: {100 * with_lex.f1:.1f}")

# --- BSSPICE: soft, symmetric similarity ------------------------------------
# Directed mean-of-max cosine over triple phrases, combined by harmonic mean;
# partial wording overlap earns partial credit instead of zero.

print(f"BSSPICE: {100 * bsspice(pred, gold):.1f}")
print()

# --- rank correlations ------------------------------------------------------
# How well a metric's scores order instances the way reference judgments do.

metric_scores = (0.9, 0.4, 0.7, 0.1)
reference = (4.0, 2.0, 3.0, 1.0)
pairs = RankedPair(metric_scores, reference)
print(f"kendall tau-b: {kendall_tau_b(pairs):+.3f}")
print(f"spearman rho:  {spearman_rho(pairs):+.3f}")
print()

# --- lexical diversity ------------------------------------------------------
tokens = "the cat sat on the mat and the dog sat on the rug".split()
print(f"MATTR (window 5): {mattr(tokens, window=5):.3f}")
print(f"MTLD:             {mtld(tokens):.2f}")
print()

# --- TF-IDF retrieval -------------------------------------------------------
corpus = [
    "a cat sleeping on a mat",
    "a ferry terminal at dusk",
    "two dogs running in a park",
]
for i in tfidf_retrieve("sleeping cat", corpus, k=2):
    print("retrieved:", corpus[i])
