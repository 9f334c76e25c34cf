"""Walkthrough: edit derivation, synthetic corruption, and iterative repair.

Run from the repository root:  python3 demos/02_edit_refinement.py
"""

from sgrefine import (
    CorruptionConfig,
    Instance,
    OracleProgrammer,
    RefinementConfig,
    apply_edits,
    corrupt,
    derive_edits,
    heuristic_programmer,
    parse_graph,
    refine,
    serialize_graph,
    spice,
)

gold = parse_graph(
    "( cat , is , black ) , ( cat , on , mat ) , ( mat , near , window )"
)
noisy = parse_graph(
    "( cat , on , mat ) , ( dog , under , table ) , ( cat , is , black )"
)
instance = Instance(id="demo", caption="A black cat sits on a mat near a window.")

# --- ground-truth edits -----------------------------------------------------
# derive_edits flags exactly initial-minus-gold and inserts gold-minus-initial;
# apply_edits deletes first, then inserts, so applying the derived edits always
# reconstructs the gold graph.

actions = derive_edits(noisy, gold)
print("delete flags:", list(actions.delete_flags))
print("insertions:  ", [str(t) for t in actions.insertions])
repaired = apply_edits(noisy, actions)
print("repaired == gold:", repaired.triple_set() == gold.triple_set())
print()

# --- synthetic corruption ---------------------------------------------------
# Training data for edit models comes from corrupting gold graphs: drop a
# fraction of triples, inject distractors from other instances' graphs.

pool = [parse_graph("( boat , on , lake ) , ( bird , above , water )")]
cfg = CorruptionConfig(n_variants=3, seed=7)
for i, variant in enumerate(corrupt(gold, cfg, pool)):
    print(f"variant {i}: {serialize_graph(variant)}")
print()

# --- the refinement loop ----------------------------------------------------
# Each iteration asks a programmer for edits and applies them.  The oracle
# programmer (gold diff) converges in one step; the heuristic programmer only
# prunes triples unsupported by the caption.

final, trace = refine(instance, noisy, RefinementConfig(iterations=1), OracleProgrammer(gold))
print("oracle refine, SPICE:", f"{100 * spice(final, gold).f1:.1f}")

final, trace = refine(instance, noisy, RefinementConfig(iterations=2), heuristic_programmer)
print("heuristic refine:", serialize_graph(final))
print("SPICE before/after:", f"{100 * spice(noisy, gold).f1:.1f}",
      "->", f"{100 * spice(final, gold).f1:.1f}")
