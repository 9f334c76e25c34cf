"""Walkthrough: the flattened graph codec and sentence-level merging.

Run from the repository root:  python3 demos/01_parse_and_merge.py
"""

from sgrefine import (
    Instance,
    canonicalize,
    generate_initial,
    parse_graph,
    serialize_graph,
    split_sentences,
)

# --- the flattened text form ------------------------------------------------
# A graph is a list of "( subject , relation , object )" units.  Strict
# parsing is the round-trip codec used for dataset files; lenient parsing
# accepts anything (e.g. model output) and quarantines malformed units.

flat = "( Cat , v:Sits On , the  mat ) , ( image ) , ( sky , is , blue )"
g = canonicalize(parse_graph(flat, "lenient"))
print("parsed:      ", serialize_graph(g))
print("malformed:   ", list(g.malformed_units))
print("round trip ok:", parse_graph(serialize_graph(g), "strict").triples == g.triples)
print()

# --- merging per-sentence parses into an initial graph ----------------------
# Multi-sentence captions are parsed one sentence at a time; the merge is a
# normalized, order-preserving union.  This is the starting point that the
# refinement loop later repairs.

caption = (
    "A black cat sits on a mat. The mat lies near a window. "
    "Sunlight falls on the cat."
)
print("sentences:")
for s in split_sentences(caption):
    print("  -", s)

instance = Instance(
    id="demo",
    caption=caption,
    sentence_graphs=[
        parse_graph("( cat , is , black ) , ( cat , on , mat )"),
        parse_graph("( mat , near , window )"),
        parse_graph("( sunlight , falls on , cat ) , ( cat , on , mat )"),
    ],
)
merged = generate_initial(instance)
print("\nmerged initial graph:")
print(" ", serialize_graph(merged.graph))
print("note: the duplicate ( cat , on , mat ) appears once.")
