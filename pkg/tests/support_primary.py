"""Shared test helpers: fixture paths and random graph generators."""

import random
from pathlib import Path

from sgrefine.graph import SceneGraph, Triple

FIXTURES = Path(__file__).parent / "fixtures"

_SUBJECTS = "cat dog man woman boat tree bird car house bridge sky cloud flag railing pier".split()
_RELATIONS = ["on", "under", "near", "hold", "wear", "walk on", "fly over", "next to"]
_OBJECTS = "mat window hat cup lake park street ocean wall roof door fence bench path grass".split()


def random_triple(rng: random.Random) -> Triple:
    return Triple(rng.choice(_SUBJECTS), rng.choice(_RELATIONS), rng.choice(_OBJECTS))


def random_graph(rng: random.Random, min_size=0, max_size=12) -> SceneGraph:
    n = rng.randint(min_size, max_size)
    return SceneGraph.from_triples(random_triple(rng) for _ in range(n))
