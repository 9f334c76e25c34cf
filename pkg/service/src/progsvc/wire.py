"""Wire-level graph conventions, restated server-side.

The service talks JSON triples ``[s, r, o]`` on the wire but its oracle and
replay backends load fixture files that use the flattened text form
``( s , r , o ) , ( ... )``.  Both representations share the same field
rules: non-empty, no parentheses or commas, whitespace collapsed, lowercase,
with a leading ``v:`` marker stripped from relations.
"""

from __future__ import annotations

import re
from typing import List, Optional, Sequence, Tuple

Triple = Tuple[str, str, str]

_FORBIDDEN = ("(", ")", ",")
_UNIT_RE = re.compile(r"\(([^()]*)\)")


def normalize_entity(s: str) -> str:
    return " ".join(s.split()).lower()


def normalize_relation(s: str) -> str:
    s = normalize_entity(s)
    while s.startswith("v:"):
        s = s[2:].lstrip()
    return s


def clean_triple(fields: Sequence[str]) -> Optional[Triple]:
    """Normalize a candidate triple; None when any field is empty, contains
    delimiter characters, or the arity is wrong."""
    if len(fields) != 3 or any(not isinstance(f, str) for f in fields):
        return None
    s = normalize_entity(fields[0])
    r = normalize_relation(fields[1])
    o = normalize_entity(fields[2])
    for f in (s, r, o):
        if not f or any(ch in f for ch in _FORBIDDEN):
            return None
    return (s, r, o)


def parse_flat_graph(text: str) -> List[Triple]:
    """Lenient parse of the flattened form: well-formed arity-3 units in
    first-seen order, duplicates and malformed units dropped."""
    seen = set()
    triples: List[Triple] = []
    for m in _UNIT_RE.finditer(text):
        t = clean_triple([f for f in m.group(1).split(",")])
        if t is not None and t not in seen:
            seen.add(t)
            triples.append(t)
    return triples


def serialize_unit(t: Triple) -> str:
    return f"( {t[0]} , {t[1]} , {t[2]} )"


def serialize_flat_graph(triples: Sequence[Triple]) -> str:
    return " , ".join(serialize_unit(t) for t in triples)
