"""Triple and scene graph value types, normalization, and the flattened text codec.

The flattened grammar is::

    graph := unit (" , " unit)*
    unit  := "( " field " , " field " , " field " )"
    field := non-empty token sequence without "," "(" ")"

Strict parsing enforces the grammar bit-exactly (this is the form written to
datasets); lenient parsing accepts arbitrary text, keeps every well-formed
arity-3 unit, and routes everything else to ``malformed_units``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

_FORBIDDEN = ("(", ")", ",")

_UNIT_RE = re.compile(r"\(([^()]*)\)")


class StrictParseError(ValueError):
    """Raised when strict parsing hits text that violates the grammar."""

    def __init__(self, position: int, reason: str):
        super().__init__(f"parse error at {position}: {reason}")
        self.position = position
        self.reason = reason


def _clean_field(raw: str) -> str:
    """Trim and collapse internal whitespace."""
    return " ".join(raw.split())


@dataclass(frozen=True)
class Triple:
    """A (subject, relation, object) unit; attribute triples use the
    relation ``is`` or ``has_attribute``."""

    subject: str
    relation: str
    object: str

    def __post_init__(self):
        for name, value in (
            ("subject", self.subject),
            ("relation", self.relation),
            ("object", self.object),
        ):
            if not value:
                raise ValueError(f"empty {name} field")
            if any(ch in value for ch in _FORBIDDEN):
                raise ValueError(f"forbidden character in {name} field: {value!r}")

    @property
    def is_attribute(self) -> bool:
        return self.relation in ("is", "has_attribute")

    def phrase(self) -> str:
        """Space-joined phrase form, used by soft graph similarity."""
        return f"{self.subject} {self.relation} {self.object}"

    def serialize(self) -> str:
        return f"( {self.subject} , {self.relation} , {self.object} )"

    def __str__(self) -> str:
        return self.serialize()


@dataclass(frozen=True)
class NormalizationPolicy:
    """Field normalization knobs.

    ``strip_verb_prefix`` removes a leading ``v:`` marker from relations
    (annotation convention for verb-derived relations).  Normalization is
    idempotent by construction.
    """

    lowercase: bool = True
    collapse_whitespace: bool = True
    strip_verb_prefix: bool = True

    def normalize_entity(self, s: str) -> str:
        if self.collapse_whitespace:
            s = _clean_field(s)
        if self.lowercase:
            s = s.lower()
        return s

    def normalize_relation(self, s: str) -> str:
        s = self.normalize_entity(s)
        if self.strip_verb_prefix:
            while s.startswith("v:"):
                s = s[2:].lstrip()
        return s

    def normalize_triple(self, t: Triple) -> Triple:
        return Triple(
            self.normalize_entity(t.subject),
            self.normalize_relation(t.relation),
            self.normalize_entity(t.object),
        )


DEFAULT_POLICY = NormalizationPolicy()


@dataclass(frozen=True)
class SceneGraph:
    """An insertion-ordered, duplicate-free collection of triples.

    ``malformed_units`` holds raw unit strings rejected during lenient
    parsing (arity != 3 or empty fields).
    """

    triples: tuple = ()
    malformed_units: tuple = ()
    _index: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", frozenset(self.triples))

    @classmethod
    def from_triples(cls, triples: Iterable[Triple], malformed_units=()) -> "SceneGraph":
        """Build a graph, dropping exact duplicates and keeping first-seen order."""
        seen = set()
        ordered = []
        for t in triples:
            if t not in seen:
                seen.add(t)
                ordered.append(t)
        return cls(tuple(ordered), tuple(malformed_units))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._index

    def triple_set(self) -> frozenset:
        return self._index

    def serialize(self) -> str:
        return serialize_graph(self)


def parse_graph(text: str, mode: str = "lenient") -> SceneGraph:
    """Parse a flattened graph string.

    Lenient mode is total: well-formed arity-3 units become triples, every
    other parenthesized unit lands in ``malformed_units``, and text outside
    parentheses is ignored.  Strict mode raises :class:`StrictParseError` on
    any deviation from the grammar.
    """
    if mode == "strict":
        return _parse_strict(text)
    if mode == "lenient":
        return _parse_lenient(text)
    raise ValueError(f"unknown parse mode: {mode!r}")


def _parse_lenient(text: str) -> SceneGraph:
    triples = []
    malformed = []
    for m in _UNIT_RE.finditer(text):
        fields = [_clean_field(f) for f in m.group(1).split(",")]
        if len(fields) == 3 and all(fields):
            triples.append(Triple(*fields))
        else:
            malformed.append(m.group(0))
    return SceneGraph.from_triples(triples, malformed)


def _parse_strict(text: str) -> SceneGraph:
    if text == "":
        return SceneGraph()
    triples = []
    pos = 0
    n = len(text)
    while True:
        if not text.startswith("( ", pos):
            raise StrictParseError(pos, "expected '( ' opening a unit")
        close = text.find(")", pos)
        if close == -1:
            raise StrictParseError(pos, "unterminated unit")
        if text[close - 1] != " ":
            raise StrictParseError(close, "expected ' )' closing a unit")
        body = text[pos + 2 : close - 1]
        fields = body.split(" , ")
        if len(fields) != 3:
            raise StrictParseError(pos, f"unit has {len(fields)} fields, expected 3")
        for f in fields:
            if not f:
                raise StrictParseError(pos, "empty field")
            if f != _clean_field(f):
                raise StrictParseError(pos, f"irregular whitespace in field {f!r}")
            if any(ch in f for ch in _FORBIDDEN):
                raise StrictParseError(pos, f"forbidden character in field {f!r}")
        triples.append(Triple(*fields))
        pos = close + 1
        if pos == n:
            break
        if not text.startswith(" , ", pos):
            raise StrictParseError(pos, "expected ' , ' between units")
        pos += 3
    return SceneGraph.from_triples(triples)


def serialize_graph(g: SceneGraph) -> str:
    """Emit the flattened form; ``parse_graph(serialize_graph(g), "strict")``
    reproduces ``g`` exactly."""
    return " , ".join(t.serialize() for t in g.triples)


def canonicalize(g: SceneGraph, policy: NormalizationPolicy = DEFAULT_POLICY) -> SceneGraph:
    """Normalize every field per policy and dedupe, keeping first occurrence.

    The result is a fixed point: ``canonicalize(canonicalize(g)) ==
    canonicalize(g)``.  Triples whose fields normalize to empty are dropped
    into ``malformed_units``.
    """
    triples = []
    malformed = list(g.malformed_units)
    for t in g.triples:
        try:
            triples.append(policy.normalize_triple(t))
        except ValueError:
            malformed.append(t.serialize())
    return SceneGraph.from_triples(triples, malformed)
