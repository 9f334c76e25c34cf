"""Iterative graph refinement: programmer ports propose edits, the
deterministic interpreter applies them, for a fixed number of rounds."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import requests

from .edits import (
    EditActions,
    FlagLengthMismatch,
    apply_edits,
    derive_edits,
    validate_insertions,
)
from .graph import DEFAULT_POLICY, SceneGraph
from .merge import Instance

# A programmer port proposes edits for the current graph given the caption.
ProgrammerPort = Callable[[SceneGraph, str], EditActions]


class ProgrammerUnavailable(RuntimeError):
    """Transport failure after bounded retries."""


class ProgrammerProtocolError(RuntimeError):
    """Response violated the wire schema or the flag-alignment rule."""


@dataclass(frozen=True)
class RefinementConfig:
    iterations: int = 2
    stop_on_empty_edits: bool = True
    record_trace: bool = True

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class TraceStep:
    graph: SceneGraph
    deletes_proposed: int = 0
    deletes_applied: int = 0
    inserts_proposed: int = 0
    inserts_accepted: int = 0
    inserts_rejected: int = 0
    wall_time: float = 0.0


@dataclass
class RefinementTrace:
    """Per-step snapshots; step 0 is the initial graph.  ``degraded`` marks
    runs where the programmer failed mid-way and the last good graph was
    returned."""

    steps: List[TraceStep] = field(default_factory=list)
    degraded: bool = False

    def __len__(self) -> int:
        return len(self.steps)


def refine(
    inst: Instance,
    y0: SceneGraph,
    cfg: RefinementConfig,
    programmer: ProgrammerPort,
) -> tuple:
    """Run up to ``cfg.iterations`` propose/apply rounds starting from ``y0``.

    Early-exits when the programmer proposes zero edits (if enabled).  If the
    programmer becomes unavailable mid-run, the last successful graph is
    returned with the trace marked degraded.
    """
    trace = RefinementTrace(steps=[TraceStep(graph=y0)])
    current = y0
    for _ in range(cfg.iterations):
        t0 = time.monotonic()
        try:
            actions = programmer(current, inst.caption)
        except ProgrammerUnavailable:
            trace.degraded = True
            break
        try:
            next_graph = apply_edits(current, actions)
        except FlagLengthMismatch as exc:
            raise ProgrammerProtocolError(str(exc)) from exc
        applied = sum(actions.delete_flags)
        accepted = len(next_graph.triple_set() - current.triple_set())
        step = TraceStep(
            graph=next_graph,
            deletes_proposed=sum(actions.delete_flags),
            deletes_applied=applied,
            inserts_proposed=len(actions.insertions),
            inserts_accepted=accepted,
            inserts_rejected=len(actions.insertions) - accepted,
            wall_time=time.monotonic() - t0,
        )
        trace.steps.append(step)
        applied_edits = applied + accepted
        current = next_graph
        if cfg.stop_on_empty_edits and applied_edits == 0:
            break
    if not cfg.record_trace:
        trace = RefinementTrace(steps=[trace.steps[-1]], degraded=trace.degraded)
    return current, trace


_STOP_WORDS = frozenset(
    "a an the of in on at to and or with is are be this that these those "
    "its it his her their there".split()
)


def heuristic_programmer(g: SceneGraph, caption: str) -> EditActions:
    """Deterministic non-neural baseline: flag duplicates under default
    normalization and triples with zero caption token support.

    A triple is caption-supported when any non-stopword token of its subject
    or object occurs in the caption.  Proposes no insertions.
    """
    caption_tokens = {
        tok.strip(".,!?;:\"'()").lower() for tok in caption.split()
    }
    seen = set()
    flags = []
    for t in g.triples:
        canon = DEFAULT_POLICY.normalize_triple(t)
        if canon in seen:
            flags.append(True)
            continue
        seen.add(canon)
        support_tokens = [
            tok
            for fieldval in (canon.subject, canon.object)
            for tok in fieldval.split()
            if tok not in _STOP_WORDS
        ]
        supported = any(tok in caption_tokens for tok in support_tokens)
        # Numeric-free fields ("group of") fall back to full-field search.
        if not supported and not support_tokens:
            supported = True
        flags.append(not supported)
    return EditActions(tuple(flags), (), flagged_triples=g.triples)


class OracleProgrammer:
    """Programmer that sees the gold graph: proposes exactly the derived
    ground-truth edits.  Converges in one iteration."""

    def __init__(self, gold: SceneGraph):
        self.gold = gold

    def __call__(self, g: SceneGraph, caption: str) -> EditActions:
        return derive_edits(g, self.gold)


class ReplayProgrammer:
    """Replays recorded edits: one action set per call, then no-ops."""

    def __init__(self, actions_by_step: List[EditActions]):
        self._queue = list(actions_by_step)

    def __call__(self, g: SceneGraph, caption: str) -> EditActions:
        if self._queue:
            actions = self._queue.pop(0)
            if len(actions.delete_flags) != len(g.triples):
                raise ProgrammerProtocolError(
                    f"replayed {len(actions.delete_flags)} flags for "
                    f"{len(g.triples)} triples"
                )
            return actions
        return EditActions(tuple(False for _ in g.triples), ())


class RemoteProgrammer:
    """HTTP programmer client for the edit wire protocol.

    POST {endpoint}/v1/edits with ``{"id", "caption", "graph": [[s,r,o],..]}``
    and expects ``{"delete": [bool,..], "insert": [[s,r,o],..]}`` with the
    delete list aligned to graph order.  Retries idempotently with backoff.
    """

    def __init__(
        self,
        endpoint: str,
        instance_id: str = "",
        retries: int = 3,
        backoff: float = 0.25,
        timeout: float = 30.0,
        session: Optional[requests.Session] = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.instance_id = instance_id
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()

    def __call__(self, g: SceneGraph, caption: str) -> EditActions:
        payload = {
            "id": self.instance_id,
            "caption": caption,
            "graph": [[t.subject, t.relation, t.object] for t in g.triples],
        }
        body = self._post(payload)
        return self._parse_response(body, g)

    def _post(self, payload: Dict) -> Dict:
        last_error: Optional[Exception] = None
        for attempt in range(self.retries):
            try:
                resp = self.session.post(
                    f"{self.endpoint}/v1/edits", json=payload, timeout=self.timeout
                )
                resp.raise_for_status()
                return resp.json()
            except (requests.ConnectionError, requests.Timeout, requests.HTTPError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        raise ProgrammerUnavailable(f"{self.endpoint}: {last_error}")

    def _parse_response(self, body: Dict, g: SceneGraph) -> EditActions:
        if not isinstance(body, dict) or "delete" not in body or "insert" not in body:
            raise ProgrammerProtocolError(f"malformed response body: {body!r}")
        flags = body["delete"]
        if not isinstance(flags, list) or not all(isinstance(f, bool) for f in flags):
            raise ProgrammerProtocolError("delete flags must be a list of booleans")
        if len(flags) != len(g.triples):
            raise ProgrammerProtocolError(
                f"{len(flags)} delete flags for {len(g.triples)} triples"
            )
        accepted, _rejected = validate_insertions(body["insert"])
        return EditActions(tuple(flags), tuple(accepted), flagged_triples=g.triples)

    def health(self) -> Dict:
        resp = self.session.get(f"{self.endpoint}/v1/health", timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()
