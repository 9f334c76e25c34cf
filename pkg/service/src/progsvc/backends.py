"""Edit-proposal backends: echo, oracle (gold diff), replay (file), model.

Every backend maps ``(request_id, caption, graph)`` to delete flags aligned
to the request graph plus insertion triples.  The server re-checks both
before responding; backends never see raw wire payloads.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .wire import Triple, clean_triple, parse_flat_graph, serialize_flat_graph

MODES = ("echo", "oracle", "replay", "model")


class BackendNotReady(RuntimeError):
    """The backend cannot serve yet (missing fixtures, model still loading)."""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    """Startup configuration; exactly one mode is active per process.

    ``misalign_flags`` is a fault-injection knob for conformance testing: it
    makes every response drop one delete flag, violating the alignment rule
    on purpose.
    """

    mode: str
    gold_path: Optional[str] = None
    edits_path: Optional[str] = None
    model_id: Optional[str] = None
    device: str = "cpu"
    max_insertion_length: int = 256
    deletion_threshold: float = 0.5
    misalign_flags: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "oracle" and not self.gold_path:
            raise ConfigError("oracle mode requires gold_path")
        if self.mode == "replay" and not self.edits_path:
            raise ConfigError("replay mode requires edits_path")
        if self.mode == "model" and not self.model_id:
            raise ConfigError("model mode requires model_id")
        if not 0.0 <= self.deletion_threshold <= 1.0:
            raise ConfigError("deletion_threshold must be in [0, 1]")


Proposal = Tuple[List[bool], List[Triple]]


class EchoBackend:
    """No-op: keep everything, insert nothing."""

    mode = "echo"
    ready = True

    def propose(self, request_id: str, caption: str, graph: Sequence[Triple]) -> Proposal:
        return [False] * len(graph), []


class OracleBackend:
    """Diff each request graph against the gold graph for its instance id:
    flag exactly the triples absent from gold, insert exactly the gold
    triples absent from the request, in gold order."""

    mode = "oracle"

    def __init__(self, gold_path: str):
        self._gold: Dict[str, List[Triple]] = {}
        with open(gold_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"{gold_path}:{line_no}: invalid JSON: {exc}") from exc
                if "id" not in record or "graph" not in record:
                    continue
                self._gold[record["id"]] = parse_flat_graph(record["graph"])
        if not self._gold:
            raise ConfigError(f"{gold_path}: no usable gold graphs")
        self.ready = True

    def propose(self, request_id: str, caption: str, graph: Sequence[Triple]) -> Proposal:
        base_id = request_id.split("#")[0]
        gold = self._gold.get(request_id, self._gold.get(base_id))
        if gold is None:
            raise KeyError(f"no gold graph for instance {request_id!r}")
        gold_set = set(gold)
        request_set = set(graph)
        flags = [t not in gold_set for t in graph]
        inserts = [t for t in gold if t not in request_set]
        return flags, inserts


class ReplayBackend:
    """Serve pre-recorded edit tuples keyed by request id.  Delete sets are
    re-aligned to the request graph order; insertions already present in the
    request graph are dropped."""

    mode = "replay"

    def __init__(self, edits_path: str):
        self._rows: Dict[str, dict] = {}
        with open(edits_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                row = {
                    "delete": {
                        t for u in record.get("delete", []) for t in parse_flat_graph(u)
                    },
                    "insert": [
                        t for u in record.get("insert", []) for t in parse_flat_graph(u)
                    ],
                }
                self._rows.setdefault(record["id"], row)
                self._rows.setdefault(record["id"].split("#")[0], row)
        if not self._rows:
            raise ConfigError(f"{edits_path}: no edit tuples")
        self.ready = True

    def propose(self, request_id: str, caption: str, graph: Sequence[Triple]) -> Proposal:
        row = self._rows.get(request_id)
        if row is None:
            raise KeyError(f"no recorded edits for request {request_id!r}")
        request_set = set(graph)
        flags = [t in row["delete"] for t in graph]
        inserts = [t for t in row["insert"] if t not in request_set]
        return flags, inserts


class ModelBackend:
    """Seq2seq edit model: the encoder yields per-triple keep/delete
    probabilities (thresholded), the decoder generates a flattened insertion
    string that is parsed leniently with malformed units dropped.

    The backend stays not-ready (the server answers 503) until a checkpoint
    with both the seq2seq weights and the deletion head loads successfully.
    Inference is serialized with a lock so a single accelerator is never hit
    concurrently.
    """

    mode = "model"

    def __init__(self, model_id: str, device: str, threshold: float, max_length: int):
        self.model_id = model_id
        self.device = device
        self.threshold = threshold
        self.max_length = max_length
        self.ready = False
        self._lock = threading.Lock()
        self._tokenizer = None
        self._model = None
        self._deletion_head = None

    def load(self):
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._tokenizer = AutoTokenizer.from_pretrained(self.model_id)
        self._model = AutoModelForSeq2SeqLM.from_pretrained(self.model_id).to(self.device)
        self._model.eval()
        head_path = f"{self.model_id}/deletion_head.pt"
        self._deletion_head = torch.load(head_path, map_location=self.device)
        self.ready = True

    def propose(self, request_id: str, caption: str, graph: Sequence[Triple]) -> Proposal:
        if not self.ready:
            raise BackendNotReady(f"model {self.model_id!r} is not loaded")
        import torch

        with self._lock, torch.no_grad():
            flags = [
                self._delete_probability(caption, t) >= self.threshold for t in graph
            ]
            inserts = self._generate_insertions(caption, graph)
        request_set = set(graph)
        return flags, [t for t in inserts if t not in request_set]

    def _encode(self, text: str):
        return self._tokenizer(
            text, return_tensors="pt", truncation=True, max_length=self.max_length
        ).to(self.device)

    def _delete_probability(self, caption: str, triple: Triple) -> float:
        import torch

        inputs = self._encode(f"{caption} </s> {serialize_flat_graph([triple])}")
        hidden = self._model.get_encoder()(**inputs).last_hidden_state.mean(dim=1)
        logit = hidden @ self._deletion_head["weight"].T + self._deletion_head["bias"]
        return torch.sigmoid(logit).item()

    def _generate_insertions(self, caption: str, graph: Sequence[Triple]) -> List[Triple]:
        inputs = self._encode(f"{caption} </s> {serialize_flat_graph(graph)}")
        output = self._model.generate(**inputs, max_new_tokens=self.max_length)
        text = self._tokenizer.decode(output[0], skip_special_tokens=True)
        return parse_flat_graph(text)


def build_backend(config: BackendConfig):
    if config.mode == "echo":
        return EchoBackend()
    if config.mode == "oracle":
        return OracleBackend(config.gold_path)
    if config.mode == "replay":
        return ReplayBackend(config.edits_path)
    return ModelBackend(
        config.model_id, config.device, config.deletion_threshold, config.max_insertion_length
    )
