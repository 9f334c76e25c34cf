"""FastAPI application speaking the programmer wire protocol.

POST /v1/edits  {"id", "caption", "graph": [[s, r, o], ...]}
                -> {"delete": [bool, ...] aligned to graph order,
                    "insert": [[s, r, o], ...]}
GET  /v1/health -> {"status": "ok", "mode": "echo|oracle|replay|model"}

Error mapping: 400 schema violation, 404 unknown instance id (oracle/replay),
503 backend not ready.  The server drops malformed insertion triples itself;
clients are expected to re-validate anyway.
"""

from __future__ import annotations

from typing import List

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import BackendConfig, BackendNotReady, build_backend
from .wire import Triple, clean_triple, normalize_entity, normalize_relation


class EditsRequest(BaseModel):
    id: str
    caption: str
    graph: List[List[str]]


class EditsResponse(BaseModel):
    delete: List[bool]
    insert: List[List[str]] = Field(default_factory=list)


def _request_triple(fields: List[str]) -> Triple:
    """Normalized view of one request unit.  Alignment matters more than
    well-formedness here: a degenerate unit still occupies its position (and
    simply never matches a gold triple)."""
    t = clean_triple(fields)
    if t is not None:
        return t
    padded = (fields + ["", "", ""])[:3]
    return (
        normalize_entity(padded[0]),
        normalize_relation(padded[1]),
        normalize_entity(padded[2]),
    )


def create_app(config: BackendConfig, backend=None) -> FastAPI:
    app = FastAPI(title="programmer-service")
    backend = backend if backend is not None else build_backend(config)
    app.state.backend = backend
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/v1/health")
    def health():
        status = "ok" if getattr(backend, "ready", False) else "loading"
        return {"status": status, "mode": backend.mode}

    @app.post("/v1/edits", response_model=EditsResponse)
    def edits(request: EditsRequest):
        for unit in request.graph:
            if len(unit) != 3:
                return JSONResponse(
                    status_code=400,
                    content={"detail": f"graph unit has arity {len(unit)}, expected 3"},
                )
        graph = [_request_triple(u) for u in request.graph]
        try:
            flags, inserts = backend.propose(request.id, request.caption, graph)
        except BackendNotReady as exc:
            return JSONResponse(status_code=503, content={"detail": str(exc)})
        except KeyError as exc:
            return JSONResponse(status_code=404, content={"detail": str(exc.args[0])})
        inserts = [t for t in (clean_triple(list(i)) for i in inserts) if t is not None]
        if config.misalign_flags:
            flags = flags[:-1]
        return EditsResponse(delete=list(flags), insert=[list(t) for t in inserts])

    return app
