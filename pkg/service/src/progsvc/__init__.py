"""HTTP service hosting pluggable edit-proposal backends behind the
programmer wire protocol (POST /v1/edits, GET /v1/health).

This package deliberately does not import the client-side toolkit: the wire
protocol is the only shared contract, so the few graph conventions it needs
(flattened unit strings, field normalization) are restated locally in
:mod:`progsvc.wire`.
"""

from .backends import BackendConfig, BackendNotReady, build_backend
from .app import create_app
from .supervision import export_supervision

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "BackendNotReady",
    "build_backend",
    "create_app",
    "export_supervision",
    "__version__",
]
