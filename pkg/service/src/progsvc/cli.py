"""Command line entry point: `programmer-service serve|export`."""

from __future__ import annotations

import argparse
import sys

from .backends import BackendConfig, ConfigError, build_backend
from .supervision import SupervisionError, export_supervision


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="programmer-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP edit service")
    p.add_argument("--mode", choices=("echo", "oracle", "replay", "model"), required=True)
    p.add_argument("--gold", help="instance JSONL with gold graphs (oracle mode)")
    p.add_argument("--edits", help="edit-tuple JSONL (replay mode)")
    p.add_argument("--model", help="model checkpoint id or path (model mode)")
    p.add_argument("--device", default="cpu")
    p.add_argument("--deletion-threshold", type=float, default=0.5)
    p.add_argument("--max-insertion-length", type=int, default=256)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument(
        "--fault-misaligned-flags",
        action="store_true",
        help="fault injection: drop one delete flag per response",
    )

    p = sub.add_parser("export", help="write model training files from edit tuples")
    p.add_argument("--edits", required=True)
    p.add_argument("--output", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "export":
        try:
            rows = export_supervision(args.edits, args.output)
        except (SupervisionError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {rows} examples to {args.output}")
        return 0

    import uvicorn

    from .app import create_app

    try:
        config = BackendConfig(
            mode=args.mode,
            gold_path=args.gold,
            edits_path=args.edits,
            model_id=args.model,
            device=args.device,
            deletion_threshold=args.deletion_threshold,
            max_insertion_length=args.max_insertion_length,
            misalign_flags=args.fault_misaligned_flags,
        )
        backend = build_backend(config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if config.mode == "model":
        try:
            backend.load()
        except Exception as exc:  # stay up and answer 503 until a reload
            print(f"model load failed (serving 503): {exc}", file=sys.stderr)
    uvicorn.run(create_app(config, backend), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
