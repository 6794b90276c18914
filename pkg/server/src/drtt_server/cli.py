"""Command line for the model server.

Examples:
    drtt-model-server --role translator-fwd --model Helsinki-NLP/opus-mt-zh-en
    drtt-model-server --role mmlm --stub fixtures/session.jsonl --reorder-window 4
    drtt-model-server --role tmlm --model xlm-roberta-base --listen 127.0.0.1:9001
"""

from __future__ import annotations

import argparse
import sys

from .server import ROLES, ServerConfig, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drtt-model-server", description=__doc__)
    parser.add_argument("--role", required=True, choices=ROLES)
    parser.add_argument("--model", default="", help="model identifier for the real backend")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=16)
    parser.add_argument(
        "--listen", default="", help="host:port for TCP; default serves stdio"
    )
    parser.add_argument(
        "--stub", default="", help="fixture JSONL; answer from it instead of a model"
    )
    parser.add_argument(
        "--reorder-window",
        type=int,
        default=1,
        help="flush responses in reverse within windows of this size",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ServerConfig(
            role=args.role,
            model_id=args.model,
            device=args.device,
            max_batch=args.max_batch,
            listen=args.listen,
            stub_fixture=args.stub,
            reorder_window=args.reorder_window,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        serve(config)
    except KeyboardInterrupt:
        pass
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
