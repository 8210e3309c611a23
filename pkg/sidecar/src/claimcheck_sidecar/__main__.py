"""Run the sidecar: ``python -m claimcheck_sidecar [--port N] [--backend hash]``."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="claimcheck-sidecar")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8320)
    parser.add_argument("--backend", choices=["hash", "transformers"], default="hash")
    parser.add_argument("--embed-dim", type=int, default=384)
    parser.add_argument("--encode-dim", type=int, default=1024)
    parser.add_argument("--record-cache", default=None)
    parser.add_argument("--non-deterministic", action="store_true")
    args = parser.parse_args(argv)
    config = ServiceConfig(
        host=args.host,
        port=args.port,
        backend=args.backend,
        embed_dim=args.embed_dim,
        encode_dim=args.encode_dim,
        record_cache=args.record_cache,
        deterministic=not args.non_deterministic,
    )
    workers = 1 if config.deterministic else None
    uvicorn.run(create_app(config), host=config.host, port=config.port, workers=workers)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
