"""Command line entry point for the synthesis service."""

from __future__ import annotations

import argparse
import logging
import os
import socket
import sys
from pathlib import Path
from typing import Optional, Sequence

import uvicorn

from synthlab.errors import BindError, DataDirError, IngestError
from synthlab.ingest import IngestConfig, ingest_into_session, load_fixture
from synthlab.service import DEFAULT_DATA_DIR, DEFAULT_LISTEN, ServiceConfig, create_app

log = logging.getLogger("synthlab")


def parse_listen(value: str) -> tuple[str, int]:
    host, sep, port_text = value.rpartition(":")
    if not sep or not host:
        raise BindError(f"listen address must be host:port, got {value!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise BindError(f"listen address has a non-numeric port: {value!r}") from None
    if not 0 < port < 65536:
        raise BindError(f"listen port out of range: {port}")
    return host, port


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthlab",
        description="Run the knowledge-synthesis session service.",
    )
    parser.add_argument(
        "--listen",
        default=os.environ.get("SYNTHLAB_LISTEN", DEFAULT_LISTEN),
        help="host:port to serve on (default: %(default)s)",
    )
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("SYNTHLAB_DATA_DIR", DEFAULT_DATA_DIR),
        help="directory holding session logs and snapshots (default: %(default)s)",
    )
    parser.add_argument(
        "--fixture",
        default=None,
        help="wire-record JSON file preloaded into a fresh session on first boot",
    )
    parser.add_argument(
        "--snapshot-every",
        type=int,
        default=100,
        help="write a state snapshot every N events (default: %(default)s)",
    )
    return parser


def preload_fixture(manager, fixture_path: str) -> Optional[str]:
    """Load wire records into a fresh session on first boot.

    Skipped (returns None) when the data directory already has sessions, so
    restarting with --fixture never duplicates the corpus.
    """
    if manager.sessions or manager.quarantined:
        log.info("data dir already has sessions; skipping fixture preload")
        return None
    annotations = load_fixture(fixture_path)
    session = manager.create_session("local", [])
    with manager.locked(session.id) as live:
        ingest_into_session(live, annotations, origin="fixture")
    log.info(
        "preloaded session %s with %d annotations from %s",
        session.id,
        len(session.annotations),
        fixture_path,
    )
    return session.id


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        host, port = parse_listen(args.listen)
        config = ServiceConfig(
            listen=args.listen,
            data_dir=Path(args.data_dir),
            ingest=IngestConfig.from_env(),
            snapshot_every=args.snapshot_every,
        )
        app = create_app(config)
    except (BindError, DataDirError, ValueError) as exc:
        print(f"synthlab: {exc}", file=sys.stderr)
        return 2

    if args.fixture:
        try:
            preload_fixture(app.state.manager, args.fixture)
        except IngestError as exc:
            print(f"synthlab: {exc}", file=sys.stderr)
            return 2

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        print(f"synthlab: cannot bind {args.listen}: {exc}", file=sys.stderr)
        return 2

    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
