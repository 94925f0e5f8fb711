"""``raileval eval <challenge> --gt ... --pred ...`` batch entry point."""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .dataset_io import CHALLENGES, FormatError, PairingError
from .report import ConfigError, run_eval

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raileval", description="Score benchmark predictions.")
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", help="evaluate a prediction file against ground truth")
    ev.add_argument("challenge", choices=CHALLENGES)
    ev.add_argument("--gt", required=True, type=Path, help="ground-truth JSON Lines file")
    ev.add_argument("--pred", required=True, type=Path, help="prediction JSON Lines file")
    ev.add_argument("--config", type=Path, default=None, help="JSON file overriding defaults")
    ev.add_argument("--out", type=Path, default=None, help="write the report here (default stdout)")
    ev.add_argument("--format", choices=("table", "machine"), default="table")
    ev.add_argument("--threads", type=int, default=1, help="worker threads for per-frame work")
    return parser


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("raileval: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = run_eval(args.challenge, args.gt, args.pred, args.config, args.threads)
        text = report.render(args.format)
    except (FormatError, PairingError, ConfigError) as exc:
        print(f"raileval: schema error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"raileval: I/O error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"raileval: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        if args.out is None:
            sys.stdout.write(text)
        else:
            _write_atomic(args.out, text)
    except OSError as exc:
        print(f"raileval: I/O error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
