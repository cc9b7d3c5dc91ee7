"""Command-line entry point: ``freejac run <config.json>``."""

from __future__ import annotations

import argparse
import sys

from .harness import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freejac",
        description="Run reproducible spectrum and freeness experiments on "
                    "Haar-orthogonal MLPs.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    runner = sub.add_parser("run", help="execute a JSON experiment config")
    runner.add_argument("config", help="path to the experiment config JSON")
    runner.add_argument("--out", default=None, help="output directory override")
    runner.add_argument("--seed", type=int, default=None, help="seed override")
    runner.add_argument("--threads", type=int, default=None,
                        help="worker threads (falls back to FREEJAC_THREADS)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.config, out_dir=args.out, seed=args.seed, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
