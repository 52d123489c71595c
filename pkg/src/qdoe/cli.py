"""Command-line entry point: ``qdoe {sample,estimate,hsic,quantize}``.

Every command reads a JSON config (see :mod:`qdoe.config`); ``--seed`` and
``--out`` override the config before it is hashed, so output headers
always reflect the effective run. Exit codes: 0 success, 2 configuration
error, 3 numerical or domain error. The ``QDOE_LOG`` environment variable
sets the log level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import load_config
from .errors import ConfigError, QdoeError
from .runner import run_estimate, run_hsic, run_quantize, run_sample


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdoe",
        description="Quantization-based stratified designs, estimators and HSIC screening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("sample", "generate a design CSV"),
        ("estimate", "run replicated expectation estimation"),
        ("hsic", "run an HSIC screening with independence tests"),
        ("quantize", "build and persist a quantizer"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="path to the JSON config file")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument(
            "--threads",
            type=int,
            default=os.cpu_count() or 1,
            help="worker threads for repetition loops (default: available parallelism)",
        )
        cmd.add_argument(
            "--shared-quantizer",
            action="store_true",
            help="fit quantizers once and reuse them across repetitions",
        )
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QDOE_LOG", "WARNING").upper())
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config,
            seed_override=args.seed,
            out_override=args.out,
            shared_override=args.shared_quantizer,
        )
        if args.command == "sample":
            run_sample(cfg)
        elif args.command == "estimate":
            run_estimate(cfg, threads=max(1, args.threads))
        elif args.command == "hsic":
            run_hsic(cfg)
        else:
            run_quantize(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QdoeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
