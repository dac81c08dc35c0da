"""Command-line front end.

Exit status: 0 on success, 1 on a domain error, 2 on I/O or config errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .errors import ConfigError, SmheatError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smheat", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", help="write the training dataset CSV")
    sub.add_parser("train", help="train the coarse network, write checkpoint and loss CSV")
    sub.add_parser("run", help="run space-mapping optimization, write history and summary")
    sweep = sub.add_parser("sweep-layers", help="accuracy versus hidden-layer count")
    sweep.add_argument("--layers", default="1,3,8", help="comma-separated hidden-layer counts")
    sub.add_parser("bench-optimizers", help="compare CG and Nelder-Mead on the same data")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = experiments.ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.command == "generate":
            experiments.cmd_generate(cfg)
        elif args.command == "train":
            experiments.cmd_train(cfg)
        elif args.command == "run":
            state = experiments.cmd_run(cfg)
            if not state.converged:
                print("space mapping did not converge", file=sys.stderr)
                return 1
        elif args.command == "sweep-layers":
            try:
                layers = [int(v) for v in args.layers.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --layers value {args.layers!r}") from exc
            experiments.cmd_sweep_layers(cfg, layers)
        elif args.command == "bench-optimizers":
            experiments.cmd_bench_optimizers(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SmheatError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
