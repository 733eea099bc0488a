"""Command line entry point: ``plrg <experiment> [flags]`` or ``plrg run --config FILE``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import PLRGError
from .harness import EXIT_CONFIG, EXPERIMENTS, ExperimentConfig, run


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _default_seed() -> int:
    raw = os.environ.get("PLRG_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plrg", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--check", action="store_true", help="exit 3 when an acceptance check fails")
    common.add_argument("--threads", type=int, default=1)

    r = sub.add_parser("run", parents=[common], help="run an experiment from a JSON config")
    r.add_argument("--config", required=True)

    for name in EXPERIMENTS:
        e = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        e.add_argument("--alpha", type=float, default=2.0)
        e.add_argument("--gamma", type=_floats, default=[1.5], help="comma list")
        e.add_argument("--n", type=_ints, default=[1000], help="comma list")
        e.add_argument("--reps", type=int, default=1000)
        e.add_argument("--seed", type=int, default=_default_seed(), help="default: $PLRG_SEED or 0")
        e.add_argument("--grid", type=_floats, default=[0.25, 0.5, 0.75], help="x grid, comma list")
        e.add_argument("--method", choices=("plain", "importance"), default="plain")
        e.add_argument("--x0", type=float, default=4.0, help="graphex threshold")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_json(args.config)
            cfg.output_dir = args.out if args.out != "out" else cfg.output_dir
            cfg.threads = max(cfg.threads, args.threads)
        else:
            cfg = ExperimentConfig(
                experiment=args.command, alpha=args.alpha, gamma=tuple(args.gamma), n_list=tuple(args.n),
                reps=args.reps, seed=args.seed, x_grid=tuple(args.grid), output_dir=args.out,
                threads=args.threads, method=args.method, x0=args.x0,
            )
    except (PLRGError, TypeError, ValueError) as exc:
        print(f"plrg: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, check=args.check or cfg.check)


if __name__ == "__main__":
    sys.exit(main())
