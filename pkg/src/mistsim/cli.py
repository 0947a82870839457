"""
``mist-sim`` command-line front end.

    mist-sim <subcommand> --scenario <path|table1> [--figure figNX] [--paper-scale]
             [--entanglement] [--plots] [--snapshots] [--seed N] [--out DIR]

Exit codes: 0 success, 2 scenario or parameter error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from dotenv import load_dotenv

from mistsim.client import MistSimulator
from mistsim.core.config import Config
from mistsim.core.exceptions import MistSimError
from mistsim.core.logging import get_logger
from mistsim.core.types import FigureName, ModelKind
from mistsim.figures import FigureOutput

SUBCOMMANDS = ("spectrum", "reduce", "rates", "steady-scan", "evolve", "figure")

logger = get_logger("cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mist-sim",
        description="Measurement-induced state transition simulations of a driven fluxonium.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--scenario", required=True, help="scenario JSON path or 'table1'")
    parser.add_argument("--figure", choices=[f.value for f in FigureName])
    parser.add_argument(
        "--model",
        action="append",
        choices=[m.value for m in ModelKind],
        help="model for 'evolve' (repeatable; defaults to the scenario's run.models)",
    )
    parser.add_argument("--paper-scale", action="store_true", help="lift desk-scale caps")
    parser.add_argument(
        "--entanglement", action="store_true", default=None, help="append negativity columns"
    )
    parser.add_argument("--plots", action="store_true", default=None, help="render PNG plots")
    parser.add_argument(
        "--snapshots", action="store_true", help="dump reduced density matrices at run.snapshot_times_us"
    )
    parser.add_argument("--fitted", action="store_true", help="'rates': also fit evolutions")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")
    return parser


def _dispatch(sim: MistSimulator, args: argparse.Namespace) -> FigureOutput:
    scenario = sim.load(args.scenario)
    pipeline = sim.pipeline(
        scenario,
        out_dir=args.out,
        paper_scale=args.paper_scale,
        seed=args.seed,
        entanglement=args.entanglement,
        plots=args.plots,
        snapshots=args.snapshots,
    )
    if args.subcommand == "spectrum":
        return pipeline.write_spectrum()
    if args.subcommand == "reduce":
        return pipeline.write_reduce()
    if args.subcommand == "rates":
        return pipeline.write_rates(fitted=args.fitted)
    if args.subcommand == "steady-scan":
        return pipeline.write_steady_scan(scenario.delta_a_grid())
    if args.subcommand == "evolve":
        models = [ModelKind(m) for m in args.model] if args.model else None
        return pipeline.write_evolve(models)
    return pipeline.run_figure(args.figure)


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "figure" and args.figure is None:
        parser.error("the figure subcommand needs --figure")
    try:
        sim = MistSimulator(Config.from_env(), log_level=args.log_level)
        output = _dispatch(sim, args)
    except MistSimError as e:
        logger.debug(f"{type(e).__name__} (exit {e.exit_code})")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    for path in output.files:
        print(path)
    if output.failures:
        logger.warning(f"{output.failures} point(s) failed; see the annotated tables")
    return 0


if __name__ == "__main__":
    sys.exit(main())
