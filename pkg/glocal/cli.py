"""Command line entry point: `glocal solve | suite | certify`."""
import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from glocal.coupling.scenarios import make_scenario
from glocal.errors import ConfigValidationError, ConfigurationError, InvalidArgumentError
from glocal.models import TypeSuite
from glocal.runner import load_config, run_scenario, run_suite
from glocal.spectral import certify_paracontraction, spectral_bounds

logger = logging.getLogger(__name__)


def _print_table(df: pd.DataFrame):
    print(df.to_string(index=False))


def _solve(args) -> int:
    config = load_config(args.config)
    summary = run_scenario(config, args.out)
    _print_table(pd.DataFrame([summary.to_row()]))
    return 0 if summary.converged else 2


def _suite(args) -> int:
    table = run_suite(args.name, args.sizes, args.out)
    _print_table(table)
    return 0 if table["converged"].all() else 2


def _certify(args) -> int:
    config = load_config(args.config)
    scenario = make_scenario(config.problem, config.geometry.name, **config.scenario_params())
    omega = args.omega
    if omega is None:
        omega = spectral_bounds(scenario, args.D).default_omega
        logger.info(f"Certifying the default omega={omega:.6g}")
    report = certify_paracontraction(scenario, omega, args.D, args.trials, args.seed, margin=args.margin)
    out_dir = Path(args.out if args.out is not None else config.output.path)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.get_dataframe().to_csv(out_dir / "certificate.csv", index=False)
    print(report)
    return 0 if report.passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glocal",
        description="Global/Local coupling: synchronous and asynchronous interface iterations",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Run one configured scenario",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    solve.add_argument("config", help="Path to the scenario TOML file")
    solve.add_argument("--out", default=None, help="Output directory (overrides [output] path)")
    solve.set_defaults(handler=_solve)

    suite = commands.add_parser("suite", help="Run a comparison suite",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    suite.add_argument("name", choices=[str(s) for s in TypeSuite], help="Suite name")
    suite.add_argument("--sizes", type=int, nargs="+", default=None,
                       help="Cube sizes n (weak-scaling) or refinement seeds (imbalance)")
    suite.add_argument("--out", default=None, help="Output root directory")
    suite.set_defaults(handler=_suite)

    certify = commands.add_parser("certify", help="Sample companion spectral radii for a scenario",
                                  formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    certify.add_argument("config", help="Path to the scenario TOML file")
    certify.add_argument("--omega", type=float, default=None,
                         help="Relaxation (default: 0.9 x the certified async factor)")
    certify.add_argument("--D", type=int, default=2, help="Delay bound")
    certify.add_argument("--trials", type=int, default=100, help="Number of sampled delay partitions")
    certify.add_argument("--seed", type=int, default=0, help="Random seed for the partitions")
    certify.add_argument("--margin", type=float, default=0.0, help="Required distance of rho below 1")
    certify.add_argument("--out", default=None, help="Output directory (overrides [output] path)")
    certify.set_defaults(handler=_certify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigValidationError as e:
        print(e, file=sys.stderr)
        return 1
    except (InvalidArgumentError, ConfigurationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
