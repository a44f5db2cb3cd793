# cli.py
import argparse
import sys
from pathlib import Path

import yaml
from pydantic import ValidationError

from analysis.errors import DomainError
from experiments.commands import COMMANDS
from experiments.config import load_config
from utils.config import get_settings
from utils.logger import configure_logging, get_logger

__version__ = "1.0.0"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

logger = get_logger(__name__)


def status(message: str) -> None:
    """Human-facing progress line; never part of a result file."""
    print(message, file=sys.stderr)


class PoUWApp:
    def __init__(self):
        self.settings = get_settings()
        configure_logging(self.settings.log_level)

    def run(self, args: argparse.Namespace) -> int:
        """Load the experiment, run the command and map failures to exit codes."""
        overrides = {
            "out": args.out,
            "format": args.format,
            "seed": args.seed,
            "rounds": getattr(args, "rounds", None),
            "jobs": args.jobs,
        }
        try:
            config = load_config(args.config, overrides, command=args.command)
        except ValidationError as e:
            status(f"invalid experiment config:\n{e}")
            return EXIT_CONFIG
        except yaml.YAMLError as e:
            status(f"cannot parse experiment file: {e}")
            return EXIT_CONFIG
        except DomainError as e:
            status(f"invalid experiment config ({e.field}): {e}")
            return EXIT_CONFIG

        status(f"Running {args.command} ...")
        try:
            written = COMMANDS[args.command](config, self.settings)
        except DomainError as e:
            status(f"invalid value ({e.field}): {e}")
            return EXIT_CONFIG
        except Exception as e:
            logger.debug("command failed", exc_info=True)
            status(f"Error: {e}")
            return EXIT_FAILURE

        for path in written:
            status(f"Wrote {path}")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cli.py",
        description="Security analysis and simulation of optimization-based proof of useful work",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Commands:
  analyze   coefficients, payoffs and every security verdict at one point
  simulate  Monte-Carlo mining runs next to the analytic payoffs
  sweep     cartesian sweep over lambda_s and eta, p0 or the linear slope
  region    selfishness and maliciousness boundaries per eta

Experiments are YAML files (see configs/); flags override the file.
Environment: POUW_JOBS, POUW_LOG_LEVEL, POUW_SEED (a .env file is read too).

Usage:
  python cli.py analyze --config configs/reference_point.yaml --format json
  python cli.py simulate --config configs/constant_reward_point.yaml --rounds 1000000
  python cli.py sweep --config configs/eta_threshold.yaml --out out/eta_threshold.csv --jobs 4
  python cli.py region --config configs/secure_region.yaml
        """,
    )
    parser.add_argument("--version", action="version", version=f"PoUW security toolkit v{__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment YAML file")
    common.add_argument("--out", help="output path (overrides output.path)")
    common.add_argument("--format", choices=["csv", "json"], help="output format (overrides output.format)")
    common.add_argument("--seed", type=int, help="master seed, 64-bit unsigned")
    common.add_argument("--jobs", type=int, help="worker processes (default POUW_JOBS)")

    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("analyze", parents=[common], help="analyze one parameter point")
    simulate = subparsers.add_parser("simulate", parents=[common], help="simulate mining runs")
    simulate.add_argument("--rounds", type=int, help="rounds per run (overrides simulation.rounds)")
    sweep = subparsers.add_parser("sweep", parents=[common], help="sweep a parameter grid")
    sweep.add_argument("--rounds", type=int, help="rounds per simulated grid point")
    subparsers.add_parser("region", parents=[common], help="secure-region boundaries")
    return parser


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        app = PoUWApp()
    except ValueError as e:
        status(f"invalid environment: {e}")
        return EXIT_CONFIG
    return app.run(args)


if __name__ == "__main__":
    sys.exit(main())
