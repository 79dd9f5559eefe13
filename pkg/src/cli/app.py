"""
Command-line front end.

    python main.py curve    --config model.json --out out [--tau 0 1 5 10]
    python main.py simulate --config model.json --out out [--seed N] [--paths N] [--dt X]
    python main.py validate --config model.json --out out [--timings]
    python main.py spde     --config grid.json  --out out --t 0 0.5 1

Exit codes: 0 ok, 1 validation failed, 2 explosion, 64 configuration error.
"""

import argparse
import sys

from rich.console import Console
from rich.markup import escape

from src.cli.commands import cmd_curve, cmd_simulate, cmd_spde, cmd_validate
from src.cli.schemas import apply_overrides, load_model_config
from src.core.config import get_settings
from src.core.constants import ExitCode
from src.core.exceptions import ConfigError, DiscountTSError, ExplosionError
from src.utils.logger import get_logger

logger = get_logger(__name__)
console = Console()
error_console = Console(stderr=True)


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", required=True, help="model configuration (JSON)")
    parser.add_argument("--out", default=None, help="output directory (default: output.directory)")
    parser.add_argument("--seed", type=int, default=None, help="override sim.seed")
    parser.add_argument("--paths", type=int, default=None, help="override sim.n_paths")
    parser.add_argument("--dt", type=float, default=None, help="override sim.dt")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="discount-ts",
        description=f"{settings.app_name} {settings.app_version}: discount-derivative term structures",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    curve = commands.add_parser("curve", help="tabulate h, discount, bond, forward, short rate")
    _common(curve)
    curve.add_argument("--tau", type=float, nargs="+", default=None, help="maturities (years)")

    simulate = commands.add_parser("simulate", help="simulate factor, toy or grid paths")
    _common(simulate)

    validate = commands.add_parser("validate", help="run the validation battery")
    _common(validate)
    validate.add_argument("--timings", action="store_true", help="include runtimes in the report")

    spde = commands.add_parser("spde", help="deterministic curve flow")
    _common(spde)
    spde.add_argument("--t", type=float, nargs="+", required=True, help="times (years)")

    return parser


def run(args: argparse.Namespace) -> int:
    config = apply_overrides(load_model_config(args.config), seed=args.seed, paths=args.paths, dt=args.dt)

    if args.command == "curve":
        cmd_curve(config, args.tau, out=args.out)
    elif args.command == "simulate":
        cmd_simulate(config, out=args.out)
    elif args.command == "validate":
        summary = cmd_validate(config, out=args.out, timings=args.timings)
        console.print(summary.to_table(args.timings))
        if not summary.all_passed:
            return ExitCode.VALIDATION_FAILED
    elif args.command == "spde":
        cmd_spde(config, args.t, out=args.out)
    return ExitCode.OK


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
    except ConfigError as e:
        error_console.print(f"[red]{escape(str(e))}[/red]")
        return int(ExitCode.CONFIG_ERROR)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for explosions
        return int(ExitCode.OK) if e.code == 0 else int(ExitCode.CONFIG_ERROR)
    try:
        return int(run(args))
    except ExplosionError as e:
        error_console.print(f"[red]{escape(str(e))}[/red] (blow-up time {e.time:.6g})")
        return int(ExitCode.EXPLOSION)
    except ConfigError as e:
        error_console.print(f"[red]{escape(str(e))}[/red]")
        return int(ExitCode.CONFIG_ERROR)
    except DiscountTSError as e:
        logger.error(str(e))
        error_console.print(f"[red]{escape(str(e))}[/red]")
        return int(ExitCode.CONFIG_ERROR)


if __name__ == "__main__":
    sys.exit(main())
