"""Command-line entry point for towerforge"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from loguru import logger

from src import TOOL_NAME, __version__
from src.config.settings import settings
from src.db.ledger import record_run
from src.errors import TowerForgeError
from src.experiments.io import dumps
from src.experiments.runner import ExperimentRunner
from src.models.enums import CommandName, DonorPolicy, UniformizeMode
from src.models.schemas import ExperimentConfig
from src.rankone.spec import RankOneSpec, load_spec_file, preset
from src.ui.console import make_console, print_error, print_status, print_table, show_spinner

# Per-command flags: (flag, help)
COMMAND_FLAGS: dict[CommandName, list[tuple[str, str]]] = {
    CommandName.BUILD_TOWER: [("--K", "set K as p/q:r/s,..."), ("--N", "column height floor")],
    CommandName.REFINE_TOWER: [
        ("--K", "set K"),
        ("--N", "height floor of the coarse tower"),
        ("--n", "height floor of the refinement"),
    ],
    CommandName.UNIFORMITY: [
        ("--C", "tested set C"),
        ("--K", "reference set K"),
        ("--eps", "tolerance as p/q"),
        ("--samples", "number of sample points"),
        ("--m-schedule", "hit thresholds, comma-separated"),
    ],
    CommandName.UNIFORMIZE: [
        ("--alpha", "initial partition: atoms separated by ';'"),
        ("--beta", "coarser partition for refining mode"),
        ("--eps", "total d-budget as p/q"),
        ("--steps", "number of steps"),
        ("--mode", "initial or refining"),
        ("--audit-n-max", "join depth of the final uniformity audit"),
        ("--donor-policy", "largest or first good column lends its name in refining mode"),
    ],
    CommandName.SUBSHIFT: [
        ("--alpha", "partition"),
        ("--length", "maximal word length"),
        ("--cylinders", "cylinders u.v, comma-separated"),
    ],
    CommandName.RADON_CHECK: [
        ("--alpha", "partition"),
        ("--length", "maximal word length of the exact model"),
        ("--A", "tested cylinders u.v, comma-separated"),
        ("--eps", "tolerance as p/q"),
        ("--samples", "number of walks"),
    ],
    CommandName.EXPORT_BRATTELI: [("--K", "set K"), ("--levels", "stage depths, comma-separated")],
    CommandName.STATS: [
        ("--C", "tested set C"),
        ("--K", "reference set K"),
        ("--horizons", "horizons, comma-separated"),
        ("--samples", "number of sample points"),
        ("--eps", "tolerance used for the within-fraction"),
    ],
    CommandName.PRESETS: [],
}


def _setup_logging(verbose: bool = False) -> None:
    """Configure logging: stderr sink plus an optional debug file"""
    logger.remove()  # Remove default handler
    logger.add(
        sink=sys.stderr,
        format="{level: <8} | {message}",
        level="DEBUG" if verbose else settings.log_level,
    )
    if settings.log_to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            sink=str(log_dir / f"{TOOL_NAME}.log"),
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
            level="DEBUG",
            rotation="500 MB",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Exact experiments on infinite-measure rank-one systems",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, flags in COMMAND_FLAGS.items():
        p = sub.add_parser(command.value)
        system = p.add_mutually_exclusive_group()
        system.add_argument("--preset", default=None, help="built-in system name")
        system.add_argument("--spec-file", default=None, help="JSON rank-one spec")
        p.add_argument("--depth", type=int, default=settings.default_depth, help="stage depth")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--verbose", action="store_true", help="debug logging on stderr")
        for flag, help_text in flags:
            p.add_argument(flag, default=None, help=help_text)
    return parser


def _load_system(args: argparse.Namespace) -> RankOneSpec:
    if args.spec_file:
        return load_spec_file(Path(args.spec_file))
    return preset(args.preset or "hajian-kakutani", max(args.depth, settings.max_depth))


def _config_from(args: argparse.Namespace) -> ExperimentConfig:
    command = CommandName(args.command)
    names = [flag.lstrip("-").replace("-", "_") for flag, _ in COMMAND_FLAGS[command]]
    params = {name: getattr(args, name) for name in names if getattr(args, name) is not None}
    if command is CommandName.UNIFORMIZE and "mode" in params:
        params["mode"] = UniformizeMode(params["mode"]).value
    if command is CommandName.UNIFORMIZE and "donor_policy" in params:
        params["donor_policy"] = DonorPolicy(params["donor_policy"]).value
    return ExperimentConfig(
        command=command,
        preset=None if args.spec_file else (args.preset or "hajian-kakutani"),
        spec_file=args.spec_file,
        depth=args.depth,
        params=params,
        out_dir=args.out or str(settings.get_output_path()),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point; returns the exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    console = make_console()

    config: Optional[ExperimentConfig] = None
    runner: Optional[ExperimentRunner] = None
    error: Optional[BaseException] = None
    exit_code = 0
    try:
        config = _config_from(args)
        runner = ExperimentRunner(_load_system(args), config)
        with show_spinner(console, f"Running {config.command.value}..."):
            report = runner.run()
        print(dumps(report.model_dump(mode="json")))
        if config.command is CommandName.PRESETS:
            rows = [(p["name"], p["description"]) for p in report.result["presets"]]
            print_table(console, "Presets", ["name", "description"], rows)
        print_status(console, f"{config.command.value} written to {config.out_dir}", "success")
    except TowerForgeError as e:
        error, exit_code = e, e.exit_code
        logger.debug(f"{type(e).__name__}: {e.message}")
        print(dumps(e.to_dict()), file=sys.stderr)
        print_error(console, e.message, hint="Try a larger --depth" if exit_code == 3 else None)
    except ValueError as e:
        error, exit_code = e, 2
        print(dumps({"error": type(e).__name__, "message": str(e), "exit_code": 2}), file=sys.stderr)
    except Exception as e:
        error, exit_code = e, 1
        logger.exception(f"Unexpected failure: {e}")
        print(dumps({"error": type(e).__name__, "message": str(e), "exit_code": 1}), file=sys.stderr)

    if config is not None and settings.ledger_enabled:
        record_run(
            config,
            error,
            output_path=config.out_dir,
            steps=runner.step_logs if runner is not None else (),
        )
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
