"""Command-line entry point for the accelerator co-exploration engine."""
import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

import structlog
from dotenv import load_dotenv
from sqlalchemy.exc import SQLAlchemyError

# Load environment variables from .env file
load_dotenv()

from cli import __version__
from cli.commands import (
    CommandOutcome,
    cmd_coexplore,
    cmd_fit,
    cmd_oracle_gen,
    cmd_predict,
    cmd_report,
    cmd_sweep,
    recorded_params,
)
from cli.manifest import RunManifest, manifest_digest, output_list, write_manifest
from config.settings import settings
from database.sqlite_db import get_registry
from shared.errors import DseError, UsageError
from shared.models import PeType, Target

PE_CHOICES = [pe.value for pe in PeType] + ["all"]
TARGET_CHOICES = [t.value for t in Target] + ["all"]


# Configure logging
def configure_logging(level: Optional[str] = None) -> None:
    """Structured logs on stderr, plus a rotating file when `log_file` is set."""
    level_name = (level or settings.log_level).upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(RotatingFileHandler(
            settings.log_file, maxBytes=10 * 1024 * 1024, backupCount=5, encoding="utf-8"
        ))
    logging.basicConfig(level=level_name, format="%(message)s", handlers=handlers, force=True)

    renderer = (
        structlog.dev.ConsoleRenderer()
        if settings.log_format == "console"
        else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


logger = structlog.get_logger()


class ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting, so main() owns the exit code."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {value}")
    return value


def _add_source(parser: argparse.ArgumentParser, required: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--oracle", action="store_true", help="evaluate with the analytical oracle")
    group.add_argument("--models", type=Path, help="directory of fitted surrogate models")


def build_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.default_seed, help="root random seed")
    common.add_argument("--jobs", type=_positive, default=settings.default_jobs,
                        help="worker processes; outputs do not depend on it")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    parser = ArgumentParser(prog="dse", description="Quantization-aware accelerator co-exploration")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("oracle-gen", parents=[common], help="characterize a space with the oracle")
    p.add_argument("--space", type=Path, default=settings.default_space_path)
    p.add_argument("--nets", type=Path, nargs="+", default=[settings.networks_dir])
    p.add_argument("--params", type=Path, default=settings.oracle_params_path)
    p.add_argument("--max-configs", type=_positive, default=None,
                   help="sample this many configurations instead of the full space")
    p.set_defaults(handler=cmd_oracle_gen)

    p = sub.add_parser("fit", parents=[common], help="fit polynomial surrogates")
    p.add_argument("--dataset", type=Path, required=True, help="oracle-gen output directory")
    p.add_argument("--target", choices=TARGET_CHOICES, default="all")
    p.add_argument("--pe-type", choices=PE_CHOICES, default="all")
    p.add_argument("--degrees", type=_positive, nargs=2, metavar=("MIN", "MAX"), default=None,
                   help="candidate degree range")
    p.add_argument("--degree", type=_positive, default=None, help="force a degree, skipping selection")
    p.add_argument("--folds", type=_positive, default=settings.cv_folds)
    p.add_argument("--holdout", type=_fraction, default=settings.holdout_fraction)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="evaluate one configuration on one network")
    p.add_argument("--config", type=Path, required=True, help="accelerator config document")
    p.add_argument("--network", required=True, help="network document or shipped network name")
    p.add_argument("--params", type=Path, default=settings.oracle_params_path)
    _add_source(p, required=False)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("sweep", parents=[common], help="evaluate a whole design space")
    p.add_argument("--space", type=Path, default=settings.default_space_path)
    p.add_argument("--nets", type=Path, nargs="+", default=[settings.networks_dir])
    p.add_argument("--params", type=Path, default=settings.oracle_params_path)
    p.add_argument("--global-reference", action="store_true",
                   help="normalize to one INT16 reference over all networks")
    p.add_argument("--accuracy-table", type=Path, default=None,
                   help="network,pe_type,top1_percent CSV for the accuracy trade-off tables")
    _add_source(p, required=True)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("coexplore", parents=[common], help="joint architecture and accelerator search")
    p.add_argument("--space", type=Path, default=settings.default_space_path,
                   help="accelerator space to sample configurations from")
    p.add_argument("--n-archs", type=_positive, default=settings.coexplore_n_archs)
    p.add_argument("--n-cfgs", type=_positive, default=settings.coexplore_n_cfgs)
    p.add_argument("--input-a", type=_positive, default=settings.coexplore_input_a)
    p.add_argument("--params", type=Path, default=settings.oracle_params_path)
    p.add_argument("--accuracy-table", type=Path, default=None,
                   help="arch_index,pe_type,top1_percent CSV; synthetic accuracy when omitted")
    _add_source(p, required=True)
    p.set_defaults(handler=cmd_coexplore)

    p = sub.add_parser("report", parents=[common], help="show a run manifest or the run history")
    p.add_argument("run_dir", type=Path, nargs="?", default=None)
    p.add_argument("--history", action="store_true")
    p.add_argument("--command", dest="filter_command", default=None, help="history filter")
    p.add_argument("--limit", type=_positive, default=50)
    p.set_defaults(handler=cmd_report)
    return parser


def _finish(outcome: CommandOutcome, args: argparse.Namespace) -> Path:
    manifest = RunManifest(
        command=args.command,
        params=recorded_params(args),
        seed=args.seed,
        inputs=dict(sorted(outcome.inputs.items())),
        outputs=output_list(outcome.outputs, args.out),
    )
    return write_manifest(manifest, args.out)


def _registry_call(fn, *fn_args, **fn_kwargs):
    if not settings.enable_run_registry:
        return None
    try:
        return fn(*fn_args, **fn_kwargs)
    except SQLAlchemyError as e:
        logger.warning("run_registry_unavailable", error=str(e))
        return None


def run(args: argparse.Namespace) -> int:
    if args.command == "report":
        args.handler(args)
        return 0

    args.out = args.out or Path("out") / args.command
    run_id = _registry_call(lambda: get_registry().start_run(
        args.command, args.out.resolve(), seed=args.seed, jobs=args.jobs, tool_version=__version__
    ))
    try:
        outcome = args.handler(args)
        manifest_path = _finish(outcome, args)
    except Exception as e:
        if run_id:
            _registry_call(lambda: get_registry().finish_run(run_id, "failed", error=str(e)))
        raise
    if run_id:
        _registry_call(lambda: get_registry().finish_run(
            run_id, "ok", manifest_digest=manifest_digest(manifest_path)
        ))
    logger.info("run_completed", command=args.command, out=str(args.out),
                outputs=len(outcome.outputs))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run a subcommand.

    Returns:
        0 on success, 1 on usage errors, 2 on data or validation errors,
        3 on internal errors
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return e.exit_code

    configure_logging(args.log_level)
    logger.info("run_started", command=args.command, seed=args.seed, jobs=args.jobs)
    try:
        return run(args)
    except DseError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error("run_failed", command=args.command, error=str(e), error_type=type(e).__name__)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error("run_failed", command=args.command, error=str(e), error_type="FileNotFoundError")
        return 2
    except Exception as e:
        logger.exception("run_crashed", command=args.command, error=str(e))
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
