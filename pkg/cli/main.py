"""
hyperwave command line.

    python -m cli.main <subcommand> [--config FILE] [--set key=value ...]
                       [--out DIR] [--seed N] [--threads N] [--log-level LEVEL]

Settings resolve as defaults < YAML file < --set overrides < dedicated flags.
Exit codes: 0 all checks pass, 1 constraint violation, 2 numerical failure
or failed check, 3 I/O failure. Any other exception also exits 1.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from cli.dependencies import RunContext
from cli.report_builder import ReportBuilder, RunOutcome
from cli.router import dispatch
from cli.schemas import DEFAULT_OUT, ExperimentConfig, Subcommand, build_config, parse_override
from core.errors import ConstraintViolationError, NumericalError
from provenance_chain.hash_chain_ledger import RunLedger

logger = logging.getLogger("hyperwave")

EXIT_PASS = 0
EXIT_CONSTRAINT = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperwave",
        description="Spectral solver and verification harness for radial waves on hyperbolic space",
    )
    parser.add_argument("subcommand", choices=[s.value for s in Subcommand])
    parser.add_argument("--config", type=Path, help="YAML file of ExperimentConfig fields")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one field; repeatable")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--log-level", dest="log_level")
    return parser


def resolve_values(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge the config sources in precedence order into plain values."""
    values: Dict[str, Any] = {}
    if args.config is not None:
        loaded = yaml.safe_load(args.config.read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, dict):
            raise yaml.YAMLError(f"{args.config} does not hold a mapping")
        values.update(loaded)
    for item in args.overrides:
        values.update(parse_override(item))
    for key in ("out", "seed", "threads", "log_level"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    return values


def _fallback_out(args: argparse.Namespace) -> Path:
    return Path(args.out) if args.out else Path(DEFAULT_OUT)


def _exit_code(error: BaseException) -> int:
    if isinstance(error, ConstraintViolationError):
        return EXIT_CONSTRAINT
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_IO


def _write_failure(builder: Optional[ReportBuilder], error: BaseException, code: int):
    if builder is None:
        return
    try:
        builder.write_status("error", code, error)
    except OSError:
        logger.exception("could not write status.json")


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level or "INFO", format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    builder: Optional[ReportBuilder] = None
    try:
        config: ExperimentConfig = build_config(resolve_values(args))
        logging.getLogger().setLevel(config.log_level.upper())
        out_dir = Path(config.out)
        builder = ReportBuilder(out_dir, RunLedger.fresh(out_dir))
        builder.write_effective_config(config)
        outcome: RunOutcome = dispatch(args.subcommand, RunContext(config), builder)
    except ConstraintViolationError as exc:
        if builder is None:
            builder = _builder_or_none(_fallback_out(args))
        for item in exc.violations:
            logger.error("constraint violated: %s (%s, got %r)", item.field, item.message, item.value)
        _write_failure(builder, exc, EXIT_CONSTRAINT)
        print(f"hyperwave {args.subcommand}: constraint violation: {', '.join(exc.offenders)}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (NumericalError, OSError, yaml.YAMLError) as exc:
        code = _exit_code(exc)
        logger.error("%s: %s", type(exc).__name__, exc)
        _write_failure(builder, exc, code)
        where = f" (diagnostics in {builder.out_dir})" if builder is not None else ""
        print(f"hyperwave {args.subcommand}: {type(exc).__name__}: {exc}{where}", file=sys.stderr)
        return code
    except Exception as exc:
        logger.exception("unexpected failure in %s", args.subcommand)
        _write_failure(builder, exc, EXIT_CONSTRAINT)
        print(f"hyperwave {args.subcommand}: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT

    code = EXIT_PASS if outcome.passed else EXIT_NUMERICAL
    builder.write_outcome(outcome)
    builder.write_status("ok" if outcome.passed else "failed", code, outcome=outcome)
    print(builder.summary_text(), end="")
    return code


def _builder_or_none(out_dir: Path) -> Optional[ReportBuilder]:
    try:
        return ReportBuilder(out_dir, RunLedger.fresh(out_dir))
    except OSError:
        return None


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
