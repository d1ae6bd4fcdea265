"""CLI entry point for the local hash counter."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from local_hash_counter.checkers import AnalysisSettings, CheckerFactory
from local_hash_counter.counter import AcountConfig, CountingMode
from local_hash_counter.errors import (
    ConfigurationError,
    DimacsParseError,
    LocalHashCounterError,
    OracleError,
    ResourceCapError,
)
from local_hash_counter.hashing import FAMILY_BERNOULLI, FAMILY_FIXED_K
from local_hash_counter.logging_config import configure_logging
from local_hash_counter.report_writer import FORMAT_JSON, ReportWriter
from local_hash_counter.selftest import CRITERIA, DEFAULT_SEED, print_summary, run_selftest
from local_hash_counter.service import CountingService
from local_hash_counter.solver import DEFAULT_ENUMERATION_BUDGET, OracleFactory

_LOG = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE_ERROR = 2
EXIT_ORACLE_ERROR = 3
EXIT_RESOURCE_CAP = 4


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs to replay a run.

    :param command: Subcommand name.
    :type command: str
    :param input_path: DIMACS input; ``None`` reads standard input.
    :type input_path: Path | None
    :param output_path: Output file; ``None`` writes standard output.
    :type output_path: Path | None
    :param output_format: ``"json"`` or ``"plain"``.
    :type output_format: str
    :param seed: Master seed.
    :type seed: int | None
    :param solver: ``"internal"`` or an external executable.
    :type solver: str | None
    :param timeout: Per-query time limit in seconds.
    :type timeout: float | None
    """

    command: str
    input_path: Path | None = None
    output_path: Path | None = None
    output_format: str = FORMAT_JSON
    seed: int | None = None
    solver: str | None = None
    timeout: float | None = None
    mode: str = CountingMode.BERNOULLI.value
    k: int | None = None
    delta: float | None = None
    reps_multiplier: int = 1
    repeats: int = 1
    workers: int = 1
    enforce_regime: bool = True

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        def path_or_none(value: str | None) -> Path | None:
            return Path(value).expanduser().resolve() if value else None

        return cls(
            command=args.command,
            input_path=path_or_none(getattr(args, "input", None)),
            output_path=path_or_none(args.output),
            output_format=args.format,
            seed=getattr(args, "seed", None),
            solver=getattr(args, "solver", None),
            timeout=getattr(args, "timeout", None),
            mode=getattr(args, "mode", CountingMode.BERNOULLI.value),
            k=getattr(args, "k", None),
            delta=getattr(args, "delta", None),
            reps_multiplier=getattr(args, "reps", 1),
            repeats=getattr(args, "repeats", 1),
            workers=getattr(args, "workers", 1),
            enforce_regime=not getattr(args, "relax_regime", False),
        )

    def counter_config(self) -> AcountConfig:
        return AcountConfig(
            k=self.k,
            mode=CountingMode(self.mode),
            delta=self.delta,
            reps_multiplier=self.reps_multiplier,
            seed=self.seed,
            workers=self.workers,
            enforce_regime=self.enforce_regime,
        )


def _add_common(parser: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        parser.add_argument(
            "input",
            nargs="?",
            metavar="CNF_FILE",
            help="DIMACS CNF file; standard input when omitted.",
        )
    parser.add_argument(
        "--output", metavar="FILE", help="Write to FILE instead of standard output."
    )
    parser.add_argument(
        "--format",
        choices=ReportWriter.FORMATS,
        default=FORMAT_JSON,
        help="Record format (default: json).",
    )
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging.")


def _grid(value: str) -> tuple[int, int]:
    try:
        rows, cols = (int(part) for part in value.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected AxB, got {value!r}") from exc
    return rows, cols


def build_parser() -> argparse.ArgumentParser:
    """Build and return the CLI argument parser.

    :return: Parser with the ``count``, ``exact``, ``encode``, ``analyze`` and
        ``selftest`` subcommands.
    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="lhcount",
        description="Approximate model counting with random local parity hashes.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    count = commands.add_parser("count", help="Estimate the number of models.")
    _add_common(count)
    count.add_argument("--mode", choices=[m.value for m in CountingMode], default="bernoulli")
    count.add_argument("--k", type=int, help="Clause-width budget or fixed row size.")
    count.add_argument("--delta", type=float, help="Exactness exponent for hybrid mode.")
    count.add_argument("--seed", type=int, help="Master seed; drawn fresh and echoed when omitted.")
    count.add_argument("--reps", type=int, default=1, help="Multiplier for trials and threshold.")
    count.add_argument("--repeats", type=int, default=1, help="Independent runs to aggregate.")
    count.add_argument("--workers", type=int, default=1, help="Threads per level.")
    count.add_argument("--solver", help="'internal' or a path to a DIMACS SAT solver.")
    count.add_argument("--timeout", type=float, help="Per-query time limit in seconds.")
    count.add_argument(
        "--relax-regime",
        action="store_true",
        help="Warn instead of failing when k is outside the guaranteed range.",
    )

    exact = commands.add_parser("exact", help="Count models by exhaustive enumeration.")
    _add_common(exact)
    exact.add_argument("--budget", type=int, default=DEFAULT_ENUMERATION_BUDGET)

    encode = commands.add_parser("encode", help="Conjoin a sampled hash encoding.")
    _add_common(encode)
    encode.add_argument("--m", type=int, required=True, help="Number of hash rows.")
    encode.add_argument(
        "--family", choices=[FAMILY_BERNOULLI, FAMILY_FIXED_K], default=FAMILY_BERNOULLI
    )
    encode.add_argument("--p", type=float, help="Bernoulli bias override.")
    encode.add_argument("--k", type=int, help="Width budget or fixed row size.")
    encode.add_argument("--seed", type=int)

    analyze = commands.add_parser("analyze", help="Sweep the Fourier inequality checkers.")
    _add_common(analyze, with_input=False)
    analyze.add_argument(
        "--checker",
        action="append",
        metavar="NAME",
        help=f"Checker to run, repeatable; one of {', '.join(CheckerFactory.names())}.",
    )
    analyze.add_argument("--n", type=int, default=8)
    analyze.add_argument("--trials", type=int, default=20)
    analyze.add_argument("--grid", type=_grid, default=(20, 20), metavar="AxB")
    analyze.add_argument("--m", type=int, default=3)
    analyze.add_argument("--eta", type=float, default=0.5)
    analyze.add_argument("--eps", type=float, default=0.5)
    analyze.add_argument("--hash-draws", type=int, default=200)
    analyze.add_argument("--seed", type=int)

    selftest = commands.add_parser("selftest", help="Run the acceptance suite.")
    _add_common(selftest, with_input=False)
    selftest.add_argument("--fast", action="store_true", help="Run reduced corpora.")
    selftest.add_argument(
        "--only",
        action="append",
        metavar="NAME",
        help=f"Criterion to run, repeatable; one of {', '.join(CRITERIA)}.",
    )
    selftest.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _run(args: argparse.Namespace, config: RunConfig) -> int:
    writer = ReportWriter(config.output_format)

    if config.command == "selftest":
        outcomes = run_selftest(fast=args.fast, only=args.only, seed=args.seed)
        print_summary(outcomes)
        writer.write((asdict(outcome) for outcome in outcomes), config.output_path)
        return EXIT_SUCCESS if all(outcome.passed for outcome in outcomes) else EXIT_FAILURE

    if config.command == "analyze":
        names = args.checker
        CheckerFactory.build(names)
        settings = AnalysisSettings(
            n=args.n,
            trials=args.trials,
            seed=config.seed,
            grid=args.grid,
            m=args.m,
            eta=args.eta,
            eps=args.eps,
            hash_draws=args.hash_draws,
        )
        service = CountingService(oracle=OracleFactory.build("internal"), writer=writer)
        count = writer.write(service.analyze(names, settings), config.output_path)
        _LOG.info("Wrote %d check record(s)", count)
        return EXIT_SUCCESS

    service = CountingService(
        oracle=OracleFactory.build(config.solver, config.timeout), writer=writer
    )
    formula = service.load_formula(config.input_path)

    if config.command == "count":
        records = service.count(formula, config.counter_config(), repeats=config.repeats)
        writer.write(records, config.output_path)
    elif config.command == "exact":
        writer.write([service.exact(formula, args.budget)], config.output_path)
    elif config.command == "encode":
        content = service.encode(
            formula, args.m, args.family, p=args.p, k=args.k, seed=config.seed
        )
        writer.write_bytes(content, config.output_path)
    return EXIT_SUCCESS


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI workflow and return a process exit code.

    Exit codes: 0 success, 1 selftest failure or unexpected error, 2 usage,
    input or configuration error, 3 oracle failure, 4 resource cap.

    :param argv: Optional CLI arguments for testing or programmatic execution.
    :type argv: Sequence[str] | None
    :return: Process exit code.
    :rtype: int
    """
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)

    configure_logging(verbose=args.verbose)
    config = RunConfig.from_args(args)
    _LOG.debug("Resolved run configuration: %s", config)

    try:
        return _run(args, config)
    except ResourceCapError as exc:
        _LOG.error("Resource cap exceeded: %s", exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_CAP
    except OracleError as exc:
        _LOG.error("Oracle failure: %s", exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_ERROR
    except (DimacsParseError, ConfigurationError, LocalHashCounterError, ValueError) as exc:
        _LOG.error("Invalid input or configuration: %s", exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE_ERROR
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as exc:
        _LOG.error("Input/output validation error: %s", exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE_ERROR
    except Exception as exc:  # pragma: no cover
        _LOG.exception("Unexpected error while running %s: %s", config.command, exc)
        print(f"Error: unexpected failure during {config.command}.", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
