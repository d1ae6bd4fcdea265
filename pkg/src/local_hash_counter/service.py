"""Application service that coordinates parsing, counting and reporting."""

from __future__ import annotations

import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, BinaryIO, Callable, Iterator, Sequence

from local_hash_counter.checkers import AnalysisSettings, CheckerFactory
from local_hash_counter.cnf import Cnf, conjoin, emit_dimacs, parse_dimacs
from local_hash_counter.counter import AcountConfig, default_k, run_counter, run_repeated
from local_hash_counter.errors import ConfigurationError
from local_hash_counter.hashing import (
    FAMILY_BERNOULLI,
    build_hash,
    encode_hash,
    make_row_sampler,
    xor_comment_lines,
)
from local_hash_counter.models import CountEstimate
from local_hash_counter.report_writer import ReportWriter
from local_hash_counter.rng import fresh_seed, make_rng
from local_hash_counter.solver import (
    DEFAULT_ENUMERATION_BUDGET,
    OracleFactory,
    SatOracle,
    exact_count,
)

_LOG = logging.getLogger(__name__)

CounterFunction = Callable[..., CountEstimate]


def _default_bias(n: int, k: int | None) -> float:
    """Return ``(k + 1) / 2n`` for Bernoulli encoding, rejecting biases above 1/2."""
    if n < 2:
        raise ConfigurationError(
            f"Bernoulli rows over n={n} variable(s) need an explicit bias p; "
            "the default bias (k+1)/2n exceeds 1/2 for every k >= 1"
        )
    width = k if k is not None else default_k(n)
    p = (width + 1) / (2.0 * n)
    if p > 0.5:
        raise ConfigurationError(
            f"k={width} gives bias (k+1)/2n={p:.3f} above 1/2 for n={n}; use k <= {n - 1}"
        )
    return p


class CountingService:
    """Coordinate formula input, the counters and record output.

    Collaborators can be injected so tests can provide fakes.

    :param oracle: SAT oracle; defaults to :meth:`OracleFactory.build`.
    :type oracle: SatOracle | None
    :param writer: Record writer; defaults to JSON lines.
    :type writer: ReportWriter | None
    :param counter: Counting entry point; defaults to :func:`run_counter`.
    :type counter: CounterFunction | None
    """

    def __init__(
        self,
        oracle: SatOracle | None = None,
        writer: ReportWriter | None = None,
        counter: CounterFunction | None = None,
    ) -> None:
        self._oracle = oracle if oracle is not None else OracleFactory.build()
        self._writer = writer if writer is not None else ReportWriter()
        self._counter = counter if counter is not None else run_counter

    @property
    def writer(self) -> ReportWriter:
        return self._writer

    def load_formula(self, input_path: Path | None, stdin: BinaryIO | None = None) -> Cnf:
        """Read a formula from ``input_path`` or, when it is ``None``, from stdin.

        :param input_path: DIMACS file, or ``None`` for standard input.
        :type input_path: Path | None
        :param stdin: Binary stream used instead of ``sys.stdin``.
        :type stdin: BinaryIO | None
        :return: Parsed formula.
        :rtype: Cnf
        :raises FileNotFoundError: If the input file does not exist.
        :raises IsADirectoryError: If the input path is a directory.
        :raises DimacsParseError: If the input is malformed.
        """
        if input_path is None:
            source = stdin if stdin is not None else sys.stdin.buffer
            _LOG.debug("Reading DIMACS from standard input")
            return parse_dimacs(source.read())

        normalized = input_path.expanduser().resolve()
        if not normalized.exists():
            raise FileNotFoundError(f"Input file does not exist: {normalized}")
        if normalized.is_dir():
            raise IsADirectoryError(f"Input path is a directory: {normalized}")
        _LOG.debug("Reading DIMACS file: %s", normalized)
        return parse_dimacs(normalized.read_bytes())

    def count(self, formula: Cnf, cfg: AcountConfig, repeats: int = 1) -> list[dict[str, Any]]:
        """Run the configured counter and return its records.

        With ``repeats > 1`` one record per run is followed by a summary
        record carrying the median and the estimate histogram.

        :param formula: Formula to count.
        :type formula: Cnf
        :param cfg: Counter configuration; a missing seed is drawn fresh.
        :type cfg: AcountConfig
        :param repeats: Independent runs.
        :type repeats: int
        :return: JSON-compatible records.
        :rtype: list[dict[str, Any]]
        """
        seed = cfg.seed if cfg.seed is not None else fresh_seed()
        cfg = replace(cfg, seed=seed)
        _LOG.info(
            "Counting n=%d clauses=%d mode=%s seed=%d",
            formula.n,
            formula.num_clauses,
            cfg.mode.value,
            seed,
        )

        if repeats == 1:
            return [self._counter(formula, cfg, self._oracle, None).to_record()]

        summary = run_repeated(self._counter, formula, cfg, self._oracle, repeats, make_rng(seed))
        records = []
        for index, estimate in enumerate(summary.estimates):
            record = estimate.to_record()
            record["repeat"] = index
            records.append(record)
        records.append(
            {
                "summary": True,
                "mode": cfg.mode.value,
                "seed": seed,
                "repeats": repeats,
                "median": summary.median,
                "histogram": {str(value): count for value, count in summary.histogram.items()},
                "aborted_runs": summary.aborted_runs,
            }
        )
        return records

    def exact(self, formula: Cnf, budget: int = DEFAULT_ENUMERATION_BUDGET) -> dict[str, Any]:
        """Return the exhaustive model count record."""
        return {"exact": exact_count(formula, budget), "n": formula.n}

    def encode(
        self,
        formula: Cnf,
        m: int,
        family: str = FAMILY_BERNOULLI,
        *,
        p: float | None = None,
        k: int | None = None,
        seed: int | None = None,
    ) -> bytes:
        """Conjoin a freshly sampled ``m``-row hash encoding with ``formula``.

        The sampled rows are written as ``c xor <b> <indices...>`` comment
        lines. ``m = 0`` re-emits the formula unchanged.

        :param formula: Input formula.
        :type formula: Cnf
        :param m: Number of rows.
        :type m: int
        :param family: ``"bernoulli"`` or ``"fixed_k"``.
        :type family: str
        :param p: Bernoulli bias; defaults to ``(k + 1) / 2n``.
        :type p: float | None
        :param k: Width budget or fixed row size.
        :type k: int | None
        :param seed: Master seed; drawn fresh when absent.
        :type seed: int | None
        :return: DIMACS bytes.
        :rtype: bytes
        """
        if m < 0:
            raise ValueError(f"m must be non-negative, got {m}")
        if m == 0:
            return emit_dimacs(formula)

        seed = seed if seed is not None else fresh_seed()
        n = formula.n
        if family == FAMILY_BERNOULLI:
            if p is None:
                p = _default_bias(n, k)
            sampler = make_row_sampler(family, p=p)
        else:
            sampler = make_row_sampler(family, k=k if k is not None else min(5, n))

        h = build_hash(n, m, sampler, make_rng(seed))
        _LOG.info("Encoding %d %s row(s) over n=%d (seed=%d)", m, family, n, seed)
        comments = [f"seed {seed}", f"family {family}", *xor_comment_lines(h)]
        return emit_dimacs(conjoin(formula, encode_hash(h)), comments)

    def analyze(
        self,
        names: Sequence[str] | None,
        settings: AnalysisSettings,
    ) -> Iterator[dict[str, Any]]:
        """Yield one record per checker instance, seed included.

        :param names: Checker names; ``None`` runs every checker.
        :type names: Sequence[str] | None
        :param settings: Sweep parameters.
        :type settings: AnalysisSettings
        :return: Iterator of records.
        :rtype: Iterator[dict[str, Any]]
        """
        checkers = CheckerFactory.build(names)
        seed = settings.seed if settings.seed is not None else fresh_seed()
        rng = make_rng(seed)
        for checker in checkers:
            _LOG.info("Running checker %s", checker.name)
            for result in checker.run(settings, rng):
                record = result.to_record()
                record["seed"] = seed
                yield record
