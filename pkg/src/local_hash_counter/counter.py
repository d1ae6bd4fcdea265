"""Approximate model counting with random local parity hashes.

Three counters share one oracle interface:

* :func:`acount` adds ``l`` Bernoulli rows per trial and outputs ``2 ** (l - 1)``
  at the first level where a majority of trials is unsatisfiable.
* :func:`acount_constant` runs the same scan with rows of exactly ``k``
  variables.
* :func:`hybrid_count` adds rows until the residual formula has fewer than
  ``floor(2 ** (delta n))`` models and then counts those exactly.

All logarithms are base 2. Trial randomness is keyed by ``(l, j)`` so a run is
reproducible under any worker count.
"""

from __future__ import annotations

import enum
import logging
import math
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Final, Iterator

import numpy as np
from scipy.optimize import brentq

from local_hash_counter.cnf import Cnf, conjoin
from local_hash_counter.errors import ConfigurationError, OracleError
from local_hash_counter.hashing import (
    BernoulliRowSampler,
    FixedSizeRowSampler,
    HashFunction,
    RowSampler,
    XorConstraint,
    build_hash,
    encode_hash,
    xor_to_cnf,
)
from local_hash_counter.logging_config import run_context
from local_hash_counter.models import CountEstimate, LevelTally
from local_hash_counter.rng import derive_root, fresh_seed, make_rng, stream_for
from local_hash_counter.solver import RecordingOracle, SatOracle, SolveStatus, count_up_to

_LOG = logging.getLogger(__name__)

TRIALS_PER_LOG: Final[int] = 8
THRESHOLD_PER_LOG: Final[int] = 4
MIN_CONSTANT_K: Final[int] = 5
DEFAULT_MAX_REDRAWS: Final[int] = 3
MAX_SPLIT_ATTEMPTS: Final[int] = 32


class CountingMode(str, enum.Enum):
    BERNOULLI = "bernoulli"
    FIXED_K = "fixed_k"
    HYBRID = "hybrid"


def regime_floor(n: int) -> float:
    """Return ``4 log(16 n)``, the smallest admissible ``k + 1``."""
    return 4.0 * math.log2(16.0 * n)


def default_k(n: int) -> int:
    """Return the smallest ``k`` with ``4 log(16 n) <= k + 1``, capped at ``n - 1``.

    Below roughly ``n = 44`` no ``k`` meets both ends of the range; the cap is
    then applied and a warning is logged.
    """
    k = math.ceil(regime_floor(n)) - 1
    if k > n - 1:
        _LOG.warning(
            "No k satisfies 4*log(16n) <= k+1 <= n for n=%d; using k=%d", n, n - 1
        )
        return max(n - 1, 1)
    return k


def kappa_for(n: int, k: int) -> float:
    """Solve ``k + 1 = kappa * log(512 kappa) * 4 log(16 n)`` for ``kappa``.

    The left side of the rearranged equation is increasing for
    ``kappa >= 1/512``, where it starts negative, so the root is bracketed by
    doubling an upper end.

    :param n: Variable count.
    :type n: int
    :param k: Clause-width budget.
    :type k: int
    :return: The locality parameter ``kappa``.
    :rtype: float
    """
    target = (k + 1) / regime_floor(n)

    def gap(kappa: float) -> float:
        return kappa * math.log2(512.0 * kappa) - target

    low = 1.0 / 512.0
    high = 1.0
    while gap(high) <= 0.0:
        high *= 2.0
    return float(brentq(gap, low, high, xtol=1e-14))


def estimate_interval(n: int, s: int, kappa: float) -> tuple[float, float]:
    """Interval ``[s/4 * 2^{-n/kappa}, 4 s]`` guaranteed for Bernoulli rows."""
    return s / 4.0 * 2.0 ** (-n / kappa), 4.0 * s


def constant_estimate_interval(n: int, s: int, k: int) -> tuple[float, float]:
    """Interval ``[s/4 * 2^{-n + (log n / k) n^{1 - 4/k}}, 4 s]`` for ``k``-subset rows."""
    exponent = -n + math.log2(n) / k * n ** (1.0 - 4.0 / k)
    return s / 4.0 * 2.0**exponent, 4.0 * s


def trial_schedule(n: int, reps_multiplier: int = 1) -> tuple[int, int]:
    """Return ``(trials per level, UNSAT threshold)`` for ``n`` variables."""
    log_n = math.ceil(math.log2(n))
    return (
        TRIALS_PER_LOG * log_n * reps_multiplier,
        THRESHOLD_PER_LOG * log_n * reps_multiplier,
    )


@dataclass(frozen=True)
class AcountConfig:
    """Parameters of a counting run.

    :param k: Clause-width budget; ``None`` picks :func:`default_k` (or 5 in
        ``fixed_k`` mode).
    :type k: int | None
    :param mode: Counting algorithm.
    :type mode: CountingMode
    :param delta: Hybrid exactness exponent in ``(0, 1)``.
    :type delta: float | None
    :param reps_multiplier: Scales both the trial count and the threshold.
    :type reps_multiplier: int
    :param seed: Master seed; ``None`` draws a fresh one.
    :type seed: int | None
    :param workers: Threads used for the trials of one level.
    :type workers: int
    :param max_redraws: Redraws of a hash with an oversized row before the
        run aborts.
    :type max_redraws: int
    :param enforce_regime: Reject ``k`` outside the guaranteed range instead
        of warning.
    :type enforce_regime: bool
    """

    k: int | None = None
    mode: CountingMode = CountingMode.BERNOULLI
    delta: float | None = None
    reps_multiplier: int = 1
    seed: int | None = None
    workers: int = 1
    max_redraws: int = DEFAULT_MAX_REDRAWS
    enforce_regime: bool = True

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "mode", CountingMode(self.mode))
        except ValueError as exc:
            valid = ", ".join(mode.value for mode in CountingMode)
            raise ConfigurationError(
                f"Unknown mode {self.mode!r}; expected one of {valid}"
            ) from exc

        if self.k is not None and self.k < 1:
            raise ConfigurationError(f"k must be positive, got {self.k}")
        if self.reps_multiplier < 1:
            raise ConfigurationError(
                f"reps_multiplier must be at least 1, got {self.reps_multiplier}"
            )
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if self.max_redraws < 0:
            raise ConfigurationError(f"max_redraws must be non-negative, got {self.max_redraws}")
        if self.mode is CountingMode.HYBRID:
            if self.delta is None or not 0.0 < self.delta < 1.0:
                raise ConfigurationError(f"hybrid mode needs delta in (0, 1), got {self.delta}")

    def resolve_k(self, n: int) -> int:
        if self.k is not None:
            return self.k
        if self.mode is CountingMode.FIXED_K:
            return min(MIN_CONSTANT_K, n)
        return default_k(n)


def _relax_or_raise(message: str, enforce: bool) -> None:
    if enforce:
        raise ConfigurationError(message)
    _LOG.warning("%s; continuing because the regime check is relaxed", message)


def _check_dimension(n: int) -> None:
    if n < 2:
        raise ConfigurationError(f"Counting needs at least 2 variables, formula has n={n}")


def _check_bernoulli_k(n: int, k: int, enforce: bool) -> None:
    if k + 1 > n:
        raise ConfigurationError(f"k+1={k + 1} exceeds n={n}; the row bias would exceed 1/2")
    floor = regime_floor(n)
    if k + 1 < floor:
        _relax_or_raise(f"k+1={k + 1} is below 4*log(16n)={floor:.3f} for n={n}", enforce)


def _check_constant_k(n: int, k: int, enforce: bool) -> None:
    if k > n:
        raise ConfigurationError(f"Row size k={k} exceeds n={n}")
    if k < MIN_CONSTANT_K:
        _relax_or_raise(f"Constant row size k={k} is below {MIN_CONSTANT_K}", enforce)


@dataclass(frozen=True)
class _TrialOutcome:
    status: SolveStatus | None
    redraws: int


@dataclass
class _RunContext:
    formula: Cnf
    cfg: AcountConfig
    oracle: RecordingOracle
    sampler: RowSampler
    width_budget: int | None
    root: int
    seed: int | None
    started: float = field(default_factory=time.perf_counter)


def _seeded(
    cfg: AcountConfig, rng: np.random.Generator | None
) -> tuple[int | None, np.random.Generator]:
    if rng is not None:
        return cfg.seed, rng
    seed = cfg.seed if cfg.seed is not None else fresh_seed()
    return seed, make_rng(seed)


def _draw_local_hash(
    n: int,
    rows: int,
    sampler: RowSampler,
    width_budget: int | None,
    max_redraws: int,
    rng: np.random.Generator,
) -> tuple[HashFunction | None, int]:
    """Draw a hash whose rows all fit ``width_budget``; ``None`` after too many redraws."""
    for attempt in range(max_redraws + 1):
        h = build_hash(n, rows, sampler, rng)
        widest = max(row.width for row in h.rows)
        if width_budget is None or widest <= width_budget:
            return h, attempt
        _LOG.debug("Row of size %d exceeds k=%d; redrawing", widest, width_budget)
    return None, max_redraws + 1


def _run_trial(ctx: _RunContext, level: int, index: int) -> _TrialOutcome:
    rng = stream_for(ctx.root, level, index)
    h, redraws = _draw_local_hash(
        ctx.formula.n, level, ctx.sampler, ctx.width_budget, ctx.cfg.max_redraws, rng
    )
    if h is None:
        return _TrialOutcome(None, redraws)

    result = ctx.oracle.decide(conjoin(ctx.formula, encode_hash(h)))
    if result.status is SolveStatus.UNKNOWN:
        raise OracleError(f"Oracle could not decide trial l={level} j={index}: {result.diagnostic}")
    return _TrialOutcome(result.status, redraws)


def _level_outcomes(
    ctx: _RunContext, level: int, trials: int, pool: ThreadPoolExecutor | None
) -> list[_TrialOutcome]:
    if pool is None:
        return [_run_trial(ctx, level, j) for j in range(trials)]
    return list(pool.map(lambda j: _run_trial(ctx, level, j), range(trials)))


def _estimate(ctx: _RunContext, mode: CountingMode, k: int, **fields: object) -> CountEstimate:
    return CountEstimate(
        mode=mode.value,
        seed=ctx.seed,
        k=k,
        reps_multiplier=ctx.cfg.reps_multiplier,
        oracle_queries=ctx.oracle.queries,
        wall_ms=(time.perf_counter() - ctx.started) * 1000.0,
        **fields,  # type: ignore[arg-type]
    )


def _satisfiable(ctx: _RunContext) -> bool:
    result = ctx.oracle.decide(ctx.formula)
    if result.status is SolveStatus.UNKNOWN:
        raise OracleError(f"Oracle could not decide the input formula: {result.diagnostic}")
    return result.status is SolveStatus.SAT


def _splits(ctx: _RunContext, cell: Cnf, row: XorConstraint) -> bool:
    """Return whether both parity classes of ``row`` keep a model of ``cell``."""
    for target in (row.target, 1 - row.target):
        side = conjoin(cell, xor_to_cnf(row.with_target(target), cell.n))
        result = ctx.oracle.decide(side)
        if result.status is SolveStatus.UNKNOWN:
            raise OracleError(f"Oracle could not decide a hybrid split: {result.diagnostic}")
        if result.status is SolveStatus.UNSAT:
            return False
    return True


def _splitting_row(
    ctx: _RunContext, cell: Cnf, level: int, k: int
) -> tuple[XorConstraint | None, int, int, str | None]:
    """Draw rows for ``level`` until one splits ``cell``.

    :return: ``(row, draws, width redraws, abort reason)``; ``row`` is
        ``None`` exactly when a reason is given.
    """
    redraws = 0
    for attempt in range(MAX_SPLIT_ATTEMPTS):
        drawn, width_redraws = _draw_local_hash(
            cell.n, 1, ctx.sampler, k, ctx.cfg.max_redraws, stream_for(ctx.root, level, attempt)
        )
        redraws += width_redraws
        if drawn is None:
            reason = f"row {level} was wider than k={k} on {ctx.cfg.max_redraws + 1} attempt(s)"
            return None, attempt + 1, redraws, reason
        row = drawn.rows[0]
        if _splits(ctx, cell, row):
            return row, attempt + 1, redraws, None
        _LOG.debug("l=%d: row over %s does not split the cell; redrawing", level, row.support)
    reason = f"no row split the level-{level} cell in {MAX_SPLIT_ATTEMPTS} draw(s)"
    return None, MAX_SPLIT_ATTEMPTS, redraws, reason


def _scan_levels(
    ctx: _RunContext,
    mode: CountingMode,
    k: int,
    kappa: float | None,
    p: float | None,
) -> CountEstimate:
    n = ctx.formula.n
    if not _satisfiable(ctx):
        _LOG.info("Input formula is unsatisfiable; estimate 0")
        return _estimate(ctx, mode, k, estimate=0, stopped_at_l=0, kappa=kappa, p=p)

    trials, threshold = trial_schedule(n, ctx.cfg.reps_multiplier)
    _LOG.info(
        "Counting n=%d mode=%s k=%d: %d trial(s) per level, stop when UNSAT > %d",
        n,
        mode.value,
        k,
        trials,
        threshold,
    )

    tallies: list[LevelTally] = []
    pool = ThreadPoolExecutor(max_workers=ctx.cfg.workers) if ctx.cfg.workers > 1 else None
    try:
        for level in range(1, n + 2):
            outcomes = _level_outcomes(ctx, level, trials, pool)
            sat = sum(1 for o in outcomes if o.status is SolveStatus.SAT)
            unsat = sum(1 for o in outcomes if o.status is SolveStatus.UNSAT)
            tally = LevelTally(
                l=level,
                trials=trials,
                sat=sat,
                unsat=unsat,
                redraws=sum(o.redraws for o in outcomes),
            )
            tallies.append(tally)
            _LOG.info("l=%d: SAT=%d UNSAT=%d redraws=%d", level, sat, unsat, tally.redraws)

            failed = [j for j, o in enumerate(outcomes) if o.status is None]
            if failed:
                reason = (
                    f"trial {failed[0]} at l={level} drew a row wider than k={k} "
                    f"on {ctx.cfg.max_redraws + 1} attempt(s)"
                )
                _LOG.warning("Run aborted: %s", reason)
                return _estimate(
                    ctx, mode, k, estimate=0, stopped_at_l=level, kappa=kappa, p=p,
                    trials_log=tallies, aborted=True, abort_reason=reason,
                )

            if unsat > threshold:
                estimate = 1 << (level - 1)
                _LOG.info("Stopping at l=%d with estimate %d", level, estimate)
                return _estimate(
                    ctx, mode, k, estimate=estimate, stopped_at_l=level, kappa=kappa, p=p,
                    trials_log=tallies,
                )
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    _LOG.info("No level reached an UNSAT majority; estimate 0")
    return _estimate(
        ctx, mode, k, estimate=0, stopped_at_l=n + 1, kappa=kappa, p=p, trials_log=tallies
    )


def acount(
    formula: Cnf,
    cfg: AcountConfig,
    oracle: SatOracle,
    rng: np.random.Generator | None = None,
) -> CountEstimate:
    """Approximate ``|sol(formula)|`` with Bernoulli rows of bias ``(k + 1) / 2n``.

    A single satisfiability check comes first so unsatisfiable input yields
    0. Then for ``l = 1 .. n + 1`` each of ``8 ceil(log n)`` trials (times the
    repetition multiplier) conjoins an ``l``-row hash encoding and queries the
    oracle; the first level with more than half that many UNSAT answers
    yields ``2 ** (l - 1)``.

    :param formula: Formula to count, ``n >= 2``.
    :type formula: Cnf
    :param cfg: Run parameters.
    :type cfg: AcountConfig
    :param oracle: SAT oracle.
    :type oracle: SatOracle
    :param rng: Master stream; ``None`` seeds one from ``cfg.seed``.
    :type rng: numpy.random.Generator | None
    :return: Estimate with per-level tallies.
    :rtype: CountEstimate
    :raises ConfigurationError: If ``k`` is outside the admissible range.
    :raises OracleError: If the oracle answers UNKNOWN.
    """
    n = formula.n
    _check_dimension(n)
    k = cfg.resolve_k(n)
    _check_bernoulli_k(n, k, cfg.enforce_regime)
    p = (k + 1) / (2.0 * n)

    seed, master = _seeded(cfg, rng)
    ctx = _RunContext(
        formula=formula,
        cfg=cfg,
        oracle=RecordingOracle(oracle),
        sampler=BernoulliRowSampler(p),
        width_budget=k,
        root=derive_root(master),
        seed=seed,
    )
    return _scan_levels(ctx, CountingMode.BERNOULLI, k, kappa_for(n, k), p)


def acount_constant(
    formula: Cnf,
    cfg: AcountConfig,
    oracle: SatOracle,
    rng: np.random.Generator | None = None,
) -> CountEstimate:
    """Run the :func:`acount` scan with rows over exactly ``k`` variables."""
    n = formula.n
    _check_dimension(n)
    k = cfg.resolve_k(n)
    _check_constant_k(n, k, cfg.enforce_regime)

    seed, master = _seeded(cfg, rng)
    ctx = _RunContext(
        formula=formula,
        cfg=cfg,
        oracle=RecordingOracle(oracle),
        sampler=FixedSizeRowSampler(k),
        width_budget=None,
        root=derive_root(master),
        seed=seed,
    )
    return _scan_levels(ctx, CountingMode.FIXED_K, k, None, None)


def hybrid_count(
    formula: Cnf,
    delta: float,
    cfg: AcountConfig,
    oracle: SatOracle,
    rng: np.random.Generator | None = None,
) -> CountEstimate:
    """Count exactly once the residual formula is small enough.

    With ``cap = floor(2 ** (delta n))`` (at least 2), a formula with at most
    ``cap`` models is counted directly. Otherwise rows of bias
    ``min(delta / 2, (k + 1) / 2n)`` are added one at a time and the first
    residual below ``cap`` is counted and scaled by ``2 ** l``.

    A row is kept only if both of its parity classes hold a model of the
    current cell. Empty rows, rows dependent on earlier ones and rows over
    variables the cell fixes are redrawn from a fresh ``(l, attempt)`` stream,
    at most :data:`MAX_SPLIT_ATTEMPTS` times per level. Kept rows are therefore
    linearly independent, every kept row shrinks the cell, and the scan ends
    within ``n`` levels.

    :param formula: Formula to count.
    :type formula: Cnf
    :param delta: Exactness exponent in ``(0, 1)``.
    :type delta: float
    :param cfg: Run parameters; ``cfg.k`` bounds the row width.
    :type cfg: AcountConfig
    :param oracle: Oracle whose SAT answers carry witnesses.
    :type oracle: SatOracle
    :param rng: Master stream; ``None`` seeds one from ``cfg.seed``.
    :type rng: numpy.random.Generator | None
    :return: Estimate; ``exact_path`` is set when no row was needed. Each
        level tally counts draws as trials and non-splitting draws as UNSAT.
    :rtype: CountEstimate
    :raises OracleError: If the oracle answers UNKNOWN.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    n = formula.n
    _check_dimension(n)
    k = min(cfg.resolve_k(n), n - 1)
    p = min(delta / 2.0, (k + 1) / (2.0 * n))
    cap = max(math.floor(2.0 ** (delta * n)), 2)

    seed, master = _seeded(cfg, rng)
    recording = RecordingOracle(oracle)
    ctx = _RunContext(
        formula=formula,
        cfg=cfg,
        oracle=recording,
        sampler=BernoulliRowSampler(p),
        width_budget=k,
        root=derive_root(master),
        seed=seed,
    )

    exact = count_up_to(formula, cap + 1, recording)
    if exact <= cap:
        _LOG.info("Formula has %d <= cap=%d model(s); counted exactly", exact, cap)
        return _estimate(
            ctx, CountingMode.HYBRID, k, estimate=exact, stopped_at_l=0, p=p, delta=delta,
            exact_path=True,
        )

    _LOG.info("Hybrid counting n=%d delta=%s cap=%d p=%.4f", n, delta, cap, p)
    cell = formula
    tallies: list[LevelTally] = []
    residual = exact
    for level in range(1, n + 1):
        row, draws, redraws, reason = _splitting_row(ctx, cell, level, k)
        tallies.append(
            LevelTally(
                l=level,
                trials=draws,
                sat=int(row is not None),
                unsat=draws - int(row is not None),
                redraws=redraws,
            )
        )
        if row is None:
            _LOG.warning("Run aborted: %s", reason)
            return _estimate(
                ctx, CountingMode.HYBRID, k, estimate=0, stopped_at_l=level, p=p, delta=delta,
                trials_log=tallies, aborted=True, abort_reason=reason,
            )
        cell = conjoin(cell, xor_to_cnf(row, n))
        residual = count_up_to(cell, cap, recording)
        _LOG.debug("l=%d: residual count %s cap %d after %d draw(s)", level, residual, cap, draws)
        if residual < cap:
            estimate = residual << level
            _LOG.info("Stopping at l=%d: %d model(s) x 2^%d = %d", level, residual, level, estimate)
            return _estimate(
                ctx, CountingMode.HYBRID, k, estimate=estimate, stopped_at_l=level, p=p,
                delta=delta, trials_log=tallies,
            )

    # n independent rows leave at most one model, which is below cap >= 2.
    raise AssertionError(f"hybrid scan ended above the cap after {n} rows (residual {residual})")


Algorithm = Callable[[Cnf, AcountConfig, SatOracle, "np.random.Generator | None"], CountEstimate]


def run_counter(
    formula: Cnf,
    cfg: AcountConfig,
    oracle: SatOracle,
    rng: np.random.Generator | None = None,
) -> CountEstimate:
    """Dispatch to the counter selected by ``cfg.mode``."""
    with run_context(mode=cfg.mode.value, seed=cfg.seed):
        if cfg.mode is CountingMode.HYBRID:
            assert cfg.delta is not None
            return hybrid_count(formula, cfg.delta, cfg, oracle, rng)
        if cfg.mode is CountingMode.FIXED_K:
            return acount_constant(formula, cfg, oracle, rng)
        return acount(formula, cfg, oracle, rng)


@dataclass(frozen=True)
class RepeatedRunSummary:
    """Aggregate of independent runs.

    :param estimates: Per-run estimates in run order.
    :type estimates: tuple[CountEstimate, ...]
    :param median: Median of the estimate values.
    :type median: float
    :param histogram: Estimate value to number of runs.
    :type histogram: dict[int, int]
    :param in_interval: Fraction of runs inside the requested interval.
    :type in_interval: float | None
    """

    estimates: tuple[CountEstimate, ...]
    median: float
    histogram: dict[int, int]
    in_interval: float | None = None

    @property
    def aborted_runs(self) -> int:
        return sum(1 for estimate in self.estimates if estimate.aborted)

    def __iter__(self) -> Iterator[CountEstimate]:
        return iter(self.estimates)


def run_repeated(
    algorithm: Algorithm,
    formula: Cnf,
    cfg: AcountConfig,
    oracle: SatOracle,
    repeats: int,
    rng: np.random.Generator,
    interval: tuple[float, float] | None = None,
) -> RepeatedRunSummary:
    """Run ``algorithm`` ``repeats`` times, each under its own derived seed.

    Repeat ``i`` gets seed ``derive_root(rng)`` (the ``i``-th draw) and
    receives it as ``cfg.seed`` with no explicit stream, so every per-run
    record carries the seed that replays that run alone.

    :param algorithm: One of the counters, or :func:`run_counter`.
    :type algorithm: Algorithm
    :param formula: Formula to count.
    :type formula: Cnf
    :param cfg: Run parameters shared by all repeats.
    :type cfg: AcountConfig
    :param oracle: SAT oracle.
    :type oracle: SatOracle
    :param repeats: Number of runs, at least 1.
    :type repeats: int
    :param rng: Master stream.
    :type rng: numpy.random.Generator
    :param interval: Optional closed ``[low, high]`` for the success fraction.
    :type interval: tuple[float, float] | None
    :return: Summary with the median and histogram.
    :rtype: RepeatedRunSummary
    """
    if repeats < 1:
        raise ConfigurationError(f"repeats must be at least 1, got {repeats}")

    seeds = [derive_root(rng) for _ in range(repeats)]
    estimates: list[CountEstimate] = []
    for index, seed in enumerate(seeds):
        with run_context(repeat=index, seed=seed):
            estimates.append(algorithm(formula, replace(cfg, seed=seed), oracle, None))
    values = [estimate.estimate for estimate in estimates]
    fraction = None
    if interval is not None:
        low, high = interval
        fraction = sum(1 for value in values if low <= value <= high) / repeats

    summary = RepeatedRunSummary(
        estimates=tuple(estimates),
        median=float(statistics.median(values)),
        histogram=dict(sorted(Counter(values).items())),
        in_interval=fraction,
    )
    _LOG.info(
        "Repeated %d run(s): median=%s in_interval=%s aborted=%d",
        repeats,
        summary.median,
        fraction,
        summary.aborted_runs,
    )
    return summary
