"""Unit tests for the approximate and hybrid counters."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from local_hash_counter.cnf import Cnf, free_variable_cnf, parse_dimacs
from local_hash_counter.counter import (
    AcountConfig,
    CountingMode,
    acount,
    acount_constant,
    estimate_interval,
    constant_estimate_interval,
    default_k,
    hybrid_count,
    kappa_for,
    regime_floor,
    run_counter,
    run_repeated,
    trial_schedule,
)
from local_hash_counter.errors import ConfigurationError, OracleError
from local_hash_counter.models import CountEstimate
from local_hash_counter.rng import make_rng
from local_hash_counter.solver import DpllSolver, SolveResult, SolveStatus

UNSAT_TEXT = "p cnf 4 2\n1 0\n-1 0\n"


class _UnknownOracle:
    """Fake oracle that never reaches a verdict."""

    can_enumerate = True

    def decide(self, formula: Cnf) -> SolveResult:
        return SolveResult(SolveStatus.UNKNOWN, diagnostic="gave up")


def _relaxed(**overrides: object) -> AcountConfig:
    fields: dict[str, object] = {"k": 7, "seed": 1234, "enforce_regime": False}
    fields.update(overrides)
    return AcountConfig(**fields)  # type: ignore[arg-type]


def test_default_k_meets_regime_floor_for_large_n() -> None:
    """Verify the smallest admissible width budget.

    :return: None
    :rtype: None
    """
    assert regime_floor(64) == pytest.approx(40.0)
    assert default_k(64) == 39
    assert default_k(1024) == math.ceil(4 * math.log2(16 * 1024)) - 1


def test_default_k_caps_at_n_minus_one_with_warning(caplog: pytest.LogCaptureFixture) -> None:
    """Verify small ``n`` falls back to ``n - 1`` and says so.

    :param caplog: Pytest log capture fixture.
    :type caplog: pytest.LogCaptureFixture
    :return: None
    :rtype: None
    """
    with caplog.at_level(logging.WARNING, logger="local_hash_counter.counter"):
        k = default_k(8)

    assert k == 7
    assert "No k satisfies" in caplog.text


@pytest.mark.parametrize(("n", "k"), [(8, 7), (64, 39), (200, 120)])
def test_kappa_solves_the_width_equation(n: int, k: int) -> None:
    kappa = kappa_for(n, k)

    assert kappa * math.log2(512 * kappa) * regime_floor(n) == pytest.approx(k + 1, rel=1e-9)


def test_intervals_bracket_the_true_count() -> None:
    """Verify both guarantee intervals contain ``s``.

    :return: None
    :rtype: None
    """
    low, high = estimate_interval(64, 2**20, kappa_for(64, 39))
    assert low < 2**20 < high
    assert high == 4 * 2**20

    low, high = constant_estimate_interval(64, 2**20, 5)
    assert low < 2**20 < high


def test_trial_schedule() -> None:
    assert trial_schedule(8) == (24, 12)
    assert trial_schedule(9, 2) == (64, 32)
    assert trial_schedule(2) == (8, 4)


def test_config_validation() -> None:
    """Verify invalid run parameters are configuration errors.

    :return: None
    :rtype: None
    """
    with pytest.raises(ConfigurationError, match="Unknown mode"):
        AcountConfig(mode="exhaustive")  # type: ignore[arg-type]
    with pytest.raises(ConfigurationError, match="delta"):
        AcountConfig(mode=CountingMode.HYBRID)
    with pytest.raises(ConfigurationError):
        AcountConfig(mode=CountingMode.HYBRID, delta=1.0)
    with pytest.raises(ConfigurationError):
        AcountConfig(k=0)
    with pytest.raises(ConfigurationError):
        AcountConfig(workers=0)
    with pytest.raises(ConfigurationError):
        AcountConfig(reps_multiplier=0)
    assert AcountConfig(mode="fixed_k").mode is CountingMode.FIXED_K  # type: ignore[arg-type]


def test_resolve_k_defaults_per_mode() -> None:
    assert AcountConfig(k=3).resolve_k(50) == 3
    assert AcountConfig(mode=CountingMode.FIXED_K).resolve_k(50) == 5
    assert AcountConfig(mode=CountingMode.FIXED_K).resolve_k(4) == 4
    assert AcountConfig().resolve_k(64) == 39


def test_acount_returns_zero_for_unsatisfiable_input() -> None:
    """Verify the satisfiability pre-check short-circuits the scan.

    :return: None
    :rtype: None
    """
    estimate = acount(parse_dimacs(UNSAT_TEXT), _relaxed(k=3), DpllSolver())

    assert estimate.estimate == 0
    assert estimate.stopped_at_l == 0
    assert estimate.oracle_queries == 1
    assert estimate.trials_log == ()
    assert not estimate.aborted


def test_acount_rejects_out_of_regime_parameters() -> None:
    """Verify the width checks on ``k``.

    :return: None
    :rtype: None
    """
    formula = free_variable_cnf(8, 2)

    with pytest.raises(ConfigurationError, match="below 4"):
        acount(formula, AcountConfig(k=7, seed=1), DpllSolver())
    with pytest.raises(ConfigurationError, match="exceeds n"):
        acount(formula, _relaxed(k=8), DpllSolver())
    with pytest.raises(ConfigurationError, match="at least 2 variables"):
        acount(Cnf(n=1), _relaxed(k=1), DpllSolver())


def test_acount_relaxed_regime_logs_warning(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="local_hash_counter.counter"):
        acount(parse_dimacs(UNSAT_TEXT), _relaxed(k=3), DpllSolver())

    assert "regime check is relaxed" in caplog.text


def test_acount_estimate_is_close_to_true_count() -> None:
    """Verify a seeded run lands within a factor four of ``s = 8``.

    :return: None
    :rtype: None
    """
    estimate = acount(free_variable_cnf(8, 5), _relaxed(), DpllSolver())

    assert 2 <= estimate.estimate <= 32
    assert estimate.estimate == 1 << (estimate.stopped_at_l - 1)
    assert len(estimate.trials_log) == estimate.stopped_at_l
    assert all(tally.trials == 24 for tally in estimate.trials_log)
    assert estimate.trials_log[-1].unsat > 12
    assert all(tally.unsat <= 12 for tally in estimate.trials_log[:-1])
    assert estimate.p == pytest.approx(0.5)
    assert estimate.kappa == pytest.approx(kappa_for(8, 7))
    assert estimate.seed == 1234


def test_acount_is_reproducible_across_worker_counts() -> None:
    """Verify records match for one seed regardless of threading.

    :return: None
    :rtype: None
    """
    formula = free_variable_cnf(8, 4)

    serial = acount(formula, _relaxed(workers=1), DpllSolver())
    threaded = acount(formula, _relaxed(workers=4), DpllSolver())

    assert serial.to_record(include_timing=False) == threaded.to_record(include_timing=False)


def test_acount_aborts_after_repeated_oversized_rows() -> None:
    """Verify a row wider than ``k`` on every redraw aborts the run.

    :return: None
    :rtype: None
    """
    estimate = acount(free_variable_cnf(8, 2), _relaxed(k=1, max_redraws=0), DpllSolver())

    assert estimate.aborted
    assert estimate.estimate == 0
    assert "wider than k=1" in estimate.abort_reason
    assert estimate.stopped_at_l >= 1


def test_acount_raises_on_unknown_oracle_answer() -> None:
    with pytest.raises(OracleError, match="gave up"):
        acount(free_variable_cnf(4, 1), _relaxed(k=3), _UnknownOracle())


def test_acount_constant_uses_fixed_size_rows() -> None:
    """Verify the constant-width counter reports its mode and no bias.

    :return: None
    :rtype: None
    """
    cfg = _relaxed(k=5, mode=CountingMode.FIXED_K)

    estimate = acount_constant(free_variable_cnf(8, 4), cfg, DpllSolver())

    assert estimate.mode == "fixed_k"
    assert estimate.p is None
    assert estimate.k == 5
    assert estimate.estimate == 0 or estimate.estimate == 1 << (estimate.stopped_at_l - 1)
    with pytest.raises(ConfigurationError):
        acount_constant(
            free_variable_cnf(4, 0), _relaxed(k=5, mode=CountingMode.FIXED_K), DpllSolver()
        )


def test_hybrid_counts_small_formulas_exactly() -> None:
    """Verify counts up to ``floor(2^(delta n))`` take the exact path.

    :return: None
    :rtype: None
    """
    cfg = _relaxed(mode=CountingMode.HYBRID, delta=0.5)

    below = hybrid_count(free_variable_cnf(8, 5), 0.5, cfg, DpllSolver())
    at_cap = hybrid_count(free_variable_cnf(8, 4), 0.5, cfg, DpllSolver())
    small_cfg = _relaxed(k=3, mode=CountingMode.HYBRID, delta=0.5)
    unsat = hybrid_count(parse_dimacs(UNSAT_TEXT), 0.5, small_cfg, DpllSolver())

    assert below.estimate == 8 and below.exact_path
    assert at_cap.estimate == 16 and at_cap.exact_path
    assert unsat.estimate == 0 and unsat.exact_path
    assert below.stopped_at_l == 0


def test_hybrid_adds_rows_for_large_counts() -> None:
    """Verify large counts are scaled from a residual below the cap.

    Every kept row splits the free-variable cell in half, so the scaled
    residual is exact.

    :return: None
    :rtype: None
    """
    cfg = _relaxed(mode=CountingMode.HYBRID, delta=0.5)

    estimate = hybrid_count(free_variable_cnf(8, 2), 0.5, cfg, DpllSolver())

    assert not estimate.exact_path
    assert estimate.stopped_at_l == 3
    assert estimate.estimate == 64
    assert estimate.p == pytest.approx(0.25)
    assert len(estimate.trials_log) == estimate.stopped_at_l
    assert all(tally.sat == 1 for tally in estimate.trials_log)


def test_hybrid_is_accurate_above_the_cap_with_sparse_rows() -> None:
    """Verify sparse rows at ``n = 16`` do not collapse the estimate to 0.

    With ``delta = 0.25`` rows have bias 1/8, so empty and repeated supports
    are common; they must be redrawn rather than counted.

    :return: None
    :rtype: None
    """
    n, delta = 16, 0.25
    s = 1 << n
    cfg = _relaxed(k=n - 1, mode=CountingMode.HYBRID, delta=delta)

    summary = run_repeated(
        lambda f, c, o, r: hybrid_count(f, delta, c, o, r),
        free_variable_cnf(n, 0),
        cfg,
        DpllSolver(),
        15,
        make_rng(7),
        interval=(s / 2, 3 * s / 2),
    )

    assert s / 2 <= summary.median <= 2 * s
    assert summary.in_interval is not None and summary.in_interval > 0.5
    assert 0 not in summary.histogram
    assert summary.aborted_runs == 0


def test_hybrid_redraws_rows_over_pinned_variables() -> None:
    """Verify rows that cannot split the cell are redrawn, not kept.

    Half the variables are pinned by unit clauses; a row over pinned
    variables alone either keeps or empties the cell.

    :return: None
    :rtype: None
    """
    formula = free_variable_cnf(16, 8)
    cfg = _relaxed(k=15, mode=CountingMode.HYBRID, delta=0.25)

    estimates = [
        hybrid_count(formula, 0.25, cfg, DpllSolver(), make_rng(seed)) for seed in range(6)
    ]

    assert [e.estimate for e in estimates] == [256] * 6
    assert sum(t.unsat for e in estimates for t in e.trials_log) > 0
    for estimate in estimates:
        assert all(t.trials == t.unsat + 1 for t in estimate.trials_log)


def test_hybrid_rejects_bad_delta() -> None:
    with pytest.raises(ConfigurationError):
        hybrid_count(free_variable_cnf(4, 0), 0.0, _relaxed(k=3), DpllSolver())


def test_run_counter_dispatches_on_mode() -> None:
    """Verify each mode reaches its counter.

    :return: None
    :rtype: None
    """
    formula = parse_dimacs(UNSAT_TEXT)

    for mode, extra in (
        (CountingMode.BERNOULLI, {}),
        (CountingMode.FIXED_K, {}),
        (CountingMode.HYBRID, {"delta": 0.5}),
    ):
        estimate = run_counter(formula, _relaxed(k=3, mode=mode, **extra), DpllSolver())
        assert estimate.mode == mode.value


def test_run_repeated_summarizes_estimates() -> None:
    """Verify the median, histogram and interval fraction over fake runs.

    :return: None
    :rtype: None
    """
    values = iter([4, 8, 8, 16, 64])
    calls: list[tuple[int | None, np.random.Generator | None]] = []

    def fake_counter(
        formula: Cnf, cfg: AcountConfig, oracle: object, rng: np.random.Generator | None
    ) -> CountEstimate:
        calls.append((cfg.seed, rng))
        return CountEstimate(estimate=next(values), stopped_at_l=1, mode="bernoulli", seed=None)

    summary = run_repeated(
        fake_counter, Cnf(n=2), AcountConfig(), DpllSolver(), 5, make_rng(3), interval=(4, 16)
    )

    assert summary.median == 8.0
    assert summary.histogram == {4: 1, 8: 2, 16: 1, 64: 1}
    assert summary.in_interval == pytest.approx(0.8)
    assert summary.aborted_runs == 0
    assert len(list(summary)) == 5
    assert all(rng is None for _, rng in calls)
    assert len({seed for seed, _ in calls}) == 5
    assert None not in {seed for seed, _ in calls}
    with pytest.raises(ConfigurationError):
        run_repeated(fake_counter, Cnf(n=2), AcountConfig(), DpllSolver(), 0, make_rng(3))


def test_run_repeated_is_seed_deterministic() -> None:
    formula = free_variable_cnf(6, 3)
    cfg = _relaxed(k=5)

    first = run_repeated(acount, formula, cfg, DpllSolver(), 3, make_rng(77))
    second = run_repeated(acount, formula, cfg, DpllSolver(), 3, make_rng(77))

    assert [e.estimate for e in first] == [e.estimate for e in second]


def test_run_repeated_records_a_replayable_seed_per_run() -> None:
    """Verify each repeat's recorded seed reproduces that repeat on its own.

    :return: None
    :rtype: None
    """
    formula = free_variable_cnf(6, 2)
    cfg = _relaxed(k=5)

    summary = run_repeated(acount, formula, cfg, DpllSolver(), 3, make_rng(77))

    seeds = [estimate.seed for estimate in summary]
    assert len(set(seeds)) == 3 and cfg.seed not in seeds
    for estimate in summary:
        replay = acount(formula, _relaxed(k=5, seed=estimate.seed), DpllSolver())
        assert replay.estimate == estimate.estimate
        assert replay.trials_log == estimate.trials_log
