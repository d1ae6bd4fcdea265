"""Unit tests for the acceptance suite runner."""

from __future__ import annotations

import io

import numpy as np
import pytest

from local_hash_counter import selftest
from local_hash_counter.errors import ConfigurationError
from local_hash_counter.fourier import ExtractionReport
from local_hash_counter.selftest import CRITERIA, CriterionOutcome, print_summary, run_selftest


def test_criteria_registry_names() -> None:
    assert list(CRITERIA)[0] == "fourier-identity"
    assert {"xor-encoding", "counter", "hybrid", "unsat", "determinism"} <= set(CRITERIA)


@pytest.mark.parametrize("name", ["xor-encoding", "A-bound", "fourier-identity", "determinism"])
def test_cheap_criteria_pass_in_fast_mode(name: str) -> None:
    """Verify the quick criteria pass on the default seed.

    :param name: Criterion name.
    :type name: str
    :return: None
    :rtype: None
    """
    (outcome,) = run_selftest(fast=True, only=[name])

    assert outcome.name == name
    assert outcome.passed, outcome.detail
    assert outcome.seconds >= 0.0


def test_unsat_criterion_passes_in_fast_mode() -> None:
    (outcome,) = run_selftest(fast=True, only=["unsat"])

    assert outcome.passed, outcome.detail
    assert outcome.detail.startswith("10 instance(s)")


def test_extraction_reports_settings_without_an_applicable_bound(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """Verify settings outside the bound's hypotheses are listed, not counted as checked.

    :param monkeypatch: Pytest monkeypatch fixture.
    :type monkeypatch: pytest.MonkeyPatch
    :return: None
    :rtype: None
    """

    def fake_estimate(support, n, sampler, m, eps, trials, rng):  # type: ignore[no-untyped-def]
        if m == 2:
            return ExtractionReport(150, trials, None, "not applicable: P=1.2 >= 1")
        return ExtractionReport(trials, trials, 0.5, "(1 - P)^m with P=0.2")

    monkeypatch.setattr(selftest, "extraction_estimate", fake_estimate)

    passed, detail = selftest._extraction(True, np.random.default_rng(0))  # noqa: SLF001

    assert passed
    assert detail.startswith("6 setting(s) x 200 draws checked against the bound")
    assert "bound not applicable, frequency only: bernoulli t=7 m=2 (0.750)" in detail
    assert detail.count("m=2") == 6


def test_extraction_fails_when_a_frequency_is_below_the_bound(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    def fake_estimate(support, n, sampler, m, eps, trials, rng):  # type: ignore[no-untyped-def]
        return ExtractionReport(10, trials, 0.9, "(1 - Q)^m with Q=0.05")

    monkeypatch.setattr(selftest, "extraction_estimate", fake_estimate)

    passed, detail = selftest._extraction(True, np.random.default_rng(0))  # noqa: SLF001

    assert not passed
    assert "below bound: bernoulli t=7 m=2 (0.050 < 0.900)" in detail


@pytest.mark.slow
def test_counter_criterion_reports_the_unmet_entropy_band() -> None:
    """Verify the counter criterion says which interval it asserted.

    :return: None
    :rtype: None
    """
    (outcome,) = run_selftest(fast=True, only=["counter"])

    assert outcome.passed, outcome.detail
    assert "unmet for 3 formula(s) at k=9, checked against [s/4, 4s]" in outcome.detail


@pytest.mark.slow
def test_hybrid_criterion_checks_medians_above_the_cap() -> None:
    (outcome,) = run_selftest(fast=True, only=["hybrid"])

    assert outcome.passed, outcome.detail
    assert "2 above-cap count(s) x 11 run(s), medians off: none" in outcome.detail


def test_outcomes_follow_registry_order() -> None:
    outcomes = run_selftest(fast=True, only=["determinism", "xor-encoding"])

    assert [outcome.name for outcome in outcomes] == ["xor-encoding", "determinism"]


def test_unknown_criterion_is_rejected() -> None:
    with pytest.raises(ConfigurationError, match="Unknown criterion"):
        run_selftest(only=["xor-encoding", "telepathy"])


def test_raising_criterion_fails_only_itself(monkeypatch: pytest.MonkeyPatch) -> None:
    """Verify an exception is reported as a failed criterion.

    :param monkeypatch: Pytest monkeypatch fixture.
    :type monkeypatch: pytest.MonkeyPatch
    :return: None
    :rtype: None
    """

    def broken(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
        raise ArithmeticError("bad bound")

    monkeypatch.setitem(selftest.CRITERIA, "locality", broken)

    outcomes = run_selftest(fast=True, only=["xor-encoding", "locality"])

    assert [outcome.passed for outcome in outcomes] == [True, False]
    assert outcomes[1].detail == "raised ArithmeticError: bad bound"


def test_criteria_receive_seeded_streams(monkeypatch: pytest.MonkeyPatch) -> None:
    draws: list[int] = []

    def recorder(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
        draws.append(int(rng.integers(0, 1 << 30)))
        return True, "ok"

    monkeypatch.setitem(selftest.CRITERIA, "locality", recorder)

    run_selftest(only=["locality"], seed=3)
    run_selftest(only=["locality"], seed=3)
    run_selftest(only=["locality"], seed=4)

    assert draws[0] == draws[1]
    assert draws[0] != draws[2]


def test_print_summary_table() -> None:
    """Verify one row per outcome and the closing tally.

    :return: None
    :rtype: None
    """
    stream = io.StringIO()
    outcomes = [
        CriterionOutcome("xor-encoding", True, "326 rows, 0 mismatch(es)", 0.25),
        CriterionOutcome("chain", False, "no conditioned instance", 1.5),
    ]

    print_summary(outcomes, stream)

    lines = stream.getvalue().splitlines()
    assert lines[0].startswith("criterion")
    assert lines[1].startswith("xor-encoding  PASS")
    assert lines[2].startswith("chain         FAIL")
    assert lines[-1] == "1/2 criteria passed"


@pytest.mark.slow
def test_full_fast_suite_passes() -> None:
    outcomes = run_selftest(fast=True)

    assert len(outcomes) == len(CRITERIA)
    assert all(outcome.passed for outcome in outcomes), [
        (outcome.name, outcome.detail) for outcome in outcomes if not outcome.passed
    ]
