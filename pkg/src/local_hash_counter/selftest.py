"""Acceptance suite behind ``lhcount selftest``.

Each criterion compares an implementation path against an exact oracle or a
closed-form bound on a seeded corpus and reports pass or fail with a short
detail string. ``fast`` shrinks every corpus to a smoke-test size.
"""

from __future__ import annotations

import itertools
import logging
import math
import sys
import time
from dataclasses import dataclass
from typing import Callable, Final, Sequence, TextIO

import numpy as np

from local_hash_counter import hashing
from local_hash_counter.checkers import (
    ABoundChecker,
    AnalysisSettings,
    ContractiveChecker,
    FourierIdentityChecker,
)
from local_hash_counter.cnf import Clause, Cnf, Literal, free_variable_cnf, random_k_cnf
from local_hash_counter.counter import (
    AcountConfig,
    CountingMode,
    acount,
    acount_constant,
    estimate_interval,
    default_k,
    hybrid_count,
    kappa_for,
    run_repeated,
)
from local_hash_counter.errors import ConfigurationError
from local_hash_counter.fourier import (
    HypercubeDistribution,
    SignedFunction,
    check_conditioning_chain,
    check_kkl_bound,
    entropy_profile,
    expected_abs_coeff_fixed_k,
    expected_abs_coeff_mu_p,
    extraction_estimate,
    fixed_k_bound,
    fourier_coefficients,
    mu_p_bound,
)
from local_hash_counter.rng import make_rng
from local_hash_counter.solver import DpllSolver, exact_count, solution_mask

_LOG = logging.getLogger(__name__)

DEFAULT_SEED: Final[int] = 20240601
RELATIVE_SLACK: Final[float] = 1e-9


@dataclass(frozen=True)
class CriterionOutcome:
    """Result of one acceptance criterion.

    :param name: Criterion name.
    :type name: str
    :param passed: Whether the criterion holds.
    :type passed: bool
    :param detail: Short human-readable summary.
    :type detail: str
    :param seconds: Wall-clock time.
    :type seconds: float
    """

    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


Criterion = Callable[[bool, np.random.Generator], tuple[bool, str]]


def _violations(results: Sequence[object]) -> int:
    return sum(1 for result in results if not getattr(result, "holds"))


def _fourier_identity(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    checker = FourierIdentityChecker()
    results = []
    for _ in range(50 if fast else 500):
        n = int(rng.integers(1, 13))
        results.extend(checker.run(AnalysisSettings(n=n, trials=1), rng))
    bad = _violations(results)
    return bad == 0, f"{len(results)} instances, {bad} disagreement(s)"


def _contractive(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    checker = ContractiveChecker()
    results = []
    for _ in range(40 if fast else 500):
        n = int(rng.integers(1, 11))
        results.extend(checker.run(AnalysisSettings(n=n, trials=1), rng))
    bad = _violations(results)
    worst = min(result.margin for result in results)
    return bad == 0, f"{len(results)} pairs, {bad} violation(s), min margin {worst:.3e}"


def _a_bound(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    grid = (5, 5) if fast else (20, 20)
    results = list(ABoundChecker().run(AnalysisSettings(grid=grid), rng))
    bad = _violations(results)
    return bad == 0, f"{len(results)} grid points, {bad} violation(s)"


def _flat_and_mixture_corpus(
    fast: bool, rng: np.random.Generator
) -> list[HypercubeDistribution]:
    dims = (8,) if fast else (8, 10, 12)
    per_size = 2 if fast else 50
    corpus = []
    for n in dims:
        for t in range(n + 1):
            corpus.extend(
                HypercubeDistribution.random_flat(n, 1 << t, rng) for _ in range(per_size)
            )
    for _ in range(10 if fast else 100):
        n = int(rng.choice(dims))
        t = int(rng.integers(0, n + 1))
        corpus.append(HypercubeDistribution.random_mixture(n, t, 3, rng))
    return corpus


def _mu_p(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    bad = total = 0
    for f in _flat_and_mixture_corpus(fast, rng):
        relative = entropy_profile(f).relative
        for p in (0.1, 0.25, 0.5):
            total += 1
            value = expected_abs_coeff_mu_p(f, p).value
            bound = mu_p_bound(f.n, p, relative)
            if value > bound + RELATIVE_SLACK * bound:
                bad += 1
    return bad == 0, f"{total} instances, {bad} violation(s)"


def _fixed_k_and_kkl(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    bad = total = 0
    for f in _flat_and_mixture_corpus(fast, rng):
        t = entropy_profile(f).min_entropy
        for k in (2, 3, 4):
            total += 1
            value = expected_abs_coeff_fixed_k(f, k).value
            bound = fixed_k_bound(f.n, t, k, 0.5)
            if value > bound + RELATIVE_SLACK * bound:
                bad += 1

    kkl_bad = parseval_bad = 0
    deltas = [round(0.1 * i, 1) for i in range(1, 10)]
    for _ in range(20 if fast else 200):
        g = SignedFunction.random(int(rng.integers(1, 11)), rng)
        kkl_bad += sum(1 for delta in deltas if not check_kkl_bound(g, delta).holds)
        energy = float(np.sum(fourier_coefficients(g) ** 2))
        if abs(energy - g.support_size / (1 << g.n)) > 1e-12:
            parseval_bad += 1
    ok = bad == 0 and kkl_bad == 0 and parseval_bad == 0
    return ok, (
        f"fixed-k {total} instances {bad} violation(s); "
        f"kkl {kkl_bad} violation(s); parseval {parseval_bad} mismatch(es)"
    )


def _chain(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    wanted = 30 if fast else 200
    found = bad = attempts = 0
    while found < wanted and attempts < 20 * wanted:
        attempts += 1
        n = int(rng.integers(8, 15))
        m = int(rng.integers(1, 5))
        t = int(rng.integers(m + 2, n + 1))
        f = HypercubeDistribution.random_flat(n, 1 << t, rng)
        p = float(rng.choice([0.25, 0.5]))
        h = hashing.build_hash(n, m, hashing.BernoulliRowSampler(p), rng)
        report = check_conditioning_chain(f, h, 0.5)
        if not report.condition_holds:
            continue
        found += 1
        if not report.conclusions_hold:
            bad += 1
    detail = f"{found} conditioned instance(s) in {attempts} draw(s), {bad} violation(s)"
    return found > 0 and bad == 0, detail


def _extraction(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    n = 14 if fast else 20
    draws = 200 if fast else 2000
    row_counts = (2, 4) if fast else tuple(range(1, 7))
    k = default_k(n)
    samplers = [hashing.BernoulliRowSampler((k + 1) / (2.0 * n)), hashing.FixedSizeRowSampler(5)]
    checked = 0
    failures: list[str] = []
    skipped: list[str] = []
    for relative in (0.5, 0.75, 1.0):
        t = int(round(relative * n))
        support = rng.choice(1 << n, size=1 << t, replace=False)
        for sampler in samplers:
            for m in row_counts:
                label = f"{sampler.family} t={t} m={m}"
                report = extraction_estimate(support, n, sampler, m, 0.5, draws, rng)
                if not report.applicable:
                    skipped.append(f"{label} ({report.frequency:.3f})")
                    continue
                checked += 1
                if not report.meets_bound:
                    failures.append(
                        f"{label} ({report.frequency:.3f} < {report.analytic_bound:.3f})"
                    )
    detail = f"{checked} setting(s) x {draws} draws checked against the bound"
    if skipped:
        detail += f"; bound not applicable, frequency only: {', '.join(skipped)}"
    if failures:
        detail += f"; below bound: {', '.join(failures)}"
    return not failures, detail


def _xor_encoding(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    n = 8
    largest = 4 if fast else 6
    points = np.arange(1 << n, dtype=np.int64)
    checked = mismatches = 0
    for size in range(largest + 1):
        for support in itertools.combinations(range(1, n + 1), size):
            for target in (0, 1):
                row = hashing.XorConstraint(support, target)
                encoded = solution_mask(hashing.xor_to_cnf(row, n))
                checked += 1
                if not np.array_equal(encoded, row.parity(points) == target):
                    mismatches += 1
    return mismatches == 0, f"{checked} rows, {mismatches} mismatch(es)"


def _known_count_corpus(
    n: int, exponents: Sequence[int], random_formulas: int, rng: np.random.Generator
) -> list[tuple[Cnf, int]]:
    corpus = [(free_variable_cnf(n, n - e), 1 << e) for e in exponents]
    while len(corpus) < len(exponents) + random_formulas:
        formula = random_k_cnf(n, int(rng.integers(1, n // 2 + 1)), 3, rng)
        count = exact_count(formula)
        if count >= 1 << (n // 2):
            corpus.append((formula, count))
    return corpus


def _counter_end_to_end(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    n = 10 if fast else 16
    exponents = (6, 9) if fast else tuple(range(8, 17))
    runs = 8 if fast else 100
    corpus = _known_count_corpus(n, exponents, 1 if fast else 20, rng)
    oracle = DpllSolver()
    k = n - 1
    cfg = AcountConfig(k=k, enforce_regime=False)
    kappa = kappa_for(n, k)
    band = n / kappa + 3.0
    worst = 1.0
    outside_band = 0
    for formula, s in corpus:
        if math.log2(s) > band:
            interval = estimate_interval(n, s, kappa)
        else:
            # The guaranteed lower end is below 1 here; hold the run to [s/4, 4s].
            outside_band += 1
            interval = (s / 4.0, 4.0 * s)
        summary = run_repeated(acount, formula, cfg, oracle, runs, rng, interval)
        assert summary.in_interval is not None
        worst = min(worst, summary.in_interval)
    detail = f"{len(corpus)} formula(s) x {runs} run(s), worst in-interval fraction {worst:.2f}"
    if outside_band:
        detail += (
            f"; log2 s > n/kappa + 3 = {band:.1f} unmet for {outside_band} formula(s) "
            f"at k={k}, checked against [s/4, 4s]"
        )
    return worst >= 0.25, detail


def _hybrid(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    oracle = DpllSolver()
    delta = 0.25
    exact_errors = checked = 0
    for _ in range(10 if fast else 40):
        n = int(rng.integers(6, 13 if fast else 19))
        formula = random_k_cnf(n, int(4.3 * n), 3, rng)
        s = exact_count(formula)
        cfg = AcountConfig(k=n - 1, mode=CountingMode.HYBRID, delta=delta, enforce_regime=False)
        if s > math.floor(2.0 ** (delta * n)):
            continue
        checked += 1
        if hybrid_count(formula, delta, cfg, oracle, rng).estimate != s:
            exact_errors += 1

    n = 12 if fast else 16
    runs = 11 if fast else 51
    exponents = (6, 12) if fast else tuple(range(8, 17))
    cfg = AcountConfig(k=n - 1, mode=CountingMode.HYBRID, delta=delta, enforce_regime=False)
    off = []
    for e in exponents:
        s = 1 << e
        summary = run_repeated(
            lambda f, c, o, r: hybrid_count(f, delta, c, o, r),
            free_variable_cnf(n, n - e), cfg, oracle, runs, rng,
        )
        if not s / 2 <= summary.median <= 2 * s:
            off.append(f"s=2^{e} median={summary.median}")
    ok = exact_errors == 0 and not off
    detail = (
        f"{checked} below-cap formula(s), {exact_errors} inexact; "
        f"{len(exponents)} above-cap count(s) x {runs} run(s), medians off: {off or 'none'}"
    )
    return ok, detail


def _unsat_instances(count: int, rng: np.random.Generator) -> list[Cnf]:
    instances = [Cnf(n=4, clauses=(Clause((Literal(1),)), Clause((Literal(1, False),))))]
    while len(instances) < count:
        formula = random_k_cnf(8, 80, 3, rng)
        if exact_count(formula) == 0:
            instances.append(formula)
    return instances


def _unsatisfiable(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    oracle = DpllSolver()
    wrong = 0
    instances = _unsat_instances(10 if fast else 50, rng)
    for formula in instances:
        estimates = (
            acount(formula, AcountConfig(k=formula.n - 1, enforce_regime=False), oracle, rng),
            acount_constant(
                formula,
                AcountConfig(k=min(5, formula.n), mode=CountingMode.FIXED_K, enforce_regime=False),
                oracle,
                rng,
            ),
            hybrid_count(
                formula,
                0.5,
                AcountConfig(
                    k=formula.n - 1, mode=CountingMode.HYBRID, delta=0.5, enforce_regime=False
                ),
                oracle, rng,
            ),
        )
        wrong += sum(1 for estimate in estimates if estimate.estimate != 0)
    return wrong == 0, f"{len(instances)} instance(s), {wrong} non-zero estimate(s)"


def _locality(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    draws = 2_000 if fast else 10_000
    parts, ok = [], True
    for n in (64, 128):
        k = default_k(n)
        fraction, error = hashing.locality_rate(n, k, (k + 1) / (2.0 * n), n, draws, rng)
        ok = ok and fraction >= 7.0 / 8.0 - 3.0 * error
        parts.append(f"n={n} k={k}: {fraction:.4f}")
    return ok, ", ".join(parts)


def _determinism(fast: bool, rng: np.random.Generator) -> tuple[bool, str]:
    formula = free_variable_cnf(8, 3)
    oracle = DpllSolver()
    seed = int(rng.integers(0, 1 << 31))
    records = []
    for workers in (1, 1, 4):
        cfg = AcountConfig(k=7, seed=seed, workers=workers, enforce_regime=False)
        records.append(acount(formula, cfg, oracle).to_record(include_timing=False))
    same = all(record == records[0] for record in records)
    return same, f"seed {seed}: {'identical' if same else 'differing'} records across 3 runs"


CRITERIA: Final[dict[str, Criterion]] = {
    "fourier-identity": _fourier_identity,
    "contractive": _contractive,
    "A-bound": _a_bound,
    "mu-p": _mu_p,
    "fixed-k-kkl": _fixed_k_and_kkl,
    "chain": _chain,
    "extraction": _extraction,
    "xor-encoding": _xor_encoding,
    "counter": _counter_end_to_end,
    "hybrid": _hybrid,
    "unsat": _unsatisfiable,
    "locality": _locality,
    "determinism": _determinism,
}


def run_selftest(
    fast: bool = False,
    only: Sequence[str] | None = None,
    seed: int = DEFAULT_SEED,
) -> list[CriterionOutcome]:
    """Run the selected criteria in registry order.

    An exception inside a criterion fails that criterion only.

    :param fast: Use smoke-test corpus sizes.
    :type fast: bool
    :param only: Criterion names to run; ``None`` runs all.
    :type only: Sequence[str] | None
    :param seed: Master seed; each criterion gets its own stream.
    :type seed: int
    :return: One outcome per criterion.
    :rtype: list[CriterionOutcome]
    :raises ConfigurationError: For an unknown criterion name.
    """
    selected = list(CRITERIA) if not only else list(only)
    unknown = [name for name in selected if name not in CRITERIA]
    if unknown:
        raise ConfigurationError(
            f"Unknown criterion(s) {', '.join(unknown)}; valid names: {', '.join(CRITERIA)}"
        )

    outcomes = []
    for index, name in enumerate(CRITERIA):
        if name not in selected:
            continue
        started = time.perf_counter()
        try:
            passed, detail = CRITERIA[name](fast, make_rng(seed + index))
        except Exception as exc:
            _LOG.exception("Criterion %s raised", name)
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - started
        _LOG.info("%s: %s (%.1fs) %s", name, "PASS" if passed else "FAIL", elapsed, detail)
        outcomes.append(CriterionOutcome(name, passed, detail, elapsed))
    return outcomes


def print_summary(outcomes: Sequence[CriterionOutcome], stream: TextIO | None = None) -> None:
    """Write a fixed-width summary table."""
    target = stream if stream is not None else sys.stderr
    width = max((len(outcome.name) for outcome in outcomes), default=4)
    target.write(f"{'criterion':<{width}}  result  seconds  detail\n")
    for outcome in outcomes:
        status = "PASS" if outcome.passed else "FAIL"
        target.write(
            f"{outcome.name:<{width}}  {status:<6}  {outcome.seconds:7.1f}  {outcome.detail}\n"
        )
    failed = sum(1 for outcome in outcomes if not outcome.passed)
    target.write(f"{len(outcomes) - failed}/{len(outcomes)} criteria passed\n")
