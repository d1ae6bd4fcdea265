"""Analysis checker strategies that sweep the Fourier inequalities."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Final, Iterator, Protocol, Sequence, runtime_checkable

import numpy as np

from local_hash_counter.counter import default_k
from local_hash_counter.errors import ConfigurationError
from local_hash_counter.fourier import (
    A_of,
    HypercubeDistribution,
    SignedFunction,
    check_conditioning_chain,
    check_contractive,
    check_kkl_bound,
    entropy_profile,
    expected_abs_coeff_fixed_k,
    expected_abs_coeff_mu_p,
    extraction_estimate,
    fixed_k_bound,
    flat_decompose,
    fourier_coefficient,
    a_closed_form_bound,
    mu_p_bound,
    normalized_coefficient,
    parity_bias,
)
from local_hash_counter.hashing import BernoulliRowSampler, FixedSizeRowSampler, build_hash
from local_hash_counter.models import CheckResult

_LOG = logging.getLogger(__name__)

IDENTITY_TOLERANCE: Final[float] = 1e-12
DECOMPOSE_TOLERANCE: Final[float] = 1e-10
RELATIVE_SLACK: Final[float] = 1e-9
CHAIN_MAX_N: Final[int] = 14


@dataclass(frozen=True)
class AnalysisSettings:
    """Parameters shared by the analysis checkers.

    :param n: Cube dimension of random instances.
    :type n: int
    :param trials: Random instances per checker.
    :type trials: int
    :param seed: Master seed; echoed in the records by the caller.
    :type seed: int | None
    :param p_values: Row biases cycled through by the checkers.
    :type p_values: tuple[float, ...]
    :param alphas: Exponents ``alpha`` for the contractive inequality.
    :type alphas: tuple[float, ...]
    :param deltas: Noise rates for the KKL bound.
    :type deltas: tuple[float, ...]
    :param ks: Subset sizes for the fixed-size bound.
    :type ks: tuple[int, ...]
    :param zeta: ``zeta`` in ``(0, 1)`` for the fixed-size bound.
    :type zeta: float
    :param grid: ``(alpha steps, p steps)`` of the A-bound sweep.
    :type grid: tuple[int, int]
    :param m: Hash rows for the chain and extraction checkers.
    :type m: int
    :param eta: Balance tolerance of the conditioning chain.
    :type eta: float
    :param eps: Relative tolerance of the extraction property.
    :type eps: float
    :param hash_draws: Hash draws per extraction instance.
    :type hash_draws: int
    """

    n: int = 8
    trials: int = 20
    seed: int | None = None
    p_values: tuple[float, ...] = (0.1, 0.25, 0.5)
    alphas: tuple[float, ...] = (0.05, 1.0 / 9.0)
    deltas: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
    ks: tuple[int, ...] = (2, 3, 4)
    zeta: float = 0.5
    grid: tuple[int, int] = (20, 20)
    m: int = 3
    eta: float = 0.5
    eps: float = 0.5
    hash_draws: int = 200
    relative_entropies: tuple[float, ...] = (0.5, 0.75, 1.0)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"n must be positive, got {self.n}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be positive, got {self.trials}")
        if any(not 0.0 < p <= 0.5 for p in self.p_values):
            raise ConfigurationError(f"Every p must lie in (0, 1/2], got {self.p_values}")
        if any(not 0.0 < a <= 1.0 for a in self.alphas):
            raise ConfigurationError(f"Every alpha must lie in (0, 1], got {self.alphas}")
        if any(not 0.0 <= d <= 1.0 for d in self.deltas):
            raise ConfigurationError(f"Every delta must lie in [0, 1], got {self.deltas}")
        if not 0.0 < self.zeta < 1.0:
            raise ConfigurationError(f"zeta must lie in (0, 1), got {self.zeta}")
        if min(self.grid) < 1:
            raise ConfigurationError(f"Grid dimensions must be positive, got {self.grid}")
        if self.m < 1:
            raise ConfigurationError(f"m must be positive, got {self.m}")
        if not 0.0 < self.eta < 1.0 or not 0.0 < self.eps < 1.0:
            raise ConfigurationError("eta and eps must lie in (0, 1)")


@runtime_checkable
class Checker(Protocol):
    """Protocol for analysis checker strategies."""

    name: str

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        """Evaluate the inequality on a sweep of instances.

        :param settings: Shared sweep parameters.
        :type settings: AnalysisSettings
        :param rng: Random stream.
        :type rng: numpy.random.Generator
        :return: One result per instance.
        :rtype: Iterator[CheckResult]
        """
        ...


def _within(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + RELATIVE_SLACK * abs(rhs)


def _random_distribution(n: int, rng: np.random.Generator) -> HypercubeDistribution:
    return HypercubeDistribution.from_weights(n, rng.random(1 << n))


def _entropy_corpus(
    n: int, trials: int, rng: np.random.Generator
) -> Iterator[tuple[str, HypercubeDistribution]]:
    """Flat supports of every size ``2 ** t``, then min-entropy ``t`` mixtures."""
    for index in range(trials):
        t = index % (n + 1)
        if index // (n + 1) % 2 == 0:
            yield "flat", HypercubeDistribution.random_flat(n, 1 << t, rng)
        else:
            yield "mixture", HypercubeDistribution.random_mixture(n, t, 3, rng)


class FourierIdentityChecker:
    """Compare the defining expectation of ``f~(S)`` with the parity bias."""

    name: str = "fourier-identity"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = settings.n
        for _ in range(settings.trials):
            f = _random_distribution(n, rng)
            mask = int(rng.integers(0, 1 << n))
            via_expectation = normalized_coefficient(f, mask)
            via_bias = parity_bias(f, mask)
            yield CheckResult(
                checker=self.name,
                params={"n": n, "subset_mask": mask, "coefficient": fourier_coefficient(f, mask)},
                lhs=abs(via_expectation - via_bias),
                rhs=IDENTITY_TOLERANCE,
                holds=abs(via_expectation - via_bias) <= IDENTITY_TOLERANCE,
            )


class ContractiveChecker:
    """Sweep the contractive inequality over random signed pairs."""

    name: str = "contractive"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        combos = [(p, alpha) for p in settings.p_values for alpha in settings.alphas]
        for index in range(settings.trials):
            p, alpha = combos[index % len(combos)]
            f = SignedFunction.random(settings.n, rng)
            g = SignedFunction.random(settings.n, rng)
            yield check_contractive(f, g, p, alpha)


class ABoundChecker:
    """Compare the numeric ``A(alpha, p)`` with its closed-form bound on a grid."""

    name: str = "A-bound"

    ALPHA_RANGE: Final[tuple[float, float]] = (0.01, 1.0 / 9.0)
    P_RANGE: Final[tuple[float, float]] = (0.05, 0.5)

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        alpha_steps, p_steps = settings.grid
        for alpha in np.linspace(*self.ALPHA_RANGE, alpha_steps):
            for p in np.linspace(*self.P_RANGE, p_steps):
                value = A_of(float(alpha), float(p))
                bound = a_closed_form_bound(float(alpha), float(p))
                yield CheckResult(
                    checker=self.name,
                    params={
                        "alpha": float(alpha),
                        "p": float(p),
                        "at_least_one": value >= 1.0 - 1e-12,
                    },
                    lhs=value,
                    rhs=bound,
                    holds=value <= bound + RELATIVE_SLACK and value >= 1.0 - 1e-12,
                )


class MuPChecker:
    """Compare ``E_{S~mu_p} |f~(S)|`` with its min-entropy bound."""

    name: str = "mu-p"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = settings.n
        for index, (kind, f) in enumerate(_entropy_corpus(n, settings.trials, rng)):
            p = settings.p_values[index % len(settings.p_values)]
            profile = entropy_profile(f)
            value = expected_abs_coeff_mu_p(f, p, rng=rng)
            bound = mu_p_bound(n, p, profile.relative)
            yield CheckResult(
                checker=self.name,
                params={
                    "n": n,
                    "p": p,
                    "kind": kind,
                    "min_entropy": profile.min_entropy,
                    "exact": value.exact,
                    "standard_error": value.standard_error,
                },
                lhs=value.value,
                rhs=bound,
                holds=_within(value.value, bound),
            )


class FixedKChecker:
    """Compare the ``k``-subset average of ``|f~(S)|`` with its bound."""

    name: str = "fixed-k"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = settings.n
        ks = [k for k in settings.ks if k <= n]
        if not ks:
            raise ConfigurationError(f"No subset size in {settings.ks} fits n={n}")
        for index, (kind, f) in enumerate(_entropy_corpus(n, settings.trials, rng)):
            k = ks[index % len(ks)]
            t = entropy_profile(f).min_entropy
            value = expected_abs_coeff_fixed_k(f, k, rng=rng)
            bound = fixed_k_bound(n, t, k, settings.zeta)
            yield CheckResult(
                checker=self.name,
                params={"n": n, "k": k, "zeta": settings.zeta, "kind": kind, "min_entropy": t},
                lhs=value.value,
                rhs=bound,
                holds=_within(value.value, bound),
            )


class KklChecker:
    """Sweep the noise-sensitivity bound over random signed functions."""

    name: str = "kkl"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        for index in range(settings.trials):
            delta = settings.deltas[index % len(settings.deltas)]
            yield check_kkl_bound(SignedFunction.random(settings.n, rng), delta)


class ChainChecker:
    """Condition random flat distributions on random Bernoulli hashes."""

    name: str = "chain"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = min(settings.n, CHAIN_MAX_N)
        if n < settings.n:
            _LOG.warning(
                "chain checker enumerates 2^n points; running at n=%d instead of n=%d",
                n,
                settings.n,
            )
        m = min(settings.m, n)
        for index in range(settings.trials):
            p = settings.p_values[index % len(settings.p_values)]
            t = int(rng.integers(min(m + 1, n), n + 1))
            f = HypercubeDistribution.random_flat(n, 1 << t, rng)
            h = build_hash(n, m, BernoulliRowSampler(p), rng)
            result = check_conditioning_chain(f, h, settings.eta).to_check_result()
            result.params.update({"n": n, "t": t, "p": p})
            yield result


class ExtractionChecker:
    """Estimate the extraction frequency for both hash families."""

    name: str = "extraction"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = settings.n
        k = default_k(n)
        samplers = [BernoulliRowSampler((k + 1) / (2.0 * n)), FixedSizeRowSampler(min(5, n))]
        for relative in settings.relative_entropies:
            t = max(int(round(relative * n)), 0)
            support = rng.choice(1 << n, size=1 << t, replace=False)
            for sampler in samplers:
                report = extraction_estimate(
                    support, n, sampler, settings.m, settings.eps, settings.hash_draws, rng,
                    zeta=settings.zeta,
                )
                floor = (
                    report.analytic_bound - 3.0 * report.standard_error
                    if report.analytic_bound is not None
                    else 0.0
                )
                yield CheckResult(
                    checker=self.name,
                    params={
                        "n": n,
                        "t": t,
                        "m": settings.m,
                        "eps": settings.eps,
                        "family": sampler.family,
                        "successes": report.successes,
                        "trials": report.trials,
                        "bound_note": report.bound_note,
                        "bound_applicable": report.applicable,
                    },
                    lhs=floor,
                    rhs=report.frequency,
                    holds=report.meets_bound,
                )


class DecomposeChecker:
    """Rebuild min-entropy mixtures from their flat decompositions."""

    name: str = "decompose"

    def run(self, settings: AnalysisSettings, rng: np.random.Generator) -> Iterator[CheckResult]:
        n = settings.n
        for index in range(settings.trials):
            t = index % (n + 1)
            f = HypercubeDistribution.random_mixture(n, t, 4, rng)
            parts = flat_decompose(f, t)
            rebuilt = sum(weight * part.values for weight, part in parts)
            error = float(np.max(np.abs(rebuilt - f.values)))
            flat = all(
                entropy_profile(part).is_flat and part.support.size == 1 << t for _, part in parts
            )
            weights_ok = math.isclose(sum(w for w, _ in parts), 1.0, abs_tol=DECOMPOSE_TOLERANCE)
            yield CheckResult(
                checker=self.name,
                params={"n": n, "t": t, "components": len(parts), "all_flat": flat},
                lhs=error,
                rhs=DECOMPOSE_TOLERANCE,
                holds=error <= DECOMPOSE_TOLERANCE and flat and weights_ok,
            )


CHECKERS: Final[dict[str, type]] = {
    checker.name: checker
    for checker in (
        FourierIdentityChecker,
        ContractiveChecker,
        ABoundChecker,
        MuPChecker,
        FixedKChecker,
        KklChecker,
        ChainChecker,
        ExtractionChecker,
        DecomposeChecker,
    )
}


class CheckerFactory:
    """Factory for checker strategy instances."""

    @staticmethod
    def names() -> list[str]:
        return list(CHECKERS)

    @staticmethod
    def build(names: Sequence[str] | None = None) -> list[Checker]:
        """Create the named checkers, or all of them in registry order.

        :param names: Checker names; ``None`` selects every checker.
        :type names: Sequence[str] | None
        :return: Checker instances in request order.
        :rtype: list[Checker]
        :raises ConfigurationError: For an unknown checker name.
        """
        selected = list(CHECKERS) if not names else list(names)
        unknown = [name for name in selected if name not in CHECKERS]
        if unknown:
            raise ConfigurationError(
                f"Unknown checker(s) {', '.join(unknown)}; valid names: {', '.join(CHECKERS)}"
            )
        checkers: list[Checker] = [CHECKERS[name]() for name in selected]
        _LOG.debug("Built checker pipeline: %s", [checker.name for checker in checkers])
        return checkers
