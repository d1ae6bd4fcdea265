"""Exact Fourier analysis on the Boolean cube and numeric inequality checkers.

Points of ``{0,1}^n`` are packed integers: bit ``i - 1`` of ``z`` is the
coordinate ``x_i``. Index sets ``S`` are given either as iterables of 1-based
indices or as bit masks in the same layout. All logarithms are base 2.

The checkers return both sides of an inequality so callers can report the
margin, not only a verdict.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Final, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from local_hash_counter.errors import ResourceCapError
from local_hash_counter.hashing import HashFunction, RowSampler, build_hash
from local_hash_counter.models import CheckResult

_LOG = logging.getLogger(__name__)

MAX_DIMENSION: Final[int] = 20
EXACT_MU_P_LIMIT: Final[int] = 14
EXACT_PAIR_LIMIT: Final[int] = 12
CHAIN_LIMIT: Final[int] = 16
SUM_TOLERANCE: Final[float] = 1e-12
RELATIVE_SLACK: Final[float] = 1e-9
DECOMPOSITION_TOLERANCE: Final[float] = 1e-10
A_GRID_POINTS: Final[int] = 10_000
A_REFINE_XTOL: Final[float] = 1e-12


def _popcounts(n: int) -> np.ndarray:
    indices = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        counts += (indices >> bit) & 1
    return counts


def subset_mask(subset: Iterable[int] | int) -> int:
    """Return the bit mask of an index set given as indices or as a mask."""
    if isinstance(subset, (int, np.integer)):
        return int(subset)
    return sum(1 << (int(i) - 1) for i in set(subset))


def parity_signs(n: int, subset: Iterable[int] | int) -> np.ndarray:
    """Return ``(-1) ** (xor_{i in S} x_i)`` for every point of the cube."""
    mask = subset_mask(subset)
    if mask >> n:
        raise ValueError(f"Index set {mask:#b} exceeds dimension n={n}")
    points = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        if (mask >> bit) & 1:
            parity ^= (points >> bit) & 1
    return 1 - 2 * parity


def _check_dimension(n: int, limit: int = MAX_DIMENSION) -> None:
    if not 0 <= n <= limit:
        raise ResourceCapError(f"Dimension n={n} exceeds the cap {limit}")


@dataclass(frozen=True, eq=False)
class HypercubeDistribution:
    """A probability distribution on ``{0,1}^n`` stored as a dense table.

    :param n: Dimension, at most 20.
    :type n: int
    :param values: ``2 ** n`` non-negative reals summing to 1.
    :type values: numpy.ndarray
    """

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_dimension(self.n)
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (1 << self.n,):
            raise ValueError(f"Expected {1 << self.n} values, got shape {values.shape}")
        if np.any(values < 0):
            raise ValueError("Distribution values must be non-negative")
        total = math.fsum(values.tolist())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"Distribution values sum to {total!r}, not 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, n: int) -> HypercubeDistribution:
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def flat(cls, n: int, support: Iterable[int]) -> HypercubeDistribution:
        """Uniform distribution on the packed points in ``support``."""
        points = np.unique(np.fromiter(support, dtype=np.int64))
        if points.size == 0:
            raise ValueError("A flat distribution needs a non-empty support")
        values = np.zeros(1 << n)
        values[points] = 1.0 / points.size
        return cls(n, values)

    @classmethod
    def point_mass(cls, n: int, point: int = 0) -> HypercubeDistribution:
        return cls.flat(n, [point])

    @classmethod
    def from_weights(cls, n: int, weights: np.ndarray) -> HypercubeDistribution:
        """Normalize non-negative weights into a distribution."""
        weights = np.asarray(weights, dtype=np.float64)
        total = math.fsum(weights.tolist())
        if total <= 0:
            raise ValueError("Weights must have a positive sum")
        return cls(n, weights / total)

    @classmethod
    def random_flat(
        cls, n: int, support_size: int, rng: np.random.Generator
    ) -> HypercubeDistribution:
        """Flat distribution on a uniformly random support of the given size."""
        if not 1 <= support_size <= 1 << n:
            raise ValueError(f"Support size must lie in [1, {1 << n}], got {support_size}")
        return cls.flat(n, rng.choice(1 << n, size=support_size, replace=False))

    @classmethod
    def random_mixture(
        cls,
        n: int,
        t: int,
        components: int,
        rng: np.random.Generator,
    ) -> HypercubeDistribution:
        """Random convex combination of ``t``-flat distributions.

        The result has min-entropy at least ``t`` and is usually not flat.
        """
        weights = rng.dirichlet(np.ones(components))
        values = np.zeros(1 << n)
        for weight in weights:
            values += weight * cls.random_flat(n, 1 << t, rng).values
        return cls.from_weights(n, values)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def condition(self, event: np.ndarray) -> HypercubeDistribution | None:
        """Condition on a boolean event table; ``None`` if the event has mass 0."""
        kept = np.where(event, self.values, 0.0)
        mass = math.fsum(kept[kept > 0].tolist())
        if mass == 0.0:
            return None
        return HypercubeDistribution(self.n, kept / mass)


@dataclass(frozen=True, eq=False)
class SignedFunction:
    """A function ``{0,1}^n -> {-1, 0, 1}`` stored as a dense table."""

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_dimension(self.n)
        values = np.asarray(self.values, dtype=np.int64)
        if values.shape != (1 << self.n,):
            raise ValueError(f"Expected {1 << self.n} values, got shape {values.shape}")
        if not np.all(np.isin(values, (-1, 0, 1))):
            raise ValueError("Signed function values must lie in {-1, 0, 1}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, n: int, value: int) -> SignedFunction:
        return cls(n, np.full(1 << n, value, dtype=np.int64))

    @classmethod
    def random(
        cls,
        n: int,
        rng: np.random.Generator,
        zero_probability: float | None = None,
    ) -> SignedFunction:
        """Random signed function; each point is zero with the given probability.

        When ``zero_probability`` is ``None`` it is itself drawn uniformly, so
        sparse and dense supports both appear in a corpus.
        """
        q = float(rng.random()) if zero_probability is None else zero_probability
        signs = rng.choice(np.array([-1, 1]), size=1 << n)
        zeros = rng.random(1 << n) < q
        return cls(n, np.where(zeros, 0, signs))

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.values))


CubeFunction = Union[HypercubeDistribution, SignedFunction, np.ndarray]


def _table(f: CubeFunction) -> tuple[int, np.ndarray]:
    if isinstance(f, (HypercubeDistribution, SignedFunction)):
        return f.n, np.asarray(f.values, dtype=np.float64)
    values = np.asarray(f, dtype=np.float64)
    n = int(values.size).bit_length() - 1
    if values.ndim != 1 or values.size != 1 << n:
        raise ValueError("A cube function table must have length 2**n")
    _check_dimension(n)
    return n, values


@dataclass(frozen=True)
class EntropyProfile:
    """Min-entropy summary of a distribution.

    :param min_entropy: ``t = -log max f``.
    :type min_entropy: float
    :param relative: ``t / n``.
    :type relative: float
    :param is_flat: Every non-zero value equals ``2 ** -t``.
    :type is_flat: bool
    :param support_size: Number of non-zero points.
    :type support_size: int
    """

    min_entropy: float
    relative: float
    is_flat: bool
    support_size: int


@dataclass(frozen=True)
class Expectation:
    """An expectation computed exactly or by Monte Carlo.

    :param value: Exact value or sample mean.
    :type value: float
    :param standard_error: 0 in exact mode.
    :type standard_error: float
    :param exact: Whether all index sets were enumerated.
    :type exact: bool
    """

    value: float
    standard_error: float = 0.0
    exact: bool = True


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform.

    Entry ``s`` of the result is ``sum_z values[z] * (-1) ** popcount(s & z)``.
    """
    out = np.array(values, dtype=np.float64, copy=True)
    size = out.size
    h = 1
    while h < size:
        blocks = out.reshape(-1, 2, h)
        low = blocks[:, 0, :].copy()
        high = blocks[:, 1, :].copy()
        blocks[:, 0, :] = low + high
        blocks[:, 1, :] = low - high
        h *= 2
    return out


def fourier_coefficients(f: CubeFunction) -> np.ndarray:
    """All coefficients ``f^(S) = E_x f(x) (-1)^{xor_S x}``, indexed by mask."""
    n, values = _table(f)
    return walsh_hadamard(values) / (1 << n)


def fourier_coefficient(f: CubeFunction, subset: Iterable[int] | int) -> float:
    """Return ``f^(S)`` as the defining expectation over all ``2 ** n`` points.

    :param f: Real-valued cube function.
    :type f: CubeFunction
    :param subset: Index set as 1-based indices or a bit mask.
    :type subset: Iterable[int] | int
    :return: The coefficient.
    :rtype: float
    """
    n, values = _table(f)
    return float(np.mean(values * parity_signs(n, subset)))


def normalized_coefficient(f: HypercubeDistribution, subset: Iterable[int] | int) -> float:
    """Return ``f~(S) = 2 ** (n - 1) * f^(S)``."""
    return (1 << f.n) / 2.0 * fourier_coefficient(f, subset)


def parity_bias(f: HypercubeDistribution, subset: Iterable[int] | int) -> float:
    """Return ``Pr_{x~f}(xor_{i in S} x_i = 0) - 1/2``.

    This equals :func:`normalized_coefficient`; it is computed from the mass
    of the even-parity points instead of the expectation.
    """
    even = parity_signs(f.n, subset) > 0
    return math.fsum(f.values[even].tolist()) - 0.5


def normalized_coefficients(f: HypercubeDistribution) -> np.ndarray:
    """All normalized coefficients, indexed by mask."""
    return walsh_hadamard(f.values) / 2.0


def entropy_profile(f: HypercubeDistribution | np.ndarray) -> EntropyProfile:
    """Return the min-entropy profile.

    :raises ValueError: If the table is zero everywhere.
    """
    if isinstance(f, HypercubeDistribution):
        n, values = f.n, f.values
    else:
        n, values = _table(f)
    peak = float(values.max(initial=0.0))
    if peak <= 0.0:
        raise ValueError("The all-zero table has no min-entropy")
    t = -math.log2(peak)
    nonzero = values[values > 0]
    support_size = int(nonzero.size)
    is_flat = bool(
        np.allclose(nonzero, peak, rtol=SUM_TOLERANCE, atol=0.0)
        and math.isclose(peak * support_size, 1.0, rel_tol=SUM_TOLERANCE)
    )
    return EntropyProfile(
        min_entropy=t,
        relative=t / n if n else 0.0,
        is_flat=is_flat,
        support_size=support_size,
    )


def flat_decompose(f: HypercubeDistribution, t: int) -> list[tuple[float, HypercubeDistribution]]:
    """Write ``f`` as a convex combination of ``t``-flat distributions.

    Each step takes the ``2 ** t`` heaviest points of the residual and
    removes the largest multiple of their uniform distribution that keeps
    the residual's peak within ``residual mass / 2 ** t``. Every step either
    empties a point or lifts one more point to that cap, so at most
    ``support + 2 ** t`` steps run.

    :param f: Distribution of min-entropy at least ``t``.
    :type f: HypercubeDistribution
    :param t: Integer target min-entropy, ``0 <= t <= n``.
    :type t: int
    :return: ``(weight, component)`` pairs with positive weights summing to 1.
    :rtype: list[tuple[float, HypercubeDistribution]]
    :raises ValueError: If ``f`` has min-entropy below ``t``.
    """
    if not 0 <= t <= f.n:
        raise ValueError(f"t must lie in [0, {f.n}], got {t}")
    block = 1 << t
    if f.values.max() > (1.0 + SUM_TOLERANCE) / block:
        raise ValueError(
            f"Distribution has min-entropy {entropy_profile(f).min_entropy:.6f} < {t}"
        )

    residual = np.array(f.values, dtype=np.float64)
    mass = 1.0
    parts: list[tuple[float, np.ndarray]] = []
    floor = DECOMPOSITION_TOLERANCE * 1e-3
    while mass > floor:
        order = np.argsort(-residual, kind="stable")
        top, rest = order[:block], order[block:]
        inside_min = float(residual[top].min())
        if inside_min <= 0.0:
            break
        outside_max = float(residual[rest].max(initial=0.0))
        weight = min(block * inside_min, mass - block * outside_max)
        if weight <= floor:
            break
        residual[top] -= weight / block
        residual[residual < floor / block] = 0.0
        mass -= weight
        parts.append((weight, top))

    total = math.fsum(weight for weight, _ in parts)
    components = [
        (weight / total, HypercubeDistribution.flat(f.n, top.tolist())) for weight, top in parts
    ]
    _LOG.debug("Decomposed distribution into %d %d-flat component(s)", len(components), t)
    return components


def mu_p_weights(n: int, p: float) -> np.ndarray:
    """``Pr_{S ~ mu_p}(S)`` for every mask."""
    counts = _popcounts(n)
    return np.power(p, counts) * np.power(1.0 - p, n - counts)


def expected_abs_coeff_mu_p(
    f: HypercubeDistribution,
    p: float,
    samples: int = 20_000,
    rng: np.random.Generator | None = None,
) -> Expectation:
    """Return ``E_{S ~ mu_p} |f~(S)|``.

    Enumerates all index sets for ``n <= 14``; otherwise samples ``samples``
    index sets and reports the standard error.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"Bias p must lie in (0, 1/2], got {p}")
    if f.n <= EXACT_MU_P_LIMIT:
        coefficients = np.abs(normalized_coefficients(f))
        return Expectation(float(np.dot(mu_p_weights(f.n, p), coefficients)))

    generator = rng if rng is not None else np.random.default_rng()
    draws = generator.random((samples, f.n)) < p
    weights = (1 << np.arange(f.n, dtype=np.int64))
    masks = draws.astype(np.int64) @ weights
    return _sampled_abs_coefficients(f, masks)


def expected_abs_coeff_fixed_k(
    f: HypercubeDistribution,
    k: int,
    samples: int = 20_000,
    rng: np.random.Generator | None = None,
) -> Expectation:
    """Return the average of ``|f~(S)|`` over all ``k``-subsets ``S``.

    :raises ValueError: If ``k`` is not in ``[1, n]``.
    """
    if not 1 <= k <= f.n:
        raise ValueError(f"k must lie in [1, {f.n}], got {k}")
    if f.n <= EXACT_MU_P_LIMIT:
        coefficients = np.abs(normalized_coefficients(f))
        chosen = coefficients[_popcounts(f.n) == k]
        return Expectation(float(chosen.mean()))

    generator = rng if rng is not None else np.random.default_rng()
    masks = np.array(
        [
            subset_mask(generator.choice(f.n, size=k, replace=False) + 1)
            for _ in range(samples)
        ],
        dtype=np.int64,
    )
    return _sampled_abs_coefficients(f, masks)


def _sampled_abs_coefficients(f: HypercubeDistribution, masks: np.ndarray) -> Expectation:
    support = f.support
    weights = f.values[support]
    estimates = np.empty(masks.size)
    for index, mask in enumerate(masks):
        parity = np.zeros(support.size, dtype=np.int64)
        for bit in range(f.n):
            if (int(mask) >> bit) & 1:
                parity ^= (support >> bit) & 1
        estimates[index] = abs(float(np.dot(weights, 1 - 2 * parity))) / 2.0
    error = float(estimates.std(ddof=1) / math.sqrt(masks.size)) if masks.size > 1 else 0.0
    return Expectation(float(estimates.mean()), error, exact=False)


def mu_p_bound(n: int, p: float, relative_entropy: float) -> float:
    """Upper bound ``(1/2) sqrt(2) ** (-p n t~ / log(512 / t~))`` on the mu_p expectation."""
    if relative_entropy <= 0.0:
        return 0.5
    exponent = p * n * relative_entropy / math.log2(512.0 / relative_entropy)
    return 0.5 * math.sqrt(2.0) ** (-exponent)


def fixed_k_bound(n: int, t: float, k: int, zeta: float) -> float:
    """Upper bound ``(1/2) n^{-(1-zeta)k/2} 2^{(n-t) k n^{-zeta}}`` for k-subsets."""
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    return 0.5 * n ** (-(1.0 - zeta) * k / 2.0) * 2.0 ** ((n - t) * k * n ** (-zeta))


def _lp_norm(a: np.ndarray, b: np.ndarray, q: float) -> np.ndarray:
    """``(|a|^q + |b|^q)^{1/q}`` scaled to avoid overflow for large ``q``."""
    a, b = np.abs(a), np.abs(b)
    top = np.maximum(a, b)
    safe = np.where(top > 0, top, 1.0)
    inner = (a / safe) ** q + (b / safe) ** q
    return np.where(top > 0, top * inner ** (1.0 / q), 0.0)


def two_point_ratio(x: np.ndarray | float, alpha: float, p: float) -> np.ndarray:
    """``||(1 - 2px, 1 - 2p(1 - x))||_{1/(alpha p)} / ||(x, 1 - x)||_{1/(1 - alpha p)}``."""
    x = np.asarray(x, dtype=np.float64)
    ap = alpha * p
    numerator = _lp_norm(1.0 - 2.0 * p * x, 1.0 - 2.0 * p * (1.0 - x), 1.0 / ap)
    denominator = _lp_norm(x, 1.0 - x, 1.0 / (1.0 - ap))
    return numerator / denominator


def A_of(alpha: float, p: float) -> float:  # noqa: N802
    """Numeric supremum of :func:`two_point_ratio` over ``x in [0, 1]``.

    The ratio is symmetric around ``x = 1/2``, so only ``[0, 1/2]`` is
    searched: a uniform grid, then a bounded scalar refinement on the cell
    around the best grid point. The result is at least the ratio at every
    sampled point.

    :param alpha: In ``(0, 1]``.
    :type alpha: float
    :param p: In ``(0, 1/2]``.
    :type p: float
    :return: ``A(alpha, p)``.
    :rtype: float
    """
    if not 0.0 < alpha <= 1.0 or not 0.0 < p <= 0.5:
        raise ValueError(f"Need 0 < alpha <= 1 and 0 < p <= 1/2, got alpha={alpha}, p={p}")

    grid = np.linspace(0.0, 0.5, A_GRID_POINTS)
    ratios = two_point_ratio(grid, alpha, p)
    best = int(np.argmax(ratios))
    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, grid.size - 1)]

    refined = minimize_scalar(
        lambda x: -float(two_point_ratio(x, alpha, p)),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": A_REFINE_XTOL},
    )
    return max(float(ratios[best]), -float(refined.fun))


def a_tilde(alpha: float, p: float) -> float:
    """``max(A(alpha, p), (1 - p) 4^{alpha p})``."""
    return max(A_of(alpha, p), (1.0 - p) * 4.0 ** (alpha * p))


def a_closed_form_bound(alpha: float, p: float) -> float:
    """Closed-form upper bound ``(1 + 2^{-1/alpha + 8})^{alpha p}`` on ``A(alpha, p)``."""
    return (1.0 + 2.0 ** (-1.0 / alpha + 8.0)) ** (alpha * p)


def _holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + RELATIVE_SLACK * abs(rhs)


def check_contractive(
    f: SignedFunction,
    g: SignedFunction,
    p: float,
    alpha: float,
) -> CheckResult:
    """Compare ``E_{S~mu_p} f^(S) g^(S)`` with ``4^{-n} A~^n (|Supp f| |Supp g|)^{1 - alpha p}``.

    :raises ResourceCapError: If ``n > 12``.
    """
    if f.n != g.n:
        raise ValueError(f"Dimension mismatch: {f.n} != {g.n}")
    _check_dimension(f.n, EXACT_PAIR_LIMIT)
    n = f.n
    lhs = float(np.dot(mu_p_weights(n, p), fourier_coefficients(f) * fourier_coefficients(g)))
    tilde = a_tilde(alpha, p)
    rhs = 4.0 ** (-n) * tilde**n * float(f.support_size * g.support_size) ** (1.0 - alpha * p)
    return CheckResult(
        checker="contractive",
        params={"n": n, "p": p, "alpha": alpha, "a_tilde": tilde},
        lhs=lhs,
        rhs=rhs,
        holds=_holds(lhs, rhs),
    )


def check_kkl_bound(f: SignedFunction, delta: float) -> CheckResult:
    """Compare ``sum_S delta^{|S|} f^(S)^2`` with ``Pr(f != 0)^{2 / (1 + delta)}``.

    :raises ResourceCapError: If ``n > 12``.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    _check_dimension(f.n, EXACT_PAIR_LIMIT)
    coefficients = fourier_coefficients(f)
    lhs = float(np.dot(np.power(delta, _popcounts(f.n)), coefficients**2))
    rhs = (f.support_size / (1 << f.n)) ** (2.0 / (1.0 + delta))
    return CheckResult(
        checker="kkl",
        params={"n": f.n, "delta": delta},
        lhs=lhs,
        rhs=rhs,
        holds=_holds(lhs, rhs),
    )


@dataclass(frozen=True)
class ChainReport:
    """Outcome of conditioning a distribution on successive hash rows.

    :param eta: Tolerance of the per-row balance condition.
    :type eta: float
    :param step_probabilities: ``Pr_{x ~ f_{i-1}}(h_i(x) = y_i)`` up to the
        first failing row.
    :type step_probabilities: tuple[float, ...]
    :param joint_probabilities: ``Pr_{x ~ f}(h_1 = y_1, ..., h_j = y_j)`` for
        every ``j``.
    :type joint_probabilities: tuple[float, ...]
    :param failed_index: 1-based row where the balance condition failed.
    :type failed_index: int | None
    """

    eta: float
    step_probabilities: tuple[float, ...]
    joint_probabilities: tuple[float, ...]
    failed_index: int | None = None
    joint_bounds_hold: bool = True
    deviation: float = 0.0
    deviation_bound: float = 0.0
    violations: tuple[str, ...] = field(default=())

    @property
    def condition_holds(self) -> bool:
        return self.failed_index is None

    @property
    def conclusions_hold(self) -> bool:
        return self.condition_holds and self.joint_bounds_hold and _holds(
            self.deviation, self.deviation_bound
        )

    def to_check_result(self) -> CheckResult:
        return CheckResult(
            checker="chain",
            params={
                "eta": self.eta,
                "m": len(self.joint_probabilities),
                "condition_holds": self.condition_holds,
                "failed_index": self.failed_index,
            },
            lhs=self.deviation,
            rhs=self.deviation_bound,
            holds=self.conclusions_hold or not self.condition_holds,
        )


def check_conditioning_chain(
    f: HypercubeDistribution,
    h: HashFunction,
    eta: float,
    targets: Sequence[int] | None = None,
) -> ChainReport:
    """Condition ``f`` on ``h_1 = y_1, ..., h_m = y_m`` one row at a time.

    When every step probability is within ``eta / 2`` of ``1/2``, checks
    ``(1 - eta)^j 2^{-j} <= Pr(h_1..h_j = y_1..y_j) <= (1 + eta)^j 2^{-j}`` for
    every ``j`` and ``|Pr(h = y) - 2^{-m}| <= 2^{-m} ((1 + eta)^m - 1)``.
    Probabilities are sums of support weights, not samples.

    :param f: Distribution with ``n <= 16``.
    :type f: HypercubeDistribution
    :param h: Hash function over the same dimension.
    :type h: HashFunction
    :param eta: Tolerance in ``(0, 1)``.
    :type eta: float
    :param targets: Target bits ``y``; defaults to the targets stored in ``h``.
    :type targets: Sequence[int] | None
    :return: Chain report; a failed condition is reported, not raised.
    :rtype: ChainReport
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if h.n != f.n:
        raise ValueError(f"Hash dimension {h.n} does not match distribution dimension {f.n}")
    _check_dimension(f.n, CHAIN_LIMIT)
    y = list(h.targets if targets is None else targets)
    if len(y) != h.m:
        raise ValueError(f"Expected {h.m} target bits, got {len(y)}")

    points = np.arange(1 << f.n, dtype=np.int64)
    current: HypercubeDistribution | None = f
    event = np.ones(points.size, dtype=bool)
    steps: list[float] = []
    joints: list[float] = []
    failed: int | None = None

    for index, (row, bit) in enumerate(zip(h.rows, y), start=1):
        matches = row.parity(points) == bit
        event &= matches
        joints.append(math.fsum(f.values[event].tolist()))
        if failed is not None or current is None:
            continue
        step = math.fsum(current.values[matches].tolist())
        steps.append(step)
        if abs(step - 0.5) > eta / 2.0:
            failed = index
            continue
        current = current.condition(matches)

    m = h.m
    violations: list[str] = []
    joint_ok = True
    if failed is None:
        for j, joint in enumerate(joints, start=1):
            low = (1.0 - eta) ** j * 2.0 ** (-j)
            high = (1.0 + eta) ** j * 2.0 ** (-j)
            if not (low - RELATIVE_SLACK * low <= joint <= high + RELATIVE_SLACK * high):
                joint_ok = False
                violations.append(f"j={j}: {joint!r} outside [{low!r}, {high!r}]")

    deviation = abs(joints[-1] - 2.0 ** (-m)) if joints else 0.0
    bound = 2.0 ** (-m) * ((1.0 + eta) ** m - 1.0)
    if failed is None and not _holds(deviation, bound):
        violations.append(f"deviation {deviation!r} above {bound!r}")

    return ChainReport(
        eta=eta,
        step_probabilities=tuple(steps),
        joint_probabilities=tuple(joints),
        failed_index=failed,
        joint_bounds_hold=joint_ok,
        deviation=deviation,
        deviation_bound=bound,
        violations=tuple(violations),
    )


def mu_p_extraction_factor(
    n: int, m: int, eps: float, p: float, relative_entropy: float
) -> float:
    """Failure factor ``(m / eps) * 2 * mu_p_bound`` for Bernoulli rows."""
    return m / eps * 2.0 * mu_p_bound(n, p, relative_entropy)


def fixed_k_extraction_factor(
    n: int, m: int, eps: float, k: int, t: float, zeta: float
) -> float:
    """Failure factor ``(m / eps) * 2 * fixed_k_bound`` for k-subset rows."""
    return m / eps * 2.0 * fixed_k_bound(n, t, k, zeta)


@dataclass(frozen=True)
class ExtractionReport:
    """Empirical extraction success against the analytic lower bound.

    :param successes: Hash draws whose preimage hit ``A`` within ``eps``.
    :type successes: int
    :param trials: Hash draws.
    :type trials: int
    :param analytic_bound: ``(1 - P)^m`` or ``(1 - Q)^m`` when the hypotheses
        hold, else ``None``.
    :type analytic_bound: float | None
    :param bound_note: Why the bound is or is not applicable.
    :type bound_note: str
    """

    successes: int
    trials: int
    analytic_bound: float | None
    bound_note: str

    @property
    def frequency(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        q = self.frequency
        return math.sqrt(q * (1.0 - q) / self.trials)

    @property
    def applicable(self) -> bool:
        return self.analytic_bound is not None

    @property
    def meets_bound(self) -> bool:
        if self.analytic_bound is None:
            return True
        return self.frequency >= self.analytic_bound - 3.0 * self.standard_error


def _analytic_extraction_bound(
    n: int,
    support_size: int,
    sampler: RowSampler,
    m: int,
    eps: float,
    zeta: float,
) -> tuple[float | None, str]:
    t = math.log2(support_size)
    t0 = t - m - 1
    if t0 <= 0:
        return None, f"not applicable: min-entropy {t:.3f} leaves no room for m={m}"

    p = getattr(sampler, "p", None)
    if p is not None:
        factor = mu_p_extraction_factor(n, m, eps, float(p), t0 / n)
        label = "P"
    else:
        k = int(getattr(sampler, "k"))
        factor = fixed_k_extraction_factor(n, m, eps, k, t0, zeta)
        label = "Q"
    if factor >= 1.0:
        return None, f"not applicable: {label}={factor:.4g} >= 1"
    return (1.0 - factor) ** m, f"(1 - {label})^m with {label}={factor:.4g}"


def extraction_estimate(
    support: Iterable[int],
    n: int,
    sampler: RowSampler,
    m: int,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    targets: Sequence[int] | None = None,
    zeta: float = 0.5,
) -> ExtractionReport:
    """Estimate ``Pr_h(| |A cap h^{-1}(y)| / |A| - 2^{-m} | <= eps 2^{-m})``.

    :param support: The set ``A`` as packed points.
    :type support: Iterable[int]
    :param n: Dimension, at most 24.
    :type n: int
    :param sampler: Row distribution of the hash family.
    :type sampler: RowSampler
    :param m: Rows per hash.
    :type m: int
    :param eps: Relative tolerance in ``(0, 1)``.
    :type eps: float
    :param trials: Hash draws.
    :type trials: int
    :param rng: Random stream.
    :type rng: numpy.random.Generator
    :param targets: Fixed ``y``; ``None`` keeps each draw's uniform targets.
    :type targets: Sequence[int] | None
    :param zeta: ``zeta`` of the fixed-size bound.
    :type zeta: float
    :return: Empirical report with the analytic bound when applicable.
    :rtype: ExtractionReport
    """
    _check_dimension(n, 24)
    points = np.unique(np.fromiter(support, dtype=np.int64))
    if points.size == 0:
        raise ValueError("The set A must be non-empty")
    expected = 2.0 ** (-m)
    # Row parities of all points at once: bits (|A| x n) times the 0/1 row matrix.
    bits = ((points[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float32)

    successes = 0
    for _ in range(trials):
        h = build_hash(n, m, sampler, rng)
        if targets is not None:
            h = h.with_targets(targets)
        matrix = np.zeros((n, m), dtype=np.float32)
        for column, row in enumerate(h.rows):
            matrix[np.asarray(row.support, dtype=np.intp) - 1, column] = 1.0
        parities = (bits @ matrix).astype(np.int64) & 1
        hits = np.all(parities == np.asarray(h.targets, dtype=np.int64), axis=1)
        fraction = int(hits.sum()) / points.size
        if abs(fraction - expected) <= eps * expected:
            successes += 1

    bound, note = _analytic_extraction_bound(n, int(points.size), sampler, m, eps, zeta)
    _LOG.debug("Extraction: %d/%d successes, bound %s", successes, trials, note)
    return ExtractionReport(successes, trials, bound, note)
