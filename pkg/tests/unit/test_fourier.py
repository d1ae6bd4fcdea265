"""Unit tests for the Fourier analysis utilities and inequality checkers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from local_hash_counter.errors import ResourceCapError
from local_hash_counter.fourier import (
    A_of,
    HypercubeDistribution,
    SignedFunction,
    a_tilde,
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
    fourier_coefficients,
    a_closed_form_bound,
    mu_p_bound,
    mu_p_weights,
    normalized_coefficient,
    normalized_coefficients,
    parity_bias,
    parity_signs,
    subset_mask,
    two_point_ratio,
    walsh_hadamard,
)
from local_hash_counter.hashing import (
    BernoulliRowSampler,
    FixedSizeRowSampler,
    HashFunction,
    XorConstraint,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)


def test_subset_mask_and_parity_signs() -> None:
    """Verify index sets map to masks and characters.

    :return: None
    :rtype: None
    """
    assert subset_mask([1, 3]) == 0b101
    assert subset_mask(6) == 6
    assert parity_signs(2, [1, 2]).tolist() == [1, -1, -1, 1]
    with pytest.raises(ValueError):
        parity_signs(2, [3])


def test_distribution_validation() -> None:
    """Verify the table invariants of a distribution.

    :return: None
    :rtype: None
    """
    with pytest.raises(ValueError, match="sum"):
        HypercubeDistribution(1, np.array([0.5, 0.4]))
    with pytest.raises(ValueError, match="non-negative"):
        HypercubeDistribution(1, np.array([1.5, -0.5]))
    with pytest.raises(ValueError):
        HypercubeDistribution(2, np.array([1.0, 0.0]))
    with pytest.raises(ResourceCapError):
        HypercubeDistribution(21, np.zeros(1))
    with pytest.raises(ValueError):
        HypercubeDistribution.flat(3, [])


def test_transform_matches_defining_expectation(rng: np.random.Generator) -> None:
    """Verify the fast transform against the per-coefficient expectation.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.from_weights(6, rng.random(64))

    coefficients = fourier_coefficients(f)

    for mask in (0, 1, 5, 37, 63):
        assert coefficients[mask] == pytest.approx(fourier_coefficient(f, mask), abs=1e-13)
    assert np.allclose(walsh_hadamard(walsh_hadamard(f.values)) / 64, f.values)


def test_normalized_coefficient_equals_parity_bias(rng: np.random.Generator) -> None:
    """Verify both ways of computing ``f~(S)`` agree.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.random_flat(7, 20, rng)

    for subset in ([1], [2, 5], [1, 2, 3, 4, 5, 6, 7]):
        assert normalized_coefficient(f, subset) == pytest.approx(parity_bias(f, subset), abs=1e-12)
    assert normalized_coefficient(f, []) == pytest.approx(0.5)
    assert normalized_coefficients(f)[0] == pytest.approx(0.5)


def test_uniform_distribution_has_no_bias() -> None:
    f = HypercubeDistribution.uniform(5)

    assert np.allclose(normalized_coefficients(f)[1:], 0.0)
    assert entropy_profile(f).min_entropy == pytest.approx(5.0)


def test_entropy_profile_of_flat_and_point_mass() -> None:
    """Verify min-entropy and flatness detection.

    :return: None
    :rtype: None
    """
    flat = HypercubeDistribution.flat(4, [0, 3, 5, 9])
    point = HypercubeDistribution.point_mass(4, 2)
    skewed = HypercubeDistribution.from_weights(2, np.array([2.0, 1.0, 1.0, 0.0]))

    assert entropy_profile(flat).min_entropy == pytest.approx(2.0)
    assert entropy_profile(flat).is_flat
    assert entropy_profile(flat).relative == pytest.approx(0.5)
    assert entropy_profile(point).min_entropy == 0.0
    assert entropy_profile(point).support_size == 1
    assert not entropy_profile(skewed).is_flat
    with pytest.raises(ValueError):
        entropy_profile(np.zeros(4))


def test_random_mixture_keeps_min_entropy(rng: np.random.Generator) -> None:
    f = HypercubeDistribution.random_mixture(6, 3, 4, rng)

    assert entropy_profile(f).min_entropy >= 3.0 - 1e-9


def test_flat_decompose_rebuilds_distribution(rng: np.random.Generator) -> None:
    """Verify the convex combination of flat parts equals the input.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.random_mixture(6, 2, 3, rng)

    parts = flat_decompose(f, 2)

    rebuilt = sum(weight * part.values for weight, part in parts)
    assert np.max(np.abs(rebuilt - f.values)) <= 1e-10
    assert math.isclose(sum(weight for weight, _ in parts), 1.0)
    assert all(weight > 0 for weight, _ in parts)
    assert all(part.support.size == 4 and entropy_profile(part).is_flat for _, part in parts)


def test_flat_decompose_rejects_low_entropy() -> None:
    with pytest.raises(ValueError, match="min-entropy"):
        flat_decompose(HypercubeDistribution.point_mass(3), 1)


def test_mu_p_weights_sum_to_one() -> None:
    assert mu_p_weights(5, 0.3).sum() == pytest.approx(1.0)


def test_point_mass_has_half_bias_everywhere() -> None:
    """Verify ``|f~(S)| = 1/2`` for a point mass under both subset laws.

    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.point_mass(6, 0)

    assert expected_abs_coeff_mu_p(f, 0.3).value == pytest.approx(0.5)
    assert expected_abs_coeff_fixed_k(f, 2).value == pytest.approx(0.5)
    assert expected_abs_coeff_mu_p(f, 0.3).exact


def test_expectations_fall_back_to_sampling_above_exact_limit(rng: np.random.Generator) -> None:
    """Verify the Monte Carlo path reports a standard error.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.random_flat(15, 1 << 5, rng)

    mu_p = expected_abs_coeff_mu_p(f, 0.25, samples=200, rng=rng)
    fixed = expected_abs_coeff_fixed_k(f, 3, samples=200, rng=rng)

    assert not mu_p.exact and not fixed.exact
    assert 0.0 <= mu_p.value <= 0.5
    assert mu_p.standard_error > 0.0
    assert 0.0 <= fixed.value <= 0.5


def test_expectation_argument_checks() -> None:
    f = HypercubeDistribution.uniform(3)
    with pytest.raises(ValueError):
        expected_abs_coeff_mu_p(f, 0.7)
    with pytest.raises(ValueError):
        expected_abs_coeff_fixed_k(f, 4)


@pytest.mark.parametrize("t", [0, 2, 4, 6])
def test_flat_distributions_meet_both_bounds(t: int, rng: np.random.Generator) -> None:
    """Verify the min-entropy bounds on flat distributions.

    :param t: Support size exponent.
    :type t: int
    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    n = 6
    f = HypercubeDistribution.random_flat(n, 1 << t, rng)

    for p in (0.1, 0.25, 0.5):
        assert expected_abs_coeff_mu_p(f, p).value <= mu_p_bound(n, p, t / n) + 1e-12
    for k in (2, 3, 4):
        assert expected_abs_coeff_fixed_k(f, k).value <= fixed_k_bound(n, t, k, 0.5) + 1e-12


def test_bound_edge_values() -> None:
    assert mu_p_bound(10, 0.5, 0.0) == 0.5
    assert mu_p_bound(10, 0.5, 1.0) < 0.5
    with pytest.raises(ValueError):
        fixed_k_bound(10, 5, 2, 1.0)


def test_two_point_ratio_is_symmetric() -> None:
    x = np.linspace(0.0, 1.0, 11)

    ratios = two_point_ratio(x, 0.1, 0.3)

    assert np.allclose(ratios, ratios[::-1])


@pytest.mark.parametrize(("alpha", "p"), [(0.01, 0.05), (0.05, 0.25), (1.0 / 9.0, 0.5)])
def test_a_of_lies_between_one_and_closed_form(alpha: float, p: float) -> None:
    """Verify ``1 <= A(alpha, p) <= (1 + 2^{-1/alpha + 8})^{alpha p}``.

    :param alpha: Exponent parameter.
    :type alpha: float
    :param p: Bias parameter.
    :type p: float
    :return: None
    :rtype: None
    """
    value = A_of(alpha, p)

    assert value >= 1.0 - 1e-12
    assert value <= a_closed_form_bound(alpha, p) * (1 + 1e-9)
    assert a_tilde(alpha, p) >= value


def test_a_of_rejects_out_of_range_parameters() -> None:
    with pytest.raises(ValueError):
        A_of(0.0, 0.2)
    with pytest.raises(ValueError):
        A_of(0.1, 0.6)


def test_contractive_inequality_on_random_pairs(rng: np.random.Generator) -> None:
    """Verify the contractive inequality for random signed pairs.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    for _ in range(10):
        n = int(rng.integers(1, 8))
        result = check_contractive(
            SignedFunction.random(n, rng), SignedFunction.random(n, rng), 0.25, 0.1
        )
        assert result.holds
        assert result.checker == "contractive"


def test_contractive_dimension_checks(rng: np.random.Generator) -> None:
    with pytest.raises(ValueError):
        check_contractive(SignedFunction.random(2, rng), SignedFunction.random(3, rng), 0.25, 0.1)
    with pytest.raises(ResourceCapError):
        big = SignedFunction.constant(13, 1)
        check_contractive(big, big, 0.25, 0.1)


def test_kkl_bound_is_tight_at_delta_one(rng: np.random.Generator) -> None:
    """Verify Parseval makes the KKL bound an equality at ``delta = 1``.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    g = SignedFunction.random(6, rng, zero_probability=0.3)

    result = check_kkl_bound(g, 1.0)

    assert result.lhs == pytest.approx(result.rhs)
    assert result.holds
    assert check_kkl_bound(g, 0.3).holds
    with pytest.raises(ValueError):
        check_kkl_bound(g, 1.5)


def test_signed_function_validation() -> None:
    with pytest.raises(ValueError):
        SignedFunction(1, np.array([2, 0]))
    assert SignedFunction.constant(3, -1).support_size == 8


def test_conditioning_chain_on_uniform_distribution_is_exact() -> None:
    """Verify independent rows split the uniform distribution in halves.

    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.uniform(6)
    h = HashFunction(
        6, (XorConstraint((1,), 1), XorConstraint((2, 3), 0), XorConstraint((4, 5, 6), 1))
    )

    report = check_conditioning_chain(f, h, 0.5)

    assert report.condition_holds
    assert report.conclusions_hold
    assert report.step_probabilities == pytest.approx((0.5, 0.5, 0.5))
    assert report.joint_probabilities == pytest.approx((0.5, 0.25, 0.125))
    assert report.deviation == pytest.approx(0.0)
    assert report.violations == ()
    assert report.to_check_result().holds


def test_conditioning_chain_reports_failed_condition() -> None:
    """Verify an unbalanced row is reported, not raised.

    :return: None
    :rtype: None
    """
    f = HypercubeDistribution.point_mass(4, 0)
    h = HashFunction(4, (XorConstraint((1, 2), 0), XorConstraint((3,), 0)))

    report = check_conditioning_chain(f, h, 0.5, targets=[0, 1])

    assert report.failed_index == 1
    assert not report.condition_holds
    assert report.joint_probabilities == (1.0, 0.0)
    result = report.to_check_result()
    assert result.holds
    assert result.params["failed_index"] == 1


def test_conditioning_chain_argument_checks() -> None:
    f = HypercubeDistribution.uniform(3)
    h = HashFunction(3, (XorConstraint((1,), 0),))
    with pytest.raises(ValueError):
        check_conditioning_chain(f, h, 1.0)
    with pytest.raises(ValueError):
        check_conditioning_chain(f, HashFunction(4, ()), 0.5)
    with pytest.raises(ValueError):
        check_conditioning_chain(f, h, 0.5, targets=[0, 1])


def test_extraction_on_full_cube_succeeds_for_independent_rows(rng: np.random.Generator) -> None:
    """Verify the whole cube splits evenly under most hashes.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    n = 8
    support = np.arange(1 << n)

    report = extraction_estimate(support, n, FixedSizeRowSampler(3), 2, 0.5, 50, rng)

    assert report.trials == 50
    assert report.frequency >= 0.8
    assert 0.0 <= report.standard_error <= 0.5


def test_extraction_bound_applicability_note(rng: np.random.Generator) -> None:
    """Verify the analytic bound is withheld when its hypotheses fail.

    :param rng: Seeded random stream.
    :type rng: numpy.random.Generator
    :return: None
    :rtype: None
    """
    support = rng.choice(1 << 8, size=4, replace=False)

    report = extraction_estimate(support, 8, BernoulliRowSampler(0.5), 3, 0.5, 10, rng)

    assert report.analytic_bound is None
    assert report.bound_note.startswith("not applicable")
    assert report.meets_bound
    with pytest.raises(ValueError):
        extraction_estimate([], 8, BernoulliRowSampler(0.5), 1, 0.5, 1, rng)


def test_extraction_with_fixed_targets(rng: np.random.Generator) -> None:
    support = np.arange(1 << 6)

    report = extraction_estimate(
        support, 6, BernoulliRowSampler(0.5), 1, 0.1, 30, rng, targets=[1]
    )

    assert 0 <= report.successes <= 30
