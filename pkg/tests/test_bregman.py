import math

import numpy as np
import pytest
import scipy.special

from entmd import (
    EXP_QUAD_BOUND,
    DimensionMismatch,
    DomainError,
    InfiniteDivergence,
    WBranch,
    bregman_divergence,
    bregman_inverse_1d,
    entropy,
    exp_quadratic_margin,
    lambert_w,
    max_norm_bound,
    pinsker_lower_bound,
    seeded_rng,
    weighted_norm_sq,
    ymin_lower_bound,
)


class TestEntropy:
    def test_ones(self):
        assert entropy([1.0, 1.0]) == pytest.approx(-2.0)

    def test_zero_vector(self):
        assert entropy([0.0, 0.0]) == 0.0

    def test_scalar_two(self):
        assert entropy([2.0]) == pytest.approx(2 * math.log(2) - 2)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            entropy([1.0, -0.5])


class TestBregmanDivergence:
    def test_self_distance_zero(self):
        assert bregman_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_two_vs_one(self):
        assert bregman_divergence([2.0], [1.0]) == pytest.approx(2 * math.log(2) - 1)

    def test_zero_first_argument(self):
        assert bregman_divergence([0.0], [1.0]) == pytest.approx(1.0)

    def test_infinite_case(self):
        with pytest.raises(InfiniteDivergence):
            bregman_divergence([1.0], [0.0])

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            bregman_divergence([-1.0], [1.0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            bregman_divergence([1.0], [1.0, 2.0])

    def test_nonnegative_and_zero_iff_equal(self):
        rng = seeded_rng(7)
        for _ in range(2000):
            x = rng.uniform(0.0, 3.0, 4)
            y = rng.uniform(1e-4, 3.0, 4)
            d = bregman_divergence(x, y)
            assert d >= 0.0
            if d < 1e-12:
                assert np.max(np.abs(x - y)) < 1e-5

    def test_accurate_near_equal_pairs(self):
        # tiny divergences must not be swamped by cancellation
        x = np.array([0.5, 1.5])
        y = x * (1 + 1e-9)
        d = bregman_divergence(x, y)
        expected = float(np.sum((x - y) ** 2 / (2 * x)))  # leading term
        assert d == pytest.approx(expected, rel=1e-5)


class TestWeightedNormSq:
    def test_hand_case(self):
        assert weighted_norm_sq([1.0, 2.0], [3.0, 4.0]) == pytest.approx(41.0)

    def test_zero_vector(self):
        assert weighted_norm_sq([1.0, 2.0], [0.0, 0.0]) == 0.0

    def test_unit_weights(self):
        v = np.array([1.5, -2.0, 0.5])
        assert weighted_norm_sq(np.ones(3), v) == pytest.approx(float(v @ v))

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError):
            weighted_norm_sq([-1.0], [1.0])


class TestPinskerBound:
    def test_two_vs_one(self):
        assert pinsker_lower_bound([2.0], [1.0]) == pytest.approx(0.25)
        assert bregman_divergence([2.0], [1.0]) >= 0.25

    def test_equal_vectors(self):
        assert pinsker_lower_bound([0.4, 0.6], [0.4, 0.6]) == 0.0

    def test_partial_support(self):
        assert pinsker_lower_bound([0.0, 1.0], [1.0, 1.0]) == pytest.approx(0.25)

    def test_zero_norms_rejected(self):
        with pytest.raises(DomainError):
            pinsker_lower_bound([0.0], [0.0])

    def test_dominated_by_divergence(self):
        rng = seeded_rng(8)
        for _ in range(2000):
            scale_x = 10.0 ** rng.uniform(-3, 3)
            scale_y = 10.0 ** rng.uniform(-3, 3)
            x = rng.uniform(0.0, 1.0, 5) * scale_x
            y = rng.uniform(1e-6, 1.0, 5) * scale_y
            d = bregman_divergence(x, y)
            assert d - pinsker_lower_bound(x, y) >= -1e-12 * (1.0 + d)


class TestMaxNormBound:
    def test_equal_singletons(self):
        assert max_norm_bound([1.0], [1.0]) == pytest.approx(2.0)

    def test_two_vs_one(self):
        assert max_norm_bound([2.0], [1.0]) == pytest.approx(2 * (2 * math.log(2) - 1) + 2)

    def test_zero_x(self):
        assert max_norm_bound([0.0], [1.0]) == pytest.approx(2.0)

    def test_dominates_max_norm(self):
        rng = seeded_rng(9)
        for _ in range(1000):
            x = rng.uniform(0.0, 2.0, 3)
            y = rng.uniform(1e-5, 2.0, 3)
            bound = max_norm_bound(x, y)
            assert bound >= max(np.sum(x), np.sum(y)) - 1e-12


class TestLambertW:
    def test_identities(self):
        assert lambert_w(0.0) == 0.0
        assert lambert_w(math.e) == pytest.approx(1.0, abs=1e-14)
        assert lambert_w(-1 / math.e, WBranch.MINUS_ONE) == -1.0
        assert lambert_w(-2 * math.exp(-2.0), WBranch.MINUS_ONE) == pytest.approx(-2.0, abs=1e-13)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            lambert_w(-0.5)
        with pytest.raises(DomainError):
            lambert_w(0.5, WBranch.MINUS_ONE)

    def test_round_trip_principal(self):
        for w in np.linspace(-1.0, 20.0, 500):
            t = w * math.exp(w)
            assert abs(lambert_w(max(t, -1 / math.e)) - w) < 1e-12

    def test_round_trip_minus_one(self):
        for w in np.linspace(-30.0, -1.0, 500):
            t = max(w * math.exp(w), -1 / math.e)
            assert abs(lambert_w(t, WBranch.MINUS_ONE) - w) < 1e-12

    def test_against_scipy(self):
        # scipy itself loses accuracy right at the branch point, so stay a
        # little away from -1/e for the comparison
        for t in np.geomspace(1e-6, 1e6, 50):
            assert lambert_w(t) == pytest.approx(float(scipy.special.lambertw(t).real), rel=1e-13)
        for t in -np.geomspace(1e-8, 0.36, 50):
            assert lambert_w(t, WBranch.MINUS_ONE) == pytest.approx(
                float(scipy.special.lambertw(t, -1).real), rel=1e-11
            )


class TestBregmanInverse1d:
    def test_zero_divergence(self):
        assert bregman_inverse_1d(1.0, 0.0, WBranch.PRINCIPAL) == pytest.approx(1.0)
        assert bregman_inverse_1d(1.0, 0.0, WBranch.MINUS_ONE) == pytest.approx(1.0)

    def test_half(self):
        d = math.log(2) - 0.5  # divergence from 1 to 0.5
        assert bregman_inverse_1d(1.0, d, WBranch.PRINCIPAL) == pytest.approx(0.5, rel=1e-12)

    def test_round_trip(self):
        rng = seeded_rng(10)
        for _ in range(500):
            x = 10.0 ** rng.uniform(-3, 3)
            ratio = 10.0 ** rng.uniform(-2, 2)
            if abs(ratio - 1.0) < 1e-2:
                continue
            y = x * ratio
            branch = WBranch.PRINCIPAL if y <= x else WBranch.MINUS_ONE
            d = bregman_divergence([x], [y])
            assert bregman_inverse_1d(x, d, branch) == pytest.approx(y, rel=1e-10)

    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            bregman_inverse_1d(0.0, 1.0, WBranch.PRINCIPAL)
        with pytest.raises(DomainError):
            bregman_inverse_1d(1.0, -1.0, WBranch.PRINCIPAL)


class TestYminLowerBound:
    def test_zero_divergence(self):
        assert ymin_lower_bound(1.0, 0.0) == pytest.approx(1.0)

    def test_unit_case(self):
        # -W0(-exp(-2)), checked against scipy
        want = float(-scipy.special.lambertw(-math.exp(-2.0)).real)
        got = ymin_lower_bound(1.0, 1.0)
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(0.15859433956303937, rel=1e-12)

    def test_large_divergence_decays(self):
        assert ymin_lower_bound(0.5, 20.0) <= 1e-6

    def test_is_a_true_lower_bound(self):
        rng = seeded_rng(12)
        for _ in range(500):
            x = rng.uniform(0.05, 2.0, 4)
            y = rng.uniform(0.05, 2.0, 4)
            d = bregman_divergence(x, y)
            assert np.min(y) >= ymin_lower_bound(float(np.min(x)), d) - 1e-12

    def test_nonpositive_xmin_rejected(self):
        with pytest.raises(DomainError):
            ymin_lower_bound(0.0, 1.0)


class TestExpQuadraticMargin:
    def test_origin(self):
        assert exp_quadratic_margin(0.0) == 0.0

    def test_at_cap(self):
        # direct evaluation: 1 + 1.79 + 1.79^2 - e^1.79
        want = 1.0 + 1.79 + 1.79**2 - math.exp(1.79)
        assert want > 0
        assert exp_quadratic_margin(EXP_QUAD_BOUND) == pytest.approx(want)

    def test_beyond_cap_negative(self):
        assert exp_quadratic_margin(2.0) == pytest.approx(7.0 - math.e**2)
        assert exp_quadratic_margin(2.0) < 0

    def test_vectorized(self):
        t = np.array([-1.0, 0.0, 1.0])
        out = exp_quadratic_margin(t)
        assert out.shape == (3,)
        assert out[1] == 0.0


def test_ymin_bound_versus_squared_distance():
    # y_min * D_h(x, y) <= ||x - y||^2 on random pairs
    rng = seeded_rng(13)
    for _ in range(2000):
        x = rng.uniform(0.0, 2.0, 5)
        y = rng.uniform(1e-4, 2.0, 5)
        d = bregman_divergence(x, y)
        assert float(np.min(y)) * d <= float(np.sum((x - y) ** 2)) + 1e-12


def test_lambert_rejects_nonfinite_and_converges_on_domain():
    for t in np.linspace(-1 / math.e + 1e-9, 5.0, 200):
        lambert_w(t)
    with pytest.raises(DomainError):
        lambert_w(float("nan"))
    with pytest.raises(DomainError):
        lambert_w(float("inf"), WBranch.MINUS_ONE)
