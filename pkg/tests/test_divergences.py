import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from lecam.divergences import (
    DiscreteDistribution,
    DivergenceKind,
    divergence,
    f_curve,
    generic_f_divergence,
    lecam,
    inequality_chain,
)
from lecam.errors import DimensionError, DomainError

from conftest import distribution_pairs, exact_fractions

K = DivergenceKind


def brute_lecam(p, q):
    # exact rational sum, independent of the float path
    return sum(((a - b) ** 2 / (a + b) for a, b in zip(p, q) if a + b > 0), Fraction(0))


class TestDistribution:
    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            DiscreteDistribution([1.5, -0.5])

    def test_rejects_bad_sum(self):
        with pytest.raises(DomainError):
            DiscreteDistribution([0.5, 0.4])

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            DiscreteDistribution([])

    def test_normalized(self):
        d = DiscreteDistribution.normalized([1, 2, 1])
        np.testing.assert_allclose(d.weights, [0.25, 0.5, 0.25])
        with pytest.raises(DomainError):
            DiscreteDistribution.normalized([0, 0])

    def test_weights_are_read_only(self):
        d = DiscreteDistribution([0.5, 0.5])
        with pytest.raises(ValueError):
            d.weights[0] = 1.0


class TestLecam:
    def test_identity(self):
        assert lecam([0.5, 0.5], [0.5, 0.5]) == 0

    def test_disjoint_is_two(self):
        assert lecam([1, 0], [0, 1]) == 2

    def test_hand_example(self):
        expected = brute_lecam(exact_fractions([1, 1]), exact_fractions([1, 3]))
        assert expected == Fraction(2, 15)
        assert lecam([0.5, 0.5], [0.25, 0.75]) == pytest.approx(2 / 15, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            lecam([1.0], [0.5, 0.5])

    def test_zero_mass_points_contribute_nothing(self):
        assert lecam([0.5, 0.0, 0.5], [0.25, 0.0, 0.75]) == pytest.approx(2 / 15, abs=1e-15)


class TestDivergence:
    def test_chi2_example(self):
        assert divergence(K.CHI_SQUARED, [0.5, 0.5], [0.25, 0.75]) == pytest.approx(1 / 3, abs=1e-15)

    def test_tv_disjoint(self):
        assert divergence(K.TOTAL_VARIATION, [1, 0], [0, 1]) == 2

    @pytest.mark.parametrize("kind", list(K))
    def test_identity_is_zero(self, kind):
        p = [0.1, 0.2, 0.7]
        assert divergence(kind, p, p) == pytest.approx(0.0, abs=1e-15)

    def test_js_disjoint_is_ln2(self):
        assert divergence(K.JS, [1, 0], [0, 1]) == pytest.approx(math.log(2), abs=1e-15)

    def test_kl_infinite_sentinel(self):
        assert divergence(K.KL, [0.5, 0.5], [1.0, 0.0]) == math.inf
        assert divergence(K.KL, [1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_accepts_string_tag(self):
        assert divergence("lecam", [1, 0], [0, 1]) == 2

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            divergence("renyi", [1.0], [1.0])


class TestFCurve:
    @pytest.mark.parametrize("kind", list(K))
    def test_f_of_one_is_zero(self, kind):
        assert f_curve(kind, 1.0) == 0.0

    def test_lecam_at_three(self):
        assert f_curve(K.LECAM, 3.0) == 1.0

    def test_kl_at_zero(self):
        assert f_curve(K.KL, 0.0) == 0.0

    def test_negative_t(self):
        with pytest.raises(DomainError):
            f_curve(K.LECAM, -1e-9)

    @pytest.mark.parametrize("kind", list(K))
    def test_convex_on_grid(self, kind):
        t = np.linspace(0.0, 20.0, 401)
        f = np.array([f_curve(kind, x) for x in t])
        second = f[:-2] - 2 * f[1:-1] + f[2:]
        assert np.all(second >= -1e-12)

    @pytest.mark.parametrize("t", [10.0, 100.0, 1000.0])
    def test_robustness_ordering(self, t):
        assert 0.25 * f_curve(K.LECAM, t) < f_curve(K.JS, t) < f_curve(K.TOTAL_VARIATION, t) < f_curve(K.CHI_SQUARED, t)


class TestGeneric:
    def test_tv_disjoint_uses_limit(self):
        assert generic_f_divergence(K.TOTAL_VARIATION, [1, 0], [0, 1]) == 2

    def test_chi2_identity(self):
        assert generic_f_divergence(K.CHI_SQUARED, [0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_callable_without_limit(self):
        f = lambda t: (t - 1) ** 2 / (t + 1)  # noqa: E731
        assert generic_f_divergence(f, [0.5, 0.5], [0.25, 0.75]) == pytest.approx(2 / 15, abs=1e-15)
        with pytest.raises(DomainError):
            generic_f_divergence(f, [1, 0], [0, 1])
        assert generic_f_divergence(f, [1, 0], [0, 1], slope_inf=1.0) == 2

    @settings(max_examples=300, deadline=None)
    @given(distribution_pairs())
    def test_matches_closed_forms(self, pq):
        p, q = pq
        for kind in K:
            closed = divergence(kind, p, q)
            generic = generic_f_divergence(kind, p, q)
            if math.isinf(closed):
                assert math.isinf(generic)
            else:
                assert abs(closed - generic) <= 1e-12


class TestLecamProperties:
    @settings(max_examples=300, deadline=None)
    @given(distribution_pairs())
    def test_symmetric_and_bounded(self, pq):
        p, q = pq
        d = lecam(p, q)
        assert abs(d - lecam(q, p)) <= 1e-12
        assert 0.0 <= d <= 2.0

    @settings(max_examples=300, deadline=None)
    @given(distribution_pairs())
    def test_chi2_decomposition(self, pq):
        p, q = pq
        m = DiscreteDistribution.normalized(0.5 * (p.weights + q.weights))
        rhs = divergence(K.CHI_SQUARED, p, m) + divergence(K.CHI_SQUARED, q, m)
        assert abs(lecam(p, q) - rhs) <= 1e-12

    @settings(max_examples=300, deadline=None)
    @given(distribution_pairs())
    def test_chain(self, pq):
        a, b, c, d = inequality_chain(*pq)
        assert b - a >= -1e-12 and c - b >= -1e-12 and d - c >= -1e-12

    @settings(max_examples=300, deadline=None)
    @given(distribution_pairs(max_size=16))
    def test_zero_iff_equal(self, pq):
        # weights are ratios of small integers, so distinct masses differ by >= 1e-4
        p, q = pq
        for a, b in ((p, q), (p, p)):
            close = np.max(np.abs(a.weights - b.weights)) <= 1e-9
            assert (lecam(a, b) <= 1e-12) == close

    def test_float_path_matches_exact_rationals(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 20))
            rp = rng.integers(0, 50, n).tolist()
            rq = rng.integers(0, 50, n).tolist()
            if sum(rp) == 0 or sum(rq) == 0:
                continue
            exact = brute_lecam(exact_fractions(rp), exact_fractions(rq))
            got = lecam(DiscreteDistribution.normalized(rp), DiscreteDistribution.normalized(rq))
            assert abs(got - float(exact)) <= 1e-13
