import numpy as np
import pytest
from scipy.linalg import sqrtm

from lecam.metrics import (
    gaussian_summary,
    gp0_diagnostic,
    mode_coverage,
    proxy_frechet,
    sqrtm_2x2,
)
from lecam.nn import MlpNet

from gradcheck import max_rel_error, numeric_grad


def frechet_oracle(a, b):
    # eigendecomposition-based square root, independent of the closed form
    m1, m2 = a.mean(0), b.mean(0)
    s1, s2 = np.cov(a, rowvar=False), np.cov(b, rowvar=False)
    w, v = np.linalg.eig(s1 @ s2)
    root = (v @ np.diag(np.sqrt(w.astype(complex))) @ np.linalg.inv(v)).real
    return float(np.sum((m1 - m2) ** 2) + np.trace(s1 + s2 - 2 * root))


def test_identical_sets(rng):
    x = rng.normal(size=(50, 2))
    assert proxy_frechet(x, x) == pytest.approx(0.0, abs=1e-9)


def test_mean_shift(rng):
    a = rng.normal(size=(200_000, 2))
    b = rng.normal(size=(200_000, 2)) + np.array([3.0, 0.0])
    assert proxy_frechet(a, b) == pytest.approx(9.0, abs=0.05)


def test_small_sets_match_eig_oracle(rng):
    for _ in range(50):
        a = rng.normal(size=(4, 2))
        b = rng.normal(size=(4, 2)) * 2 + 1
        assert proxy_frechet(a, b) == pytest.approx(frechet_oracle(a, b), rel=1e-9, abs=1e-12)


def test_symmetric(rng):
    for _ in range(50):
        a, b = rng.normal(size=(30, 2)), rng.normal(size=(20, 2)) * 0.5
        assert abs(proxy_frechet(a, b) - proxy_frechet(b, a)) <= 1e-9


def test_sqrtm_squares_back(rng):
    for _ in range(200):
        x = rng.normal(size=(2, 2))
        y = rng.normal(size=(2, 2))
        a = (x @ x.T + 1e-3 * np.eye(2)) @ (y @ y.T + 1e-3 * np.eye(2))
        r = sqrtm_2x2(a)
        np.testing.assert_allclose(r @ r, a, atol=1e-10 * max(1.0, np.abs(a).max()))
        np.testing.assert_allclose(r, sqrtm(a).real, rtol=1e-7, atol=1e-10)


def test_degenerate_covariance_flagged():
    pts = np.ones((5, 2))
    g = gaussian_summary(pts)
    assert g.regularized
    assert np.all(np.linalg.eigvalsh(g.covariance) > 0)
    assert proxy_frechet(pts, pts) == pytest.approx(0.0, abs=1e-9)


def test_unbiased_covariance(rng):
    x = rng.normal(size=(10, 2))
    np.testing.assert_allclose(gaussian_summary(x).covariance, np.cov(x, rowvar=False), atol=1e-15)


def test_needs_two_points():
    with pytest.raises(ValueError):
        proxy_frechet(np.zeros((1, 2)), np.zeros((3, 2)))


class TestModeCoverage:
    centers = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])

    def test_centers_themselves(self):
        assert mode_coverage(self.centers, self.centers, 0.05) == (3, 1.0)

    def test_one_mode(self):
        assert mode_coverage(np.zeros((10, 2)), self.centers, 0.05) == (1, 1.0)

    def test_uniform_box_fraction(self, rng):
        # radius 0.9 disks do not overlap for centers 2 apart
        std, n = 0.3, 400_000
        pts = rng.uniform(-10, 10, size=(n, 2))
        _, frac = mode_coverage(pts, self.centers, std)
        expected = 3 * np.pi * (3 * std) ** 2 / 400.0
        assert abs(frac - expected) <= 4 * np.sqrt(expected * (1 - expected) / n)

    def test_permutation_invariant(self, rng):
        pts = rng.normal(size=(300, 2))
        assert mode_coverage(pts, self.centers, 0.3) == mode_coverage(rng.permutation(pts), self.centers, 0.3)

    def test_one_percent_threshold(self):
        pts = np.vstack([np.zeros((99, 2)), [[2.0, 0.0]], np.full((900, 2), 50.0)])
        assert mode_coverage(pts, self.centers, 0.05)[0] == 1
        pts[-10:] = [2.0, 0.0]
        assert mode_coverage(pts, self.centers, 0.05)[0] == 2


class TestGp0:
    def test_linear(self, rng):
        net = MlpNet([2, 1], rng=rng)
        w = net.weights[0][:, 0]
        assert gp0_diagnostic(net, rng.normal(size=(7, 2))) == pytest.approx(float(w @ w), rel=1e-14)

    def test_constant(self, rng):
        net = MlpNet([2, 4, 1], init="zeros")
        net.biases[-1][:] = 3.0
        assert gp0_diagnostic(net, rng.normal(size=(7, 2))) == 0.0

    def test_matches_finite_differences(self, rng):
        for _ in range(10):
            net = MlpNet([2, 8, 8, 1], "lrelu", rng=rng)
            x = rng.normal(size=(6, 2))
            fd = np.zeros_like(x)
            for i in range(x.shape[0]):
                xi = x[i : i + 1].copy()
                fd[i] = numeric_grad(lambda: float(net(xi)[0, 0]), xi)[0]
            expected = float(np.mean(np.sum(fd * fd, axis=1)))
            assert max_rel_error(gp0_diagnostic(net, x), expected) < 1e-5
