"""Desk-scale sample-quality metrics and discriminator diagnostics.

``proxy_frechet`` is the Fréchet formula behind FID applied straight to 2-D
coordinates. It is a stand-in, not FID.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from lecam.errors import DimensionError
from lecam.nn import MlpNet, input_gradients

log = logging.getLogger(__name__)

DEGENERATE_JITTER = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianSummary:
    mean: np.ndarray
    covariance: np.ndarray
    regularized: bool = False


def gaussian_summary(points: np.ndarray) -> GaussianSummary:
    """Mean and unbiased covariance; zero covariance gets a tiny jitter."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionError(f"expected (n, 2) points, got {pts.shape}")
    if pts.shape[0] < 2:
        raise DimensionError("need at least 2 points for a covariance")
    mu = pts.mean(axis=0)
    c = pts - mu
    cov = c.T @ c / (pts.shape[0] - 1)
    cov = 0.5 * (cov + cov.T)
    regularized = False
    if not np.any(cov):
        cov = cov + DEGENERATE_JITTER * np.eye(2)
        regularized = True
        log.warning("rank-0 covariance regularized by %g*I", DEGENERATE_JITTER)
    return GaussianSummary(mu, cov, regularized)


def sqrtm_2x2(a: np.ndarray) -> np.ndarray:
    """Principal square root of a 2x2 matrix with nonnegative real eigenvalues.

    Uses ``sqrt(A) = (A + s I) / t`` with ``s = sqrt(det A)`` and
    ``t = sqrt(tr A + 2 s)``.
    """
    a = np.asarray(a, dtype=np.float64)
    s = math.sqrt(max(float(np.linalg.det(a)), 0.0))
    t2 = float(np.trace(a)) + 2.0 * s
    if t2 <= 0.0:
        return np.zeros((2, 2))
    return (a + s * np.eye(2)) / math.sqrt(t2)


def trace_sqrt_product(s1: np.ndarray, s2: np.ndarray) -> float:
    """``Tr (S1 S2)^{1/2}``, which equals ``sqrt(tr A + 2 sqrt(det A))``."""
    a = s1 @ s2
    s = math.sqrt(max(float(np.linalg.det(a)), 0.0))
    return math.sqrt(max(float(np.trace(a)) + 2.0 * s, 0.0))


def frechet_between(g1: GaussianSummary, g2: GaussianSummary) -> float:
    d = g1.mean - g2.mean
    val = float(d @ d) + float(np.trace(g1.covariance) + np.trace(g2.covariance))
    val -= 2.0 * trace_sqrt_product(g1.covariance, g2.covariance)
    return max(val, 0.0)


def proxy_frechet(real_pts: np.ndarray, fake_pts: np.ndarray) -> float:
    return frechet_between(gaussian_summary(real_pts), gaussian_summary(fake_pts))


def mode_coverage(fake_pts: np.ndarray, centers: np.ndarray, std: float) -> tuple[int, float]:
    """Modes holding at least 1% of samples within ``3 std``, and the share of
    samples within ``3 std`` of any mode."""
    pts = np.asarray(fake_pts, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if centers.size == 0:
        raise DimensionError("no mode centers given")
    if pts.shape[0] == 0:
        return 0, 0.0
    dist2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    near = dist2 <= (3.0 * std) ** 2
    per_mode = near.sum(axis=0)
    covered = int(np.sum(per_mode >= 0.01 * pts.shape[0]))
    return covered, float(near.any(axis=1).mean())


def gp0_diagnostic(d_net: MlpNet, real_batch: np.ndarray) -> float:
    """Mean squared input-gradient norm of D on a real batch (monitor only)."""
    g = input_gradients(d_net, real_batch)
    return float(np.mean(np.sum(g * g, axis=1)))
