"""Exact single-anchor WGAN game on a finite support.

The discriminator is a free real value per support point, so the
regularized loss

    L(D) = E_g[D] - E_d[D] + lam * (E_d[(D + alpha)^2] + E_g[(D - alpha)^2])

is a separable quadratic and its minimizer, the generator's virtual
objective and the LeCam identity can all be checked in closed form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from lecam.divergences import DiscreteDistribution, lecam
from lecam.errors import ConvergenceError, DimensionError, DomainError

log = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e6


@dataclass(frozen=True, eq=False)
class TabularGame:
    p_d: DiscreteDistribution
    p_g: DiscreteDistribution
    lam: float
    alpha: float

    def __post_init__(self) -> None:
        if len(self.p_d) != len(self.p_g):
            raise DimensionError("p_d and p_g must share a support")
        if not self.lam > 0:
            raise DomainError("lambda must be > 0")
        if not self.alpha > 0:
            raise DomainError("alpha must be > 0")

    @property
    def weight(self) -> float:
        """LeCam weight ``1/(2 lam) - alpha``."""
        return 1.0 / (2.0 * self.lam) - self.alpha

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Masses restricted to points where ``p_d + p_g > 0``."""
        pd, pg = self.p_d.weights, self.p_g.weights
        keep = (pd + pg) > 0
        dropped = int(keep.size - keep.sum())
        if dropped:
            log.info("dropping %d zero-mass support point(s); their D value is unconstrained", dropped)
        return pd[keep], pg[keep]


@dataclass(frozen=True, eq=False)
class TabularDiscriminator:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise DomainError("discriminator values must be finite")
        object.__setattr__(self, "values", v)


def optimal_discriminator(game: TabularGame) -> TabularDiscriminator:
    """Closed-form minimizer ``D*(x) = (p_d - p_g) * weight / (p_d + p_g)``.

    Returned on the retained support (zero-mass points removed).
    """
    pd, pg = game.support()
    return TabularDiscriminator((pd - pg) * game.weight / (pd + pg))


def _check(game: TabularGame, d: TabularDiscriminator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pd, pg = game.support()
    if d.values.size != pd.size:
        raise DimensionError(f"discriminator has {d.values.size} values, game support has {pd.size}")
    return pd, pg, d.values


def regularized_loss(game: TabularGame, d: TabularDiscriminator) -> float:
    pd, pg, v = _check(game, d)
    lam, a = game.lam, game.alpha
    terms = pg * v - pd * v + lam * (pd * (v + a) ** 2 + pg * (v - a) ** 2)
    return math.fsum(terms)


def loss_gradient(game: TabularGame, d: TabularDiscriminator) -> np.ndarray:
    """Exact gradient of :func:`regularized_loss` with respect to each D value."""
    pd, pg, v = _check(game, d)
    lam, a = game.lam, game.alpha
    return pg - pd + 2.0 * lam * (pd * (v + a) + pg * (v - a))


def virtual_objective(game: TabularGame) -> float:
    """``C(G) = sum (p_d - p_g) D*``, the generator objective at the optimal D."""
    pd, pg = game.support()
    return math.fsum((pd - pg) * optimal_discriminator(game).values)


def lecam_identity_rhs(game: TabularGame) -> float:
    return game.weight * lecam(game.p_d, game.p_g)


def gradient_descent_discriminator(game: TabularGame, steps: int, lr: float) -> TabularDiscriminator:
    """Plain gradient descent on :func:`regularized_loss` starting from D = 0."""
    if steps < 1:
        raise DomainError("steps must be >= 1")
    if lr < 0:
        raise DomainError("lr must be >= 0")
    pd, _ = game.support()
    d = TabularDiscriminator(np.zeros(pd.size))
    v = d.values
    for i in range(steps):
        v = v - lr * loss_gradient(game, TabularDiscriminator(v))
        if np.max(np.abs(v)) > DIVERGENCE_BOUND:
            raise ConvergenceError(f"gradient descent diverged at step {i + 1}")
    return TabularDiscriminator(v)


def steps_for_tolerance(game: TabularGame, lr: float, tol: float) -> int:
    """Iterations after which gradient descent from 0 is within ``tol`` of D*.

    Coordinate ``x`` contracts by ``|1 - 2 lr lam (p_d + p_g)|`` per step.
    """
    pd, pg = game.support()
    rates = np.abs(1.0 - 2.0 * lr * game.lam * (pd + pg))
    worst = float(rates.max())
    if worst >= 1.0:
        raise ConvergenceError("step size too large or too small for convergence")
    err0 = float(np.max(np.abs(optimal_discriminator(game).values)))
    if err0 <= tol or worst == 0.0:
        return 1
    return max(1, math.ceil(math.log(tol / err0) / math.log(worst)))


def ema_anchor_dynamics(game: TabularGame, gamma: float, steps: int, lr: float) -> np.ndarray:
    """Alternate one D gradient step and one EMA update of the anchor.

    The anchor follows ``E_d[D]`` and is frozen during each D step; it starts
    at ``game.alpha``. Returns the anchor after every step.
    """
    if not 0.0 <= gamma < 1.0:
        raise DomainError("gamma must lie in [0, 1)")
    if steps < 1:
        raise DomainError("steps must be >= 1")
    pd, pg = game.support()
    v = np.zeros(pd.size)
    alpha = game.alpha
    lam = game.lam
    traj = np.empty(steps)
    for i in range(steps):
        grad = pg - pd + 2.0 * lam * (pd * (v + alpha) + pg * (v - alpha))
        v = v - lr * grad
        if np.max(np.abs(v)) > DIVERGENCE_BOUND:
            raise ConvergenceError(f"anchor dynamics diverged at step {i + 1}")
        alpha = gamma * alpha + (1.0 - gamma) * float(pd @ v)
        traj[i] = alpha
    return traj


def stationary_anchor(game: TabularGame) -> float:
    """Fixed point of :func:`ema_anchor_dynamics`.

    At the optimum ``E_d[D*] = weight * Δ / 2``; solving
    ``alpha = (1/(2 lam) - alpha) Δ / 2`` gives ``Δ / (4 lam (1 + Δ/2))``.
    """
    delta = lecam(game.p_d, game.p_g)
    return delta / (4.0 * game.lam * (1.0 + 0.5 * delta))


# --- randomized verification ------------------------------------------------


def random_distribution(rng: np.random.Generator, n: int) -> DiscreteDistribution:
    return DiscreteDistribution.normalized(rng.dirichlet(np.ones(n)))


def random_game(
    rng: np.random.Generator,
    min_support: int = 2,
    max_support: int = 32,
    max_alpha: float = 2.0,
    boundary_margin: float = 0.01,
    negative_weight: bool = False,
) -> TabularGame:
    """Random game with ``lam`` on one side of ``1/(2 alpha)``.

    ``lam`` stays outside a relative ``boundary_margin`` band around the
    bound; with ``negative_weight`` it is sampled above the bound instead.
    """
    n = int(rng.integers(min_support, max_support + 1))
    pd = random_distribution(rng, n)
    pg = random_distribution(rng, n)
    alpha = float(rng.uniform(0.0, max_alpha))
    while alpha == 0.0:
        alpha = float(rng.uniform(0.0, max_alpha))
    bound = 1.0 / (2.0 * alpha)
    if negative_weight:
        lam = bound * (1.0 + boundary_margin) + float(rng.uniform(0.0, 4.0 * bound))
    else:
        lam = float(rng.uniform(0.0, (1.0 - boundary_margin) * bound))
        while lam == 0.0:
            lam = float(rng.uniform(0.0, (1.0 - boundary_margin) * bound))
    return TabularGame(pd, pg, lam, alpha)


@dataclass(frozen=True)
class VerifyReport:
    trials: int
    max_identity_error: float
    max_stationarity_residual: float
    identity_tol: float
    stationarity_tol: float
    negative_weight: bool = False
    all_negative: bool = True

    @property
    def passed(self) -> bool:
        if self.negative_weight:
            return self.all_negative
        return (
            self.max_identity_error <= self.identity_tol
            and self.max_stationarity_residual <= self.stationarity_tol
        )


def verify_lecam_identity(
    trials: int,
    seed: int = 0,
    negative_weight: bool = False,
    identity_tol: float = 1e-9,
    stationarity_tol: float = 1e-10,
) -> VerifyReport:
    """Check ``C(G) = (1/(2 lam) - alpha) Δ`` and stationarity on random games."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    max_err = 0.0
    max_res = 0.0
    all_neg = True
    for _ in range(trials):
        game = random_game(rng, negative_weight=negative_weight)
        c = virtual_objective(game)
        max_err = max(max_err, abs(c - lecam_identity_rhs(game)))
        res = loss_gradient(game, optimal_discriminator(game))
        max_res = max(max_res, float(np.max(np.abs(res))))
        if negative_weight and not c < 0:
            all_neg = False
    return VerifyReport(trials, max_err, max_res, identity_tol, stationarity_tol, negative_weight, all_neg)
