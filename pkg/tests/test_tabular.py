import math

import numpy as np
import pytest

from lecam.divergences import DiscreteDistribution, lecam
from lecam.errors import ConvergenceError, DimensionError, DomainError
from lecam.tabular import (
    TabularDiscriminator,
    TabularGame,
    ema_anchor_dynamics,
    gradient_descent_discriminator,
    lecam_identity_rhs,
    loss_gradient,
    optimal_discriminator,
    random_game,
    regularized_loss,
    stationary_anchor,
    steps_for_tolerance,
    verify_lecam_identity,
    virtual_objective,
)

TINY_ALPHA = 1e-15


def game(pd, pg, lam, alpha):
    return TabularGame(DiscreteDistribution(pd), DiscreteDistribution(pg), lam, alpha)


def test_hypotheses_checked():
    with pytest.raises(DomainError):
        game([1.0], [1.0], 0.0, 0.5)
    with pytest.raises(DomainError):
        game([1.0], [1.0], 0.5, 0.0)
    with pytest.raises(DimensionError):
        game([1.0], [0.5, 0.5], 0.5, 0.5)


def test_symmetric_game_has_zero_discriminator():
    g = game([0.2, 0.8], [0.2, 0.8], 0.3, 0.5)
    assert np.all(optimal_discriminator(g).values == 0.0)
    assert virtual_objective(g) == 0.0
    assert regularized_loss(g, TabularDiscriminator([0.0, 0.0])) == pytest.approx(2 * 0.3 * 0.25, abs=1e-15)


def test_worked_example_small_alpha():
    g = game([0.75, 0.25], [0.25, 0.75], 0.25, TINY_ALPHA)
    np.testing.assert_allclose(optimal_discriminator(g).values, [1.0, -1.0], atol=1e-14)
    assert virtual_objective(g) == pytest.approx(1.0, abs=1e-14)
    assert lecam(g.p_d, g.p_g) == pytest.approx(0.5, abs=1e-15)
    assert lecam_identity_rhs(g) == pytest.approx(1.0, abs=1e-14)


def test_weight_vanishes_at_bound():
    g = game([0.75, 0.25], [0.25, 0.75], 0.5, 1.0)
    assert np.all(optimal_discriminator(g).values == 0.0)


def test_zero_loss_value():
    lam, alpha = 0.3, 0.8
    g = game([0.1, 0.6, 0.3], [0.5, 0.2, 0.3], lam, alpha)
    assert regularized_loss(g, TabularDiscriminator(np.zeros(3))) == pytest.approx(2 * lam * alpha**2, abs=1e-15)


def test_zero_mass_points_dropped():
    g = game([0.5, 0.0, 0.5], [0.25, 0.0, 0.75], 0.3, 0.2)
    assert optimal_discriminator(g).values.size == 2
    assert abs(virtual_objective(g) - lecam_identity_rhs(g)) < 1e-15


def test_dimension_error_on_loss():
    g = game([0.5, 0.5], [0.5, 0.5], 0.3, 0.2)
    with pytest.raises(DimensionError):
        regularized_loss(g, TabularDiscriminator([0.0]))


def test_optimum_beats_perturbations(rng):
    for _ in range(20):
        g = random_game(rng, max_support=10)
        d = optimal_discriminator(g).values
        best = regularized_loss(g, TabularDiscriminator(d))
        for _ in range(100):
            assert best <= regularized_loss(g, TabularDiscriminator(d + rng.normal(scale=0.1, size=d.size)))


def test_identity_and_stationarity(rng):
    for _ in range(300):
        g = random_game(rng)
        assert abs(virtual_objective(g) - lecam_identity_rhs(g)) <= 1e-9
        assert np.max(np.abs(loss_gradient(g, optimal_discriminator(g)))) <= 1e-10


def test_negative_weight_flips_sign(rng):
    for _ in range(100):
        g = random_game(rng, negative_weight=True)
        assert g.weight < 0
        assert virtual_objective(g) < 0


def test_gradient_descent_converges(rng):
    for _ in range(10):
        g = random_game(rng, max_support=6)
        steps = steps_for_tolerance(g, 0.1, 1e-6)
        if steps > 200_000:
            continue
        d = gradient_descent_discriminator(g, steps, 0.1)
        assert np.max(np.abs(d.values - optimal_discriminator(g).values)) < 1e-4


def test_gradient_descent_trivial_cases():
    g = game([0.3, 0.7], [0.3, 0.7], 0.3, 0.5)
    assert np.all(gradient_descent_discriminator(g, 50, 0.1).values == 0.0)
    h = game([0.3, 0.7], [0.6, 0.4], 0.3, 0.5)
    assert np.all(gradient_descent_discriminator(h, 10, 0.0).values == 0.0)


def test_gradient_descent_divergence_reported():
    g = game([0.3, 0.7], [0.6, 0.4], 0.3, 0.5)
    with pytest.raises(ConvergenceError):
        gradient_descent_discriminator(g, 10_000, 50.0)


def test_anchor_dynamics_gamma_zero_tracks_mean():
    g = game([0.3, 0.7], [0.6, 0.4], 0.3, 0.5)
    traj = ema_anchor_dynamics(g, 0.0, 3, 0.1)
    # replay by hand: with gamma = 0 the anchor is E_d[D] after each step
    v = np.zeros(2)
    a = 0.5
    for i in range(3):
        v = v - 0.1 * loss_gradient(TabularGame(g.p_d, g.p_g, g.lam, a), TabularDiscriminator(v))
        a = float(g.p_d.weights @ v)
        assert traj[i] == pytest.approx(a, abs=1e-15)


def test_anchor_dynamics_converge_to_fixed_point(rng):
    for _ in range(5):
        g = random_game(rng, max_support=6)
        traj = ema_anchor_dynamics(g, 0.99, 40_000, 0.5)
        assert abs(traj[-1] - traj[-2]) < 1e-6
        assert traj[-1] == pytest.approx(stationary_anchor(g), abs=1e-6)


def test_verify_report():
    rep = verify_lecam_identity(50, seed=1)
    assert rep.passed and rep.trials == 50
    neg = verify_lecam_identity(50, seed=1, negative_weight=True)
    assert neg.passed and neg.all_negative
    with pytest.raises(DomainError):
        verify_lecam_identity(0)
