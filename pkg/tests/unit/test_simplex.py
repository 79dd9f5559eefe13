import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import DimensionError, DomainError
from src.factors.simplex import (
    SimplexFactorParams,
    USimulator,
    ZSimulator,
    g_forward,
    g_inverse,
    simplex_diffusion,
    simplex_drift,
    simulate_u,
    simulate_z,
    to_affine_params,
)
from src.models.affine import extend_state, quadratic_drift, short_rate


def linear_ode(kappa: float, theta: float, u0: float, t: float) -> float:
    """u' = kappa u + theta (1 + u)."""
    a = kappa + theta
    return (u0 + theta / a) * math.exp(a * t) - theta / a


class TestParams:
    def test_lengths_must_agree(self):
        with pytest.raises(ValidationError):
            SimplexFactorParams(kappa=[0.1, 0.2], theta=[0.1], q=[0.1, 0.1])

    def test_negative_theta_or_q_rejected(self):
        with pytest.raises(ValidationError):
            SimplexFactorParams(kappa=[0.1], theta=[-0.1], q=[0.1])
        with pytest.raises(ValidationError):
            SimplexFactorParams(kappa=[0.1], theta=[0.1], q=[-0.1])

    def test_gamma0_defaults_to_zero(self):
        assert SimplexFactorParams(kappa=[0.1], theta=[0.1], q=[0.1]).gamma0 == 0.0


class TestTransform:
    def test_g_forward_example(self):
        np.testing.assert_allclose(g_forward([1.0, 1.0]), [1 / 3, 1 / 3])

    def test_g_forward_lands_in_simplex(self, rng):
        z = g_forward(rng.exponential(5.0, (100, 3)))
        assert np.all(z >= 0)
        assert np.all(z.sum(axis=1) < 1)

    def test_round_trip(self, rng):
        u = rng.uniform(0.0, 10.0, (50, 3))
        np.testing.assert_allclose(g_inverse(g_forward(u)), u, rtol=1e-12, atol=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            g_forward([-0.1, 1.0])
        with pytest.raises(DomainError):
            g_inverse([0.5, 0.5])
        with pytest.raises(DomainError):
            g_inverse([-0.1, 0.2])


class TestAffineMapping:
    def test_reference_example(self, reference_model):
        affine = to_affine_params(reference_model)
        assert affine.b == pytest.approx([0.03])
        assert affine.beta[0][0] == pytest.approx(0.02, abs=1e-15)
        assert affine.gamma == pytest.approx([0.03], abs=1e-15)
        assert affine.gamma0 == 0.005

    def test_quadratic_term_cancels(self):
        p = SimplexFactorParams(kappa=[0.04, 0.09], theta=[0.01, 0.02], q=[0.2, 0.3])
        np.testing.assert_allclose(to_affine_params(p).gamma, [0.0, 0.0], atol=1e-15)

    def test_beta_is_diagonal(self, two_factor_model):
        beta = np.array(to_affine_params(two_factor_model).beta)
        assert beta[0, 1] == 0.0 and beta[1, 0] == 0.0

    def test_drift_identity(self, rng):
        for _ in range(50):
            d = int(rng.integers(1, 5))
            p = SimplexFactorParams(
                kappa=rng.uniform(-1, 1, d).tolist(),
                theta=rng.uniform(0, 1, d).tolist(),
                q=rng.uniform(0, 1, d).tolist(),
            )
            z = rng.dirichlet(np.ones(d + 1))[:d]
            theta_v = sum(p.theta)
            expected = np.array([
                p.theta[i]
                + (-theta_v + p.kappa[i] + p.q[i] ** 2) * z[i]
                + z[i] * sum((p.q[j] ** 2 - p.kappa[j]) * z[j] for j in range(d))
                for i in range(d)
            ])
            np.testing.assert_allclose(quadratic_drift(to_affine_params(p), z), expected, rtol=0, atol=1e-12)
            np.testing.assert_allclose(simplex_drift(p, z), expected, rtol=0, atol=1e-12)


class TestDiffusion:
    def test_loading_structure(self, two_factor_model):
        z = np.array([0.2, 0.5])
        nu = simplex_diffusion(two_factor_model, z)
        q = np.array(two_factor_model.q)
        assert nu[0, 0] == pytest.approx(q[0] * (1 - z[0]) * math.sqrt(z[0]))
        assert nu[0, 1] == pytest.approx(-z[0] * q[1] * math.sqrt(z[1]))

    def test_wrong_shape(self, two_factor_model):
        with pytest.raises(DimensionError):
            simplex_diffusion(two_factor_model, [0.1])


class TestUSimulator:
    def test_constant_without_dynamics(self):
        p = SimplexFactorParams(kappa=[0.0, 0.0], theta=[0.0, 0.0], q=[0.0, 0.0])
        bundle = simulate_u(p, [0.4, 1.5], dt=0.01, n_steps=50, n_paths=3, seed=1)
        np.testing.assert_array_equal(bundle.states, np.broadcast_to([0.4, 1.5], bundle.states.shape))

    def test_linear_ode_oracle(self):
        p = SimplexFactorParams(kappa=[0.1], theta=[0.02], q=[0.0])
        bundle = simulate_u(p, [1.0], dt=1e-4, n_steps=10_000, n_paths=1, seed=0)
        assert bundle.terminal[0, 0] == pytest.approx(linear_ode(0.1, 0.02, 1.0, 1.0), abs=1e-4)

    def test_paths_are_nonnegative(self, two_factor_model):
        bundle = simulate_u(two_factor_model, [0.01, 0.01], dt=1e-2, n_steps=100, n_paths=500, seed=3)
        assert np.all(bundle.states >= 0.0)

    def test_rejects_negative_start(self, reference_model):
        with pytest.raises(DomainError):
            USimulator(reference_model, [-0.1], dt=0.01, n_steps=1, n_paths=1, seed=0)

    @pytest.mark.slow
    def test_mean_matches_moment_ode(self):
        p = SimplexFactorParams(kappa=[-1.0], theta=[0.5], q=[0.3])
        simulator = USimulator(p, [0.5], dt=1e-3, n_steps=1000, n_paths=200_000, seed=11)
        terminal = np.concatenate(simulator.map_paths(lambda block: block.states[:, -1, 0]))
        error = terminal.std(ddof=1) / math.sqrt(terminal.size)
        assert abs(terminal.mean() - linear_ode(-1.0, 0.5, 0.5, 1.0)) <= 3 * error


class TestZSimulator:
    def test_constant_without_dynamics(self):
        p = SimplexFactorParams(kappa=[0.0, 0.0], theta=[0.0, 0.0], q=[0.0, 0.0])
        bundle = simulate_z(p, [0.2, 0.3], dt=0.01, n_steps=50, n_paths=3, seed=1)
        np.testing.assert_array_equal(bundle.states, np.broadcast_to([0.2, 0.3], bundle.states.shape))
        assert bundle.clamp_fraction == 0.0

    @pytest.mark.parametrize("dt", [1e-2, 1e-3])
    def test_deterministic_path_tracks_transformed_u(self, dt):
        p = SimplexFactorParams(kappa=[0.1], theta=[0.02], q=[0.0])
        n_steps = int(round(1.0 / dt))
        z = simulate_z(p, g_forward([1.0]), dt=dt, n_steps=n_steps, n_paths=1, seed=0)
        u = simulate_u(p, [1.0], dt=dt, n_steps=n_steps, n_paths=1, seed=0)
        assert np.max(np.abs(z.states[0] - g_forward(u.states[0]))) <= 10 * dt

    def test_stays_in_simplex(self, two_factor_model):
        # quick run; the 1e4-path version below is marked slow
        bundle = simulate_z(two_factor_model, [0.3, 0.3], dt=1e-3, n_steps=1000, n_paths=2000, seed=5)
        assert np.all(bundle.states >= 0.0)
        assert np.all(bundle.states.sum(axis=-1) <= 1.0)
        assert bundle.clamp_fraction < 0.01

    @pytest.mark.slow
    def test_stays_in_simplex_at_desk_scale(self, two_factor_model):
        simulator = ZSimulator(two_factor_model, [0.3, 0.3], dt=1e-3, n_steps=1000, n_paths=10_000, seed=5)

        def inspect(block):
            inside = np.all(block.states >= 0.0) and np.all(block.states.sum(axis=-1) <= 1.0)
            return bool(inside), int(block.clamp_counts.sum())

        parts = simulator.map_paths(inspect)
        assert all(inside for inside, _ in parts)
        assert sum(clamped for _, clamped in parts) / (10_000 * 1000) < 0.01

    def test_short_rate_is_bounded(self, reference_model):
        bundle = simulate_z(reference_model, [0.3], dt=1e-3, n_steps=1000, n_paths=1000, seed=6)
        affine = to_affine_params(reference_model)
        rates = short_rate(affine, extend_state(bundle.states.reshape(-1, 1)))
        bound = abs(affine.gamma0) + max(abs(g) for g in affine.gamma)
        assert np.all(np.abs(rates) <= bound + 1e-15)

    def test_rejects_start_outside_simplex(self, two_factor_model):
        with pytest.raises(DomainError):
            ZSimulator(two_factor_model, [0.6, 0.5], dt=0.01, n_steps=1, n_paths=1, seed=0)
        with pytest.raises(DimensionError):
            ZSimulator(two_factor_model, [0.1], dt=0.01, n_steps=1, n_paths=1, seed=0)

    def test_independent_of_blocks_and_threads(self, two_factor_model):
        a = simulate_z(two_factor_model, [0.3, 0.3], dt=1e-2, n_steps=100, n_paths=50, seed=9, block_size=7, threads=4)
        b = simulate_z(two_factor_model, [0.3, 0.3], dt=1e-2, n_steps=100, n_paths=50, seed=9, block_size=64, threads=1)
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.clamp_counts, b.clamp_counts)

    def test_seed_changes_paths(self, reference_model):
        a = simulate_z(reference_model, [0.3], dt=1e-2, n_steps=10, n_paths=5, seed=1)
        b = simulate_z(reference_model, [0.3], dt=1e-2, n_steps=10, n_paths=5, seed=2)
        assert not np.array_equal(a.states, b.states)
