import numpy as np
import pytest

from src.core.exceptions import DimensionError, InvalidArgumentError
from src.factors.simplex import simplex_diffusion, simplex_drift, to_affine_params
from src.models.affine import AffineParams, build_generator
from src.models.consistency import affine_curve_function, affine_drift_function, consistency_residual


def diffusion_of(p):
    def c(z):
        nu = simplex_diffusion(p, z)
        return nu @ nu.T
    return c


def simplex_point(rng, d: int) -> np.ndarray:
    return rng.dirichlet(np.ones(d + 1))[:d] * 0.9


class TestConsistencyResidual:
    def test_toy_model_is_consistent(self):
        theta = 0.05
        phi = lambda x, z: np.exp(-theta * x) * z[0]
        mu = lambda z: -(theta - z) * z
        c = lambda z: np.array([[0.01 * z[0] * (theta - z[0])]])
        for x in (0.0, 0.5, 3.0, 20.0):
            for r in (0.0, 0.01, 0.04):
                assert consistency_residual(phi, mu, c, x, [r]) == pytest.approx(0.0, abs=1e-9)

    def test_simplex_models_are_consistent(self, rng, reference_model, two_factor_model):
        for p in (reference_model, two_factor_model):
            affine = to_affine_params(p)
            phi = affine_curve_function(build_generator(affine))
            for _ in range(25):
                z = simplex_point(rng, p.d)
                x = rng.uniform(0.0, 30.0)
                residual = consistency_residual(phi, lambda v: simplex_drift(p, v), diffusion_of(p), x, z)
                assert abs(residual) <= 1e-6

    def test_random_affine_models_are_consistent(self, rng):
        for _ in range(20):
            d = int(rng.integers(1, 4))
            p = AffineParams(
                gamma0=rng.uniform(-0.05, 0.05),
                gamma=rng.uniform(-0.5, 0.5, d).tolist(),
                b=rng.uniform(0.0, 0.1, d).tolist(),
                beta=rng.uniform(-0.5, 0.5, (d, d)).tolist(),
            )
            phi = affine_curve_function(build_generator(p))
            residual = consistency_residual(
                phi, affine_drift_function(p), lambda z: np.zeros((d, d)), rng.uniform(0, 3), simplex_point(rng, d)
            )
            assert abs(residual) <= 1e-6

    def test_perturbed_drift_is_detected(self, reference_model):
        affine = to_affine_params(reference_model)
        phi = affine_curve_function(build_generator(affine))
        wrong = AffineParams(gamma0=affine.gamma0, gamma=affine.gamma, b=affine.b, beta=[[affine.beta[0][0] + 0.1]])
        residual = consistency_residual(
            phi, affine_drift_function(wrong), diffusion_of(reference_model), 0.0, [0.3]
        )
        assert abs(residual) > 1e-4

    def test_shape_mismatch(self):
        phi = lambda x, z: float(z.sum())
        with pytest.raises(DimensionError):
            consistency_residual(phi, lambda z: np.zeros(3), lambda z: np.zeros((2, 2)), 1.0, [0.1, 0.2])

    def test_non_finite_curve(self):
        phi = lambda x, z: np.nan
        with pytest.raises(InvalidArgumentError):
            consistency_residual(phi, lambda z: np.zeros(1), lambda z: np.zeros((1, 1)), 1.0, [0.1])
