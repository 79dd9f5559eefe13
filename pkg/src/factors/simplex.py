"""
Well-behaved factor processes on the simplex.

A nonnegative diffusion U,

    dU_i = (kappa_i U_i + theta_i V) dt + q_i sqrt(U_i V) dW_i,   V = 1 + sum_j U_j,

is mapped through G(u) = u / (1 + sum u) into the half-open simplex
{z >= 0, sum z < 1}. The image Z = G(U) has the quadratic drift an
arbitrage-free affine discount model requires:

    mu_i(z) = theta_i + (kappa_i + q_i^2 - theta_V) z_i + z_i sum_j (q_j^2 - kappa_j) z_j

Both U and Z are simulated with Euler-Maruyama and full truncation.
"""

from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import get_settings
from src.core.exceptions import DimensionError, DomainError
from src.factors.base_simulator import BaseSimulator
from src.factors.bundle import PathBundle
from src.models.affine import AffineParams
from src.utils.helpers import require_finite


class SimplexFactorParams(BaseModel):
    """(kappa, theta, q) of the U-dynamics plus the free constant gamma_0."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kappa: list[float] = Field(min_length=1)
    theta: list[float]
    q: list[float]
    gamma0: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        d = len(self.kappa)
        if len(self.theta) != d or len(self.q) != d:
            raise ValueError("kappa, theta and q must have the same length")
        if any(value < 0 for value in self.theta) or any(value < 0 for value in self.q):
            raise ValueError("theta and q must be nonnegative")
        return self

    @property
    def d(self) -> int:
        return len(self.kappa)

    @cached_property
    def kappa_vector(self) -> np.ndarray:
        return np.array(self.kappa, dtype=float)

    @cached_property
    def theta_vector(self) -> np.ndarray:
        return np.array(self.theta, dtype=float)

    @cached_property
    def q_vector(self) -> np.ndarray:
        return np.array(self.q, dtype=float)

    @property
    def theta_v(self) -> float:
        return float(self.theta_vector.sum())


def g_forward(u) -> np.ndarray:
    """G(u) = u / (1 + sum u), for u of shape (d,) or (n, d)."""
    u = require_finite("u", u)
    if np.any(u < 0):
        raise DomainError("G is defined on [0, inf)^d; got a negative coordinate")
    return u / (1.0 + u.sum(axis=-1, keepdims=True))


def g_inverse(z) -> np.ndarray:
    """G^{-1}(z) = z / (1 - sum z), for z in the half-open simplex."""
    z = require_finite("z", z)
    if np.any(z < 0):
        raise DomainError("z must be nonnegative")
    slack = 1.0 - z.sum(axis=-1, keepdims=True)
    if np.any(slack <= 0):
        raise DomainError("z lies on or beyond the simplex boundary sum(z) = 1")
    return z / slack


def to_affine_params(p: SimplexFactorParams) -> AffineParams:
    """Affine model induced by Z = G(U): b = theta, beta = diag(kappa + q^2 - theta_V), gamma = q^2 - kappa."""
    q2 = p.q_vector ** 2
    beta = np.diag(p.kappa_vector + q2 - p.theta_v)
    return AffineParams(
        gamma0=p.gamma0,
        gamma=(q2 - p.kappa_vector).tolist(),
        b=p.theta_vector.tolist(),
        beta=beta.tolist(),
    )


def simplex_drift(p: SimplexFactorParams, z) -> np.ndarray:
    """
    Drift of dZ, for z of shape (d,) or (n, d).

    The linear coefficient carries +q_i^2; the Ito drift of G(U) carries -q_i^2,
    so the two laws agree only for q = 0 (see DESIGN.md).
    """
    z = np.asarray(z, dtype=float)
    q2 = p.q_vector ** 2
    return (
        p.theta_vector
        + (p.kappa_vector + q2 - p.theta_v) * z
        + z * (z @ (q2 - p.kappa_vector))[..., None]
    )


def simplex_diffusion(p: SimplexFactorParams, z) -> np.ndarray:
    """Volatility matrix nu(z) of dZ: nu_ij = (delta_ij - z_i) q_j sqrt(z_j)."""
    z = np.asarray(z, dtype=float)
    if z.shape != (p.d,):
        raise DimensionError(f"z must have shape ({p.d},), got {z.shape}")
    loading = p.q_vector * np.sqrt(np.maximum(z, 0.0))
    return np.diag(loading) - np.outer(z, loading)


def _check_dim(p: SimplexFactorParams, name: str, x) -> np.ndarray:
    x = require_finite(name, x)
    if x.shape != (p.d,):
        raise DimensionError(f"{name} must have shape ({p.d},), got {x.shape}")
    return x


class USimulator(BaseSimulator):
    """Euler-Maruyama for the nonnegative U-process, clamped at 0."""

    def __init__(self, p: SimplexFactorParams, u0, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs):
        super().__init__(dt, n_steps, n_paths, seed, **kwargs)
        self.params = p
        self.u0 = _check_dim(p, "u0", u0)
        if np.any(self.u0 < 0):
            raise DomainError("u0 must be nonnegative")

    def get_name(self) -> str:
        return "U-process"

    @property
    def n_factors(self) -> int:
        return self.params.d

    def initial_state(self, n: int) -> np.ndarray:
        return np.tile(self.u0, (n, 1))

    def step(self, state: np.ndarray, dw: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        v = 1.0 + state.sum(axis=1, keepdims=True)
        drift = p.kappa_vector * state + p.theta_vector * v
        diffusion = p.q_vector * np.sqrt(np.maximum(state * v, 0.0)) * dw
        new = state + drift * self.dt + diffusion

        negative = new < 0.0
        np.maximum(new, 0.0, out=new)
        return new, negative.any(axis=1)


class ZSimulator(BaseSimulator):
    """Euler-Maruyama for Z on the simplex, projected back after every step."""

    def __init__(self, p: SimplexFactorParams, z0, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs):
        super().__init__(dt, n_steps, n_paths, seed, **kwargs)
        self.params = p
        self.z0 = _check_dim(p, "z0", z0)
        if np.any(self.z0 < 0) or self.z0.sum() >= 1.0:
            raise DomainError(f"z0={self.z0.tolist()} is outside the simplex")
        self.ceiling = get_settings().simplex_ceiling

    def get_name(self) -> str:
        return "Z-process"

    @property
    def n_factors(self) -> int:
        return self.params.d

    def initial_state(self, n: int) -> np.ndarray:
        return np.tile(self.z0, (n, 1))

    def step(self, state: np.ndarray, dw: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        loading = p.q_vector * np.sqrt(np.maximum(state, 0.0)) * dw
        diffusion = loading - state * loading.sum(axis=1, keepdims=True)
        new = state + simplex_drift(p, state) * self.dt + diffusion

        negative = (new < 0.0).any(axis=1)
        np.maximum(new, 0.0, out=new)
        total = new.sum(axis=1)
        over = total > 1.0
        if over.any():
            new[over] *= (self.ceiling / total[over])[:, None]
        return new, negative | over


def simulate_u(p: SimplexFactorParams, u0, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs) -> PathBundle:
    """Simulate U-paths; states are nonnegative at every step."""
    return USimulator(p, u0, dt, n_steps, n_paths, seed, **kwargs).simulate()


def simulate_z(p: SimplexFactorParams, z0, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs) -> PathBundle:
    """Simulate Z-paths; states stay in the closed simplex at every step."""
    return ZSimulator(p, z0, dt, n_steps, n_paths, seed, **kwargs).simulate()
