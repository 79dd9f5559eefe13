"""
Affine discount term structure.

The discount derivative is affine in the factor, h(t,T) = phi_bar(T-t)' Z_bar_t,
with phi_bar(x) = e^{Ax} gamma_bar. Bond prices and discounts are then linear
in the extended state Z_bar = (1, Z_1, ..., Z_d), forward rates linear-rational,
and the factor drift must be quadratic:

    mu_i(z) = b_i + sum_j beta_ij z_j + z_i sum_j gamma_j z_j

Every state-taking function accepts a single extended state (d+1,) or a
batch (n, d+1) and returns a float or an (n,) array accordingly.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.constants import BOND_FLOOR
from src.core.exceptions import (
    DegenerateCurveError,
    DimensionError,
    InvalidArgumentError,
)
from src.numerics.linalg import mat_exp
from src.utils.helpers import require_finite, require_time


class AffineParams(BaseModel):
    """Coefficients (gamma_0, gamma, b, beta) of a quadratic-drift affine model."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    gamma0: float = 0.0
    gamma: list[float] = Field(min_length=1)
    b: list[float]
    beta: list[list[float]]

    @model_validator(mode="after")
    def _shapes(self):
        d = len(self.gamma)
        if len(self.b) != d:
            raise ValueError(f"b has length {len(self.b)}, expected {d}")
        if len(self.beta) != d or any(len(row) != d for row in self.beta):
            raise ValueError(f"beta must be {d}x{d}")
        return self

    @property
    def d(self) -> int:
        return len(self.gamma)

    @cached_property
    def gamma_bar(self) -> np.ndarray:
        return np.array([self.gamma0, *self.gamma], dtype=float)

    @cached_property
    def b_vector(self) -> np.ndarray:
        return np.array(self.b, dtype=float)

    @cached_property
    def beta_matrix(self) -> np.ndarray:
        return np.array(self.beta, dtype=float)

    @classmethod
    def constant_rate(cls, rate: float) -> "AffineParams":
        """Degenerate d=0 model (constant short rate) embedded as d=1."""
        return cls(gamma0=rate, gamma=[0.0], b=[0.0], beta=[[0.0]])


@dataclass(frozen=True)
class GeneratorMatrix:
    """A of the ODE phi_bar' = A phi_bar, together with gamma_bar = phi_bar(0)."""

    A: np.ndarray
    gamma_bar: np.ndarray

    @property
    def d(self) -> int:
        return self.A.shape[0] - 1

    def exp(self, tau: float) -> np.ndarray:
        return mat_exp(self.A, tau)


def toy_affine_params(theta: float) -> AffineParams:
    """Affine embedding of the bounded short-rate toy model: h = e^{-theta tau} r."""
    return AffineParams(gamma0=0.0, gamma=[1.0], b=[0.0], beta=[[-theta]])


def build_generator(p: AffineParams) -> GeneratorMatrix:
    """
    Assemble A row by row: row 0 holds (-gamma_0, b_1..b_d), row j >= 1 holds
    (-gamma_j, beta_1j, ..., beta_dj) with gamma_0 subtracted on the diagonal.
    """
    d = p.d
    A = np.empty((d + 1, d + 1))
    A[0, 0] = -p.gamma0
    A[0, 1:] = p.b_vector
    A[1:, 0] = -np.asarray(p.gamma, dtype=float)
    A[1:, 1:] = p.beta_matrix.T - p.gamma0 * np.eye(d)

    gamma_bar = p.gamma_bar.copy()
    if not np.array_equal(-A[:, 0], gamma_bar):
        raise InvalidArgumentError("generator first column does not reproduce gamma_bar")
    A.setflags(write=False)
    gamma_bar.setflags(write=False)
    return GeneratorMatrix(A=A, gamma_bar=gamma_bar)


def extend_state(z) -> np.ndarray:
    """Prefix factor values with the constant 1: Z -> (1, Z)."""
    factors = require_finite("factor state", z)
    if factors.ndim == 1:
        return np.concatenate(([1.0], factors))
    if factors.ndim == 2:
        return np.hstack([np.ones((factors.shape[0], 1)), factors])
    raise DimensionError(f"factor state must be (d,) or (n, d), got {factors.shape}")


def _state(G: GeneratorMatrix, s) -> np.ndarray:
    state = require_finite("extended state", s)
    if state.ndim not in (1, 2) or state.shape[-1] != G.d + 1:
        raise DimensionError(f"extended state must have {G.d + 1} entries, got shape {state.shape}")
    if not np.allclose(state[..., 0], 1.0, rtol=0.0, atol=1e-12):
        raise InvalidArgumentError("extended state must start with 1")
    return state


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def phi_bar(G: GeneratorMatrix, x: float) -> np.ndarray:
    """phi_bar(x) = e^{Ax} gamma_bar."""
    x = require_time("x", x)
    return G.exp(x) @ G.gamma_bar


def phi_primitive(G: GeneratorMatrix, x: float) -> np.ndarray:
    """Phi_bar(x) = int_0^x phi_bar = (I - e^{Ax}) e_0."""
    x = require_time("x", x)
    primitive = -G.exp(x)[:, 0]
    primitive[0] += 1.0
    return primitive


def bond_price(G: GeneratorMatrix, tau: float, s):
    """P(t, t+tau) = e_0' e^{A' tau} Z_bar."""
    tau = require_time("tau", tau)
    state = _state(G, s)
    return _scalar(state @ G.exp(tau)[:, 0])


def discount(G: GeneratorMatrix, tau: float, s):
    """H(t, t+tau) = 1 - P(t, t+tau) = Phi_bar(tau)' Z_bar."""
    return 1.0 - bond_price(G, tau, s)


def short_rate(p: AffineParams, s):
    """r = gamma_bar' Z_bar."""
    state = require_finite("extended state", s)
    if state.shape[-1] != p.d + 1:
        raise DimensionError(f"extended state must have {p.d + 1} entries, got shape {state.shape}")
    return _scalar(state @ p.gamma_bar)


def h_value(G: GeneratorMatrix, tau: float, s):
    """Discount derivative h(t, t+tau) = phi_bar(tau)' Z_bar."""
    state = _state(G, s)
    return _scalar(state @ phi_bar(G, tau))


def forward_rate(G: GeneratorMatrix, tau: float, s):
    """f(t, t+tau) = gamma_bar' e^{A' tau} Z_bar / e_0' e^{A' tau} Z_bar."""
    tau = require_time("tau", tau)
    state = _state(G, s)
    expA = G.exp(tau)
    numerator = state @ (expA @ G.gamma_bar)
    denominator = state @ expA[:, 0]
    if np.any(denominator <= BOND_FLOOR):
        raise DegenerateCurveError(
            f"bond price {np.min(denominator):.3e} is not positive at tau={tau}; forward rate undefined"
        )
    return _scalar(numerator / denominator)


def quadratic_drift(p: AffineParams, z) -> np.ndarray:
    """mu_i(z) = b_i + sum_j beta_ij z_j + z_i sum_j gamma_j z_j, for z of shape (d,) or (n, d)."""
    factors = require_finite("factor state", z)
    if factors.shape[-1] != p.d:
        raise DimensionError(f"factor state must have {p.d} entries, got shape {factors.shape}")
    gamma = np.asarray(p.gamma, dtype=float)
    linear = factors @ p.beta_matrix.T
    quadratic = factors * (factors @ gamma)[..., None]
    return p.b_vector + linear + quadratic


def induced_volatility(G: GeneratorMatrix, tau: float, nu) -> np.ndarray:
    """
    Volatility sigma(t, t+tau) = grad_z phi(tau, z)' nu(z) of the discount
    derivative, for a factor volatility matrix nu of shape (d, n).
    """
    loadings = phi_bar(G, tau)[1:]
    nu = require_finite("factor volatility", nu)
    if nu.ndim != 2 or nu.shape[0] != G.d:
        raise DimensionError(f"factor volatility must be ({G.d}, n), got {nu.shape}")
    return loadings @ nu


def phi_gram(G: GeneratorMatrix, x_grid) -> tuple[np.ndarray, float]:
    """
    Gram matrix of phi_1..phi_d sampled on x_grid and its smallest eigenvalue.

    Diagnostic for linear independence of the loadings; a value near zero
    means the factors are not identified. Models are never rejected on it.
    """
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DimensionError("x_grid needs at least 2 points")
    samples = np.array([phi_bar(G, x)[1:] for x in grid])
    weights = np.gradient(grid)
    gram = (samples * weights[:, None]).T @ samples
    return gram, float(np.linalg.eigvalsh(gram)[0])
