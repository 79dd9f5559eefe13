"""
Bounded short-rate toy model.

The discount derivative is h(t,T) = e^{-theta (T-t)} r_t with

    dr_t = -(theta - r_t) r_t dt + sigma(t,t) dW_t,

which stays in [0, theta] when sigma(t,t) vanishes at both ends. Here
sigma(t,t) = nu(r) * r (theta - r) / theta^2. Discounts and bond prices:

    H(t,T) = (1 - e^{-theta tau}) r / theta,    P = 1 - H.
"""

import math
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.exceptions import DomainError
from src.factors.base_simulator import BaseSimulator
from src.factors.bundle import PathBundle
from src.hjm.curve import CurveGrid
from src.utils.helpers import require_time
from src.utils.logger import get_logger

logger = get_logger(__name__)


class ToyParams(BaseModel):
    """theta bounds the rate; nu (constant) or vol_fn(r) sets the undamped volatility."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, arbitrary_types_allowed=True)

    theta: float = Field(gt=0)
    nu: float = Field(default=0.0, ge=0)
    vol_fn: Callable[[np.ndarray], np.ndarray] | None = Field(default=None, exclude=True)


def _check_rate(p: ToyParams, r: float):
    if not 0.0 <= r <= p.theta:
        logger.warning(f"short rate {r} outside [0, {p.theta}]; toy closed forms lose positivity")


def toy_h(p: ToyParams, r: float, tau: float) -> float:
    """h = e^{-theta tau} r."""
    _check_rate(p, r)
    return math.exp(-p.theta * require_time("tau", tau)) * r


def toy_discount(p: ToyParams, r: float, tau: float) -> float:
    """H = (1 - e^{-theta tau}) r / theta."""
    _check_rate(p, r)
    return -math.expm1(-p.theta * require_time("tau", tau)) * r / p.theta


def toy_bond(p: ToyParams, r: float, tau: float) -> float:
    """P = 1 - H."""
    return 1.0 - toy_discount(p, r, tau)


def toy_drift(p: ToyParams, r):
    """Short-rate drift -(theta - r) r."""
    return -(p.theta - r) * r


def toy_vol(p: ToyParams, r):
    """sigma(t,t) = nu(r) r (theta - r) / theta^2, zero at both boundaries."""
    r = np.asarray(r, dtype=float)
    level = p.vol_fn(r) if p.vol_fn is not None else p.nu
    return level * r * (p.theta - r) / p.theta ** 2


def toy_deterministic_rate(p: ToyParams, r0: float, t: float) -> float:
    """Solution of r' = -(theta - r) r: theta r0 / (r0 + (theta - r0) e^{theta t})."""
    t = require_time("t", t)
    return p.theta * r0 / (r0 + (p.theta - r0) * math.exp(p.theta * t))


def toy_initial_curve(p: ToyParams, r0: float, maturities) -> CurveGrid:
    """Toy-consistent discount-derivative curve h(0, T) = e^{-theta T} r0."""
    maturities = np.asarray(maturities, dtype=float)
    return CurveGrid(t=0.0, maturities=maturities, h_values=np.exp(-p.theta * maturities) * r0)


class ToyRateSimulator(BaseSimulator):
    """Euler paths of the toy short rate, clamped to [0, theta]."""

    def __init__(self, p: ToyParams, r0: float, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs):
        super().__init__(dt, n_steps, n_paths, seed, **kwargs)
        if not 0.0 <= r0 <= p.theta:
            raise DomainError(f"r0={r0} must lie in [0, {p.theta}]")
        self.params = p
        self.r0 = float(r0)

    def get_name(self) -> str:
        return "Toy short rate"

    @property
    def n_factors(self) -> int:
        return 1

    def initial_state(self, n: int) -> np.ndarray:
        return np.full((n, 1), self.r0)

    def step(self, state: np.ndarray, dw: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        new = state + toy_drift(p, state) * self.dt + toy_vol(p, state) * dw
        outside = (new < 0.0) | (new > p.theta)
        np.clip(new, 0.0, p.theta, out=new)
        return new, outside[:, 0]


def simulate_toy_rate(p: ToyParams, r0: float, dt: float, n_steps: int, n_paths: int, seed: int, **kwargs) -> PathBundle:
    """Simulate toy short-rate paths; all states lie in [0, theta]."""
    return ToyRateSimulator(p, r0, dt, n_steps, n_paths, seed, **kwargs).simulate()
