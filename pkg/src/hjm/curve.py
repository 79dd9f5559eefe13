"""
Sampled discount-derivative curves and volatility shapes.

A CurveGrid holds h(t, T_j) on a maturity grid T_1 < ... < T_m at one
time t. A VolSpec describes sigma(t, T) for the grid simulator in one
of three shapes:

    zero          sigma = 0
    constant      sigma(t, T_j) = level         (level (n,) or (m, n))
    proportional  sigma(t, T_j) = level h(t, T_j)
"""

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.constants import LATTICE_TOL, VolKind
from src.core.exceptions import DegenerateCurveError, DimensionError, GridError
from src.numerics.quadrature import cumulative_trapezoid, lerp
from src.utils.helpers import require_finite


@dataclass(frozen=True)
class CurveGrid:
    t: float
    maturities: np.ndarray
    h_values: np.ndarray

    def __post_init__(self):
        maturities = require_finite("maturities", self.maturities)
        h_values = require_finite("h_values", self.h_values)
        if maturities.ndim != 1 or maturities.shape != h_values.shape or maturities.size == 0:
            raise DimensionError(
                f"maturities {maturities.shape} and h_values {h_values.shape} must be matching vectors"
            )
        if np.any(np.diff(maturities) <= 0):
            raise GridError("maturities must be strictly increasing")
        if maturities[0] < self.t - LATTICE_TOL:
            raise GridError(f"first maturity {maturities[0]} lies before t={self.t}")
        object.__setattr__(self, "maturities", maturities)
        object.__setattr__(self, "h_values", h_values)

    @property
    def m(self) -> int:
        return self.maturities.size

    def value_at(self, T: float) -> float:
        """h(t, T) by linear interpolation between nodes."""
        return lerp(self.maturities, self.h_values, T)

    def node_index(self, T: float) -> int:
        """Index of the node at maturity T; GridError when T is not a node."""
        idx = int(np.searchsorted(self.maturities, T - LATTICE_TOL))
        if idx >= self.m or abs(self.maturities[idx] - T) > LATTICE_TOL:
            raise GridError(f"maturity {T} is not a node of the grid")
        return idx

    def require_anchored(self):
        if abs(self.maturities[0] - self.t) > LATTICE_TOL:
            raise GridError(
                f"integrals from t={self.t} need a node at T=t; first node is {self.maturities[0]}"
            )

    def discounts(self) -> np.ndarray:
        """H(t, T_j) = int_t^{T_j} h(t, s) ds (trapezoid) for every node."""
        self.require_anchored()
        return cumulative_trapezoid(self.h_values, x=self.maturities)

    def bond_prices(self) -> np.ndarray:
        """P(t, T_j) = 1 - H(t, T_j) for every node."""
        return 1.0 - self.discounts()

    def integrated_discount(self) -> float:
        """Positivity diagnostic int_t^{T_m} h(t, s) ds; must stay below 1."""
        return float(self.discounts()[-1])


class VolSpec(BaseModel):
    """Volatility sigma(t, T) of the discount derivative."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: VolKind = VolKind.ZERO
    level: list[float] | list[list[float]] = [0.0]

    @model_validator(mode="after")
    def _check(self):
        if len(self.level) == 0:
            raise ValueError("level must not be empty")
        if isinstance(self.level[0], list):
            widths = {len(row) for row in self.level}
            if len(widths) != 1 or 0 in widths:
                raise ValueError("matrix level must have rows of equal, positive length")
        return self

    @classmethod
    def zero(cls, n_factors: int = 1) -> "VolSpec":
        return cls(kind=VolKind.ZERO, level=[0.0] * n_factors)

    @classmethod
    def constant(cls, level) -> "VolSpec":
        return cls(kind=VolKind.CONSTANT, level=np.atleast_1d(level).tolist())

    @classmethod
    def proportional(cls, level) -> "VolSpec":
        return cls(kind=VolKind.PROPORTIONAL, level=np.atleast_1d(level).tolist())

    @property
    def level_array(self) -> np.ndarray:
        return np.asarray(self.level, dtype=float)

    @property
    def per_maturity(self) -> bool:
        return self.level_array.ndim == 2

    @property
    def n_factors(self) -> int:
        return self.level_array.shape[-1]

    def check_grid(self, m: int):
        if self.per_maturity and self.level_array.shape[0] != m:
            raise DimensionError(
                f"volatility level has {self.level_array.shape[0]} rows for {m} maturities"
            )

    def sigma(self, h_values: np.ndarray, columns: slice = slice(None)) -> np.ndarray:
        """sigma(t, T_j) for one curve: shape (m, n_factors)."""
        h_values = np.asarray(h_values, dtype=float)
        level = self.level_array
        level = level[columns] if self.per_maturity else np.broadcast_to(level, (h_values.size, level.size))
        if self.kind == VolKind.ZERO:
            return np.zeros_like(level)
        if self.kind == VolKind.CONSTANT:
            return np.array(level)
        return h_values[:, None] * level

    def apply(self, h: np.ndarray, shock: np.ndarray, columns: slice = slice(None)) -> np.ndarray:
        """
        sigma(t, T_j) . shock for a block of curves.

        h is (n, m') for the maturity columns selected by `columns`,
        shock (n, n_factors); returns (n, m').
        """
        if self.kind == VolKind.ZERO:
            return np.zeros_like(h)
        level = self.level_array
        if self.per_maturity:
            loading = shock @ level[columns].T
        else:
            loading = np.broadcast_to((shock @ level)[:, None], h.shape)
        if self.kind == VolKind.CONSTANT:
            return np.array(loading)
        return h * loading


def bond_return_vol(grid: CurveGrid, vol: VolSpec, T: float):
    """
    Volatility v(t,T) of T-bond returns: P(t,T) v(t,T) = -int_t^T sigma(t,s) ds.

    Returns a float for a one-factor volatility, else an (n,) array.
    """
    vol.check_grid(grid.m)
    idx = grid.node_index(T)
    grid.require_anchored()

    sigma = vol.sigma(grid.h_values)
    if idx == 0:
        integral = np.zeros(vol.n_factors)
        bond = 1.0
    else:
        nodes = grid.maturities[: idx + 1]
        integral = cumulative_trapezoid(sigma[: idx + 1], x=nodes, axis=0)[-1]
        bond = 1.0 - cumulative_trapezoid(grid.h_values[: idx + 1], x=nodes)[-1]
    if bond <= 0:
        raise DegenerateCurveError(f"bond price {bond:.3e} at T={T} is not positive")

    result = -integral / bond
    return float(result[0]) if result.size == 1 else result
