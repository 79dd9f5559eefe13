"""
Deterministic flow of the discount-derivative curve.

With zero volatility the curve psi_t(x) = h(t, t+x) evolves as

    psi_t(x) = psi_0(t + x) / (1 - int_0^t psi_0(s) ds),

which exists as long as the running integral of the initial curve stays
below 1 and explodes when it reaches 1.
"""

import math
from collections.abc import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from src.core.constants import LATTICE_TOL
from src.core.exceptions import ExplosionError, GridError
from src.hjm.curve import CurveGrid
from src.numerics.quadrature import cumulative_trapezoid, interpolant_integral, lerp
from src.utils.helpers import require_time

CurveFunction = Callable[[float], float]


def _sampled(psi0: CurveGrid) -> CurveGrid:
    if abs(psi0.t) > LATTICE_TOL or abs(psi0.maturities[0]) > LATTICE_TOL:
        raise GridError("a sampled initial curve must start at t = 0 with a node at x = 0")
    return psi0


def _clip_to_last(grid: CurveGrid, point: float) -> float:
    # lattice arithmetic may overshoot the last node by an ulp
    last = float(grid.maturities[-1])
    return last if 0.0 < point - last <= LATTICE_TOL else point


def initial_integral(psi0: CurveGrid | CurveFunction, t: float, primitive: CurveFunction | None = None) -> float:
    """int_0^t psi_0(s) ds: exact for the sampled interpolant, closed form or quadrature otherwise."""
    t = require_time("t", t)
    if isinstance(psi0, CurveGrid):
        grid = _sampled(psi0)
        return interpolant_integral(grid.maturities, grid.h_values, _clip_to_last(grid, t))
    if primitive is not None:
        return primitive(t) - primitive(0.0)
    value, _ = quad(psi0, 0.0, t, limit=200)
    return value


def critical_time(
    psi0: CurveGrid | CurveFunction,
    horizon: float | None = None,
    primitive: CurveFunction | None = None,
    n_scan: int = 2000,
) -> float | None:
    """
    Explosion time of the flow: first t with int_0^t psi_0 = 1.

    Sampled curves are scanned up to their last node, callables up to
    `horizon`. Returns None when the integral stays below 1.
    """
    if isinstance(psi0, CurveGrid):
        grid = _sampled(psi0)
        cumulative = cumulative_trapezoid(grid.h_values, x=grid.maturities)
        crossed = np.nonzero(cumulative >= 1.0)[0]
        if crossed.size == 0:
            return None
        k = int(crossed[0])
        if k == 0:
            return 0.0
        lower, upper = grid.maturities[k - 1], grid.maturities[k]
    else:
        if horizon is None:
            raise GridError("critical_time of a curve function needs a horizon")
        scan = np.linspace(0.0, float(horizon), n_scan + 1)
        values = np.array([initial_integral(psi0, s, primitive) for s in scan])
        crossed = np.nonzero(values >= 1.0)[0]
        if crossed.size == 0:
            return None
        k = int(crossed[0])
        if k == 0:
            return 0.0
        lower, upper = scan[k - 1], scan[k]

    return float(brentq(lambda s: initial_integral(psi0, s, primitive) - 1.0, lower, upper, xtol=1e-14))


def spde_flow(
    psi0: CurveGrid | CurveFunction,
    t: float,
    x: float,
    primitive: CurveFunction | None = None,
) -> float:
    """psi_t(x) for the zero-volatility flow started at psi0."""
    t = require_time("t", t)
    x = require_time("x", x)

    denominator = 1.0 - initial_integral(psi0, t, primitive)
    if denominator <= 0.0:
        blow_up = critical_time(psi0, horizon=t, primitive=primitive)
        blow_up = t if blow_up is None else blow_up
        raise ExplosionError(
            f"deterministic flow exploded before t={t} (critical time {blow_up:.6g})",
            time=blow_up,
        )

    if isinstance(psi0, CurveGrid):
        numerator = lerp(psi0.maturities, psi0.h_values, _clip_to_last(psi0, t + x))
    else:
        numerator = float(psi0(t + x))
    if not math.isfinite(numerator):
        raise GridError(f"initial curve is not finite at {t + x}")
    return numerator / denominator


def flow_curve(psi0: CurveGrid, t: float) -> CurveGrid:
    """Sampled curve h(t, T_j) for every node T_j >= t of a sampled initial curve."""
    grid = _sampled(psi0)
    start = int(np.searchsorted(grid.maturities, t - LATTICE_TOL))
    nodes = grid.maturities[start:]
    values = np.array([spde_flow(grid, t, T - t) for T in np.maximum(nodes, t)])
    return CurveGrid(t=t, maturities=nodes, h_values=values)
