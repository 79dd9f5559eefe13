"""
Consistency check for general factor models h(t,T) = phi(T-t, Z_t).

A factor model is arbitrage-free when its curve function phi, factor drift
mu and diffusion c = nu nu' satisfy

    -d_x phi + mu' grad_z phi + 1/2 tr(c hess_z phi) = phi(x, z) phi(0, z)

The residual of that equation is evaluated with central differences.
"""

from collections.abc import Callable

import numpy as np

from src.core.config import get_settings
from src.core.exceptions import DimensionError, InvalidArgumentError
from src.models.affine import AffineParams, GeneratorMatrix, extend_state, h_value, quadratic_drift

CurveFunction = Callable[[float, np.ndarray], float]
DriftFunction = Callable[[np.ndarray], np.ndarray]
DiffusionFunction = Callable[[np.ndarray], np.ndarray]


def _evaluate(phi: CurveFunction, x: float, z: np.ndarray) -> float:
    value = float(phi(x, z))
    if not np.isfinite(value):
        raise InvalidArgumentError(f"curve function is not finite at x={x}, z={z}")
    return value


def consistency_residual(
    phi: CurveFunction,
    mu: DriftFunction,
    c: DiffusionFunction,
    x: float,
    z,
    step: float | None = None,
) -> float:
    """Residual of the consistency equation at (x, z); zero for consistent models."""
    step = step or get_settings().fd_step
    z = np.asarray(z, dtype=float)
    d = z.size
    x = float(x)

    hx = step * max(1.0, abs(x))
    if x >= hx:
        d_phi_dx = (_evaluate(phi, x + hx, z) - _evaluate(phi, x - hx, z)) / (2.0 * hx)
    else:
        # phi lives on x >= 0: second-order forward stencil
        d_phi_dx = (
            -3.0 * _evaluate(phi, x, z) + 4.0 * _evaluate(phi, x + hx, z) - _evaluate(phi, x + 2.0 * hx, z)
        ) / (2.0 * hx)

    hz = step * np.maximum(1.0, np.abs(z))
    center = _evaluate(phi, x, z)
    gradient = np.empty(d)
    hessian = np.empty((d, d))
    unit = np.eye(d)
    for i in range(d):
        up = _evaluate(phi, x, z + hz[i] * unit[i])
        down = _evaluate(phi, x, z - hz[i] * unit[i])
        gradient[i] = (up - down) / (2.0 * hz[i])
        hessian[i, i] = (up - 2.0 * center + down) / hz[i] ** 2
        for j in range(i):
            pp = _evaluate(phi, x, z + hz[i] * unit[i] + hz[j] * unit[j])
            pm = _evaluate(phi, x, z + hz[i] * unit[i] - hz[j] * unit[j])
            mp = _evaluate(phi, x, z - hz[i] * unit[i] + hz[j] * unit[j])
            mm = _evaluate(phi, x, z - hz[i] * unit[i] - hz[j] * unit[j])
            hessian[i, j] = hessian[j, i] = (pp - pm - mp + mm) / (4.0 * hz[i] * hz[j])

    drift = np.atleast_1d(np.asarray(mu(z), dtype=float))
    diffusion = np.atleast_2d(np.asarray(c(z), dtype=float))
    if drift.shape != (d,) or diffusion.shape != (d, d):
        raise DimensionError(
            f"drift {drift.shape} / diffusion {diffusion.shape} do not match factor dimension {d}"
        )
    if not (np.all(np.isfinite(drift)) and np.all(np.isfinite(diffusion))):
        raise InvalidArgumentError(f"drift or diffusion not finite at z={z}")

    residual = (
        -d_phi_dx
        + drift @ gradient
        + 0.5 * np.trace(diffusion @ hessian)
        - center * _evaluate(phi, 0.0, z)
    )
    return float(residual)


def affine_curve_function(G: GeneratorMatrix) -> CurveFunction:
    """phi(x, z) = phi_bar(x)' (1, z) for an affine model."""
    return lambda x, z: h_value(G, x, extend_state(z))


def affine_drift_function(p: AffineParams) -> DriftFunction:
    return lambda z: quadratic_drift(p, z)
