"""
Quadrature and interpolation on sampled grids.

Integrals along simulated paths use the trapezoid rule on the
simulation lattice; curve values between maturity nodes are linear.
"""

import numpy as np
from scipy.integrate import cumulative_trapezoid as _cumulative_trapezoid
from scipy.integrate import trapezoid as _trapezoid

from src.core.exceptions import DimensionError, DomainError, InvalidArgumentError


def _check_step(dt: float) -> float:
    dt = float(dt)
    if not np.isfinite(dt) or dt <= 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    return dt


def trapezoid(values, dt: float) -> float:
    """Trapezoidal integral of uniformly spaced samples."""
    samples = np.asarray(values, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise DimensionError(f"trapezoid needs at least 2 samples, got {samples.size}")
    return float(_trapezoid(samples, dx=_check_step(dt)))


def trapezoid_nodes(values, x, axis: int = -1):
    """Trapezoidal integral over non-uniform nodes x; batched along the other axes."""
    samples = np.asarray(values, dtype=float)
    nodes = np.asarray(x, dtype=float)
    if nodes.size < 2:
        return np.zeros(np.delete(samples.shape, axis)) if samples.ndim > 1 else 0.0
    return _trapezoid(samples, x=nodes, axis=axis)


def cumulative_trapezoid(values, dt: float | None = None, axis: int = -1, x=None) -> np.ndarray:
    """
    Running trapezoidal integral along `axis`, first entry 0.

    Works on batches: values of shape (n_paths, n_steps + 1) give the
    integral up to every lattice time for every path. Pass `x` instead
    of `dt` for non-uniform abscissae.
    """
    samples = np.asarray(values, dtype=float)
    if samples.shape[axis] < 2:
        return np.zeros_like(samples)
    if x is not None:
        return _cumulative_trapezoid(samples, x=np.asarray(x, dtype=float), axis=axis, initial=0.0)
    return _cumulative_trapezoid(samples, dx=_check_step(dt), axis=axis, initial=0.0)


def _check_grid(grid, values) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.asarray(grid, dtype=float)
    samples = np.asarray(values, dtype=float)
    if nodes.ndim != 1 or nodes.shape != samples.shape or nodes.size < 1:
        raise DimensionError(
            f"grid {nodes.shape} and values {samples.shape} must be matching vectors"
        )
    if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
        raise InvalidArgumentError("grid must be strictly increasing")
    return nodes, samples


def lerp(grid, values, x: float) -> float:
    """Piecewise-linear interpolant of (grid, values) at x."""
    nodes, samples = _check_grid(grid, values)
    x = float(x)
    if not nodes[0] <= x <= nodes[-1]:
        raise DomainError(f"x={x} outside interpolation range [{nodes[0]}, {nodes[-1]}]")
    return float(np.interp(x, nodes, samples))


def interpolant_integral(grid, values, x: float) -> float:
    """Exact integral of the linear interpolant over [grid[0], x]."""
    nodes, samples = _check_grid(grid, values)
    x = float(x)
    if not nodes[0] <= x <= nodes[-1]:
        raise DomainError(f"x={x} outside interpolation range [{nodes[0]}, {nodes[-1]}]")

    k = int(np.searchsorted(nodes, x, side="right")) - 1
    full = float(_trapezoid(samples[: k + 1], nodes[: k + 1])) if k > 0 else 0.0
    if x > nodes[k]:
        full += 0.5 * (x - nodes[k]) * (samples[k] + float(np.interp(x, nodes, samples)))
    return full
