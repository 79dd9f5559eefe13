"""
Empirical check of the drift condition alpha(t,T) = h(t,T) h(t,t).

At a lattice time t_k and a node T_j still alive at t_{k+1} the one-step
increment (h(t_{k+1},T_j) - h(t_k,T_j)) / dt is averaged over paths and
compared with the average of h(t_k,T_j) h(t_k,t_k). The standard error
is that of the per-path difference, so the shared noise in both sides
cancels.
"""

import numpy as np

from src.core.constants import (
    DRIFT_CHECK_POINTS,
    DRIFT_RELATIVE_BIAS,
    DRIFT_ROUNDING_FLOOR,
    MIN_DRIFT_CHECK_PATHS,
)
from src.core.exceptions import InvalidArgumentError
from src.hjm.grid_simulator import GridEnsemble
from src.utils.logger import get_logger
from src.validators.report import ValidationReport, describe, judge

logger = get_logger(__name__)


def sample_points(ensemble: GridEnsemble, n_points: int) -> list[tuple[int, int]]:
    """n_points (k, j) pairs spread evenly over all admissible lattice/maturity pairs."""
    pairs = []
    for k in range(ensemble.n_steps):
        start = ensemble.diagonal_index(k + 1)
        pairs.extend((k, j) for j in range(start, ensemble.maturities.size))
    if not pairs:
        raise InvalidArgumentError("ensemble has no step to check the drift on")
    picks = np.unique(np.linspace(0, len(pairs) - 1, min(n_points, len(pairs))).round().astype(int))
    return [pairs[i] for i in picks]


def deterministic_drift_tolerance(reference: float, dt: float) -> float:
    """
    Band for a noiseless ensemble: the flow step is biased by O(dt) relative
    to h(t,T) h(t,t); the Euler step matches it up to rounding.
    """
    return DRIFT_RELATIVE_BIAS * dt * abs(reference) + DRIFT_ROUNDING_FLOOR


def drift_condition_check(
    ensemble: GridEnsemble,
    n_points: int = DRIFT_CHECK_POINTS,
    min_paths: int = MIN_DRIFT_CHECK_PATHS,
) -> list[ValidationReport]:
    """One report per sampled (t, T) point; exploded paths are left out."""
    if ensemble.n_paths < min_paths:
        raise InvalidArgumentError(
            f"drift check needs at least {min_paths} paths, ensemble has {ensemble.n_paths}"
        )

    alive = ~ensemble.exploded()
    n_alive = int(alive.sum())
    if n_alive == 0:
        raise InvalidArgumentError("every path of the ensemble exploded")
    h = ensemble.h[alive]
    dt = ensemble.dt

    reports = []
    for k, j in sample_points(ensemble, n_points):
        diagonal = ensemble.diagonal_index(k)
        increment = (h[:, k + 1, j] - h[:, k, j]) / dt
        expected = h[:, k, j] * h[:, k, diagonal]

        difference = increment - expected
        if n_alive > 1 and np.ptp(difference) > 0.0:
            error = float(np.std(difference, ddof=1) / np.sqrt(n_alive))
        else:
            error = 0.0
        reference = float(np.mean(expected))
        report = judge(
            f"drift_condition[t={ensemble.times[k]:.6g},T={ensemble.maturities[j]:.6g}]",
            float(np.mean(increment)),
            reference,
            error,
            n_alive,
            abs_tolerance=deterministic_drift_tolerance(reference, dt) if error == 0.0 else None,
            detail=f"scheme={ensemble.scheme.value}",
        )
        logger.info(describe(report))
        reports.append(report)
    return reports
