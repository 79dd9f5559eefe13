"""
Bond-price positivity scans.

Bonds stay positive exactly when int_t^T h(t,s) ds < 1 for all t <= T.
The scans report the largest such integral found and where it occurs.
"""

from collections.abc import Sequence

import numpy as np

from src.core.exceptions import InvalidArgumentError
from src.factors.bundle import PathBundle
from src.hjm.curve import CurveGrid
from src.hjm.grid_simulator import GridEnsemble
from src.models.affine import AffineParams, build_generator
from src.utils.logger import get_logger
from src.validators.martingale import PathStatistics, _extended, max_discount
from src.validators.report import ValidationReport, describe

logger = get_logger(__name__)

DEFAULT_AFFINE_HORIZON = 30.0


def _positivity_report(name: str, value: float, n_paths: int, detail: str) -> ValidationReport:
    report = ValidationReport(
        check_name=name,
        estimate=float(value),
        reference=1.0,
        std_error=0.0,
        passed=bool(value < 1.0),
        n_paths=n_paths,
        detail=detail,
    )
    if report.passed:
        logger.info(describe(report))
    else:
        logger.warning(describe(report) + f" ({detail})")
    return report


def positivity_scan(source: GridEnsemble | Sequence[CurveGrid]) -> ValidationReport:
    """Max of int_t^T h(t,s) ds over paths, lattice times and nodes; passes iff below 1."""
    if isinstance(source, GridEnsemble):
        values, where = source.integrated_discounts()
        path, k = np.unravel_index(int(np.argmax(values)), values.shape)
        detail = f"max at path={int(path)} t={float(source.times[k])!r} T={float(where[path, k])!r}"
        return _positivity_report("positivity_scan", values[path, k], source.n_paths, detail)

    curves = list(source)
    if not curves:
        raise InvalidArgumentError("positivity_scan needs at least one curve")
    best, where = -np.inf, (0.0, 0.0)
    for curve in curves:
        running = curve.discounts()
        j = int(np.argmax(running))
        if running[j] > best:
            best, where = float(running[j]), (curve.t, float(curve.maturities[j]))
    detail = f"max at t={where[0]!r} T={where[1]!r}"
    return _positivity_report("positivity_scan", best, 1, detail)


def affine_positivity_scan(
    params: AffineParams | None = None,
    source: PathBundle | PathStatistics | None = None,
    horizon: float = DEFAULT_AFFINE_HORIZON,
) -> ValidationReport:
    """
    Largest discount H(t, t+tau) = 1 - P(t, t+tau) along affine factor paths.

    Pass a PathStatistics collected with a positivity horizon, or the
    affine parameters with a bundle of simulated factor paths.
    """
    if isinstance(source, PathStatistics):
        if source.max_discount is None:
            raise InvalidArgumentError("path statistics were collected without a positivity horizon")
        values, t_at, tau_at = source.max_discount, source.max_discount_t, source.max_discount_tau
        horizon = source.positivity_horizon
    elif isinstance(source, PathBundle):
        if params is None:
            raise InvalidArgumentError("affine_positivity_scan of a path bundle needs the affine parameters")
        G = build_generator(params)
        values, t_at, tau_at = max_discount(G, _extended(source.states), source.times, horizon)
    else:
        raise InvalidArgumentError("affine_positivity_scan needs path statistics or a path bundle")

    path = int(np.argmax(values))
    detail = (
        f"horizon={horizon!r} max at path={path} t={float(t_at[path])!r} "
        f"T={float(t_at[path] + tau_at[path])!r}"
    )
    return _positivity_report("affine_positivity_scan", values[path], values.size, detail)


def short_rate_bound_check(stats: PathStatistics) -> ValidationReport:
    """Simulated |r| never exceeds |gamma_0| + max_j |gamma_j|."""
    p = stats.params
    q2 = p.q_vector ** 2
    bound = abs(p.gamma0) + float(np.max(np.abs(q2 - p.kappa_vector)))
    passed = stats.max_abs_rate <= bound * (1.0 + 1e-12)
    report = ValidationReport(
        check_name="short_rate_bound",
        estimate=stats.max_abs_rate,
        reference=bound,
        std_error=0.0,
        passed=bool(passed),
        n_paths=stats.n_paths,
        detail="max |r| along paths against |gamma_0| + max |gamma_j|",
    )
    logger.info(describe(report))
    return report
