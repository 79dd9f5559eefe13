"""
Validation engine - runs the whole battery for one simplex-factor model.

This connects everything together:
- simulates factor paths once and prices on them (bond, h, discount, gains)
- scans bond positivity and the short-rate bound on the same paths
- simulates a curve ensemble from the model's initial curve for the drift check
- collects every report into one ValidationSummary
"""

import numpy as np

from src.core.config import get_settings
from src.core.constants import MIN_DRIFT_CHECK_PATHS
from src.core.exceptions import ConfigError
from src.factors.simplex import to_affine_params
from src.hjm.curve import CurveGrid, VolSpec
from src.hjm.grid_simulator import GridEnsemble, simulate_grid
from src.models.affine import build_generator, extend_state, h_value
from src.utils.helpers import stopwatch
from src.utils.logger import get_logger
from src.validators.drift import drift_condition_check
from src.validators.martingale import PathStatistics, collect_path_statistics, pricing_battery
from src.validators.positivity import affine_positivity_scan, positivity_scan, short_rate_bound_check
from src.validators.report import ValidationReport, ValidationSummary

logger = get_logger(__name__)


class ValidationEngine:
    """
    Runs the validation battery.

    Lifecycle:
    1. run_pricing()  - shared factor paths, pricing + positivity checks
    2. run_drift()    - grid ensemble, drift condition + positivity scan
    3. run()          - both, wrapped in a ValidationSummary
    """

    def __init__(self, config):
        self.config = config
        self.settings = get_settings()
        self.dt = config.sim.dt if config.sim.dt is not None else self.settings.default_dt
        self.seed = config.sim.seed
        self.n_paths = config.sim.n_paths
        self.stats: PathStatistics | None = None
        self.ensemble: GridEnsemble | None = None

        check = config.validation.drift_check
        # a noiseless ensemble is exact with any path count
        self.drift_min_paths = 1 if check.vol_level == 0.0 else MIN_DRIFT_CHECK_PATHS
        if check.enabled and check.n_paths < self.drift_min_paths:
            raise ConfigError(
                f"drift_check.n_paths={check.n_paths} is below {self.drift_min_paths} for vol_level={check.vol_level}"
            )

    def initial_curve(self, maturities: np.ndarray) -> CurveGrid:
        """Model-implied h(0, T) on the given nodes."""
        G = build_generator(to_affine_params(self.config.params))
        state = extend_state(self.config.z0)
        return CurveGrid(
            t=0.0, maturities=maturities, h_values=np.array([h_value(G, T, state) for T in maturities])
        )

    def run_pricing(self) -> list[ValidationReport]:
        validation = self.config.validation
        self.stats = collect_path_statistics(
            self.config.params,
            self.config.z0,
            validation.maturity,
            self.dt,
            self.n_paths,
            self.seed,
            positivity_horizon=validation.positivity_horizon,
        )
        logger.info(f"Z clamp fraction {self.stats.clamp_fraction:.4%}")
        reports = pricing_battery(self.stats)
        reports.append(affine_positivity_scan(source=self.stats))
        reports.append(short_rate_bound_check(self.stats))
        return reports

    def run_drift(self) -> list[ValidationReport]:
        check = self.config.validation.drift_check
        if not check.enabled:
            logger.info("Drift check disabled")
            return []

        n = int(round(check.horizon / check.dt))
        maturities = np.linspace(0.0, n * check.dt, n + 1)
        with stopwatch() as clock:
            self.ensemble = simulate_grid(
                self.initial_curve(maturities),
                VolSpec.constant(check.vol_level),
                dt=check.dt,
                n_steps=min(check.n_steps, n),
                n_paths=check.n_paths,
                seed=self.seed,
                scheme=check.scheme,
                strict=False,
            )
            reports = drift_condition_check(self.ensemble, n_points=check.n_points, min_paths=self.drift_min_paths)
            reports.append(positivity_scan(self.ensemble))
        for report in reports:
            report.runtime = clock["seconds"]
        return reports

    def run(self) -> ValidationSummary:
        logger.info("=" * 50)
        logger.info(f"  Validation battery (seed={self.seed}, paths={self.n_paths}, dt={self.dt})")
        logger.info("=" * 50)

        reports = self.run_pricing() + self.run_drift()
        summary = ValidationSummary(seed=self.seed, n_paths=self.n_paths, dt=self.dt, reports=reports)

        if summary.all_passed:
            logger.info(f"All {len(reports)} checks passed")
        else:
            names = ", ".join(report.check_name for report in summary.failures)
            logger.warning(f"{len(summary.failures)} of {len(reports)} checks failed: {names}")
        return summary
