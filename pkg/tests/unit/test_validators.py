import json
import re
from types import SimpleNamespace

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.constants import DriftScheme
from src.core.exceptions import InvalidArgumentError
from src.factors.simplex import SimplexFactorParams, simulate_z, to_affine_params
from src.hjm.curve import CurveGrid, VolSpec
from src.hjm.grid_simulator import simulate_grid
from src.validators.drift import deterministic_drift_tolerance, drift_condition_check, sample_points
from src.validators.martingale import (
    collect_path_statistics,
    discount_complementarity,
    gains_martingale_check,
    mc_bond_price,
    mc_discount,
    mc_h_value,
    pricing_battery,
)
from src.validators.positivity import affine_positivity_scan, positivity_scan, short_rate_bound_check
from src.validators.report import ValidationReport, ValidationSummary, judge


def flat(level: float, horizon: float, spacing: float) -> CurveGrid:
    maturities = np.linspace(0.0, horizon, int(round(horizon / spacing)) + 1)
    return CurveGrid(t=0.0, maturities=maturities, h_values=np.full(maturities.size, level))


@pytest.fixture
def deterministic_stats():
    model = SimplexFactorParams(kappa=[0.01], theta=[0.03], q=[0.0], gamma0=0.005)
    return collect_path_statistics(model, [0.3], T=1.0, dt=1e-4, n_paths=2, seed=1, positivity_horizon=30.0)


class TestJudge:
    def test_within_three_standard_errors(self):
        assert judge("x", 1.0, 1.002, 1e-3, 100).passed

    def test_outside_three_standard_errors(self):
        report = judge("x", 1.0, 1.004, 1e-3, 100)
        assert not report.passed
        assert report.deviation == pytest.approx(0.004)

    def test_zero_error_uses_deterministic_tolerance(self):
        assert judge("x", 1.0, 1.0 + 5e-5, 0.0, 2).passed
        report = judge("x", 1.0, 1.0 + 2e-4, 0.0, 2)
        assert not report.passed
        assert report.abs_tolerance == pytest.approx(1e-4)

    def test_explicit_tolerance(self):
        assert judge("x", 1.0, 1.05, 0.0, 2, abs_tolerance=0.1).passed

    def test_custom_multiplier(self):
        assert judge("x", 1.0, 1.004, 1e-3, 100, tolerance_multiplier=5.0).passed

    def test_negative_error_rejected(self):
        with pytest.raises(ValidationError):
            ValidationReport(check_name="x", estimate=1.0, reference=1.0, std_error=-1.0, passed=True, n_paths=1)


class TestSummary:
    def make(self) -> ValidationSummary:
        return ValidationSummary(
            seed=7,
            n_paths=100,
            dt=0.01,
            reports=[
                judge("a", 1.0, 1.0, 0.1, 100, runtime=1.5),
                judge("b", 1.0, 2.0, 0.1, 100, runtime=0.5),
            ],
        )

    def test_failures(self):
        summary = self.make()
        assert not summary.all_passed
        assert [report.check_name for report in summary.failures] == ["b"]

    def test_json_without_timings(self):
        text = self.make().to_json()
        payload = json.loads(text)
        assert payload["all_passed"] is False
        assert "runtime" not in payload["reports"][0]
        assert text == json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def test_json_with_timings(self):
        payload = json.loads(self.make().to_json(timings=True))
        assert payload["reports"][0]["runtime"] == 1.5

    def test_text_table(self):
        text = self.make().render_text()
        assert "PASS" in text and "FAIL" in text
        assert "\x1b[" not in text


class TestPricingChecks:
    def test_deterministic_battery(self, deterministic_stats):
        reports = pricing_battery(deterministic_stats)
        assert len(reports) == 4 + len(deterministic_stats.checkpoints)
        for report in reports:
            assert report.passed, report
            assert report.std_error == 0.0

    def test_gains_checkpoints(self, deterministic_stats):
        reports = gains_martingale_check(deterministic_stats.params, stats=deterministic_stats)
        assert [r.check_name for r in reports] == [
            "gains_martingale[t=0.25]",
            "gains_martingale[t=0.5]",
            "gains_martingale[t=0.75]",
            "gains_martingale[t=1]",
        ]

    def test_complementarity(self, deterministic_stats):
        report = discount_complementarity(deterministic_stats)
        assert report.estimate == pytest.approx(1.0, abs=1e-6)

    def test_complementarity_ignores_standard_error(self):
        noisy = SimpleNamespace(
            bond=np.array([0.5, 1.5]), discount_payoff=np.array([0.0, 0.02]), n_paths=2, runtime=0.0
        )
        report = discount_complementarity(noisy)
        assert report.std_error > 0.1
        assert not report.passed
        close = SimpleNamespace(
            bond=np.array([0.6, 0.4]), discount_payoff=np.array([0.4005, 0.6]), n_paths=2, runtime=0.0
        )
        assert discount_complementarity(close).passed

    def test_zero_maturity(self, reference_model):
        for check in (mc_bond_price, mc_h_value, mc_discount):
            report = check(reference_model, [0.3], T=0.0, dt=1e-3, n_paths=50, seed=2)
            assert report.passed
            assert report.deviation <= 1e-15

    def test_dt_adjusted_to_end_on_maturity(self, reference_model):
        stats = collect_path_statistics(reference_model, [0.3], T=1.0, dt=0.3, n_paths=4, seed=2)
        assert stats.n_steps == 3
        assert stats.dt == pytest.approx(1.0 / 3.0)

    def test_shared_paths_agree_with_independent_runs(self, reference_model):
        stats = collect_path_statistics(reference_model, [0.3], T=0.5, dt=1e-2, n_paths=64, seed=3)
        shared = mc_bond_price(reference_model, stats=stats)
        own = mc_bond_price(reference_model, [0.3], T=0.5, dt=1e-2, n_paths=64, seed=3)
        assert shared.estimate == own.estimate
        assert shared.std_error == own.std_error

    def test_independent_of_threads(self, reference_model):
        a = collect_path_statistics(reference_model, [0.3], T=0.5, dt=1e-2, n_paths=100, seed=4, threads=1)
        b = collect_path_statistics(reference_model, [0.3], T=0.5, dt=1e-2, n_paths=100, seed=4, threads=4, block_size=9)
        np.testing.assert_array_equal(a.bond, b.bond)
        np.testing.assert_array_equal(a.gains, b.gains)

    def test_needs_paths(self, reference_model):
        with pytest.raises(InvalidArgumentError):
            mc_bond_price(reference_model, [0.3], T=1.0, n_paths=0)


class TestDriftCondition:
    def test_deterministic_euler_ensemble_passes(self):
        ensemble = simulate_grid(flat(0.05, 0.5, 0.01), VolSpec.zero(), dt=0.01, n_steps=10, scheme=DriftScheme.EULER)
        reports = drift_condition_check(ensemble, n_points=20, min_paths=1)
        assert len(reports) == 20
        assert all(report.passed for report in reports)
        assert all(report.deviation <= 1e-12 for report in reports)

    def test_deterministic_flow_ensemble_passes(self):
        ensemble = simulate_grid(flat(0.05, 0.5, 0.01), VolSpec.zero(), dt=0.01, n_steps=10)
        assert all(report.passed for report in drift_condition_check(ensemble, min_paths=1))

    def test_zero_drift_ensemble_fails(self):
        ensemble = simulate_grid(
            flat(0.05, 0.5, 0.01), VolSpec.constant(1e-4), dt=0.01, n_steps=10,
            n_paths=10_000, seed=21, scheme=DriftScheme.NONE,
        )
        reports = drift_condition_check(ensemble, n_points=20)
        assert all(report.std_error > 0 for report in reports)
        assert all(not report.passed for report in reports if report.reference > 1e-5)

    def test_noiseless_zero_drift_ensemble_fails(self):
        ensemble = simulate_grid(flat(0.05, 0.5, 0.01), VolSpec.zero(), dt=0.01, n_steps=10, scheme=DriftScheme.NONE)
        reports = drift_condition_check(ensemble, n_points=20, min_paths=1)
        assert all(report.std_error == 0.0 for report in reports)
        assert not any(report.passed for report in reports)
        assert all(report.deviation == pytest.approx(report.reference) for report in reports)

    def test_noiseless_tolerance_scales_with_reference(self):
        assert deterministic_drift_tolerance(0.0025, 0.01) == pytest.approx(2.5e-5 + 1e-12)
        assert deterministic_drift_tolerance(-0.0025, 0.01) == deterministic_drift_tolerance(0.0025, 0.01)
        assert deterministic_drift_tolerance(0.0, 0.01) == pytest.approx(1e-12)

    def test_sample_points_are_admissible(self):
        ensemble = simulate_grid(flat(0.05, 0.5, 0.01), VolSpec.zero(), dt=0.01, n_steps=10)
        points = sample_points(ensemble, 20)
        assert len(points) == 20
        for k, j in points:
            assert ensemble.maturities[j] >= ensemble.times[k + 1] - 1e-12

    def test_minimum_paths(self):
        ensemble = simulate_grid(flat(0.05, 0.5, 0.01), VolSpec.zero(), dt=0.01, n_steps=10)
        with pytest.raises(InvalidArgumentError):
            drift_condition_check(ensemble)


class TestPositivity:
    def test_grid_ensemble_passes(self):
        ensemble = simulate_grid(flat(0.1, 5.0, 0.1), VolSpec.zero(), dt=0.1, n_steps=5)
        report = positivity_scan(ensemble)
        assert report.passed
        assert report.estimate == pytest.approx(0.5, rel=1e-3)

    def test_constant_curve_violation_located_at_explosion(self):
        ensemble = simulate_grid(flat(0.5, 3.0, 0.01), VolSpec.zero(), dt=0.01, n_steps=300, strict=False)
        report = positivity_scan(ensemble)
        assert not report.passed
        t = float(re.search(r"\bt=([-+0-9.eE]+)", report.detail).group(1))
        assert 1.9 < t <= 2.1

    def test_curves_fail_above_one(self):
        report = positivity_scan([flat(0.1, 5.0, 0.1), flat(0.3, 5.0, 0.1)])
        assert not report.passed
        assert report.estimate == pytest.approx(1.5)
        assert "T=5.0" in report.detail

    def test_affine_scan_on_paths(self, reference_model):
        bundle = simulate_z(reference_model, [0.3], dt=1e-2, n_steps=100, n_paths=50, seed=5)
        report = affine_positivity_scan(to_affine_params(reference_model), bundle, horizon=30.0)
        assert report.passed
        assert 0.0 < report.estimate < 1.0

    def test_affine_scan_on_statistics(self, deterministic_stats):
        assert affine_positivity_scan(source=deterministic_stats).passed

    def test_affine_scan_needs_source(self, reference_model):
        with pytest.raises(InvalidArgumentError):
            affine_positivity_scan(to_affine_params(reference_model))

    def test_short_rate_bound(self, deterministic_stats):
        report = short_rate_bound_check(deterministic_stats)
        assert report.passed
        assert report.reference == pytest.approx(0.005 + 0.01)
