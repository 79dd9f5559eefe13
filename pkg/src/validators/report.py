"""
Validation reports.

Every check produces a ValidationReport. A stochastic check passes when
the estimate lies within tolerance_multiplier standard errors of its
reference; a deterministic one (zero standard error) when it lies within
an absolute tolerance.
"""

import io
import json

from pydantic import BaseModel, Field
from rich.console import Console
from rich.table import Table

from src.core.config import get_settings
from src.utils.helpers import format_float


class ValidationReport(BaseModel):
    """Outcome of one check."""

    check_name: str
    estimate: float
    reference: float
    std_error: float = Field(ge=0)
    tolerance_multiplier: float = 3.0
    passed: bool
    n_paths: int = Field(ge=0)
    runtime: float = 0.0
    abs_tolerance: float | None = None
    detail: str = ""

    @property
    def deviation(self) -> float:
        return abs(self.estimate - self.reference)


def judge(
    check_name: str,
    estimate: float,
    reference: float,
    std_error: float,
    n_paths: int,
    abs_tolerance: float | None = None,
    tolerance_multiplier: float | None = None,
    runtime: float = 0.0,
    detail: str = "",
) -> ValidationReport:
    """
    Build a report and decide pass/fail.

    Passes when |estimate - reference| <= k * std_error, or within
    abs_tolerance when one is given. A zero standard error without an
    explicit tolerance falls back to the deterministic tolerance.
    """
    settings = get_settings()
    k = settings.tolerance_multiplier if tolerance_multiplier is None else tolerance_multiplier
    if std_error == 0.0 and abs_tolerance is None:
        abs_tolerance = settings.deterministic_tolerance

    deviation = abs(estimate - reference)
    passed = deviation <= k * std_error or (abs_tolerance is not None and deviation <= abs_tolerance)
    return ValidationReport(
        check_name=check_name,
        estimate=float(estimate),
        reference=float(reference),
        std_error=float(std_error),
        tolerance_multiplier=k,
        passed=bool(passed),
        n_paths=int(n_paths),
        runtime=float(runtime),
        abs_tolerance=abs_tolerance,
        detail=detail,
    )


class ValidationSummary(BaseModel):
    """All reports of one validation run."""

    seed: int
    n_paths: int
    dt: float
    reports: list[ValidationReport] = []

    @property
    def all_passed(self) -> bool:
        return all(report.passed for report in self.reports)

    @property
    def failures(self) -> list[ValidationReport]:
        return [report for report in self.reports if not report.passed]

    def to_json(self, timings: bool = False) -> str:
        """Stable JSON: sorted keys, runtime only when timings are requested."""
        exclude = None if timings else {"runtime"}
        payload = {
            "all_passed": self.all_passed,
            "seed": self.seed,
            "n_paths": self.n_paths,
            "dt": self.dt,
            "reports": [report.model_dump(mode="json", exclude=exclude) for report in self.reports],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_table(self, timings: bool = False) -> Table:
        table = Table(title=f"Validation (seed={self.seed}, paths={self.n_paths}, dt={self.dt})")
        table.add_column("check")
        table.add_column("estimate", justify="right")
        table.add_column("reference", justify="right")
        table.add_column("std error", justify="right")
        table.add_column("band", justify="right")
        table.add_column("result")
        if timings:
            table.add_column("runtime [s]", justify="right")

        for report in self.reports:
            band = f"{report.tolerance_multiplier:g} SE"
            if report.abs_tolerance is not None:
                band += f" | {report.abs_tolerance:g}"
            row = [
                report.check_name,
                f"{report.estimate:.8g}",
                f"{report.reference:.8g}",
                f"{report.std_error:.3g}",
                band,
                "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]",
            ]
            if timings:
                row.append(f"{report.runtime:.3f}")
            table.add_row(*row)
        return table

    def render_text(self, timings: bool = False) -> str:
        """Aligned plain-text table."""
        console = Console(width=140, record=True, color_system=None, file=io.StringIO())
        console.print(self.to_table(timings))
        return console.export_text()


def describe(report: ValidationReport) -> str:
    """One-line summary for logs."""
    verdict = "PASS" if report.passed else "FAIL"
    return (
        f"{report.check_name}: {verdict} estimate={format_float(report.estimate)} "
        f"reference={format_float(report.reference)} se={report.std_error:.3g}"
    )
