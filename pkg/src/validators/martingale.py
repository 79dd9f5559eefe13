"""
Monte Carlo checks of the pricing identities of an affine simplex model.

Along each simulated factor path the short rate r = gamma_bar' Z_bar is
integrated with the trapezoid rule on the simulation lattice. Then

    P(0,T) = E[e^{-int_0^T r}]
    h(0,T) = E[e^{-int_0^T r} r_T]
    H(0,T) = E[int_0^T e^{-int_0^u r} r_u du]

and the discounted discount-gains 1 - e^{-int_0^t r} P(t,T) are
martingales. The checks below compare the sample means with the
closed forms; they all read one PathStatistics built from shared paths.
"""

from dataclasses import dataclass, field

import numpy as np

from src.core.config import get_settings
from src.core.constants import COMPLEMENTARITY_TOLERANCE, GAINS_CHECKPOINTS
from src.core.exceptions import InvalidArgumentError
from src.factors.bundle import PathBlock
from src.factors.simplex import SimplexFactorParams, ZSimulator, to_affine_params
from src.models.affine import (
    GeneratorMatrix,
    bond_price,
    build_generator,
    discount,
    extend_state,
    h_value,
    short_rate,
)
from src.numerics.quadrature import cumulative_trapezoid
from src.utils.helpers import require_finite, require_time, steps_for_horizon, stopwatch
from src.utils.logger import get_logger
from src.validators.report import ValidationReport, describe, judge

logger = get_logger(__name__)

SHARED_PATHS_NOTE = "bond, h and discount checks share paths"

# lattice times sampled per path for the affine positivity scan
POSITIVITY_TIME_SAMPLES = 51
POSITIVITY_MATURITY_SAMPLES = 61


def _extended(states: np.ndarray) -> np.ndarray:
    """(n, K+1, d) factor paths -> (n, K+1, d+1) extended states."""
    ones = np.ones(states.shape[:-1] + (1,))
    return np.concatenate([ones, states], axis=-1)


def max_discount(G: GeneratorMatrix, extended: np.ndarray, times: np.ndarray, horizon: float):
    """
    Largest H(t, t+tau) = 1 - P(t, t+tau) per path over the given lattice
    times and tau in [0, horizon].

    Returns (values, t_at, tau_at), each of shape (n_paths,).
    """
    taus = np.linspace(0.0, horizon, POSITIVITY_MATURITY_SAMPLES)
    n = extended.shape[0]
    best = np.full(n, -np.inf)
    t_at = np.zeros(n)
    tau_at = np.zeros(n)
    for tau in taus:
        values = 1.0 - extended @ G.exp(tau)[:, 0]
        k = np.argmax(values, axis=1)
        peak = values[np.arange(n), k]
        better = peak > best
        best[better] = peak[better]
        t_at[better] = times[k[better]]
        tau_at[better] = tau
    return best, t_at, tau_at


@dataclass
class PathStatistics:
    """Per-path payoffs of one Z-simulation, shared by the pricing checks."""

    params: SimplexFactorParams
    z0: np.ndarray
    maturity: float
    dt: float
    n_steps: int
    n_paths: int
    seed: int
    bond: np.ndarray
    h_payoff: np.ndarray
    discount_payoff: np.ndarray
    checkpoints: np.ndarray
    gains: np.ndarray
    clamp_fraction: float = 0.0
    max_abs_rate: float = 0.0
    positivity_horizon: float | None = None
    max_discount: np.ndarray | None = None
    max_discount_t: np.ndarray | None = None
    max_discount_tau: np.ndarray | None = None
    runtime: float = 0.0
    generator: GeneratorMatrix = field(init=False, repr=False)

    def __post_init__(self):
        self.generator = build_generator(to_affine_params(self.params))

    @property
    def initial_state(self) -> np.ndarray:
        return extend_state(self.z0)


def collect_path_statistics(
    p: SimplexFactorParams,
    z0,
    T: float,
    dt: float,
    n_paths: int,
    seed: int,
    positivity_horizon: float | None = None,
    checkpoints: tuple[float, ...] = GAINS_CHECKPOINTS,
    **kwargs,
) -> PathStatistics:
    """
    Simulate Z-paths on [0, T] block by block and keep only per-path payoffs.

    dt is adjusted to T / round(T / dt) so the lattice ends exactly at T.
    """
    T = require_time("T", T)
    if dt is None:
        dt = get_settings().default_dt
    z0 = require_finite("z0", z0)
    n_steps = steps_for_horizon(T, dt)
    if n_steps > 0:
        step = T / n_steps
        if abs(step - dt) > 1e-12 * dt:
            logger.info(f"dt adjusted from {dt} to {step} to end on T={T}")
        dt = step

    affine = to_affine_params(p)
    G = build_generator(affine)
    p0 = bond_price(G, T, extend_state(z0))
    fractions = np.asarray(checkpoints, dtype=float)
    check_index = np.rint(fractions * n_steps).astype(int)
    times = np.arange(n_steps + 1) * dt
    sampled = np.unique(np.linspace(0, n_steps, min(n_steps + 1, POSITIVITY_TIME_SAMPLES)).round().astype(int))

    def reduce(block: PathBlock) -> dict:
        extended = _extended(block.states)
        r = short_rate(affine, extended)
        integral = cumulative_trapezoid(r, dt, axis=1)
        deflator = np.exp(-integral)

        gains = np.empty((block.n_paths, check_index.size))
        for c, k in enumerate(check_index):
            tau = max(T - k * dt, 0.0)
            gains[:, c] = p0 - deflator[:, k] * bond_price(G, tau, extended[:, k])

        result = {
            "bond": deflator[:, -1],
            "h_payoff": deflator[:, -1] * r[:, -1],
            "discount_payoff": cumulative_trapezoid(deflator * r, dt, axis=1)[:, -1],
            "gains": gains,
            "clamps": block.clamp_counts,
            "max_abs_rate": float(np.max(np.abs(r))),
        }
        if positivity_horizon is not None:
            result["positivity"] = max_discount(G, extended[:, sampled], times[sampled], positivity_horizon)
        return result

    simulator = ZSimulator(p, z0, dt, n_steps, n_paths, seed, **kwargs)
    logger.info(f"Pricing paths: {n_paths} x {n_steps} steps (dt={dt:.6g}, T={T}, seed={seed})")
    with stopwatch() as clock:
        parts = simulator.map_paths(reduce)

    def stack(key: str) -> np.ndarray:
        return np.concatenate([part[key] for part in parts])

    clamps = stack("clamps")
    total_steps = n_paths * n_steps
    stats = PathStatistics(
        params=p,
        z0=z0,
        maturity=T,
        dt=dt,
        n_steps=n_steps,
        n_paths=n_paths,
        seed=seed,
        bond=stack("bond"),
        h_payoff=stack("h_payoff"),
        discount_payoff=stack("discount_payoff"),
        checkpoints=times[check_index],
        gains=stack("gains"),
        clamp_fraction=float(clamps.sum() / total_steps) if total_steps else 0.0,
        max_abs_rate=max(part["max_abs_rate"] for part in parts),
        positivity_horizon=positivity_horizon,
        runtime=clock["seconds"],
    )
    if positivity_horizon is not None:
        stats.max_discount = np.concatenate([part["positivity"][0] for part in parts])
        stats.max_discount_t = np.concatenate([part["positivity"][1] for part in parts])
        stats.max_discount_tau = np.concatenate([part["positivity"][2] for part in parts])
    return stats


def _mean_and_error(samples: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(samples))
    if samples.size < 2 or np.ptp(samples) == 0.0:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / np.sqrt(samples.size))


def _statistics(model, z0, T, dt, n_paths, seed, stats, **kwargs) -> PathStatistics:
    if stats is not None:
        return stats
    if n_paths < 1:
        raise InvalidArgumentError(f"n_paths must be >= 1, got {n_paths}")
    return collect_path_statistics(model, z0, T, dt, n_paths, seed, **kwargs)


def _report(name: str, samples: np.ndarray, reference: float, stats: PathStatistics, detail: str = "") -> ValidationReport:
    estimate, error = _mean_and_error(samples)
    report = judge(
        name, estimate, reference, error, stats.n_paths, runtime=stats.runtime, detail=detail,
    )
    logger.info(describe(report))
    return report


def mc_bond_price(model: SimplexFactorParams, z0=None, T: float = 0.0, dt: float | None = None,
                  n_paths: int = 1, seed: int = 0, stats: PathStatistics | None = None, **kwargs) -> ValidationReport:
    """Mean discount factor e^{-int_0^T r} against the closed-form bond price."""
    stats = _statistics(model, z0, T, dt, n_paths, seed, stats, **kwargs)
    reference = bond_price(stats.generator, stats.maturity, stats.initial_state)
    return _report("mc_bond_price", stats.bond, reference, stats, SHARED_PATHS_NOTE)


def mc_h_value(model: SimplexFactorParams, z0=None, T: float = 0.0, dt: float | None = None,
               n_paths: int = 1, seed: int = 0, stats: PathStatistics | None = None, **kwargs) -> ValidationReport:
    """Mean of e^{-int_0^T r} r_T against the closed-form discount derivative h(0, T)."""
    stats = _statistics(model, z0, T, dt, n_paths, seed, stats, **kwargs)
    reference = h_value(stats.generator, stats.maturity, stats.initial_state)
    return _report("mc_h_value", stats.h_payoff, reference, stats, SHARED_PATHS_NOTE)


def mc_discount(model: SimplexFactorParams, z0=None, T: float = 0.0, dt: float | None = None,
                n_paths: int = 1, seed: int = 0, stats: PathStatistics | None = None, **kwargs) -> ValidationReport:
    """Mean of int_0^T e^{-int_0^u r} r_u du against the closed-form discount H(0, T)."""
    stats = _statistics(model, z0, T, dt, n_paths, seed, stats, **kwargs)
    reference = discount(stats.generator, stats.maturity, stats.initial_state)
    return _report("mc_discount", stats.discount_payoff, reference, stats, SHARED_PATHS_NOTE)


def discount_complementarity(stats: PathStatistics) -> ValidationReport:
    """Simulated bond price plus simulated discount must be 1 within 2e-3 on shared paths, whatever the error."""
    estimate, error = _mean_and_error(stats.bond + stats.discount_payoff)
    report = judge(
        "discount_complementarity",
        estimate,
        1.0,
        error,
        stats.n_paths,
        abs_tolerance=COMPLEMENTARITY_TOLERANCE,
        tolerance_multiplier=0.0,
        runtime=stats.runtime,
        detail="mc_bond_price + mc_discount on shared paths",
    )
    logger.info(describe(report))
    return report


def gains_martingale_check(model: SimplexFactorParams, z0=None, T: float = 0.0, dt: float | None = None,
                           n_paths: int = 1, seed: int = 0, stats: PathStatistics | None = None,
                           **kwargs) -> list[ValidationReport]:
    """
    Discounted gains D_t - D_0 = P(0,T) - e^{-int_0^t r} P(t,T) must have
    mean 0 at every checkpoint; one report per checkpoint.
    """
    stats = _statistics(model, z0, T, dt, n_paths, seed, stats, **kwargs)
    reports = []
    for c, t in enumerate(stats.checkpoints):
        reports.append(
            _report(f"gains_martingale[t={float(t):.6g}]", stats.gains[:, c], 0.0, stats, f"checkpoint t={float(t)!r}")
        )
    return reports


def pricing_battery(stats: PathStatistics) -> list[ValidationReport]:
    """The three pricing checks, their complementarity and the gains checks on one set of paths."""
    reports = [
        mc_bond_price(stats.params, stats=stats),
        mc_h_value(stats.params, stats=stats),
        mc_discount(stats.params, stats=stats),
        discount_complementarity(stats),
    ]
    reports.extend(gains_martingale_check(stats.params, stats=stats))
    return reports
