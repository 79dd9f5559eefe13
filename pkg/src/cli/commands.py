"""
CLI commands: curve, simulate, validate, spde.

Each command takes a validated model config plus its own options,
writes its artifacts under the output directory and returns the
written paths. Failures surface as DiscountTSError subclasses; the
front end in cli/app.py turns them into exit codes.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.config import get_settings
from src.core.constants import CURVE_COLUMNS, PATH_COLUMNS, SPDE_COLUMNS
from src.core.exceptions import ConfigError, DegenerateCurveError, ExplosionError
from src.factors.bundle import PathBundle
from src.factors.simplex import simulate_z, to_affine_params
from src.hjm.grid_simulator import GridEnsemble, simulate_grid
from src.hjm.spde import critical_time, spde_flow
from src.hjm.toy_model import simulate_toy_rate, toy_bond, toy_discount, toy_h
from src.models.affine import (
    bond_price,
    build_generator,
    discount,
    extend_state,
    forward_rate,
    h_value,
    short_rate,
)
from src.utils.helpers import format_float, write_csv
from src.utils.logger import get_logger
from src.validators.engine import ValidationEngine
from src.validators.report import ValidationSummary

logger = get_logger(__name__)


def _output_dir(config, out: str | Path | None) -> Path:
    directory = Path(out) if out is not None else Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _write_json(payload: dict, path: Path) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _dt(config) -> float:
    return config.sim.dt if config.sim.dt is not None else get_settings().default_dt


# ─── curve ─────────────────────────────────────────────

def curve_table(config, tau_grid) -> pd.DataFrame:
    """h, discount, bond, forward and short rate at every tau of the grid."""
    rows = []
    if config.model_kind == "affine":
        G = build_generator(config.params)
        state = extend_state(config.z0)
        r = short_rate(config.params, state)
        for tau in tau_grid:
            try:
                forward = forward_rate(G, tau, state)
            except DegenerateCurveError as e:
                logger.warning(f"{e}; forward written as NaN")
                forward = float("nan")
            rows.append((tau, h_value(G, tau, state), discount(G, tau, state), bond_price(G, tau, state), forward, r))
    elif config.model_kind == "toy":
        p, r = config.params, config.r0
        for tau in tau_grid:
            h, bond = toy_h(p, r, tau), toy_bond(p, r, tau)
            rows.append((tau, h, toy_discount(p, r, tau), bond, h / bond if bond > 0 else float("nan"), r))
    else:
        raise ConfigError(f"curve needs an affine or toy config, got {config.model_kind}")
    return pd.DataFrame(rows, columns=list(CURVE_COLUMNS), dtype=float)


def cmd_curve(config, tau_grid=None, out=None) -> Path:
    """Tabulate the model curve to curve.csv."""
    taus = [float(tau) for tau in (tau_grid if tau_grid is not None else config.output.tau_grid)]
    if any(tau < 0 for tau in taus):
        raise ConfigError("tau values must be >= 0")
    path = write_csv(curve_table(config, taus), _output_dir(config, out) / "curve.csv")
    logger.info(f"Wrote {len(taus)} curve rows to {path}")
    return path


# ─── simulate ──────────────────────────────────────────

def _factor_frame(bundle: PathBundle, limit: int, labels: list[str]) -> pd.DataFrame:
    n = min(limit, bundle.n_paths)
    states = bundle.states[:n]
    times = np.repeat(bundle.times, len(labels))
    frames = [
        pd.DataFrame({
            "t": times,
            "path_id": path,
            "component": np.tile(labels, bundle.n_steps + 1),
            "value": states[path].reshape(-1),
        })
        for path in range(n)
    ]
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(PATH_COLUMNS))


def _grid_frame(ensemble: GridEnsemble, limit: int) -> pd.DataFrame:
    n = min(limit, ensemble.n_paths)
    labels = [f"T={format_float(T)}" for T in ensemble.maturities]
    frames = []
    for path in range(n):
        values = ensemble.h[path].reshape(-1)
        frame = pd.DataFrame({
            "t": np.repeat(ensemble.times, len(labels)),
            "path_id": path,
            "component": np.tile(labels, ensemble.n_steps + 1),
            "value": values,
        })
        frames.append(frame[~np.isnan(values)])
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(PATH_COLUMNS))


def _bundle_summary(bundle: PathBundle, labels: list[str]) -> dict:
    terminal = bundle.terminal
    return {
        "n_paths": bundle.n_paths,
        "n_steps": bundle.n_steps,
        "dt": bundle.dt,
        "seed": bundle.seed,
        "clamp_fraction": bundle.clamp_fraction,
        "clamped_steps": int(bundle.clamp_counts.sum()),
        "terminal_mean": dict(zip(labels, terminal.mean(axis=0).tolist())),
        "explosions": [],
    }


def cmd_simulate(config, out=None) -> list[Path]:
    """
    Simulate paths: paths.csv (first output.path_limit paths, long format)
    and summary.json. A grid explosion is written to the summary and then
    raised as ExplosionError.
    """
    directory = _output_dir(config, out)
    sim, output = config.sim, config.output
    dt = _dt(config)
    written = []
    explosion: ExplosionError | None = None

    if config.model_kind == "simplex_factors":
        bundle = simulate_z(config.params, config.z0, dt, sim.steps(dt), sim.n_paths, sim.seed)
        labels = [f"z{i + 1}" for i in range(config.params.d)]
        frame = _factor_frame(bundle, output.path_limit, labels)
        summary = _bundle_summary(bundle, labels)
        rates = short_rate(to_affine_params(config.params), np.concatenate(
            [np.ones(bundle.states.shape[:-1] + (1,)), bundle.states], axis=-1
        ))
        summary["max_abs_short_rate"] = float(np.max(np.abs(rates)))
    elif config.model_kind == "toy":
        bundle = simulate_toy_rate(config.params, config.r0, dt, sim.steps(dt), sim.n_paths, sim.seed)
        frame = _factor_frame(bundle, output.path_limit, ["r"])
        summary = _bundle_summary(bundle, ["r"])
    elif config.model_kind == "grid":
        initial = config.initial.build()
        ensemble = simulate_grid(
            initial, config.vol, mpr=config.mpr, dt=dt,
            n_steps=sim.steps(dt, fallback_horizon=float(initial.maturities[-1])),
            n_paths=sim.n_paths, seed=sim.seed, scheme=config.scheme, h_max=config.h_max, strict=False,
        )
        frame = _grid_frame(ensemble, output.path_limit)
        values, _ = ensemble.integrated_discounts()
        summary = {
            "n_paths": ensemble.n_paths,
            "n_steps": ensemble.n_steps,
            "dt": ensemble.dt,
            "seed": ensemble.seed,
            "scheme": ensemble.scheme.value,
            "max_integrated_discount": float(values.max()) if np.isfinite(values).all() else None,
            "explosions": [{"path": e.path, "time": e.time} for e in ensemble.explosions],
        }
        if ensemble.explosions:
            first = min(ensemble.explosions, key=lambda e: (e.time, e.path))
            summary["blow_up_time"] = first.time
            explosion = ExplosionError(
                f"{len(ensemble.explosions)} paths exploded, first at t={first.time:.6g}",
                time=first.time, path=first.path, ensemble=ensemble,
            )
    else:
        raise ConfigError("affine configs carry no factor dynamics; simulate a simplex_factors config")

    summary["model_kind"] = config.model_kind
    if "csv" in output.formats:
        written.append(write_csv(frame[list(PATH_COLUMNS)], directory / "paths.csv"))
    written.append(_write_json(summary, directory / "summary.json"))
    logger.info(f"Wrote {', '.join(str(path) for path in written)}")

    if explosion is not None:
        raise explosion
    return written


# ─── validate ──────────────────────────────────────────

def cmd_validate(config, out=None, timings: bool = False) -> ValidationSummary:
    """Run the full battery; writes validation.json and validation.txt, returns the summary."""
    if config.model_kind != "simplex_factors":
        raise ConfigError(f"validate needs a simplex_factors config, got {config.model_kind}")
    directory = _output_dir(config, out)

    summary = ValidationEngine(config).run()
    (directory / "validation.json").write_text(summary.to_json(timings), encoding="utf-8")
    (directory / "validation.txt").write_text(summary.render_text(timings), encoding="utf-8")
    return summary


# ─── spde ──────────────────────────────────────────────

def spde_table(config, t_list) -> pd.DataFrame:
    """psi_t(x) on the initial curve's nodes x with t + x inside the curve's range."""
    initial = config.initial.build()
    shape = config.initial.function()
    psi0, primitive = shape if shape is not None else (initial, None)
    horizon = float(initial.maturities[-1])

    rows = []
    for t in t_list:
        if t > horizon:
            raise ConfigError(f"t={t} lies beyond the curve horizon {horizon}")
        for x in initial.maturities[initial.maturities <= horizon - t + 1e-12]:
            rows.append((t, float(x), spde_flow(psi0, t, min(float(x), horizon - t), primitive)))
    return pd.DataFrame(rows, columns=list(SPDE_COLUMNS), dtype=float)


def cmd_spde(config, t_list, out=None) -> Path:
    """Deterministic flow of a grid config's initial curve to spde.csv."""
    if config.model_kind != "grid":
        raise ConfigError(f"spde needs a grid config, got {config.model_kind}")
    times = sorted(float(t) for t in t_list)
    if any(t < 0 for t in times):
        raise ConfigError("t values must be >= 0")

    initial = config.initial.build()
    shape = config.initial.function()
    blow_up = critical_time(initial) if shape is None else critical_time(shape[0], times[-1], shape[1])
    if blow_up is not None:
        logger.info(f"Deterministic flow explodes at t={blow_up:.6g}")

    path = write_csv(spde_table(config, times), _output_dir(config, out) / "spde.csv")
    logger.info(f"Wrote {path}")
    return path
