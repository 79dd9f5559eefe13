"""
Maturity-grid simulator for the discount derivative h(t, T).

Under the martingale measure the drift of h is pinned down by the curve
itself,

    dh(t,T) = h(t,T) h(t,t) dt + sigma(t,T) dW_t,

and a market price of risk `mpr` adds sigma(t,T) . mpr dt for the
physical measure. The running time t = k dt must always sit on a
maturity node, so the short rate h(t,t) is read off the grid exactly.

Nodes that have matured (T_j < t) are NaN in the ensemble. A path whose
curve leaves the explosion bound gets an all-NaN row from then on.
"""

from dataclasses import dataclass, field

import numpy as np

from src.core.config import get_settings
from src.core.constants import LATTICE_TOL, DriftScheme
from src.core.exceptions import DimensionError, ExplosionError, GridError
from src.factors.base_simulator import BaseSimulator
from src.hjm.curve import CurveGrid, VolSpec
from src.numerics.quadrature import cumulative_trapezoid, trapezoid_nodes
from src.utils.helpers import require_finite, steps_for_horizon
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ExplosionEvent:
    path: int
    time: float


@dataclass
class GridEnsemble:
    """Simulated curves h[path, k, j] = h(t_k, T_j)."""

    times: np.ndarray
    maturities: np.ndarray
    h: np.ndarray
    dt: float
    seed: int
    scheme: DriftScheme
    vol: VolSpec
    mpr: np.ndarray | None = None
    explosions: list[ExplosionEvent] = field(default_factory=list)

    @property
    def n_paths(self) -> int:
        return self.h.shape[0]

    @property
    def n_steps(self) -> int:
        return self.h.shape[1] - 1

    def diagonal_index(self, k: int) -> int:
        """Maturity node of the lattice time t_k."""
        idx = int(np.searchsorted(self.maturities, self.times[k] - LATTICE_TOL))
        if idx >= self.maturities.size or abs(self.maturities[idx] - self.times[k]) > LATTICE_TOL:
            raise GridError(f"lattice time {self.times[k]} is not a maturity node")
        return idx

    def exploded(self) -> np.ndarray:
        """Boolean (n_paths,) mask of paths that blew up."""
        mask = np.zeros(self.n_paths, dtype=bool)
        for event in self.explosions:
            mask[event.path] = True
        return mask

    def curve(self, path: int, k: int) -> CurveGrid:
        """The curve of one path at lattice time t_k, live nodes only."""
        start = self.diagonal_index(k)
        values = self.h[path, k, start:]
        if np.isnan(values).all():
            raise GridError(f"path {path} exploded before t={self.times[k]}")
        return CurveGrid(t=float(self.times[k]), maturities=self.maturities[start:], h_values=values)

    def short_rates(self) -> np.ndarray:
        """h(t_k, t_k) for every path and lattice time: (n_paths, n_steps + 1)."""
        columns = [self.diagonal_index(k) for k in range(self.n_steps + 1)]
        return self.h[:, np.arange(self.n_steps + 1), columns]

    def integrated_discounts(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Positivity diagnostic per path and lattice time.

        Returns (values, maturities): values[p, k] is the largest
        int_{t_k}^{T} h(t_k, s) ds over nodes T >= t_k, maturities[p, k]
        the node where it is reached. Exploded curves count as +inf.
        """
        values = np.empty((self.n_paths, self.n_steps + 1))
        where = np.empty((self.n_paths, self.n_steps + 1))
        for k in range(self.n_steps + 1):
            start = self.diagonal_index(k)
            nodes = self.maturities[start:]
            running = cumulative_trapezoid(self.h[:, k, start:], x=nodes, axis=1)
            dead = np.isnan(running).any(axis=1)
            running[dead] = np.inf
            best = np.argmax(running, axis=1)
            values[:, k] = running[np.arange(self.n_paths), best]
            where[:, k] = nodes[best]
        return values, where


class GridSimulator(BaseSimulator):
    """Euler-type paths of the whole discount-derivative curve."""

    def __init__(
        self,
        initial: CurveGrid,
        vol: VolSpec,
        mpr=None,
        dt: float | None = None,
        n_steps: int | None = None,
        n_paths: int = 1,
        seed: int = 0,
        scheme: DriftScheme = DriftScheme.FLOW,
        h_max: float | None = None,
        **kwargs,
    ):
        if dt is None:
            dt = get_settings().default_dt
        if abs(initial.t) > LATTICE_TOL:
            raise GridError(f"the initial curve must be observed at t = 0, got t={initial.t}")
        if n_steps is None:
            n_steps = steps_for_horizon(initial.maturities[-1], dt)
        super().__init__(dt, n_steps, n_paths, seed, **kwargs)

        vol.check_grid(initial.m)
        self.initial = initial
        self.vol = vol
        self.scheme = DriftScheme(scheme)
        self.h_max = float(h_max if h_max is not None else get_settings().h_max)

        self.mpr = None
        if mpr is not None:
            self.mpr = require_finite("mpr", mpr).reshape(-1)
            if self.mpr.size != vol.n_factors:
                raise DimensionError(
                    f"market price of risk has {self.mpr.size} entries for {vol.n_factors} factors"
                )

        try:
            self.diagonal = np.array([initial.node_index(t) for t in self.times])
        except GridError as e:
            raise GridError(
                f"dt={self.dt} over {self.n_steps} steps does not stay on the maturity grid: {e.message}"
            ) from e

    def get_name(self) -> str:
        return "HJM grid"

    @property
    def n_factors(self) -> int:
        return self.vol.n_factors

    def initial_state(self, n: int) -> np.ndarray:
        return np.tile(self.initial.h_values, (n, 1))

    def step(self, state: np.ndarray, dw: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        now, nxt = self.diagonal[k], self.diagonal[k + 1]
        nodes = self.initial.maturities
        h = state[:, nxt:]
        shock = dw if self.mpr is None else dw + self.mpr * self.dt

        new = np.full_like(state, np.nan)
        with np.errstate(all="ignore"):
            r = state[:, now]
            if self.scheme == DriftScheme.EULER:
                drifted = h + h * r[:, None] * self.dt
                denominator = np.ones_like(r)
            elif self.scheme == DriftScheme.FLOW:
                # exact for the deterministic flow: 1 - int_t^{t+dt} h(t, s) ds
                denominator = 1.0 - trapezoid_nodes(state[:, now : nxt + 1], nodes[now : nxt + 1], axis=1)
                drifted = h / denominator[:, None]
            else:
                drifted = h
                denominator = np.ones_like(r)
            new[:, nxt:] = drifted + self.vol.apply(state[:, nxt:], shock, slice(nxt, None))

            live = new[:, nxt:]
            bad = (
                ~np.isfinite(live).all(axis=1)
                | (np.abs(live) > self.h_max).any(axis=1)
                | ~(denominator > 0)
            )
        new[bad] = np.nan
        return new, np.zeros(state.shape[0], dtype=bool)


def _explosion_events(h: np.ndarray, times: np.ndarray) -> list[ExplosionEvent]:
    dead = np.isnan(h).all(axis=2)
    events = []
    for path in np.nonzero(dead.any(axis=1))[0]:
        k = int(np.argmax(dead[path]))
        events.append(ExplosionEvent(path=int(path), time=float(times[k])))
    return events


def simulate_grid(
    initial: CurveGrid,
    vol: VolSpec,
    mpr=None,
    dt: float | None = None,
    n_steps: int | None = None,
    n_paths: int = 1,
    seed: int = 0,
    scheme: DriftScheme = DriftScheme.FLOW,
    h_max: float | None = None,
    strict: bool = True,
    **kwargs,
) -> GridEnsemble:
    """
    Simulate n_paths curve trajectories from `initial`.

    With strict=True an exploded path raises ExplosionError (the partial
    ensemble rides along on the exception); otherwise explosions are
    only recorded on the ensemble.
    """
    simulator = GridSimulator(
        initial, vol, mpr=mpr, dt=dt, n_steps=n_steps, n_paths=n_paths,
        seed=seed, scheme=scheme, h_max=h_max, **kwargs,
    )
    bundle = simulator.simulate()
    ensemble = GridEnsemble(
        times=bundle.times,
        maturities=initial.maturities,
        h=bundle.states,
        dt=simulator.dt,
        seed=simulator.seed,
        scheme=simulator.scheme,
        vol=vol,
        mpr=simulator.mpr,
        explosions=_explosion_events(bundle.states, bundle.times),
    )

    if ensemble.explosions:
        first = min(ensemble.explosions, key=lambda event: (event.time, event.path))
        logger.warning(
            f"{len(ensemble.explosions)} of {ensemble.n_paths} paths exploded; "
            f"first at t={first.time:.6g} (path {first.path})"
        )
        if strict:
            raise ExplosionError(
                f"curve exploded at t={first.time:.6g} on path {first.path}",
                time=first.time,
                path=first.path,
                ensemble=ensemble,
            )

    values, _ = ensemble.integrated_discounts()
    violating = int((values >= 1.0).any(axis=1).sum())
    if violating:
        logger.warning(f"{violating} of {ensemble.n_paths} paths violate int h < 1 (non-positive bonds)")
    return ensemble
