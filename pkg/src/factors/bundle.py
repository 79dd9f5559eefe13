"""
Containers for simulated paths.

PathBlock is one slice of consecutive paths produced by a simulator;
PathBundle is the full, materialized ensemble.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class PathBlock:
    """Paths first_path .. first_path + n - 1 of a simulation."""

    first_path: int
    states: np.ndarray        # (n, n_steps + 1, state_dim)
    clamp_counts: np.ndarray  # (n,) steps on which the state was clamped

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]


@dataclass
class PathBundle:
    """Seeded ensemble of simulated paths on a uniform time grid."""

    dt: float
    n_steps: int
    n_paths: int
    seed: int
    states: np.ndarray
    clamp_counts: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    @property
    def terminal(self) -> np.ndarray:
        return self.states[:, -1, :]

    @property
    def clamp_fraction(self) -> float:
        """Clamped steps over all simulated steps."""
        total = self.n_paths * self.n_steps
        return float(self.clamp_counts.sum() / total) if total else 0.0

    @classmethod
    def from_blocks(cls, blocks: list[PathBlock], dt: float, n_steps: int, seed: int) -> "PathBundle":
        states = np.concatenate([block.states for block in blocks])
        counts = np.concatenate([block.clamp_counts for block in blocks])
        return cls(
            dt=dt,
            n_steps=n_steps,
            n_paths=states.shape[0],
            seed=seed,
            states=states,
            clamp_counts=counts,
        )
