"""
Base Simulator - Abstract class for all path simulators.

Every simulator (U-process, Z-process, toy short rate, discount
derivative grid) inherits from this. Common logic lives here:

- paths are cut into blocks of consecutive path indices
- each path draws its shocks from its own stream (seed, path index)
- blocks run on a thread pool and come back in path order

so the result never depends on the block size or the thread count.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from src.core.config import get_settings
from src.core.exceptions import DiscountTSError, InvalidArgumentError, SimulationError
from src.factors.bundle import PathBlock, PathBundle
from src.numerics.streams import path_increments
from src.utils.helpers import resolve_threads
from src.utils.logger import get_logger

T = TypeVar("T")


class BaseSimulator(ABC):
    """
    Blueprint for all Euler-type simulators.

    Every simulator MUST implement:
    - get_name()      -> simulator name for logs and errors
    - n_factors       -> Brownian dimension per step
    - initial_state() -> starting states for n paths
    - step()          -> one time step for a block of paths
    """

    def __init__(
        self,
        dt: float | None,
        n_steps: int,
        n_paths: int,
        seed: int,
        block_size: int | None = None,
        threads: int | None = None,
    ):
        if dt is None:
            dt = get_settings().default_dt
        if not math.isfinite(dt) or dt <= 0:
            raise InvalidArgumentError(f"dt must be positive, got {dt}")
        if n_steps < 0 or n_paths < 1:
            raise InvalidArgumentError(
                f"need n_steps >= 0 and n_paths >= 1, got {n_steps} and {n_paths}"
            )
        self.dt = float(dt)
        self.n_steps = int(n_steps)
        self.n_paths = int(n_paths)
        self.seed = int(seed)
        self.block_size = int(block_size or get_settings().block_size)
        self.threads = resolve_threads(threads)
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def get_name(self) -> str:
        """Return the name of this simulator."""
        pass

    @property
    @abstractmethod
    def n_factors(self) -> int:
        """Number of Brownian motions driving one path."""
        pass

    @abstractmethod
    def initial_state(self, n: int) -> np.ndarray:
        """Initial states of n paths, shape (n, state_dim)."""
        pass

    @abstractmethod
    def step(self, state: np.ndarray, dw: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """
        Advance a block from lattice time k to k + 1.

        state is (n, state_dim), dw the Brownian increments (n, n_factors).
        Returns the new states and a boolean (n,) mask of clamped paths.
        """
        pass

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def run_block(self, start: int, stop: int) -> PathBlock:
        """Simulate paths start .. stop - 1."""
        n = stop - start
        shocks = path_increments(self.seed, start, n, self.n_steps, self.n_factors)
        shocks *= math.sqrt(self.dt)

        first = self.initial_state(n)
        states = np.empty((n, self.n_steps + 1, first.shape[1]))
        states[:, 0] = first
        clamp_counts = np.zeros(n, dtype=np.int64)

        for k in range(self.n_steps):
            states[:, k + 1], clamped = self.step(states[:, k], shocks[:, k], k)
            clamp_counts += clamped

        return PathBlock(first_path=start, states=states, clamp_counts=clamp_counts)

    def _block_bounds(self) -> list[tuple[int, int]]:
        return [
            (start, min(start + self.block_size, self.n_paths))
            for start in range(0, self.n_paths, self.block_size)
        ]

    def map_paths(self, reducer: Callable[[PathBlock], T]) -> list[T]:
        """
        Run every block through reducer, results in path order.

        Usage:
            terminals = simulator.map_paths(lambda block: block.states[:, -1])
            np.concatenate(terminals)
        """
        def work(bounds: tuple[int, int]) -> T:
            try:
                return reducer(self.run_block(*bounds))
            except DiscountTSError:
                raise
            except Exception as e:
                raise SimulationError(self.get_name(), f"block {bounds}: {e}") from e

        bounds = self._block_bounds()
        if self.threads == 1 or len(bounds) == 1:
            return [work(b) for b in bounds]

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(work, bounds))

    def simulate(self) -> PathBundle:
        """Simulate all paths and keep them in memory."""
        self.logger.info(
            f"{self.get_name()}: {self.n_paths} paths x {self.n_steps} steps "
            f"(dt={self.dt}, seed={self.seed}, threads={self.threads})"
        )
        blocks = self.map_paths(lambda block: block)
        bundle = PathBundle.from_blocks(blocks, dt=self.dt, n_steps=self.n_steps, seed=self.seed)
        self.logger.info(
            f"{self.get_name()}: done, clamp fraction {bundle.clamp_fraction:.4%}"
        )
        return bundle
