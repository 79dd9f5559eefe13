"""
Deterministic random-number streams.

A stream is addressed by (seed, stream_id); stream_id is the path
index. numpy's SeedSequence spawn keys give statistically independent
substreams, so a path draws the same normals whichever block or thread
simulates it.
"""

from dataclasses import dataclass

import numpy as np

from src.core.exceptions import InvalidArgumentError

_U64 = 2 ** 64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < _U64:
                raise InvalidArgumentError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(sequence))


def gaussian_draws(stream: RngStream, n: int) -> np.ndarray:
    """n i.i.d. standard normals, reproducible per (seed, stream_id)."""
    if n < 0:
        raise InvalidArgumentError(f"n must be >= 0, got {n}")
    return stream.generator().standard_normal(int(n))


def path_increments(seed: int, first_path: int, n_paths: int, n_steps: int, n_factors: int) -> np.ndarray:
    """
    Standard-normal shocks for a block of consecutive paths.

    Returns shape (n_paths, n_steps, n_factors); row i comes from stream
    (seed, first_path + i).
    """
    shocks = np.empty((n_paths, n_steps, n_factors))
    for i in range(n_paths):
        draws = gaussian_draws(RngStream(seed, first_path + i), n_steps * n_factors)
        shocks[i] = draws.reshape(n_steps, n_factors)
    return shocks
