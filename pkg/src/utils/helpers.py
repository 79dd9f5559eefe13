"""
Helper functions used across the entire project.

Small reusable functions that prevent code duplication.
"""

import math
import os
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.config import get_settings
from src.core.exceptions import InvalidArgumentError


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else DISCOUNT_TS_THREADS, else CPU count."""
    if threads is None:
        threads = get_settings().threads
    if threads is None:
        threads = os.cpu_count() or 1
    return max(1, int(threads))


def require_finite(name: str, value) -> np.ndarray:
    """Return value as a float array, raising on NaN/inf."""
    array = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    return array


def require_time(name: str, value: float) -> float:
    """A finite, non-negative time."""
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidArgumentError(f"{name} must be a finite time >= 0, got {value}")
    return value


def steps_for_horizon(horizon: float, dt: float) -> int:
    """Number of dt-steps that reach horizon (rounded to the nearest step)."""
    if dt <= 0 or not math.isfinite(dt):
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    return max(0, int(round(require_time("horizon", horizon) / dt)))


def format_float(value: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(value))


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Write a frame byte-stably: no index, LF line endings, repr floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = frame.copy()
    for column in frame.columns:
        if pd.api.types.is_float_dtype(frame[column]):
            frame[column] = frame[column].map(format_float)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


@contextmanager
def stopwatch() -> Iterator[dict]:
    """
    Measure wall time of a block.

    Usage:
        with stopwatch() as clock:
            run()
        clock["seconds"]
    """
    clock = {"seconds": 0.0}
    start = time.perf_counter()
    try:
        yield clock
    finally:
        clock["seconds"] = time.perf_counter() - start
