"""
All constants for the discount term-structure engine.

Numerical defaults live here so every module reads the same values;
runtime overrides go through Settings (see core/config.py).
"""

from enum import Enum, IntEnum


# App Info
APP_NAME = "DiscountTS"
APP_VERSION = "1.0.0"


# Simulation defaults
DEFAULT_DT = 1e-3
DEFAULT_BLOCK_SIZE = 512
DEFAULT_H_MAX = 1e3

# Z-paths are projected into the simplex with sum at most this value
SIMPLEX_CEILING = 1.0 - 1e-12

# Finite differences (relative step)
FD_STEP = 1e-5

# Validation
TOLERANCE_MULTIPLIER = 3.0
DETERMINISTIC_TOLERANCE = 1e-4
COMPLEMENTARITY_TOLERANCE = 2e-3
DRIFT_CHECK_POINTS = 20
MIN_DRIFT_CHECK_PATHS = 10_000
# Noiseless drift checks pass within DRIFT_RELATIVE_BIAS * dt * |reference| + DRIFT_ROUNDING_FLOOR
DRIFT_RELATIVE_BIAS = 1.0
DRIFT_ROUNDING_FLOOR = 1e-12
GAINS_CHECKPOINTS = (0.25, 0.5, 0.75, 1.0)

# Lattice times must match a maturity node to this many years
LATTICE_TOL = 1e-9


class ModelKind(str, Enum):
    AFFINE = "affine"
    SIMPLEX_FACTORS = "simplex_factors"
    TOY = "toy"
    GRID = "grid"


class VolKind(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    PROPORTIONAL = "proportional"


class DriftScheme(str, Enum):
    """How simulate_grid discretizes the drift h(t,T)h(t,t)."""
    EULER = "euler"
    FLOW = "flow"
    NONE = "none"


class CurveShape(str, Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"


class ExitCode(IntEnum):
    OK = 0
    VALIDATION_FAILED = 1
    EXPLOSION = 2
    CONFIG_ERROR = 64


# CSV headers
CURVE_COLUMNS = ("tau", "h", "discount", "bond", "forward", "short_rate")
PATH_COLUMNS = ("t", "path_id", "component", "value")
SPDE_COLUMNS = ("t", "x", "psi")

# forward_rate refuses bond prices at or below this floor
BOND_FLOOR = 1e-14
