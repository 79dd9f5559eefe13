"""
Matrix kernels: the exponential e^{Ax} and checked products.

Square matrices are plain numpy arrays of shape (dim, dim); the
exponential is scipy's scaling-and-squaring Pade approximant.
"""

import numpy as np
from scipy.linalg import expm

from src.core.exceptions import DimensionError
from src.utils.helpers import require_finite


def as_square_matrix(A) -> np.ndarray:
    """Validate A as a finite (dim, dim) float matrix with dim >= 1."""
    matrix = require_finite("matrix", A)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    return matrix


def mat_exp(A, x: float = 1.0) -> np.ndarray:
    """Return e^{Ax}."""
    matrix = as_square_matrix(A)
    scale = float(require_finite("x", x))
    if scale == 0.0:
        return np.eye(matrix.shape[0])
    return expm(matrix * scale)


def mat_vec(A, v) -> np.ndarray:
    """Standard matrix-vector product with a dimension check."""
    matrix = as_square_matrix(A)
    vector = np.asarray(v, dtype=float)
    if vector.ndim != 1 or matrix.shape[1] != vector.shape[0]:
        raise DimensionError(
            f"cannot multiply matrix {matrix.shape} by vector {vector.shape}"
        )
    return matrix @ vector
