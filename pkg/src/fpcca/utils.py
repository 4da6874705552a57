"""Constants and small linear-algebra helpers shared across the package."""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from .errors import RankDeficiencyError

logger = logging.getLogger(__name__)

# Assumption checks pass when 1 - ||C|| >= DEFAULT_TOL
DEFAULT_TOL = 1e-6

# Absolute floor for eigenvalues inside inverse square roots
EIGEN_FLOOR = 1e-12

# Eigen-components below this fraction of the leading eigenvalue are dropped
RELATIVE_EIGEN_FLOOR = 1e-10

# Correlation-mode entries may overshoot 1 by this much before clipping
CORRELATION_CLIP = 1e-10

# Tolerance of the quadrature Gram check on eigenfunctions
ORTHONORMALITY_TOL = 1e-8

DEFAULT_HARMONICS = 9
DEFAULT_GRID_POINTS = 100
DEFAULT_KL_TERMS = 20
DEFAULT_BETA = (1.0, 2.0)

SCHEMA_VERSION = 1

CORRELATION = "correlation"
COVARIANCE = "covariance"
MODES = (CORRELATION, COVARIANCE)


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest singular value, zero for empty matrices."""
    if matrix.size == 0:
        return 0.0
    return float(linalg.norm(matrix, 2))


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def sym_eigh(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues in descending order."""
    values, vectors = linalg.eigh(symmetrize(matrix))
    return values[::-1], vectors[:, ::-1]


def sym_power(
    matrix: np.ndarray, power: float, floor: float = EIGEN_FLOOR, name: str = "matrix"
) -> np.ndarray:
    """Symmetric matrix power through the eigendecomposition.

    Args:
        matrix: Symmetric positive definite matrix
        power: Exponent, e.g. -0.5 for the inverse square root
        floor: Smallest admissible eigenvalue
        name: Label used in the error message

    Returns:
        V diag(w**power) V^T

    Raises:
        RankDeficiencyError: If an eigenvalue falls below ``floor``
    """
    if matrix.size == 0:
        return np.zeros_like(matrix)
    values, vectors = sym_eigh(matrix)
    smallest = float(values[-1])
    if smallest < floor:
        rank = int(np.sum(values >= floor))
        raise RankDeficiencyError(
            f"{name} is not positive definite: smallest eigenvalue {smallest:.3e}",
            rank=rank,
        )
    return (vectors * values**power) @ vectors.T


def sym_inv_sqrt(
    matrix: np.ndarray, floor: float = EIGEN_FLOOR, name: str = "matrix"
) -> np.ndarray:
    return sym_power(matrix, -0.5, floor=floor, name=name)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each column's largest-magnitude entry is positive."""
    return vectors * column_signs(vectors)


def column_signs(vectors: np.ndarray) -> np.ndarray:
    if vectors.size == 0:
        return np.ones(vectors.shape[1] if vectors.ndim == 2 else 0)
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return np.where(pivots < 0, -1.0, 1.0)
