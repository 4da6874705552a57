"""Functional principal components of grid-sampled curves."""

import dataclasses
import logging

import numpy as np
from scipy import linalg

from .errors import DataError, DimensionMismatchError, GridMismatchError, RankDeficiencyError
from .models import EigenSystem, FpcaResult, FunctionalDataset, Grid
from .utils import DEFAULT_HARMONICS, RELATIVE_EIGEN_FLOOR, fix_signs, symmetrize

logger = logging.getLogger(__name__)


def center(ds: FunctionalDataset) -> FunctionalDataset:
    """Remove the pointwise mean curve; the mean is kept on the result."""
    if ds.centered:
        return ds
    mean_curve = ds.values.mean(axis=0)
    return dataclasses.replace(
        ds, values=ds.values - mean_curve, centered=True, mean_curve=mean_curve
    )


def empirical_covariance(ds: FunctionalDataset) -> np.ndarray:
    """Covariance kernel K(s, t) on the grid with divisor n - 1."""
    if not ds.centered:
        raise DataError("empirical covariance needs a centered dataset")
    kernel = ds.values.T @ ds.values / (ds.n - 1)
    return symmetrize(kernel)


def eigendecompose_kernel(
    kernel: np.ndarray,
    grid: Grid,
    m: int = DEFAULT_HARMONICS,
    label: str = "S",
) -> EigenSystem:
    """Solve the quadrature-discretized integral eigenproblem of a kernel.

    The symmetric matrix W^{1/2} K W^{1/2} is diagonalized and its eigenvectors
    mapped back by W^{-1/2}, so the eigenfunctions are orthonormal under the
    grid's quadrature. Each eigenfunction's largest-magnitude entry is positive.

    Args:
        kernel: p x p covariance kernel on the grid
        grid: Sampling grid with quadrature weights
        m: Number of components requested
        label: Identifier of the resulting eigensystem

    Returns:
        EigenSystem with at most m components

    Raises:
        RankDeficiencyError: If the kernel has no positive eigenvalue
    """
    kernel = np.asarray(kernel, dtype=float)
    if kernel.shape != (grid.size, grid.size):
        raise DimensionMismatchError(
            f"kernel has shape {kernel.shape}, grid has {grid.size} points"
        )
    if not 1 <= m <= grid.size:
        raise DataError(f"cannot retain {m} components on a {grid.size}-point grid")

    root_w = np.sqrt(grid.weights)
    values, vectors = linalg.eigh(symmetrize(root_w[:, None] * kernel * root_w[None, :]))
    values, vectors = values[::-1][:m], vectors[:, ::-1][:, :m]

    if values[0] <= 0:
        raise RankDeficiencyError(f"kernel of {label!r} has no positive eigenvalue", rank=0)
    keep = int(np.sum(values >= RELATIVE_EIGEN_FLOOR * values[0]))
    if keep < m:
        logger.warning(
            f"Retaining {keep} of {m} requested components of {label!r}: "
            f"the rest fall below {RELATIVE_EIGEN_FLOOR:g} x lambda_1"
        )
    functions = fix_signs(vectors[:, :keep] / root_w[:, None])
    logger.debug(f"Leading eigenvalues of {label!r}: {values[:keep][:5]}")
    return EigenSystem(
        eigenvalues=values[:keep], eigenfunctions=functions, grid=grid, label=label
    )


def compute_scores(ds: FunctionalDataset, es: EigenSystem) -> np.ndarray:
    """n x m scores W_kj = sum_s w_s x_k(s) phi_j(s)."""
    if not ds.grid.matches(es.grid):
        raise GridMismatchError("dataset and eigensystem are sampled on different grids")
    if not ds.centered:
        raise DataError("scores are computed from a centered dataset")
    return ds.values @ (es.weights[:, None] * es.eigenfunctions)


def run_fpca(
    ds: FunctionalDataset, m: int = DEFAULT_HARMONICS, label: str = "S"
) -> FpcaResult:
    """Center, estimate the covariance kernel, diagonalize it and score the paths."""
    centered = center(ds)
    es = eigendecompose_kernel(empirical_covariance(centered), ds.grid, m, label)
    mean_curve = (
        centered.mean_curve if centered.mean_curve is not None else np.zeros(ds.p)
    )
    return FpcaResult(
        eigensystem=es, scores=compute_scores(centered, es), mean_curve=mean_curve
    )
