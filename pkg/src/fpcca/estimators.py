"""Sample canonical and partial canonical correlations from FPCA scores.

Estimation follows two steps: principal components of each process give
score matrices W_i; the SVD of the score cross-covariance (``covariance``
mode) or of the whitened cross-covariance (``correlation`` mode) gives the
correlations, coefficient vectors and weight functions. Partial estimates
first regress the scores on the conditioning process's scores.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import (
    DimensionMismatchError,
    GridMismatchError,
    InsufficientSamplesError,
    ModeError,
    RankDeficiencyError,
)
from .fpca import run_fpca
from .models import CcaEstimate, FpcaResult, FunctionalDataset, PccaEstimate
from .utils import (
    CORRELATION,
    DEFAULT_HARMONICS,
    EIGEN_FLOOR,
    MODES,
    column_signs,
    sym_inv_sqrt,
)

logger = logging.getLogger(__name__)


def _centered(scores: np.ndarray) -> np.ndarray:
    return scores - scores.mean(axis=0)


def _covariance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a.T @ b / (a.shape[0] - 1)


def _whitener(cov: np.ndarray, name: str) -> np.ndarray:
    scale = float(np.max(np.diag(cov))) if cov.size else 1.0
    return sym_inv_sqrt(cov, floor=EIGEN_FLOOR * max(scale, EIGEN_FLOOR), name=name)


def cross_matrix(w1: np.ndarray, w2: np.ndarray, mode: str = CORRELATION) -> np.ndarray:
    """Matrix whose singular values are the sample (partial) canonical correlations.

    Args:
        w1: n x m1 centered scores
        w2: n x m2 centered scores
        mode: ``covariance`` returns the cross-covariance; ``correlation``
            whitens it with both score covariances

    Returns:
        m1 x m2 matrix
    """
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected one of {MODES}")
    s12 = _covariance(w1, w2)
    if mode != CORRELATION:
        return s12
    s11 = _covariance(w1, w1)
    s22 = _covariance(w2, w2)
    left = _whitener(s11, "left score covariance")
    right = _whitener(s22, "right score covariance")
    return left @ s12 @ right


def _singular_system(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    u, d, vt = linalg.svd(matrix, full_matrices=False)
    v = vt.T
    signs = column_signs(u)
    return d, u * signs, v * signs


def _check_samples(n: int, required: int, what: str) -> None:
    if n <= required:
        raise InsufficientSamplesError(
            f"{what} needs more than {required} sample paths, got {n}"
        )


def _check_compatible(*datasets: FunctionalDataset) -> int:
    grid = datasets[0].grid
    if any(not ds.grid.matches(grid) for ds in datasets[1:]):
        raise GridMismatchError("datasets are sampled on different grids")
    sizes = {ds.n for ds in datasets}
    if len(sizes) != 1:
        raise DimensionMismatchError(
            f"datasets have different sample counts: {sorted(sizes)}"
        )
    return sizes.pop()


def estimate_cca(
    ds1: FunctionalDataset,
    ds2: FunctionalDataset,
    m: int = DEFAULT_HARMONICS,
    mode: str = CORRELATION,
) -> CcaEstimate:
    """Sample functional canonical correlations of two processes.

    Args:
        ds1: Sample paths of the first process
        ds2: Sample paths of the second process, same sample order
        m: Harmonics retained for each process
        mode: ``correlation`` (default) or ``covariance``

    Returns:
        CcaEstimate with d_1 >= d_2 >= ... and weight functions u_i^T[phi_1j]
        and v_i^T[phi_2j]
    """
    n = _check_compatible(ds1, ds2)
    _check_samples(n, m, "CCA")
    left = run_fpca(ds1, m, label="S1")
    right = run_fpca(ds2, m, label="S2")
    w1, w2 = _centered(left.scores), _centered(right.scores)

    matrix = cross_matrix(w1, w2, mode)
    d, u, v = _singular_system(matrix)
    logger.debug(f"CCA ({mode}) leading correlations: {d[:3]}")
    return CcaEstimate(
        correlations=d,
        left_coeffs=u,
        right_coeffs=v,
        left_weights=left.eigensystem.eigenfunctions @ u,
        right_weights=right.eigensystem.eigenfunctions @ v,
        cross_matrix=matrix,
        mode=mode,
        m=m,
        left=left,
        right=right,
    )


def regress_scores(w: np.ndarray, wcond: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares regression of every column of ``w`` on ``wcond``, no intercept.

    Returns:
        (coefficients m_cond x m, residuals n x m)

    Raises:
        RankDeficiencyError: If the conditioning columns are linearly dependent
    """
    if w.shape[0] != wcond.shape[0]:
        raise DimensionMismatchError(
            f"score matrices have {w.shape[0]} and {wcond.shape[0]} rows"
        )
    rank = int(np.linalg.matrix_rank(wcond))
    if rank < wcond.shape[1]:
        raise RankDeficiencyError("conditioning scores are linearly dependent", rank=rank)
    coef, _, _, _ = linalg.lstsq(wcond, w)
    return coef, w - wcond @ coef


def residualize_scores(w: np.ndarray, wcond: np.ndarray) -> np.ndarray:
    """Residuals of ``w`` after regressing on the conditioning scores."""
    return regress_scores(w, wcond)[1]


def estimate_pcca(
    dscond: FunctionalDataset,
    ds2: FunctionalDataset,
    ds3: FunctionalDataset,
    m: int = DEFAULT_HARMONICS,
    mode: str = CORRELATION,
    m_cond: Optional[int] = None,
) -> PccaEstimate:
    """Sample partial canonical correlations of two processes given a third.

    All three datasets go through FPCA; the scores of ``ds2`` and ``ds3`` are
    regressed on the conditioning scores and the CCA step runs on the residuals.

    Args:
        dscond: Conditioning process
        ds2: First process of interest
        ds3: Second process of interest
        m: Harmonics retained for ds2 and ds3
        mode: ``correlation`` (default) or ``covariance``
        m_cond: Harmonics retained for the conditioning process (default m)
    """
    n = _check_compatible(dscond, ds2, ds3)
    _check_samples(n, 2 * m, "partial CCA")
    m_cond = m if m_cond is None else m_cond

    cond = run_fpca(dscond, m_cond, label="S1")
    left = run_fpca(ds2, m, label="S2")
    right = run_fpca(ds3, m, label="S3")
    wcond = _centered(cond.scores)

    left_coef, r2 = regress_scores(_centered(left.scores), wcond)
    right_coef, r3 = regress_scores(_centered(right.scores), wcond)
    r2, r3 = _centered(r2), _centered(r3)

    matrix = cross_matrix(r2, r3, mode)
    d, u, v = _singular_system(matrix)
    logger.debug(f"Partial CCA ({mode}) leading correlations: {d[:3]}")
    return PccaEstimate(
        correlations=d,
        left_coeffs=u,
        right_coeffs=v,
        left_weights=left.eigensystem.eigenfunctions @ u,
        right_weights=right.eigensystem.eigenfunctions @ v,
        cross_matrix=matrix,
        mode=mode,
        m=m,
        left=left,
        right=right,
        left_regression=left_coef,
        right_regression=right_coef,
        cond=cond,
    )


def fpca_summary(result: FpcaResult) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and score sample variances, which agree by construction."""
    return result.eigensystem.eigenvalues, _centered(result.scores).var(axis=0, ddof=1)
