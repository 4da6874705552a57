"""Finite-dimensional references for the operator and estimator routines.

Hotelling's CCA and Roy's partial CCA work directly on covariance blocks;
:func:`blocks_to_operators` carries the same blocks into the operator
representation so both sides can be compared. The simulation models also
have exact population kernels, from which the truncated operators follow
without sampling.
"""

import logging
from typing import Dict, Tuple

import numpy as np
from scipy import linalg

from .errors import DataError
from .estimators import cross_matrix, residualize_scores
from .fpca import eigendecompose_kernel
from .hilbert import build_cross_operator, raw_cross_covariance
from .models import CcaSolution, CovBlocks, EigenSystem, Grid, OperatorMatrix
from .simulate import CCA_PAIR, PCCA_TRIPLE, gaussian_vectors, make_rng
from .utils import (
    CORRELATION,
    DEFAULT_BETA,
    DEFAULT_GRID_POINTS,
    DEFAULT_HARMONICS,
    DEFAULT_KL_TERMS,
    EIGEN_FLOOR,
    column_signs,
    sym_inv_sqrt,
    symmetrize,
)

logger = logging.getLogger(__name__)

MONTE_CARLO_SAMPLES = 100_000

Kernels = Dict[Tuple[int, int], np.ndarray]


def hotelling_cca(blocks: CovBlocks) -> CcaSolution:
    """Canonical correlations from the SVD of S11^{-1/2} S12 S22^{-1/2}.

    Raises:
        RankDeficiencyError: If S11 or S22 is singular
    """
    left = sym_inv_sqrt(blocks.s11, floor=EIGEN_FLOOR, name="S11")
    right = sym_inv_sqrt(blocks.s22, floor=EIGEN_FLOOR, name="S22")
    u, d, vt = linalg.svd(left @ blocks.s12 @ right, full_matrices=False)
    signs = column_signs(u)
    return CcaSolution(
        correlations=np.clip(d, 0.0, 1.0),
        left_weights=left @ (u * signs),
        right_weights=right @ (vt.T * signs),
    )


def conditional_blocks(blocks: CovBlocks) -> CovBlocks:
    """Blocks S_ij.1 = S_ij - S_i1 S11^{-1} S_1j of processes 2 and 3 given 1."""
    if not blocks.is_triple:
        raise DataError("partial CCA needs three covariance blocks")
    s11 = blocks.s11

    def given_first(i: int, j: int) -> np.ndarray:
        return blocks.block(i, j) - blocks.block(i, 1) @ linalg.solve(
            s11, blocks.block(1, j), assume_a="pos"
        )

    return CovBlocks(
        s11=symmetrize(given_first(2, 2)),
        s22=symmetrize(given_first(3, 3)),
        s12=given_first(2, 3),
    )


def roy_pcca(blocks: CovBlocks) -> CcaSolution:
    """Partial canonical correlations: Hotelling CCA of the conditional blocks."""
    return hotelling_cca(conditional_blocks(blocks))


def _block_eigensystem(cov: np.ndarray, label: str) -> EigenSystem:
    # a d-vector is the step function sqrt(d) x_k on the cells of a d-point grid
    d = cov.shape[0]
    return eigendecompose_kernel(d * cov, Grid.midpoint(d), m=d, label=label)


def blocks_to_operators(blocks: CovBlocks) -> Tuple[OperatorMatrix, ...]:
    """Correlation-mode cross-operators (C12[, C13, C23]) of covariance blocks."""
    k = len(blocks.dims)
    systems = [_block_eigensystem(blocks.block(i, i), f"S{i}") for i in range(1, k + 1)]

    def operator(i: int, j: int) -> OperatorMatrix:
        a, b = systems[i - 1], systems[j - 1]
        kernel = np.sqrt(a.grid.size * b.grid.size) * blocks.block(i, j)
        return build_cross_operator(raw_cross_covariance(kernel, a, b), a, b, CORRELATION)

    if k == 2:
        return (operator(1, 2),)
    return operator(1, 2), operator(1, 3), operator(2, 3)


def model_kernels(
    model: str,
    p: int = DEFAULT_GRID_POINTS,
    kl_terms: int = DEFAULT_KL_TERMS,
    beta: Tuple[float, float] = DEFAULT_BETA,
) -> Tuple[Grid, Kernels]:
    """Population covariance kernels of a simulation model on the midpoint grid.

    Keys are 1-based process pairs (i, j) with i <= j.
    """
    grid = Grid.midpoint(p)
    es = EigenSystem.sine_basis(1.0 / np.arange(1, kl_terms + 1), grid)
    functions = es.eigenfunctions
    base = (functions * es.eigenvalues) @ functions.T
    shared = np.outer(functions[:, 0], functions[:, 0]) / np.sqrt(2.0)

    if model == CCA_PAIR:
        return grid, {(1, 1): base, (2, 2): base.copy(), (1, 2): shared}
    if model != PCCA_TRIPLE:
        raise DataError(f"unknown model {model!r}")

    cosine = np.cos(np.pi * grid.points)
    outer = np.outer(cosine, cosine)
    beta1, beta2 = beta
    return grid, {
        (1, 1): outer,
        (2, 2): base + beta1**2 * outer,
        (3, 3): base + beta2**2 * outer,
        (1, 2): -beta1 * outer,
        (1, 3): -beta2 * outer,
        (2, 3): shared + beta1 * beta2 * outer,
    }


def analytic_model_operators(
    model: str,
    m: int = DEFAULT_HARMONICS,
    p: int = DEFAULT_GRID_POINTS,
    kl_terms: int = DEFAULT_KL_TERMS,
    beta: Tuple[float, float] = DEFAULT_BETA,
) -> Tuple[OperatorMatrix, ...]:
    """Truncated population cross-operators of a simulation model.

    Each population kernel is diagonalized as in FPCA with ``m`` components
    (one for the rank-one conditioning process of the triple) and the cross
    kernels are integrated against the eigenfunctions.

    Returns:
        (C12,) for the pair, (C12, C13, C23) for the triple
    """
    if not 1 <= m <= kl_terms:
        raise DataError(f"m must lie in [1, {kl_terms}], got {m}")
    grid, kernels = model_kernels(model, p, kl_terms, beta)
    count = 2 if model == CCA_PAIR else 3
    sizes = [m] * count if model == CCA_PAIR else [1, m, m]
    systems = [
        eigendecompose_kernel(kernels[(i, i)], grid, sizes[i - 1], label=f"S{i}")
        for i in range(1, count + 1)
    ]

    def operator(i: int, j: int) -> OperatorMatrix:
        a, b = systems[i - 1], systems[j - 1]
        return build_cross_operator(
            raw_cross_covariance(kernels[(i, j)], a, b), a, b, CORRELATION
        )

    logger.debug(f"Built population operators of {model!r} with m={m}")
    if count == 2:
        return (operator(1, 2),)
    return operator(1, 2), operator(1, 3), operator(2, 3)


def monte_carlo_roy(
    blocks: CovBlocks, n: int = MONTE_CARLO_SAMPLES, seed: int = 0
) -> np.ndarray:
    """Sample partial canonical correlations of Gaussian draws with these blocks.

    Draws n joint vectors, regresses the second and third on the first and
    takes the correlation-mode singular values of the residuals.
    """
    if not blocks.is_triple:
        raise DataError("partial CCA needs three covariance blocks")
    sample = gaussian_vectors(blocks.matrix, n, make_rng(seed))
    d1, d2, _ = blocks.dims
    sample = sample - sample.mean(axis=0)
    x1, x2, x3 = sample[:, :d1], sample[:, d1 : d1 + d2], sample[:, d1 + d2 :]
    r2 = residualize_scores(x2, x1)
    r3 = residualize_scores(x3, x1)
    return linalg.svdvals(cross_matrix(r2, r3, CORRELATION))
