"""Block Q operators, H(Q) geometry and canonical correlations from operators.

Conventions: process indices are 1-based as in C12, C13, C23; an element
h = (f1, f2[, f3]) of H(Q) is handled as its stacked coordinate vector. The
subspace M_i is the image of H(S_i) under Q, i.e. the columns of block i of
the assembled matrix; L_1, L_2, ... are the Sunder blocks obtained from the
M_i by successive H(Q)-orthogonal complements.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import (
    AssumptionViolationError,
    BasisMismatchError,
    DimensionMismatchError,
    ModeError,
    RankDeficiencyError,
)
from .hilbert import concentration_operator, require_assumption1
from .models import (
    BlockOperator,
    BlockOperator2,
    BlockOperator3,
    CanonicalPair,
    HQElement,
    HsVector,
    OperatorMatrix,
)
from .utils import (
    CORRELATION,
    DEFAULT_TOL,
    column_signs,
    spectral_norm,
    sym_inv_sqrt,
    symmetrize,
)

logger = logging.getLogger(__name__)

# Relative eigenvalue threshold of a Gram matrix below which a spanning set is rank deficient
GRAM_RANK_TOL = 1e-10

# Singular values closer than this are treated as ties when ordering canonical pairs
TIE_DECIMALS = 12


def _check_element(h: HQElement, q: BlockOperator) -> np.ndarray:
    if h.labels != q.labels:
        raise BasisMismatchError(f"element lives in {h.labels}, Q acts on {q.labels}")
    dims = tuple(part.dim for part in h.parts)
    if dims != q.dims:
        raise DimensionMismatchError(f"element has block sizes {dims}, Q expects {q.dims}")
    return h.stacked


def _check_slot(f: HsVector, q: BlockOperator, block: int) -> np.ndarray:
    if f.basis != q.labels[block - 1]:
        raise BasisMismatchError(
            f"expected an element of {q.labels[block - 1]!r}, got {f.basis!r}"
        )
    if f.dim != q.dims[block - 1]:
        raise DimensionMismatchError(f"expected {q.dims[block - 1]} coords, got {f.dim}")
    return f.coords


def _conditional_blocks(q: BlockOperator3) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """C22.1, C33.1 and N = C23 - C21 C13 of a three-process Q."""
    c22_1 = concentration_operator(q.m12)
    c33_1 = concentration_operator(q.m13)
    numerator = q.cross(2, 3) - q.cross(2, 1) @ q.cross(1, 3)
    return c22_1, c33_1, numerator


def lemma3_norm(q: BlockOperator3) -> float:
    """||C22.1^{-1/2} (C23 - C21 C13) C33.1^{-1/2}||, the off-diagonal block of V."""
    c22_1, c33_1, numerator = _conditional_blocks(q)
    whitened = (
        sym_inv_sqrt(c22_1, name="C22.1") @ numerator @ sym_inv_sqrt(c33_1, name="C33.1")
    )
    return spectral_norm(whitened)


def validate_q(q: BlockOperator, tol: float = DEFAULT_TOL) -> None:
    """Raise AssumptionViolationError unless Q is safely positive definite.

    Two processes: ||C12|| <= 1 - tol. Three processes: the same for C12 and
    C13, plus the same bound on the whitened conditional cross block.
    """
    if isinstance(q, BlockOperator2):
        require_assumption1(q.m12, tol)
        return
    if isinstance(q, BlockOperator3):
        require_assumption1(q.m12, tol)
        require_assumption1(q.m13, tol)
        norm = lemma3_norm(q)
        if norm > 1.0 - tol:
            raise AssumptionViolationError(
                "conditional cross-operator of processes 2 and 3 given 1 is degenerate",
                norm=norm,
                tol=tol,
            )
        return
    raise TypeError(f"unsupported Q operator {type(q).__name__}")


def q_apply(q: BlockOperator, h: HQElement) -> HQElement:
    """Q h; Cov(Z(h), Z(h')) = <h, Q h'>_0."""
    vector = _check_element(h, q)
    return HQElement.from_stacked(q.matrix @ vector, q)


def q2_inverse(q: BlockOperator2, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Closed-form inverse [[C11.2^-1, -C12 C22.1^-1], [-C21 C11.2^-1, C22.1^-1]]."""
    validate_q(q, tol)
    m = q.m12.entries
    c11_2 = symmetrize(np.eye(m.shape[0]) - m @ m.T)
    c22_1 = concentration_operator(q.m12)
    inv11 = linalg.inv(c11_2)
    inv22 = linalg.inv(c22_1)
    return np.block([[inv11, -m @ inv22], [-m.T @ inv11, inv22]])


def q3_inverse(q: BlockOperator3, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Closed-form inverse of the three-process Q through the Schur complement G.

    With E = [C12 C13], F = E^T, D = diag(C22.1, C33.1) and G = D^{1/2}(I - V)D^{1/2},
    Q^{-1} = [[I + E G^-1 F, -E G^-1], [-G^-1 F, G^-1]].
    """
    validate_q(q, tol)
    c22_1, c33_1, numerator = _conditional_blocks(q)
    m2, m3 = q.dims[1], q.dims[2]

    v_off = -(
        sym_inv_sqrt(c22_1, name="C22.1") @ numerator @ sym_inv_sqrt(c33_1, name="C33.1")
    )
    v = np.block([[np.zeros((m2, m2)), v_off], [v_off.T, np.zeros((m3, m3))]])
    d_inv_half = linalg.block_diag(sym_inv_sqrt(c22_1), sym_inv_sqrt(c33_1))
    g_inv = d_inv_half @ linalg.solve(np.eye(m2 + m3) - v, d_inv_half)

    e = np.hstack([q.m12.entries, q.m13.entries])
    f = e.T
    top_left = np.eye(q.dims[0]) + e @ g_inv @ f
    return np.block([[top_left, -e @ g_inv], [-g_inv @ f, g_inv]])


def q_inverse(q: BlockOperator, tol: float = DEFAULT_TOL) -> np.ndarray:
    if isinstance(q, BlockOperator2):
        return q2_inverse(q, tol)
    if isinstance(q, BlockOperator3):
        return q3_inverse(q, tol)
    raise TypeError(f"unsupported Q operator {type(q).__name__}")


def hq_inner(h: HQElement, h2: HQElement, q: BlockOperator, tol: float = DEFAULT_TOL) -> float:
    """<h, h'>_{H(Q)} = <h, Q^{-1} h'>_0."""
    a = _check_element(h, q)
    b = _check_element(h2, q)
    return float(a @ q_inverse(q, tol) @ b)


def project_L1_M2(
    f2: HsVector, q: BlockOperator2, tol: float = DEFAULT_TOL
) -> Tuple[HQElement, HQElement]:
    """Split h = (C12 f2, f2) in M2 into its L1 and L2 parts.

    Returns:
        (P_{L1|M2} h, P_{L2|M2} h) = ((C12 f2, C21 C12 f2), (0, C22.1 f2))
    """
    validate_q(q, tol)
    coords = _check_slot(f2, q, 2)
    m = q.m12.entries
    c12f = m @ coords
    l1 = np.concatenate([c12f, m.T @ c12f])
    l2 = np.concatenate([np.zeros(q.dims[0]), concentration_operator(q.m12) @ coords])
    return HQElement.from_stacked(l1, q), HQElement.from_stacked(l2, q)


def c0_operator(q: BlockOperator3) -> np.ndarray:
    """C0 = C33.1 - (C32 - C31 C12) C22.1^{-1} (C23 - C21 C13)."""
    c22_1, c33_1, numerator = _conditional_blocks(q)
    return symmetrize(c33_1 - numerator.T @ linalg.solve(c22_1, numerator, assume_a="pos"))


def project_M3_components(
    f3: HsVector, q: BlockOperator3, tol: float = DEFAULT_TOL
) -> Tuple[HQElement, HQElement, HQElement]:
    """Split h = (C13 f3, C23 f3, f3) in M3 into its L1, L2 and L3 parts.

    L1 part: (C13 f3, C21 C13 f3, C31 C13 f3)
    L2 part: (0, N f3, N^T C22.1^{-1} N f3) with N = C23 - C21 C13
    L3 part: (0, 0, C0 f3)
    """
    validate_q(q, tol)
    coords = _check_slot(f3, q, 3)
    c22_1, _, numerator = _conditional_blocks(q)
    m1, m2, _ = q.dims

    a = q.cross(1, 3) @ coords
    l1 = np.concatenate([a, q.cross(2, 1) @ a, q.cross(3, 1) @ a])

    g = numerator @ coords
    l2 = np.concatenate([np.zeros(m1), g, numerator.T @ linalg.solve(c22_1, g, assume_a="pos")])

    l3 = np.concatenate([np.zeros(m1 + m2), c0_operator(q) @ coords])
    return (
        HQElement.from_stacked(l1, q),
        HQElement.from_stacked(l2, q),
        HQElement.from_stacked(l3, q),
    )


def bstarb_2(f2tilde: HsVector, q: BlockOperator2, tol: float = DEFAULT_TOL) -> HsVector:
    """B*B (0, f2~) = (0, C21 C12 C22.1^{-1} f2~); returns the second slot."""
    validate_q(q, tol)
    coords = _check_slot(f2tilde, q, 2)
    m = q.m12.entries
    inner = linalg.solve(concentration_operator(q.m12), coords, assume_a="pos")
    return HsVector(m.T @ (m @ inner), q.labels[1])


def bstarb_3(f3tilde: HsVector, q: BlockOperator3, tol: float = DEFAULT_TOL) -> HsVector:
    """B*B (0, 0, f3~) = (0, 0, (C32 - C31 C12) C22.1^{-1} (C23 - C21 C13) C0^{-1} f3~)."""
    validate_q(q, tol)
    coords = _check_slot(f3tilde, q, 3)
    c22_1, _, numerator = _conditional_blocks(q)
    inner = linalg.solve(c0_operator(q), coords, assume_a="pos")
    middle = linalg.solve(c22_1, numerator @ inner, assume_a="pos")
    return HsVector(numerator.T @ middle, q.labels[2])


def _q_matrix(q: Union[BlockOperator, np.ndarray]) -> np.ndarray:
    return q.matrix if isinstance(q, BlockOperator) else np.asarray(q, dtype=float)


class _HqMetric:
    """H(Q) inner products computed with a Cholesky factorization of Q."""

    def __init__(self, q: Union[BlockOperator, np.ndarray]) -> None:
        matrix = _q_matrix(q)
        try:
            self._factor = linalg.cho_factor(symmetrize(matrix))
        except linalg.LinAlgError as e:
            raise RankDeficiencyError(f"Q is not positive definite: {e}") from e

    def apply_inverse(self, vectors: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self._factor, vectors)

    def inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a.T @ self.apply_inverse(b)


def project_onto_span(
    h: np.ndarray, span: np.ndarray, q: Union[BlockOperator, np.ndarray]
) -> np.ndarray:
    """H(Q)-orthogonal projection of ``h`` onto the column span of ``span``.

    Solves the normal equations with the Gram matrix of the spanning set; no
    closed form is involved, which makes this the reference for them.
    """
    metric = _HqMetric(q)
    span = np.asarray(span, dtype=float)
    if span.ndim == 1:
        span = span[:, None]
    gram = symmetrize(metric.inner(span, span))
    rhs = metric.inner(span, np.asarray(h, dtype=float))
    coef = linalg.solve(gram, rhs, assume_a="pos")
    return span @ coef


def sunder_decompose(
    subspace_bases: Sequence[np.ndarray], q: Union[BlockOperator, np.ndarray]
) -> List[np.ndarray]:
    """Orthogonal blocks L_k = (M_1 + ... + M_k) minus (M_1 + ... + M_{k-1}).

    Block Gram-Schmidt in the H(Q) metric, with one re-orthogonalization pass.

    Args:
        subspace_bases: Spanning sets of M_1, ..., M_n as columns of ambient vectors
        q: Q operator (or its assembled matrix) defining the metric

    Returns:
        H(Q)-orthonormal bases of L_1, ..., L_n

    Raises:
        RankDeficiencyError: If the M_k do not form an algebraic direct sum
    """
    metric = _HqMetric(q)
    blocks: List[np.ndarray] = []
    for k, span in enumerate(subspace_bases, start=1):
        span = np.asarray(span, dtype=float)
        scale = float(np.max(linalg.eigvalsh(symmetrize(metric.inner(span, span)))))
        block = span.copy()
        for _ in range(2):
            for previous in blocks:
                block = block - previous @ metric.inner(previous, block)
        gram = symmetrize(metric.inner(block, block))
        values = linalg.eigvalsh(gram)
        if values.size and values[0] <= GRAM_RANK_TOL * scale:
            rank = int(np.sum(values > GRAM_RANK_TOL * scale))
            raise RankDeficiencyError(
                f"subspace {k} is not independent of the preceding ones", rank=rank
            )
        blocks.append(block @ sym_inv_sqrt(gram, floor=0.0, name=f"Gram of L{k}"))
    return blocks


def bstarb_by_projection(f_last: HsVector, q: BlockOperator) -> HsVector:
    """B*B on the last Sunder block, built from numeric projections.

    B = P_{L_{n-1}|M_n} (P_{L_n|M_n})^{-1} is expressed in H(Q)-orthonormal
    bases of L_{n-1} and L_n obtained from :func:`sunder_decompose`; B*B is
    then the Gram product of its coordinate matrix.
    """
    n = q.n
    coords = _check_slot(f_last, q, n)
    matrix = q.matrix
    spans = [matrix[:, q.block_slice(i)] for i in range(1, n + 1)]
    bases = sunder_decompose(spans, q)
    metric = _HqMetric(q)

    prev_basis, last_basis = bases[n - 2], bases[n - 1]
    to_prev = metric.inner(prev_basis, spans[n - 1])
    to_last = metric.inner(last_basis, spans[n - 1])
    b_coords = linalg.solve(to_last.T, to_prev.T).T

    ambient = np.zeros(matrix.shape[0])
    ambient[q.block_slice(n)] = coords
    c = metric.inner(last_basis, ambient)
    result = last_basis @ (b_coords.T @ (b_coords @ c))
    return HsVector(result[q.block_slice(n)], q.labels[n - 1])


def partial_correlation_operator(q: BlockOperator3) -> np.ndarray:
    """C22.1^{-1/2} (C23 - C21 C13) C33.1^{-1/2}, an m2 x m3 matrix.

    Its singular values are the partial canonical correlations (it is the
    adjoint of C33.1^{-1/2} (C32 - C31 C12) C22.1^{-1/2}).
    """
    c22_1, c33_1, numerator = _conditional_blocks(q)
    return sym_inv_sqrt(c22_1, name="C22.1") @ numerator @ sym_inv_sqrt(c33_1, name="C33.1")


def _ordered_pairs(
    matrix: np.ndarray,
    left_label: str,
    right_label: str,
    left_map: np.ndarray,
    right_map: np.ndarray,
) -> List[CanonicalPair]:
    """Singular system of ``matrix`` with deterministic signs and tie order."""
    u, s, vt = linalg.svd(matrix, full_matrices=False)
    v = vt.T
    signs = column_signs(u)
    u, v = u * signs, v * signs
    order = sorted(
        range(s.size), key=lambda i: (-round(float(s[i]), TIE_DECIMALS), tuple(u[:, i]))
    )
    return [
        CanonicalPair(
            rho=float(s[i]),
            left=HsVector(left_map @ u[:, i], left_label),
            right=HsVector(right_map @ v[:, i], right_label),
        )
        for i in order
    ]


def cca_from_operators(m12: OperatorMatrix, tol: float = DEFAULT_TOL) -> List[CanonicalPair]:
    """Canonical correlations as the singular values of C12.

    Returns:
        Pairs (rho_k, f1_k, f2_k), rho non-increasing, unit-norm weights with
        rho_k = f1_k^T C12 f2_k
    """
    if m12.mode != CORRELATION:
        raise ModeError("canonical correlations need a correlation-mode operator")
    require_assumption1(m12, tol)
    m1, m2 = m12.shape
    return _ordered_pairs(m12.entries, m12.codomain, m12.domain, np.eye(m1), np.eye(m2))


def pcca_from_operators(
    m12: OperatorMatrix,
    m13: OperatorMatrix,
    m23: OperatorMatrix,
    tol: float = DEFAULT_TOL,
) -> List[CanonicalPair]:
    """Partial canonical correlations of processes 2 and 3 given process 1.

    Returns:
        Pairs (rho_k, f2_k, f3_k); the weights are the singular vectors mapped
        back through C22.1^{-1/2} and C33.1^{-1/2}
    """
    q = BlockOperator3(m12=m12, m13=m13, m23=m23)
    validate_q(q, tol)
    c22_1, c33_1, _ = _conditional_blocks(q)
    return _ordered_pairs(
        partial_correlation_operator(q),
        q.labels[1],
        q.labels[2],
        sym_inv_sqrt(c22_1, name="C22.1"),
        sym_inv_sqrt(c33_1, name="C33.1"),
    )
