"""Randomized identity suite for the operator algebra and the oracles.

Every trial draws a random positive definite covariance for three random
vectors, converts it into correlation-mode cross-operators and compares the
closed forms of :mod:`fpcca.algebra` with numeric references: products with
Q, Gram-matrix projections, projection-composed B*B, Hotelling and Roy.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .algebra import (
    bstarb_2,
    bstarb_3,
    bstarb_by_projection,
    cca_from_operators,
    hq_inner,
    lemma3_norm,
    partial_correlation_operator,
    pcca_from_operators,
    project_L1_M2,
    project_M3_components,
    project_onto_span,
    q2_inverse,
    q3_inverse,
    q_apply,
    sunder_decompose,
)
from .errors import DataError
from .models import (
    BlockOperator,
    BlockOperator2,
    BlockOperator3,
    CovBlocks,
    HQElement,
    HsVector,
    IdentityCheck,
    VerificationReport,
)
from .oracle import blocks_to_operators, hotelling_cca, roy_pcca
from .simulate import make_rng, standard_normals

logger = logging.getLogger(__name__)

Q2_SIGN_FAULT = "q2-sign"
FAULTS = (Q2_SIGN_FAULT,)

DEFAULT_TRIALS = 200
DEFAULT_DIM = 8
DEFAULT_IDENTITY_TOL = 1e-9
DEFAULT_ORACLE_TOL = 1e-8
ORACLE_TRIALS = 50
ORACLE_DIM = 6

# Diagonal shift of the random covariances, keeps Q well conditioned
RIDGE = 0.5


def random_blocks(rng: np.random.Generator, dims: Tuple[int, ...]) -> CovBlocks:
    """Random positive definite covariance split into blocks of the given sizes."""
    total = sum(dims)
    a = standard_normals(rng, (total, total))
    cov = a @ a.T / total + RIDGE * np.eye(total)
    cov = 0.5 * (cov + cov.T)
    edges = np.concatenate(([0], np.cumsum(dims)))

    def part(i: int, j: int) -> np.ndarray:
        return cov[edges[i - 1] : edges[i], edges[j - 1] : edges[j]]

    if len(dims) == 2:
        return CovBlocks(s11=part(1, 1), s22=part(2, 2), s12=part(1, 2))
    return CovBlocks(
        s11=part(1, 1),
        s22=part(2, 2),
        s33=part(3, 3),
        s12=part(1, 2),
        s13=part(1, 3),
        s23=part(2, 3),
    )


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if np.size(a) else 0.0


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return _max_abs(a, b) / max(1.0, float(np.max(np.abs(b))) if np.size(b) else 1.0)


def _random_slot(rng: np.random.Generator, q: BlockOperator, block: int) -> HsVector:
    return HsVector(standard_normals(rng, (q.dims[block - 1],)), q.labels[block - 1])


def _random_element(rng: np.random.Generator, q: BlockOperator) -> HQElement:
    return HQElement.from_stacked(standard_normals(rng, (sum(q.dims),)), q)


def _span(q: BlockOperator, *blocks: int) -> np.ndarray:
    matrix = q.matrix
    return np.hstack([matrix[:, q.block_slice(i)] for i in blocks])


def _operator_matrix(
    apply: Callable[[HsVector], HsVector], q: BlockOperator, block: int
) -> np.ndarray:
    dim = q.dims[block - 1]
    label = q.labels[block - 1]
    columns = [apply(HsVector(np.eye(dim)[:, k], label)).coords for k in range(dim)]
    return np.column_stack(columns)


def _mapped_spectrum(correlations: np.ndarray, size: int) -> np.ndarray:
    rho = np.zeros(size)
    rho[: min(size, correlations.size)] = correlations[:size]
    return np.sort(rho**2 / (1.0 - rho**2))


def _spectrum(matrix: np.ndarray) -> np.ndarray:
    return np.sort(np.real(linalg.eigvals(matrix)))


def _inverse_errors(
    q2: BlockOperator2, q3: BlockOperator3, fault: Optional[str]
) -> Dict[str, float]:
    inv2 = q2_inverse(q2)
    if fault == Q2_SIGN_FAULT:
        inv2 = inv2.copy()
        m1 = q2.dims[0]
        inv2[:m1, m1:] = -inv2[:m1, m1:]
    eye2 = np.eye(sum(q2.dims))
    inv3 = q3_inverse(q3)
    eye3 = np.eye(sum(q3.dims))
    return {
        "q2_inverse": max(
            _max_abs(q2.matrix @ inv2, eye2), _max_abs(inv2 @ q2.matrix, eye2)
        ),
        "q3_inverse": max(
            _max_abs(q3.matrix @ inv3, eye3), _max_abs(inv3 @ q3.matrix, eye3)
        ),
    }


def _congruence_error(rng: np.random.Generator, q: BlockOperator) -> float:
    """<Q g, Q g'>_{H(Q)} equals <g, Q g'>_0 = Cov(Z(g), Z(g'))."""
    g, g2 = _random_element(rng, q), _random_element(rng, q)
    covariance = float(g.stacked @ q.matrix @ g2.stacked)
    inner = hq_inner(q_apply(q, g), q_apply(q, g2), q)
    return abs(inner - covariance) / max(1.0, abs(covariance))


def _projection_errors(
    rng: np.random.Generator, q2: BlockOperator2, q3: BlockOperator3
) -> Dict[str, float]:
    f2 = _random_slot(rng, q2, 2)
    h2 = q2.matrix @ HQElement.in_block(f2, 2, q2).stacked
    l1, l2 = project_L1_M2(f2, q2)
    ref1 = project_onto_span(h2, _span(q2, 1), q2)
    error2 = max(_relative(l1.stacked, ref1), _relative(l2.stacked, h2 - ref1))

    f3 = _random_slot(rng, q3, 3)
    h3 = q3.matrix @ HQElement.in_block(f3, 3, q3).stacked
    p1, p2, p3 = project_M3_components(f3, q3)
    ref_1 = project_onto_span(h3, _span(q3, 1), q3)
    ref_12 = project_onto_span(h3, _span(q3, 1, 2), q3)
    error3 = max(
        _relative(p1.stacked, ref_1),
        _relative(p2.stacked, ref_12 - ref_1),
        _relative(p3.stacked, h3 - ref_12),
    )
    return {"project_L1_M2": error2, "project_M3_components": error3}


def _bstarb_errors(
    rng: np.random.Generator, q2: BlockOperator2, q3: BlockOperator3
) -> Dict[str, float]:
    f2 = _random_slot(rng, q2, 2)
    f3 = _random_slot(rng, q3, 3)
    return {
        "bstarb_2": _relative(bstarb_2(f2, q2).coords, bstarb_by_projection(f2, q2).coords),
        "bstarb_3": _relative(bstarb_3(f3, q3).coords, bstarb_by_projection(f3, q3).coords),
    }


def _spectral_mapping_error(q2: BlockOperator2, q3: BlockOperator3) -> float:
    """Eigenvalues of B*B are rho^2 / (1 - rho^2)."""
    t2 = _operator_matrix(lambda f: bstarb_2(f, q2), q2, 2)
    rho2 = linalg.svdvals(q2.m12.entries)
    t3 = _operator_matrix(lambda f: bstarb_3(f, q3), q3, 3)
    rho3 = linalg.svdvals(partial_correlation_operator(q3))
    return max(
        _relative(_spectrum(t2), _mapped_spectrum(rho2, q2.dims[1])),
        _relative(_spectrum(t3), _mapped_spectrum(rho3, q3.dims[2])),
    )


def _sunder_error(q: BlockOperator) -> float:
    bases = sunder_decompose([_span(q, i) for i in range(1, q.n + 1)], q)
    inverse = linalg.inv(q.matrix)
    error = 0.0
    for i, left in enumerate(bases):
        for j, right in enumerate(bases):
            gram = left.T @ inverse @ right
            target = np.eye(gram.shape[0]) if i == j else np.zeros_like(gram)
            error = max(error, _max_abs(gram, target))
    return error


def _lemma3_error(q3: BlockOperator3, blocks: CovBlocks) -> float:
    norm = lemma3_norm(q3)
    if norm >= 1.0:
        return float("inf")
    return abs(norm - float(roy_pcca(blocks).correlations[0]))


def _oracle_errors(blocks: CovBlocks, q3: BlockOperator3) -> Dict[str, float]:
    m12, m13, m23 = q3.m12, q3.m13, q3.m23
    pair_blocks = CovBlocks(s11=blocks.s11, s22=blocks.s22, s12=blocks.s12)
    cca = np.array([pair.rho for pair in cca_from_operators(m12)])
    pcca = np.array([pair.rho for pair in pcca_from_operators(m12, m13, m23)])
    return {
        "hotelling_equivalence": _max_abs(cca, hotelling_cca(pair_blocks).correlations),
        "roy_equivalence": _max_abs(pcca, roy_pcca(blocks).correlations),
    }


IDENTITY_CHECKS = (
    "q2_inverse",
    "q3_inverse",
    "congruence",
    "sunder_orthogonality",
)
ORACLE_CHECKS = (
    "project_L1_M2",
    "project_M3_components",
    "bstarb_2",
    "bstarb_3",
    "spectral_mapping",
    "lemma3_norm",
    "hotelling_equivalence",
    "roy_equivalence",
)


def run_verification(
    trials: int = DEFAULT_TRIALS,
    dim: int = DEFAULT_DIM,
    seed: int = 0,
    tol: float = DEFAULT_IDENTITY_TOL,
    oracle_tol: float = DEFAULT_ORACLE_TOL,
    inject_fault: Optional[str] = None,
) -> VerificationReport:
    """Run the identity suite on ``trials`` random three-process instances.

    Args:
        trials: Number of random instances
        dim: Largest block dimension
        seed: Seed; trial t uses child stream t
        tol: Tolerance of the exact matrix identities
        oracle_tol: Tolerance of comparisons against numeric references
        inject_fault: ``q2-sign`` corrupts the two-process inverse for testing

    Returns:
        VerificationReport with one IdentityCheck per identity
    """
    if trials < 1:
        raise DataError("at least one trial is needed")
    if dim < 1:
        raise DataError("block dimension must be at least 1")
    if inject_fault is not None and inject_fault not in FAULTS:
        raise DataError(f"unknown fault {inject_fault!r}; expected one of {FAULTS}")

    errors: Dict[str, List[float]] = {
        name: [] for name in IDENTITY_CHECKS + ORACLE_CHECKS
    }
    oracle_trials = min(trials, ORACLE_TRIALS)
    oracle_dim = min(dim, ORACLE_DIM)

    for trial in range(trials):
        rng = make_rng(seed, trial)
        limit = oracle_dim if trial < oracle_trials else dim
        dims = tuple(int(d) for d in rng.integers(1, limit + 1, size=3))
        blocks = random_blocks(rng, dims)
        m12, m13, m23 = blocks_to_operators(blocks)
        q2 = BlockOperator2(m12=m12)
        q3 = BlockOperator3(m12=m12, m13=m13, m23=m23)

        results = _inverse_errors(q2, q3, inject_fault)
        results["congruence"] = max(_congruence_error(rng, q2), _congruence_error(rng, q3))
        results["sunder_orthogonality"] = max(_sunder_error(q2), _sunder_error(q3))
        results.update(_projection_errors(rng, q2, q3))
        results.update(_bstarb_errors(rng, q2, q3))
        results["spectral_mapping"] = _spectral_mapping_error(q2, q3)
        results["lemma3_norm"] = _lemma3_error(q3, blocks)
        if trial < oracle_trials:
            results.update(_oracle_errors(blocks, q3))
        for name, value in results.items():
            errors[name].append(value)

    report = VerificationReport(trials=trials, dim=dim, seed=seed)
    for name in IDENTITY_CHECKS + ORACLE_CHECKS:
        threshold = tol if name in IDENTITY_CHECKS else oracle_tol
        report.checks.append(
            IdentityCheck(name=name, max_error=max(errors[name]), tol=threshold)
        )
    for check in report.checks:
        log = logger.debug if check.passed else logger.warning
        log(f"{check.name}: max error {check.max_error:.3e} (tol {check.tol:g})")
    return report
