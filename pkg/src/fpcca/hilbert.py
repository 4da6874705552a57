"""Coordinates and inner products on truncations of H(S), and cross-operators.

An element f of H(S) with raw coefficients raw_j = <f, phi_j> has orthonormal
coordinates raw_j / lambda_j^{1/2}; its H(S) norm is the Euclidean norm of
those coordinates (the Picard sum sum_j raw_j^2 / lambda_j).
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolationError,
    BasisMismatchError,
    DataError,
    DimensionMismatchError,
    ModeError,
)
from .models import EigenSystem, HsVector, OperatorMatrix
from .utils import (
    CORRELATION,
    CORRELATION_CLIP,
    COVARIANCE,
    DEFAULT_TOL,
    MODES,
    RELATIVE_EIGEN_FLOOR,
    spectral_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssumptionCheck:
    """Outcome of a norm-below-one check on a cross-operator."""

    passed: bool
    norm: float
    tol: float


def truncate_eigensystem(
    es: EigenSystem, floor: float = RELATIVE_EIGEN_FLOOR
) -> EigenSystem:
    """Drop components whose eigenvalue is below ``floor`` times the leading one."""
    if es.m == 0:
        return es
    keep = int(np.sum(es.eigenvalues >= floor * es.eigenvalues[0]))
    if keep < es.m:
        logger.warning(
            f"Dropping {es.m - keep} of {es.m} components of {es.label!r} "
            f"with eigenvalues below {floor:g} x lambda_1"
        )
        return es.truncate(keep)
    return es


def raw_to_ortho(raw_coeffs: np.ndarray, es: EigenSystem) -> HsVector:
    """Convert phi-coefficients <f, phi_j> into orthonormal H(S) coordinates.

    Args:
        raw_coeffs: m raw coefficients
        es: Eigensystem the coefficients refer to

    Returns:
        HsVector with coords raw_j / lambda_j^{1/2}

    Raises:
        DimensionMismatchError: If the lengths differ
    """
    raw = np.asarray(raw_coeffs, dtype=float).reshape(-1)
    if raw.size != es.m:
        raise DimensionMismatchError(f"expected {es.m} coefficients, got {raw.size}")
    return HsVector(raw / np.sqrt(es.eigenvalues), es.label)


def ortho_to_raw(v: HsVector, es: EigenSystem) -> np.ndarray:
    """Inverse of :func:`raw_to_ortho`."""
    if v.basis != es.label:
        raise BasisMismatchError(f"vector lives in {v.basis!r}, eigensystem is {es.label!r}")
    if v.dim != es.m:
        raise DimensionMismatchError(f"expected {es.m} coords, got {v.dim}")
    return v.coords * np.sqrt(es.eigenvalues)


def hs_inner(f: HsVector, g: HsVector) -> float:
    """H(S) inner product; Var(Z(f)) = hs_inner(f, f)."""
    if f.basis != g.basis:
        raise BasisMismatchError(f"cannot pair {f.basis!r} with {g.basis!r}")
    if f.dim != g.dim:
        raise DimensionMismatchError(f"coordinate lengths differ: {f.dim} vs {g.dim}")
    return float(np.dot(f.coords, g.coords))


def raw_cross_covariance(
    k12: np.ndarray, sys1: EigenSystem, sys2: EigenSystem
) -> np.ndarray:
    """Cov(<X1, phi_1i>, <X2, phi_2j>) from a cross-covariance kernel on the grids.

    Both double integrals are evaluated with the grids' quadrature weights.
    """
    k12 = np.asarray(k12, dtype=float)
    if k12.shape != (sys1.grid.size, sys2.grid.size):
        raise DimensionMismatchError(
            f"kernel has shape {k12.shape}, expected {(sys1.grid.size, sys2.grid.size)}"
        )
    left = sys1.eigenfunctions * sys1.weights[:, None]
    right = sys2.eigenfunctions * sys2.weights[:, None]
    return left.T @ k12 @ right


def build_cross_operator(
    raw_cross_cov: np.ndarray,
    sys1: EigenSystem,
    sys2: EigenSystem,
    mode: str = CORRELATION,
) -> OperatorMatrix:
    """Matrix of C12 : H(S2) -> H(S1) from the raw score cross-covariance.

    In correlation mode entry (i, j) is raw_ij / sqrt(lambda_1i lambda_2j), the
    matrix of C12 in orthonormal coordinates; in covariance mode the raw
    cross-covariance is used verbatim.

    Args:
        raw_cross_cov: m1 x m2 matrix of Cov(<X1, phi_1i>, <X2, phi_2j>)
        sys1: Eigensystem of the codomain process
        sys2: Eigensystem of the domain process
        mode: ``correlation`` or ``covariance``

    Returns:
        OperatorMatrix recording the mode used
    """
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected one of {MODES}")
    raw = np.atleast_2d(np.asarray(raw_cross_cov, dtype=float))
    if raw.shape != (sys1.m, sys2.m):
        raise DimensionMismatchError(
            f"cross-covariance has shape {raw.shape}, expected {(sys1.m, sys2.m)}"
        )

    kept1 = truncate_eigensystem(sys1)
    kept2 = truncate_eigensystem(sys2)
    raw = raw[: kept1.m, : kept2.m]

    if mode == COVARIANCE:
        return OperatorMatrix(raw.copy(), codomain=sys1.label, domain=sys2.label, mode=mode)

    entries = raw / np.sqrt(np.outer(kept1.eigenvalues, kept2.eigenvalues))
    limit = 1.0 + CORRELATION_CLIP
    if np.any(np.abs(entries) > limit):
        logger.warning(
            f"Clipping {int(np.sum(np.abs(entries) > limit))} correlation entries "
            f"of {sys1.label!r}/{sys2.label!r} to +/-{limit}"
        )
        entries = np.clip(entries, -limit, limit)
    logger.debug(f"Built {entries.shape} cross-operator {sys1.label!r} <- {sys2.label!r}")
    return OperatorMatrix(entries, codomain=sys1.label, domain=sys2.label, mode=mode)


def concentration_operator(m: OperatorMatrix) -> np.ndarray:
    """I - M^T M, the coordinate form of C22.1 = I - C21 C12."""
    if m.mode != CORRELATION:
        raise ModeError("concentration operators need a correlation-mode operator")
    gram = m.entries.T @ m.entries
    return np.eye(m.shape[1]) - 0.5 * (gram + gram.T)


def validate_assumption1(m: OperatorMatrix, tol: float = DEFAULT_TOL) -> AssumptionCheck:
    """Check ||M|| <= 1 - tol; the norm is reported either way."""
    if not np.all(np.isfinite(m.entries)):
        raise DataError("operator has non-finite entries")
    norm = spectral_norm(m.entries)
    passed = norm <= 1.0 - tol
    if not passed:
        logger.debug(f"Norm bound fails for {m.codomain!r}/{m.domain!r}: norm {norm:.12g}")
    return AssumptionCheck(passed=passed, norm=norm, tol=tol)


def require_assumption1(m: OperatorMatrix, tol: float = DEFAULT_TOL) -> float:
    """Like :func:`validate_assumption1` but raises on failure; returns the norm."""
    check = validate_assumption1(m, tol)
    if not check.passed:
        raise AssumptionViolationError(
            f"cross-operator {m.codomain!r}/{m.domain!r} allows perfect prediction",
            norm=check.norm,
            tol=tol,
        )
    return check.norm
