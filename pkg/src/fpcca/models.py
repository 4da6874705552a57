"""Data models for functional canonical correlation analysis.

H(S) elements and operators are stored in the orthonormal basis
e_j = lambda_j^{1/2} phi_j of each eigensystem, so every H(S) inner product
is a Euclidean dot product and operator norms are matrix spectral norms.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BasisMismatchError,
    DataError,
    DimensionMismatchError,
    GridMismatchError,
    InsufficientSamplesError,
    ModeError,
)
from .utils import (
    CORRELATION,
    DEFAULT_BETA,
    DEFAULT_GRID_POINTS,
    DEFAULT_KL_TERMS,
    MODES,
    ORTHONORMALITY_TOL,
    spectral_norm,
)

GRID_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Sampling points in [0, 1] with quadrature weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

        if points.ndim != 1 or points.shape != weights.shape:
            raise DimensionMismatchError("grid points and weights must be equal-length vectors")
        if points.size < 1:
            raise DataError("a grid needs at least one point")
        if points[0] < 0.0 or points[-1] > 1.0 or np.any(np.diff(points) <= 0):
            raise DataError("grid points must be strictly increasing inside [0, 1]")
        if np.any(weights <= 0):
            raise DataError("quadrature weights must be positive")
        if abs(float(weights.sum()) - 1.0) > GRID_TOL:
            raise DataError(f"quadrature weights sum to {weights.sum()!r}, not 1")

    @property
    def size(self) -> int:
        return int(self.points.size)

    @classmethod
    def midpoint(cls, p: int = DEFAULT_GRID_POINTS) -> "Grid":
        """Midpoint rule t_k = (2k - 1) / (2p) with weights 1/p."""
        if p < 1:
            raise DataError("a grid needs at least one point")
        points = (2.0 * np.arange(1, p + 1) - 1.0) / (2.0 * p)
        return cls(points=points, weights=np.full(p, 1.0 / p))

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "Grid":
        """Grid for arbitrary points, weighted by the cells of the midpoint partition.

        Points matching the midpoint grid of the same size get its exact weights.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise DataError("a grid needs at least one point")
        reference = cls.midpoint(pts.size)
        if np.allclose(pts, reference.points, rtol=0.0, atol=GRID_TOL):
            return reference
        edges = np.concatenate(([0.0], 0.5 * (pts[1:] + pts[:-1]), [1.0]))
        weights = np.diff(edges)
        return cls(points=pts, weights=weights / weights.sum())

    def matches(self, other: "Grid") -> bool:
        return self.size == other.size and bool(
            np.allclose(self.points, other.points, rtol=0.0, atol=GRID_TOL)
        )


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Truncated eigenvalues and grid-sampled eigenfunctions of a covariance operator.

    ``eigenfunctions`` is p x m: column j holds phi_j on the grid.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    grid: Grid
    label: str = "S"

    def __post_init__(self) -> None:
        values = np.asarray(self.eigenvalues, dtype=float)
        functions = np.asarray(self.eigenfunctions, dtype=float)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "eigenfunctions", functions)

        if values.ndim != 1:
            raise DimensionMismatchError("eigenvalues must be a vector")
        if functions.shape != (self.grid.size, values.size):
            raise DimensionMismatchError(
                f"eigenfunctions have shape {functions.shape}, "
                f"expected {(self.grid.size, values.size)}"
            )
        if np.any(values <= 0):
            raise DataError("eigenvalues must be strictly positive")
        if np.any(np.diff(values) > 0):
            raise DataError("eigenvalues must be non-increasing")
        gram = functions.T @ (self.grid.weights[:, None] * functions)
        error = float(np.max(np.abs(gram - np.eye(values.size)))) if values.size else 0.0
        if error > ORTHONORMALITY_TOL:
            raise DataError(
                f"eigenfunctions are not quadrature-orthonormal (max Gram error {error:.3e})"
            )

    @property
    def m(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def truncate(self, m: int) -> "EigenSystem":
        return dataclasses.replace(
            self,
            eigenvalues=self.eigenvalues[:m],
            eigenfunctions=self.eigenfunctions[:, :m],
        )

    @classmethod
    def sine_basis(
        cls,
        eigenvalues: Sequence[float],
        grid: Optional[Grid] = None,
        label: str = "S",
    ) -> "EigenSystem":
        """Eigensystem with phi_j(t) = sqrt(2) sin(j pi t), j = 1..m."""
        grid = grid or Grid.midpoint()
        values = np.asarray(eigenvalues, dtype=float)
        freqs = np.arange(1, values.size + 1)
        functions = np.sqrt(2.0) * np.sin(np.pi * np.outer(grid.points, freqs))
        return cls(eigenvalues=values, eigenfunctions=functions, grid=grid, label=label)


@dataclass(frozen=True, eq=False)
class HsVector:
    """Element of H(S) in the orthonormal basis e_j = lambda_j^{1/2} phi_j."""

    coords: np.ndarray
    basis: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Coordinate matrix of an operator H(S_domain) -> H(S_codomain).

    Rows index the codomain basis, columns the domain basis, so the matrix of
    C12 : H(S2) -> H(S1) is m1 x m2.
    """

    entries: np.ndarray
    codomain: str
    domain: str
    mode: str = CORRELATION

    def __post_init__(self) -> None:
        entries = np.atleast_2d(np.asarray(self.entries, dtype=float))
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2:
            raise DimensionMismatchError("operator entries must be a matrix")
        if self.mode not in MODES:
            raise ModeError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.entries.shape[0]), int(self.entries.shape[1]))

    @property
    def norm(self) -> float:
        return spectral_norm(self.entries)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(
            entries=self.entries.T, codomain=self.domain, domain=self.codomain, mode=self.mode
        )

    def apply(self, f: HsVector) -> HsVector:
        if f.basis != self.domain:
            raise BasisMismatchError(f"operator acts on {self.domain!r}, got {f.basis!r}")
        if f.dim != self.shape[1]:
            raise DimensionMismatchError(f"operator expects {self.shape[1]} coords, got {f.dim}")
        return HsVector(self.entries @ f.coords, self.codomain)


@dataclass(frozen=True)
class CanonicalPair:
    """One canonical correlation with its left and right weight vectors."""

    rho: float
    left: HsVector
    right: HsVector


class BlockOperator:
    """Q operator: identity diagonal blocks, cross-operators off the diagonal."""

    @property
    def labels(self) -> Tuple[str, ...]:
        raise NotImplementedError

    @property
    def dims(self) -> Tuple[int, ...]:
        raise NotImplementedError

    def cross(self, i: int, j: int) -> np.ndarray:
        """Matrix of C_ij (1-based process indices); C_ii is the identity."""
        if i == j:
            return np.eye(self.dims[i - 1])
        blocks = self._blocks()
        if (i, j) in blocks:
            return blocks[(i, j)]
        return blocks[(j, i)].T

    def _blocks(self) -> Dict[Tuple[int, int], np.ndarray]:
        raise NotImplementedError

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def offsets(self) -> List[int]:
        return [int(x) for x in np.concatenate(([0], np.cumsum(self.dims)))]

    def block_slice(self, i: int) -> slice:
        offsets = self.offsets
        return slice(offsets[i - 1], offsets[i])

    @property
    def matrix(self) -> np.ndarray:
        """Assembled symmetric matrix of Q."""
        return np.block(
            [[self.cross(i, j) for j in range(1, self.n + 1)] for i in range(1, self.n + 1)]
        )

    @staticmethod
    def _require_correlation(*operators: OperatorMatrix) -> None:
        for op in operators:
            if op.mode != CORRELATION:
                raise ModeError("Q operators are assembled from correlation-mode cross-operators")


@dataclass(frozen=True, eq=False)
class BlockOperator2(BlockOperator):
    """Q = [[I, C12], [C21, I]] for two processes."""

    m12: OperatorMatrix

    def __post_init__(self) -> None:
        self._require_correlation(self.m12)

    @property
    def labels(self) -> Tuple[str, ...]:
        return (self.m12.codomain, self.m12.domain)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.m12.shape

    def _blocks(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {(1, 2): self.m12.entries}


@dataclass(frozen=True, eq=False)
class BlockOperator3(BlockOperator):
    """Q for three processes; process 1 is the conditioning process."""

    m12: OperatorMatrix
    m13: OperatorMatrix
    m23: OperatorMatrix

    def __post_init__(self) -> None:
        self._require_correlation(self.m12, self.m13, self.m23)
        if (
            self.m12.codomain != self.m13.codomain
            or self.m12.domain != self.m23.codomain
            or self.m13.domain != self.m23.domain
        ):
            raise BasisMismatchError("cross-operators do not share consistent eigensystems")
        if (
            self.m12.shape[0] != self.m13.shape[0]
            or self.m12.shape[1] != self.m23.shape[0]
            or self.m13.shape[1] != self.m23.shape[1]
        ):
            raise DimensionMismatchError("cross-operator shapes are inconsistent")

    @property
    def labels(self) -> Tuple[str, ...]:
        return (self.m12.codomain, self.m12.domain, self.m13.domain)

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.m12.shape[0], self.m12.shape[1], self.m13.shape[1])

    def _blocks(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {
            (1, 2): self.m12.entries,
            (1, 3): self.m13.entries,
            (2, 3): self.m23.entries,
        }


@dataclass(frozen=True, eq=False)
class HQElement:
    """h = (f1, f2[, f3]) with the ambient norm ||h||_0^2 = sum ||f_i||^2."""

    parts: Tuple[HsVector, ...]

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([part.coords for part in self.parts])

    @property
    def norm0(self) -> float:
        return float(np.linalg.norm(self.stacked))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(part.basis for part in self.parts)

    def __add__(self, other: "HQElement") -> "HQElement":
        if self.labels != other.labels:
            raise BasisMismatchError("cannot add elements of different H(Q) spaces")
        return HQElement(
            tuple(HsVector(a.coords + b.coords, a.basis) for a, b in zip(self.parts, other.parts))
        )

    @classmethod
    def from_stacked(cls, vector: np.ndarray, q: BlockOperator) -> "HQElement":
        vector = np.asarray(vector, dtype=float).reshape(-1)
        if vector.size != sum(q.dims):
            raise DimensionMismatchError(f"expected {sum(q.dims)} coords, got {vector.size}")
        return cls(
            tuple(
                HsVector(vector[q.block_slice(i)], q.labels[i - 1]) for i in range(1, q.n + 1)
            )
        )

    @classmethod
    def in_block(cls, f: HsVector, block: int, q: BlockOperator) -> "HQElement":
        """Element with ``f`` in slot ``block`` (1-based) and zeros elsewhere."""
        vector = np.zeros(sum(q.dims))
        vector[q.block_slice(block)] = f.coords
        return cls.from_stacked(vector, q)


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """n sample paths (rows) evaluated on a common grid (columns)."""

    values: np.ndarray
    grid: Grid
    centered: bool = False
    mean_curve: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise DimensionMismatchError("dataset values must be an n x p matrix")
        if values.shape[0] < 2:
            raise InsufficientSamplesError("a dataset needs at least two sample paths")
        if values.shape[1] != self.grid.size:
            raise GridMismatchError(
                f"dataset has {values.shape[1]} columns but the grid has {self.grid.size} points"
            )

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True, eq=False)
class FpcaResult:
    """Retained eigensystem, n x m score matrix and the removed mean curve."""

    eigensystem: EigenSystem
    scores: np.ndarray
    mean_curve: np.ndarray


@dataclass(frozen=True, eq=False)
class CcaEstimate:
    """Sample canonical correlations d_1 >= d_2 >= ... with weights.

    Coefficient and weight-function matrices hold one component per column.
    """

    correlations: np.ndarray
    left_coeffs: np.ndarray
    right_coeffs: np.ndarray
    left_weights: np.ndarray
    right_weights: np.ndarray
    cross_matrix: np.ndarray
    mode: str
    m: int
    left: FpcaResult
    right: FpcaResult


@dataclass(frozen=True, eq=False)
class PccaEstimate(CcaEstimate):
    """Sample partial canonical correlations plus the conditioning regressions."""

    left_regression: np.ndarray
    right_regression: np.ndarray
    cond: FpcaResult


@dataclass(frozen=True, eq=False)
class CovBlocks:
    """Finite covariance blocks of two or three random vectors."""

    s11: np.ndarray
    s22: np.ndarray
    s12: np.ndarray
    s33: Optional[np.ndarray] = None
    s13: Optional[np.ndarray] = None
    s23: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        for name in ("s11", "s22", "s12", "s33", "s13", "s23"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.atleast_2d(np.asarray(value, dtype=float)))
        triple = (self.s33, self.s13, self.s23)
        if any(x is None for x in triple) and not all(x is None for x in triple):
            raise DataError("three-block covariance needs s33, s13 and s23 together")
        try:
            full = self.matrix
        except ValueError as e:
            raise DimensionMismatchError(f"covariance blocks do not assemble: {e}") from e
        if not np.allclose(full, full.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(full).max())):
            raise DataError("assembled covariance matrix is not symmetric")

    @property
    def is_triple(self) -> bool:
        return self.s33 is not None

    @property
    def dims(self) -> Tuple[int, ...]:
        dims = (self.s11.shape[0], self.s22.shape[0])
        if self.s33 is not None:
            dims += (self.s33.shape[0],)
        return dims

    def block(self, i: int, j: int) -> np.ndarray:
        """S_ij with 1-based indices; S_ji = S_ij^T."""
        if i > j:
            return self.block(j, i).T
        value = getattr(self, f"s{i}{j}")
        if value is None:
            raise DataError(f"covariance block s{i}{j} is not available")
        return value

    @property
    def matrix(self) -> np.ndarray:
        k = len(self.dims)
        return np.block([[self.block(i, j) for j in range(1, k + 1)] for i in range(1, k + 1)])


@dataclass(frozen=True, eq=False)
class CcaSolution:
    """Finite-dimensional canonical correlations with weight vectors as columns."""

    correlations: np.ndarray
    left_weights: np.ndarray
    right_weights: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Settings of one simulated experiment."""

    n: int
    p: int = DEFAULT_GRID_POINTS
    kl_terms: int = DEFAULT_KL_TERMS
    seed: int = 0
    model: str = "cca_pair"
    beta: Tuple[float, float] = DEFAULT_BETA
    replication: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DataError("n must be at least 2")
        if self.p < 2:
            raise DataError("p must be at least 2")
        if self.kl_terms < 1:
            raise DataError("kl_terms must be at least 1")
        if self.kl_terms >= self.p:
            raise DataError("kl_terms must be smaller than the grid size p")
        if self.model not in ("cca_pair", "pcca_triple"):
            raise DataError(f"unknown model {self.model!r}")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must be an unsigned 64-bit integer")

    def for_replication(self, replication: int) -> "SimConfig":
        return dataclasses.replace(self, replication=replication)


@dataclass
class McReport:
    """Per-replication first/second correlations of a Monte Carlo run."""

    model: str
    n: int
    m: int
    mode: str
    seed: int
    replications: int
    first: List[float] = field(default_factory=list)
    second: List[float] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def mean_first(self) -> float:
        return float(np.mean(self.first))

    @property
    def sd_first(self) -> float:
        return float(np.std(self.first, ddof=1))

    @property
    def mean_second(self) -> float:
        return float(np.mean(self.second))

    @property
    def sd_second(self) -> float:
        return float(np.std(self.second, ddof=1))


@dataclass(frozen=True)
class IdentityCheck:
    """Largest error of one identity over all trials, judged against ``tol``."""

    name: str
    max_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tol)


@dataclass
class VerificationReport:
    trials: int
    dim: int
    seed: int
    checks: List[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]
