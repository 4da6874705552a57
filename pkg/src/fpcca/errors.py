"""Exception hierarchy for functional (partial) canonical correlation analysis."""

from typing import Optional


class FpccaError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatchError(FpccaError, ValueError):
    """Array shapes do not agree."""


class BasisMismatchError(FpccaError, ValueError):
    """Two H(S) elements or operators refer to different eigensystems."""


class ModeError(FpccaError, ValueError):
    """An operator was built in a coordinate mode the operation cannot use."""


class AssumptionViolationError(FpccaError):
    """A cross-operator (or the conditional cross block) has norm too close to one.

    A violation means some pair of index elements is perfectly (or nearly
    perfectly) correlated, so the Q operator is not invertible.
    """

    def __init__(self, message: str, norm: float, tol: float) -> None:
        super().__init__(f"{message} (norm={norm:.12g}, tol={tol:g})")
        self.norm = norm
        self.tol = tol


class RankDeficiencyError(FpccaError):
    """A matrix that must have full rank does not."""

    def __init__(self, message: str, rank: Optional[int] = None) -> None:
        super().__init__(message if rank is None else f"{message} (rank={rank})")
        self.rank = rank


class DataError(FpccaError, ValueError):
    """Input data cannot be analyzed."""


class GridMismatchError(DataError):
    """Datasets (or a dataset and an eigensystem) live on different grids."""


class InsufficientSamplesError(DataError):
    """Too few sample paths for the requested number of harmonics."""
