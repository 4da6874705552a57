"""Functional PCCA - canonical and partial canonical correlations of stochastic processes."""

from .algebra import cca_from_operators, pcca_from_operators
from .estimators import estimate_cca, estimate_pcca
from .fpca import run_fpca
from .models import (
    CcaEstimate,
    EigenSystem,
    FunctionalDataset,
    Grid,
    OperatorMatrix,
    PccaEstimate,
    SimConfig,
)
from .parser import DatasetParser
from .runner import ExperimentRunner
from .simulate import simulate_cca_pair, simulate_pcca_triple

__version__ = "0.1.0"
__all__ = [
    "ExperimentRunner",
    "DatasetParser",
    "EigenSystem",
    "FunctionalDataset",
    "Grid",
    "OperatorMatrix",
    "CcaEstimate",
    "PccaEstimate",
    "SimConfig",
    "run_fpca",
    "estimate_cca",
    "estimate_pcca",
    "cca_from_operators",
    "pcca_from_operators",
    "simulate_cca_pair",
    "simulate_pcca_triple",
]
