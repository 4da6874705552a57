"""Seeded Karhunen-Loeve simulation of the test processes.

Random numbers come from numpy's PCG64 bit generator seeded through a
``SeedSequence``; replication r of a run with seed s uses the child stream
``SeedSequence(s, spawn_key=(r,))``, so replications can be generated in any
order or in parallel. Normal variates are produced by the inverse normal CDF
applied to 53-bit uniforms.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .errors import DataError, DimensionMismatchError
from .models import EigenSystem, FunctionalDataset, Grid, SimConfig

logger = logging.getLogger(__name__)

CCA_PAIR = "cca_pair"
PCCA_TRIPLE = "pcca_triple"

_UNIFORM_BITS = 53


def make_rng(seed: int, replication: Optional[int] = None) -> np.random.Generator:
    """PCG64 generator for ``seed``, or for its child stream ``replication``."""
    if replication is None:
        sequence = np.random.SeedSequence(seed)
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=(replication,))
    return np.random.Generator(np.random.PCG64(sequence))


def standard_normals(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Standard normal draws by inversion of uniforms on the open unit interval."""
    bits = rng.integers(0, 2**_UNIFORM_BITS, size=shape, dtype=np.int64)
    uniforms = (bits.astype(float) + 0.5) / 2.0**_UNIFORM_BITS
    return special.ndtri(uniforms)


def _is_diagonal(matrix: np.ndarray) -> bool:
    return not np.any(matrix - np.diag(np.diagonal(matrix)))


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Factor F with F F^T = cov, from the symmetric eigendecomposition."""
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise DataError("coefficient covariance is not symmetric")
    values, vectors = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = max(1.0, float(np.abs(values).max()))
    if values[0] < -1e-12 * scale:
        raise DataError(
            f"coefficient covariance is not positive semidefinite "
            f"(smallest eigenvalue {values[0]:.3e})"
        )
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def _kl_paths(normals: np.ndarray, cov: np.ndarray, functions: np.ndarray) -> np.ndarray:
    if _is_diagonal(cov):
        coeffs = normals * np.sqrt(np.clip(np.diagonal(cov), 0.0, None))
    else:
        coeffs = normals @ _psd_factor(cov).T
    return coeffs @ functions.T


def gaussian_vectors(cov: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n zero-mean Gaussian rows with covariance ``cov``."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    normals = standard_normals(rng, (n, cov.shape[0]))
    return normals @ _psd_factor(cov).T


def simulate_kl(
    eigensystem: EigenSystem,
    n: int,
    seed: int = 0,
    coeff_cov: Optional[np.ndarray] = None,
    replication: Optional[int] = None,
) -> FunctionalDataset:
    """Paths sum_j c_kj phi_j(t) with Gaussian coefficient vectors.

    Args:
        eigensystem: Functions phi_j on the grid; its eigenvalues give the
            default diagonal coefficient covariance
        n: Number of paths
        seed: Generator seed
        coeff_cov: Symmetric PSD covariance of the coefficient vectors
        replication: Child stream index

    Returns:
        FunctionalDataset on the eigensystem's grid

    Raises:
        DataError: If the covariance is not symmetric PSD
    """
    cov = (
        np.diag(eigensystem.eigenvalues)
        if coeff_cov is None
        else np.atleast_2d(np.asarray(coeff_cov, dtype=float))
    )
    if cov.shape != (eigensystem.m, eigensystem.m):
        raise DimensionMismatchError(
            f"coefficient covariance has shape {cov.shape}, "
            f"expected {(eigensystem.m, eigensystem.m)}"
        )
    rng = make_rng(seed, replication)
    normals = standard_normals(rng, (n, eigensystem.m))
    paths = _kl_paths(normals, cov, eigensystem.eigenfunctions)
    return FunctionalDataset(paths, eigensystem.grid)


def model_eigensystem(cfg: SimConfig) -> EigenSystem:
    """lambda_j = 1/j with phi_j = sqrt(2) sin(j pi t), j <= kl_terms."""
    values = 1.0 / np.arange(1, cfg.kl_terms + 1)
    return EigenSystem.sine_basis(values, Grid.midpoint(cfg.p), label="S")


def _pair_paths(
    cfg: SimConfig, rng: np.random.Generator, es: EigenSystem
) -> Tuple[np.ndarray, np.ndarray]:
    n, terms = cfg.n, es.m
    z1 = standard_normals(rng, (n, terms))
    z2 = standard_normals(rng, (n, terms))
    cov = np.diag(es.eigenvalues)

    x1 = _kl_paths(z1, cov, es.eigenfunctions)
    coeffs = z2 * np.sqrt(es.eigenvalues)
    # first coefficient shared by both processes, variance lambda_1 = 1
    coeffs[:, 0] = (z1[:, 0] + z2[:, 0]) / np.sqrt(2.0)
    x2 = coeffs @ es.eigenfunctions.T
    return x1, x2


def _require_model(cfg: SimConfig, model: str) -> None:
    if cfg.model != model:
        raise DataError(f"configuration is for model {cfg.model!r}, not {model!r}")


def simulate_cca_pair(cfg: SimConfig) -> Tuple[FunctionalDataset, FunctionalDataset]:
    """Two processes sharing the first sine component.

    X1 = sum_j j^{-1/2} Z1j phi_j and X2 is the same expansion in Z2 except
    that its first coefficient is (Z11 + Z21)/sqrt(2); the first canonical
    correlation of the pair is 1/sqrt(2) and all others vanish.
    """
    _require_model(cfg, CCA_PAIR)
    es = model_eigensystem(cfg)
    rng = make_rng(cfg.seed, cfg.replication)
    x1, x2 = _pair_paths(cfg, rng, es)
    logger.debug(f"Simulated CCA pair: n={cfg.n}, p={cfg.p}, stream={cfg.replication}")
    return FunctionalDataset(x1, es.grid), FunctionalDataset(x2, es.grid)


def simulate_pcca_triple(
    cfg: SimConfig,
) -> Tuple[FunctionalDataset, FunctionalDataset, FunctionalDataset]:
    """The CCA pair confounded by a common term beta Z cos(pi t).

    Returns:
        (conditioning paths Z cos(pi t), X1 - beta_1 Z cos(pi t),
        X2 - beta_2 Z cos(pi t))
    """
    _require_model(cfg, PCCA_TRIPLE)
    es = model_eigensystem(cfg)
    rng = make_rng(cfg.seed, cfg.replication)
    x1, x2 = _pair_paths(cfg, rng, es)
    z = standard_normals(rng, (cfg.n,))
    shared = np.outer(z, np.cos(np.pi * es.grid.points))

    beta1, beta2 = cfg.beta
    logger.debug(
        f"Simulated PCCA triple: n={cfg.n}, beta={cfg.beta}, stream={cfg.replication}"
    )
    return (
        FunctionalDataset(shared, es.grid),
        FunctionalDataset(x1 - beta1 * shared, es.grid),
        FunctionalDataset(x2 - beta2 * shared, es.grid),
    )


def simulate(cfg: SimConfig) -> Tuple[FunctionalDataset, ...]:
    """Dispatch on ``cfg.model``."""
    if cfg.model == CCA_PAIR:
        return simulate_cca_pair(cfg)
    return simulate_pcca_triple(cfg)
