"""Tests for the seeded Karhunen-Loeve simulation."""

import numpy as np
import pytest

from fpcca.errors import DataError, DimensionMismatchError
from fpcca.models import EigenSystem, Grid, SimConfig
from fpcca.simulate import (
    gaussian_vectors,
    make_rng,
    model_eigensystem,
    simulate,
    simulate_cca_pair,
    simulate_kl,
    simulate_pcca_triple,
    standard_normals,
)


def coefficients(ds, j: int) -> np.ndarray:
    """Quadrature inner products <x_k, sqrt(2) sin(j pi t)>."""
    phi = np.sqrt(2.0) * np.sin(j * np.pi * ds.grid.points)
    return ds.values @ (ds.grid.weights * phi)


def test_same_seed_same_paths():
    cfg = SimConfig(n=20, p=30, seed=5)
    a1, a2 = simulate_cca_pair(cfg)
    b1, b2 = simulate_cca_pair(cfg)
    np.testing.assert_array_equal(a1.values, b1.values)
    np.testing.assert_array_equal(a2.values, b2.values)


def test_replications_use_distinct_streams():
    cfg = SimConfig(n=20, p=30, seed=5)
    first, _ = simulate_cca_pair(cfg.for_replication(0))
    second, _ = simulate_cca_pair(cfg.for_replication(1))
    plain, _ = simulate_cca_pair(cfg)
    assert not np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, plain.values)


def test_standard_normals_are_reproducible():
    a = standard_normals(make_rng(3), (4, 5))
    b = standard_normals(make_rng(3), (4, 5))
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_simulate_kl_matches_first_process_of_pair():
    """X1 of the pair is the plain expansion with lambda_j = 1/j."""
    cfg = SimConfig(n=15, p=40, seed=9)
    x1, _ = simulate_cca_pair(cfg)
    ds = simulate_kl(model_eigensystem(cfg), n=15, seed=9)
    np.testing.assert_array_equal(ds.values, x1.values)


def test_triple_without_confounding_equals_pair():
    pair = simulate_cca_pair(SimConfig(n=10, p=25, seed=4))
    cond, x2, x3 = simulate_pcca_triple(
        SimConfig(n=10, p=25, seed=4, model="pcca_triple", beta=(0.0, 0.0))
    )
    np.testing.assert_array_equal(x2.values, pair[0].values)
    np.testing.assert_array_equal(x3.values, pair[1].values)
    assert cond.values.shape == (10, 25)


def test_zero_covariance_gives_zero_paths():
    es = EigenSystem.sine_basis([1.0, 0.5], Grid.midpoint(10))
    ds = simulate_kl(es, n=5, coeff_cov=np.zeros((2, 2)))
    np.testing.assert_array_equal(ds.values, 0.0)


def test_invalid_coefficient_covariance():
    es = EigenSystem.sine_basis([1.0, 0.5], Grid.midpoint(10))
    with pytest.raises(DataError):
        simulate_kl(es, n=5, coeff_cov=np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DataError):
        simulate_kl(es, n=5, coeff_cov=np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        simulate_kl(es, n=5, coeff_cov=np.eye(3))


def test_wrong_model_for_simulator():
    with pytest.raises(DataError):
        simulate_pcca_triple(SimConfig(n=5))
    with pytest.raises(DataError):
        simulate_cca_pair(SimConfig(n=5, model="pcca_triple"))
    assert len(simulate(SimConfig(n=5, p=30, model="pcca_triple"))) == 3


def test_sim_config_validation():
    with pytest.raises(DataError):
        SimConfig(n=1)
    with pytest.raises(DataError):
        SimConfig(n=10, p=1)
    with pytest.raises(DataError):
        SimConfig(n=10, kl_terms=0)
    with pytest.raises(DataError):
        SimConfig(n=10, p=20, kl_terms=20)
    with pytest.raises(DataError):
        SimConfig(n=10, model="other")
    with pytest.raises(DataError):
        SimConfig(n=10, seed=-1)


def test_gaussian_vectors_covariance():
    cov = np.array([[2.0, 0.6], [0.6, 1.0]])
    sample = gaussian_vectors(cov, 20_000, make_rng(8))
    np.testing.assert_allclose(np.cov(sample.T), cov, atol=0.1)


def test_pair_moments():
    """Coefficient j of X1 has variance 1/j; the first coefficients covary by 1/sqrt(2)."""
    x1, x2 = simulate_cca_pair(SimConfig(n=10_000, seed=123))
    for j in range(1, 6):
        assert np.var(coefficients(x1, j), ddof=1) == pytest.approx(1.0 / j, rel=0.15)
    c1, c2 = coefficients(x1, 1), coefficients(x2, 1)
    assert np.cov(c1, c2)[0, 1] == pytest.approx(1.0 / np.sqrt(2.0), rel=0.1)
    assert np.var(c2, ddof=1) == pytest.approx(1.0, rel=0.1)


def test_pair_is_zero_mean():
    x1, _ = simulate_cca_pair(SimConfig(n=10_000, seed=77))
    sd = x1.values.std(axis=0, ddof=1)
    assert np.all(np.abs(x1.values.mean(axis=0)) <= 5 * sd / np.sqrt(x1.n))


def test_triple_confounding_term():
    """Cov(<X2, c>, <cond, c>) = -beta_1 ||c||^4 for c = cos(pi t)."""
    cond, x2, x3 = simulate_pcca_triple(
        SimConfig(n=10_000, seed=31, model="pcca_triple", beta=(1.0, 2.0))
    )
    cosine = np.cos(np.pi * cond.grid.points)

    def project(ds):
        return ds.values @ (ds.grid.weights * cosine)

    z = project(cond)
    assert np.var(z, ddof=1) == pytest.approx(0.25, rel=0.1)
    assert np.cov(project(x2), z)[0, 1] == pytest.approx(-0.25, rel=0.15)
    assert np.cov(project(x3), z)[0, 1] == pytest.approx(-0.5, rel=0.15)
