"""Tests for H(S) coordinates and cross-operators."""

import logging

import numpy as np
import pytest

from fpcca.errors import (
    AssumptionViolationError,
    BasisMismatchError,
    DataError,
    DimensionMismatchError,
    ModeError,
)
from fpcca.hilbert import (
    build_cross_operator,
    concentration_operator,
    hs_inner,
    ortho_to_raw,
    raw_cross_covariance,
    raw_to_ortho,
    require_assumption1,
    truncate_eigensystem,
    validate_assumption1,
)
from fpcca.models import EigenSystem, Grid, HsVector, OperatorMatrix


def operator(entries, mode="correlation") -> OperatorMatrix:
    return OperatorMatrix(np.array(entries, dtype=float), codomain="S1", domain="S2", mode=mode)


def test_raw_to_ortho_scales_by_root_eigenvalues():
    """Orthonormal coordinates are raw coefficients over sqrt(lambda)."""
    es = EigenSystem.sine_basis([4.0, 1.0])
    v = raw_to_ortho([2.0, 3.0], es)
    np.testing.assert_allclose(v.coords, [1.0, 3.0])
    assert v.basis == "S"
    np.testing.assert_allclose(ortho_to_raw(v, es), [2.0, 3.0])


def test_raw_to_ortho_length_mismatch():
    es = EigenSystem.sine_basis([1.0, 0.5])
    with pytest.raises(DimensionMismatchError):
        raw_to_ortho([1.0, 2.0, 3.0], es)


def test_hs_inner_requires_same_basis():
    """Elements of different H(S) spaces cannot be paired."""
    f = HsVector([1.0, 2.0], "S1")
    g = HsVector([3.0, 4.0], "S2")
    with pytest.raises(BasisMismatchError):
        hs_inner(f, g)
    assert hs_inner(f, HsVector([3.0, 4.0], "S1")) == pytest.approx(11.0)


def test_build_cross_operator_correlation_mode():
    """Entries are raw / sqrt(lambda_1i lambda_2j)."""
    sys1 = EigenSystem.sine_basis([1.0], label="S1")
    sys2 = EigenSystem.sine_basis([0.25], label="S2")
    op = build_cross_operator([[0.25]], sys1, sys2)
    assert op.entries[0, 0] == pytest.approx(0.5)
    assert (op.codomain, op.domain) == ("S1", "S2")


def test_build_cross_operator_covariance_mode_is_verbatim():
    sys1 = EigenSystem.sine_basis([1.0, 0.5], label="S1")
    sys2 = EigenSystem.sine_basis([0.25], label="S2")
    raw = np.array([[0.1], [0.2]])
    op = build_cross_operator(raw, sys1, sys2, mode="covariance")
    np.testing.assert_array_equal(op.entries, raw)
    assert op.mode == "covariance"


def test_build_cross_operator_rejects_bad_input():
    sys1 = EigenSystem.sine_basis([1.0], label="S1")
    sys2 = EigenSystem.sine_basis([1.0], label="S2")
    with pytest.raises(ModeError):
        build_cross_operator([[0.1]], sys1, sys2, mode="bogus")
    with pytest.raises(DimensionMismatchError):
        build_cross_operator([[0.1, 0.2]], sys1, sys2)


def test_build_cross_operator_clips_with_warning(caplog):
    """Correlations overshooting one are clipped and reported."""
    sys1 = EigenSystem.sine_basis([1.0], label="S1")
    sys2 = EigenSystem.sine_basis([0.25], label="S2")
    with caplog.at_level(logging.WARNING):
        op = build_cross_operator([[0.6]], sys1, sys2)
    assert op.entries[0, 0] == pytest.approx(1.0 + 1e-10)
    assert "Clipping" in caplog.text


def test_truncate_eigensystem_drops_tiny_components(caplog):
    es = EigenSystem.sine_basis([1.0, 0.5, 1e-12])
    with caplog.at_level(logging.WARNING):
        kept = truncate_eigensystem(es)
    assert kept.m == 2
    assert "Dropping 1 of 3" in caplog.text
    assert truncate_eigensystem(kept) is kept


def test_raw_cross_covariance_integrates_kernel():
    """A kernel c phi_1(s) phi_1(t) has a single raw entry c."""
    grid = Grid.midpoint(50)
    es = EigenSystem.sine_basis([1.0, 0.5], grid)
    phi1 = es.eigenfunctions[:, 0]
    raw = raw_cross_covariance(0.3 * np.outer(phi1, phi1), es, es)
    np.testing.assert_allclose(raw, [[0.3, 0.0], [0.0, 0.0]], atol=1e-12)


def test_raw_cross_covariance_shape_check():
    es = EigenSystem.sine_basis([1.0], Grid.midpoint(10))
    with pytest.raises(DimensionMismatchError):
        raw_cross_covariance(np.zeros((10, 9)), es, es)


def test_concentration_operator():
    np.testing.assert_allclose(concentration_operator(operator([[0.6]])), [[0.64]])
    half = operator([[1.0 / np.sqrt(2.0), 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(concentration_operator(half), np.diag([0.5, 1.0]), atol=1e-15)
    with pytest.raises(ModeError):
        concentration_operator(operator([[0.6]], mode="covariance"))


def test_validate_assumption1():
    """The check reports the spectral norm whether it passes or not."""
    check = validate_assumption1(operator([[0.3, 0.4]]))
    assert check.passed
    assert check.norm == pytest.approx(0.5)

    failed = validate_assumption1(operator([[1.0]]))
    assert not failed.passed
    assert failed.norm == pytest.approx(1.0)

    with pytest.raises(DataError):
        validate_assumption1(operator([[np.nan]]))


def test_require_assumption1_raises_with_norm():
    with pytest.raises(AssumptionViolationError) as excinfo:
        require_assumption1(operator([[0.8, 0.6]]))
    assert excinfo.value.norm == pytest.approx(1.0)
    assert require_assumption1(operator([[0.5]])) == pytest.approx(0.5)


def test_operator_adjoint_and_apply():
    op = operator([[1.0, 2.0], [3.0, 4.0]])
    adj = op.adjoint()
    assert (adj.codomain, adj.domain) == ("S2", "S1")
    np.testing.assert_array_equal(adj.entries, op.entries.T)
    result = op.apply(HsVector([1.0, 1.0], "S2"))
    np.testing.assert_allclose(result.coords, [3.0, 7.0])
    with pytest.raises(BasisMismatchError):
        op.apply(HsVector([1.0, 1.0], "S1"))
