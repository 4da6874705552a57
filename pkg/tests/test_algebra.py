"""Tests for the Q operator algebra and the operator-level canonical analyses."""

import numpy as np
import pytest

from fpcca.algebra import (
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
    validate_q,
)
from fpcca.errors import (
    AssumptionViolationError,
    BasisMismatchError,
    ModeError,
    RankDeficiencyError,
)
from fpcca.models import BlockOperator2, BlockOperator3, HQElement, HsVector, OperatorMatrix


def op(entries, codomain="S1", domain="S2", mode="correlation") -> OperatorMatrix:
    return OperatorMatrix(np.array(entries, dtype=float), codomain, domain, mode)


def scalar_q3(a: float, b: float, c: float) -> BlockOperator3:
    return BlockOperator3(
        m12=op([[a]], "S1", "S2"), m13=op([[b]], "S1", "S3"), m23=op([[c]], "S2", "S3")
    )


def test_q2_inverse_identity():
    q = BlockOperator2(m12=op([[0.5, 0.2], [0.1, 0.3]]))
    inv = q2_inverse(q)
    np.testing.assert_allclose(q.matrix @ inv, np.eye(4), atol=1e-12)


def test_q2_inverse_scalar():
    """[[1, r], [r, 1]]^-1 = [[1, -r], [-r, 1]] / (1 - r^2)."""
    r = 0.6
    inv = q2_inverse(BlockOperator2(m12=op([[r]])))
    expected = np.array([[1.0, -r], [-r, 1.0]]) / (1.0 - r**2)
    np.testing.assert_allclose(inv, expected, rtol=1e-14)


def test_q3_inverse_identity(q3):
    inv = q3_inverse(q3)
    size = sum(q3.dims)
    np.testing.assert_allclose(q3.matrix @ inv, np.eye(size), atol=1e-10)
    np.testing.assert_allclose(inv @ q3.matrix, np.eye(size), atol=1e-10)


def test_validate_q_rejects_perfect_correlation():
    with pytest.raises(AssumptionViolationError):
        validate_q(BlockOperator2(m12=op([[1.0]])))
    with pytest.raises(AssumptionViolationError):
        validate_q(scalar_q3(0.0, 0.0, 1.0))


def test_block_operator_requires_correlation_mode():
    with pytest.raises(ModeError):
        BlockOperator2(m12=op([[0.5]], mode="covariance"))


def test_congruence(q3):
    """<Q g, Q g'>_{H(Q)} = <g, Q g'>_0."""
    rng = np.random.default_rng(3)
    g = HQElement.from_stacked(rng.standard_normal(sum(q3.dims)), q3)
    g2 = HQElement.from_stacked(rng.standard_normal(sum(q3.dims)), q3)
    expected = g.stacked @ q3.matrix @ g2.stacked
    inner = hq_inner(q_apply(q3, g), q_apply(q3, g2), q3)
    assert inner == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_project_L1_M2_matches_gram_projection(q2):
    rng = np.random.default_rng(4)
    f2 = HsVector(rng.standard_normal(q2.dims[1]), q2.labels[1])
    h = q2.matrix @ HQElement.in_block(f2, 2, q2).stacked
    l1, l2 = project_L1_M2(f2, q2)
    span1 = q2.matrix[:, q2.block_slice(1)]
    reference = project_onto_span(h, span1, q2)
    np.testing.assert_allclose(l1.stacked, reference, atol=1e-10)
    np.testing.assert_allclose(l1.stacked + l2.stacked, h, atol=1e-12)
    assert np.all(l2.parts[0].coords == 0.0)


def test_project_M3_components_sum_to_element(q3):
    """The three parts add up to Q (0, 0, f3) and match Gram projections."""
    rng = np.random.default_rng(5)
    f3 = HsVector(rng.standard_normal(q3.dims[2]), q3.labels[2])
    h = q3.matrix @ HQElement.in_block(f3, 3, q3).stacked
    p1, p2, p3 = project_M3_components(f3, q3)
    np.testing.assert_allclose((p1 + p2 + p3).stacked, h, atol=1e-10)

    span1 = q3.matrix[:, q3.block_slice(1)]
    span12 = q3.matrix[:, : q3.offsets[2]]
    ref1 = project_onto_span(h, span1, q3)
    ref12 = project_onto_span(h, span12, q3)
    np.testing.assert_allclose(p1.stacked, ref1, atol=1e-10)
    np.testing.assert_allclose(p2.stacked, ref12 - ref1, atol=1e-10)


def test_bstarb_closed_forms_match_projection_oracle(q2, q3):
    rng = np.random.default_rng(6)
    f2 = HsVector(rng.standard_normal(q2.dims[1]), q2.labels[1])
    f3 = HsVector(rng.standard_normal(q3.dims[2]), q3.labels[2])
    np.testing.assert_allclose(
        bstarb_2(f2, q2).coords, bstarb_by_projection(f2, q2).coords, rtol=1e-8, atol=1e-10
    )
    np.testing.assert_allclose(
        bstarb_3(f3, q3).coords, bstarb_by_projection(f3, q3).coords, rtol=1e-8, atol=1e-10
    )


def test_bstarb_2_scalar_spectral_mapping():
    """For one dimension B*B is multiplication by rho^2 / (1 - rho^2)."""
    q = BlockOperator2(m12=op([[0.6]]))
    result = bstarb_2(HsVector([1.0], "S2"), q)
    assert result.coords[0] == pytest.approx(0.36 / 0.64)


def test_bstarb_rejects_wrong_slot(q2):
    with pytest.raises(BasisMismatchError):
        bstarb_2(HsVector(np.ones(q2.dims[1]), "S9"), q2)


def test_sunder_blocks_are_orthonormal(q3):
    spans = [q3.matrix[:, q3.block_slice(i)] for i in (1, 2, 3)]
    bases = sunder_decompose(spans, q3)
    inverse = np.linalg.inv(q3.matrix)
    for i, left in enumerate(bases):
        for j, right in enumerate(bases):
            gram = left.T @ inverse @ right
            target = np.eye(gram.shape[0]) if i == j else np.zeros_like(gram)
            np.testing.assert_allclose(gram, target, atol=1e-10)


def test_sunder_rejects_dependent_subspaces(q2):
    span1 = q2.matrix[:, q2.block_slice(1)]
    with pytest.raises(RankDeficiencyError):
        sunder_decompose([span1, span1], q2)


def test_cca_from_operators_diagonal():
    pairs = cca_from_operators(op([[0.3, 0.0], [0.0, 0.8]]))
    assert [p.rho for p in pairs] == pytest.approx([0.8, 0.3])
    m = np.array([[0.3, 0.0], [0.0, 0.8]])
    for pair in pairs:
        assert pair.left.norm == pytest.approx(1.0)
        assert pair.right.norm == pytest.approx(1.0)
        assert pair.left.coords @ m @ pair.right.coords == pytest.approx(pair.rho)


def test_cca_from_operators_requires_correlation_mode():
    with pytest.raises(ModeError):
        cca_from_operators(op([[0.3]], mode="covariance"))


def test_partial_correlation_scalar():
    """(c - ab) / sqrt((1 - a^2)(1 - b^2)) for scalar processes."""
    a, b, c = 0.5, 0.4, 0.6
    q = scalar_q3(a, b, c)
    expected = (c - a * b) / np.sqrt((1 - a**2) * (1 - b**2))
    assert partial_correlation_operator(q)[0, 0] == pytest.approx(expected)
    assert lemma3_norm(q) == pytest.approx(expected)
    pairs = pcca_from_operators(q.m12, q.m13, q.m23)
    assert pairs[0].rho == pytest.approx(expected)


def test_pcca_vanishes_when_conditioning_explains_everything():
    q = scalar_q3(0.5, 0.4, 0.2)
    assert pcca_from_operators(q.m12, q.m13, q.m23)[0].rho == pytest.approx(0.0, abs=1e-14)


def test_pcca_without_conditioning_equals_cca():
    m23 = op([[0.5, 0.1], [0.2, 0.3]], "S2", "S3")
    m12 = op(np.zeros((2, 2)), "S1", "S2")
    m13 = op(np.zeros((2, 2)), "S1", "S3")
    partial = [p.rho for p in pcca_from_operators(m12, m13, m23)]
    plain = [p.rho for p in cca_from_operators(m23)]
    assert partial == pytest.approx(plain, abs=1e-12)


def test_q3_inverse_reduces_to_two_blocks():
    """Without links to the third process Q^-1 is block diagonal with I."""
    m12 = op([[0.5, 0.2], [0.1, 0.3]])
    q = BlockOperator3(
        m12=m12, m13=op(np.zeros((2, 1)), "S1", "S3"), m23=op(np.zeros((2, 1)), "S2", "S3")
    )
    expected = np.zeros((5, 5))
    expected[:4, :4] = q2_inverse(BlockOperator2(m12=m12))
    expected[4, 4] = 1.0
    np.testing.assert_allclose(q3_inverse(q), expected, atol=1e-12)


def test_hq_inner_scalar():
    """Q = [[1, .5], [.5, 1]] has inverse [[4, -2], [-2, 4]] / 3."""
    q = BlockOperator2(m12=op([[0.5]]))
    np.testing.assert_allclose(
        q2_inverse(q), np.array([[4.0, -2.0], [-2.0, 4.0]]) / 3.0, rtol=1e-14
    )
    h = HQElement.from_stacked(np.array([1.0, 0.0]), q)
    assert hq_inner(h, h, q) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_cca_from_operators_single_nonzero_correlation():
    pairs = cca_from_operators(op([[1.0 / np.sqrt(2.0), 0.0], [0.0, 0.0]]))
    assert [p.rho for p in pairs] == pytest.approx([1.0 / np.sqrt(2.0), 0.0], abs=1e-14)
    np.testing.assert_allclose(np.abs(pairs[0].left.coords), [1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(pairs[0].right.coords), [1.0, 0.0], atol=1e-14)
