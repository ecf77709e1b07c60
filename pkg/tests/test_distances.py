import numpy as np
import pytest

from protopal.distances import (TangentBasis, euclidean_sq, orthonormalize,
                                relevance_dist_sq, tangent_dist_sq,
                                tangent_residual_sq)
from protopal.errors import (DegenerateBasisError, DimensionMismatchError,
                             SchemaError)

from oracles import grid_tangent_sq, naive_euclidean_sq, naive_tangent_sq


def test_euclidean_hand_case():
    assert euclidean_sq(np.array([1.0, 2.0]), np.array([4.0, 6.0])) == 25.0
    assert euclidean_sq(np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(DimensionMismatchError):
        euclidean_sq(np.zeros(3), np.zeros(2))


def test_relevance_identity_matches_euclidean():
    rng = np.random.default_rng(0)
    for _ in range(10):
        x, w = rng.normal(size=4), rng.normal(size=4)
        assert relevance_dist_sq(x, w, np.eye(4)) == pytest.approx(
            euclidean_sq(x, w), rel=1e-14)


def test_relevance_hand_case():
    omega = np.array([[2.0, 0.0], [0.0, 0.5]])
    x, w = np.array([1.0, 1.0]), np.array([0.0, 0.0])
    assert relevance_dist_sq(x, w, omega) == pytest.approx(4.0 + 0.25)


def test_tangent_zero_rank_equals_euclidean_exactly():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = int(rng.integers(1, 8))
        x, w = rng.normal(size=d), rng.normal(size=d)
        b = TangentBasis.empty(d)
        # identical arithmetic, so equality is exact, not approximate
        assert tangent_dist_sq(x, w, b) == euclidean_sq(x, w)


def test_tangent_in_span_residual_tiny():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = int(rng.integers(2, 9))
        r = int(rng.integers(1, d))
        V = orthonormalize(rng.normal(size=(d, r)))
        w = rng.normal(size=d)
        theta = rng.normal(size=r)
        x = w + V.matrix @ theta  # exactly in the affine span
        assert tangent_dist_sq(x, w, V) <= 1e-10


def test_tangent_matches_grid_oracle():
    rng = np.random.default_rng(3)
    cases = []
    for d in (2, 3):
        for r in (1, 2):
            if r >= d:
                continue
            for _ in range(8):
                cases.append((d, r))
    for d, r in cases:
        V = orthonormalize(rng.normal(size=(d, r)))
        x, w = rng.normal(size=d) * 2, rng.normal(size=d)
        got = tangent_dist_sq(x, w, V)
        want = grid_tangent_sq(x.tolist(), w.tolist(), V.matrix.tolist())
        assert got == pytest.approx(want, abs=1e-6)


def test_tangent_matches_loop_oracle():
    rng = np.random.default_rng(4)
    for _ in range(25):
        d = int(rng.integers(2, 9))
        r = int(rng.integers(0, d))
        V = (orthonormalize(rng.normal(size=(d, r))) if r else TangentBasis.empty(d))
        x, w = rng.normal(size=d), rng.normal(size=d)
        want = naive_tangent_sq(x.tolist(), w.tolist(), V.matrix.tolist())
        assert tangent_dist_sq(x, w, V) == pytest.approx(want, abs=1e-10)
        assert naive_euclidean_sq(x.tolist(), w.tolist()) == pytest.approx(
            euclidean_sq(x, w), abs=1e-10)


def test_tangent_residual_form_agrees_at_orthonormal_v():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d, r = 6, 2
        V = orthonormalize(rng.normal(size=(d, r)))
        x, w = rng.normal(size=d), rng.normal(size=d)
        assert tangent_residual_sq(x, w, V.matrix) == pytest.approx(
            tangent_dist_sq(x, w, V), abs=1e-12)


def test_basis_validation():
    with pytest.raises(SchemaError):
        TangentBasis(np.array([[1.0, 1.0], [0.0, 0.0]]))  # not orthonormal
    with pytest.raises(DimensionMismatchError):
        TangentBasis(np.zeros((2, 3)))  # more columns than rows
    b = TangentBasis(np.eye(3)[:, :2])
    assert b.dim == 3 and b.r == 2


def test_orthonormalize_properties():
    rng = np.random.default_rng(6)
    A = rng.normal(size=(5, 3))
    Q = orthonormalize(A).matrix
    assert np.abs(Q.T @ Q - np.eye(3)).max() < 1e-12
    # span preserved: A's columns are representable in Q
    coeffs = Q.T @ A
    assert np.abs(Q @ coeffs - A).max() < 1e-10
    # an orthonormal input comes back unchanged (positive-diagonal convention)
    Q2 = orthonormalize(Q).matrix
    assert np.abs(Q2 - Q).max() < 1e-12


def test_orthonormalize_rejects_dependent_columns():
    v = np.ones((4, 1))
    A = np.hstack([v, 2 * v])
    with pytest.raises(DegenerateBasisError):
        orthonormalize(A)
