"""Squared distance measures used by every prototype variant.

All distances are *squared* residual norms: the relative-distance cost and
the inverse-distance risk weights only ever need relative magnitudes, so no
square roots appear anywhere. The tangent measure is the squared residual
after projecting onto a prototype's affine subspace ``{w + V theta}``.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateBasisError, DimensionMismatchError, SchemaError

ORTHO_TOL = 1e-8


class TangentBasis:
    """A d x r matrix with orthonormal columns (r may be 0)."""

    def __init__(self, matrix: np.ndarray, check: bool = True):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise DimensionMismatchError(f"tangent basis must be 2-D, got shape {m.shape}")
        if m.shape[1] > m.shape[0]:
            raise DimensionMismatchError(
                f"tangent dimension {m.shape[1]} exceeds feature dimension {m.shape[0]}")
        if check and m.shape[1] > 0:
            gram_err = float(np.abs(m.T @ m - np.eye(m.shape[1])).max())
            if gram_err > ORTHO_TOL:
                raise SchemaError(
                    f"tangent basis columns are not orthonormal (max |V'V - I| = {gram_err:.3e})")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def r(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def empty(cls, dim: int) -> "TangentBasis":
        return cls(np.zeros((dim, 0)), check=False)


def _conform(x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape != w.shape or x.ndim != 1:
        raise DimensionMismatchError(f"vectors do not conform: {x.shape} vs {w.shape}")
    return x, w


def euclidean_sq(x: np.ndarray, w: np.ndarray) -> float:
    """Sum of squared coordinate differences."""
    x, w = _conform(x, w)
    r = x - w
    return float(np.dot(r, r))


def relevance_dist_sq(x: np.ndarray, w: np.ndarray, omega: np.ndarray) -> float:
    """Squared norm of Omega(x - w)."""
    x, w = _conform(x, w)
    omega = np.asarray(omega, dtype=np.float64)
    if omega.ndim != 2 or omega.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"relevance matrix shape {omega.shape} does not conform to dimension {x.shape[0]}")
    z = omega @ (x - w)
    return float(np.dot(z, z))


def tangent_dist_sq(x: np.ndarray, w: np.ndarray, basis) -> float:
    """Squared distance from x to the affine subspace through w spanned by the basis."""
    x, w = _conform(x, w)
    V = basis.matrix if isinstance(basis, TangentBasis) else TangentBasis(basis).matrix
    if V.shape[0] != x.shape[0]:
        raise DimensionMismatchError(
            f"basis dimension {V.shape[0]} does not match vectors of dimension {x.shape[0]}")
    r = x - w
    resid = r - V @ (V.T @ r)
    return float(np.dot(resid, resid))


def tangent_residual_sq(x: np.ndarray, w: np.ndarray, V: np.ndarray) -> float:
    """``|r|^2 - |V'r|^2`` for a raw (not necessarily orthonormal) V.

    Equals :func:`tangent_dist_sq` whenever V is orthonormal; used by the
    trainer and gradient checks, where intermediate V drifts off the manifold.
    """
    x, w = _conform(x, w)
    r = x - w
    p = np.asarray(V, dtype=np.float64).T @ r
    return float(np.dot(r, r) - np.dot(p, p))


def orthonormalize(V: np.ndarray) -> TangentBasis:
    """Span-preserving orthonormalization (QR with positive diagonal).

    An already-orthonormal input comes back unchanged up to float error.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {V.shape}")
    d, r = V.shape
    if r == 0:
        return TangentBasis.empty(d)
    if r > d:
        raise DimensionMismatchError(f"cannot orthonormalize {r} columns in dimension {d}")
    q, rmat = np.linalg.qr(V)
    diag = np.diag(rmat)
    if np.any(np.abs(diag) < 1e-10 * max(1.0, float(np.abs(V).max()))):
        raise DegenerateBasisError(
            f"columns are linearly dependent (|R| diagonal min = {float(np.abs(diag).min()):.3e})")
    q = q * np.where(diag < 0, -1.0, 1.0)
    return TangentBasis(q, check=False)
