"""Orthonormal bases, subspace angles, and eigen-residual measures.

The distance between the ideal invariant subspace and whatever basis a
preconditioner was actually built from drives every perturbation bound,
so angles here are computed from singular values of the cross products
and nothing else.
"""

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import spectra
from .exceptions import (AngleDegenerate, DimensionMismatch, EmptyBasis,
                         FullSpace)

DROP_TOL = 1e-12


class OrthonormalBasis:
    """Column-orthonormal matrix spanning a subspace.

    q is a dense ndarray, or CSR for the block-diagonal split bases whose
    dense form would be mostly zeros.
    """

    def __init__(self, q):
        self.q = q
        self.n, self.r = q.shape

    @property
    def is_sparse(self):
        return sp.issparse(self.q)

    def to_dense(self):
        return self.q.toarray() if self.is_sparse else self.q

    def dot(self, x):
        return self.q.dot(x)

    def tdot(self, x):
        """q^T x; works for both storage forms."""
        return self.q.T.dot(x)


class AngleReport:
    """Extreme principal angle between two equal-dimension subspaces."""

    def __init__(self, sin_theta, cos_theta):
        self.sin_theta = float(sin_theta)
        self.cos_theta = float(cos_theta)

    @property
    def dist(self):
        return self.sin_theta

    @property
    def tan_theta(self):
        if self.cos_theta == 0.0:
            raise AngleDegenerate("cos(theta) = 0, tangent undefined")
        return self.sin_theta / self.cos_theta


def orthonormalize(cols, drop_tol=DROP_TOL):
    """Gram-Schmidt with a second projection pass per column.

    Columns whose remainder falls below drop_tol times their original
    norm are dropped, so the result has the numerical rank of the input.
    """
    cols = np.asarray(cols, dtype=float)
    if cols.ndim == 1:
        cols = cols.reshape(-1, 1)
    n = cols.shape[0]
    if n < 1:
        raise DimensionMismatch("need at least one row")
    kept = []
    for j in range(cols.shape[1]):
        v = cols[:, j].copy()
        v0 = np.linalg.norm(v)
        if v0 == 0.0:
            continue
        if kept:
            q = np.column_stack(kept)
            v -= q.dot(q.T.dot(v))
            v -= q.dot(q.T.dot(v))
        nv = np.linalg.norm(v)
        if nv < drop_tol * v0:
            continue
        kept.append(v / nv)
    if not kept:
        raise EmptyBasis("all columns dropped during orthonormalization")
    return OrthonormalBasis(np.column_stack(kept))


def complement(basis):
    """Orthonormal basis of the orthogonal complement."""
    if basis.is_sparse:
        q = basis.to_dense()
    else:
        q = basis.q
    n, r = q.shape
    if r >= n:
        raise FullSpace("basis already spans the whole space")
    full, _ = sla.qr(q, mode="full")
    # QR may flip the leading block's signs; only the trailing columns
    # matter and they span the complement regardless.
    return OrthonormalBasis(full[:, r:])


def angle(z, v):
    """Largest principal angle between two equal-dimension subspaces.

    sin from the cross product with the complement, cos from the direct
    cross product; both are exact characterizations, not 1 - cos fudges.
    """
    if z.n != v.n:
        raise DimensionMismatch(f"ambient dimensions differ: {z.n} vs {v.n}")
    if z.r != v.r:
        raise DimensionMismatch(
            f"angle needs equal subspace dimensions, got {z.r} and {v.r}")
    v_perp = complement(v)
    zq = z.to_dense()
    sin_theta = spectra.svd_values(zq.T.dot(v_perp.q))[0]
    cos_theta = spectra.svd_values(zq.T.dot(v.to_dense()))[-1]
    return AngleReport(min(sin_theta, 1.0), min(cos_theta, 1.0))


def rotated_basis(v, sin_theta, rng):
    """Basis making angle theta with v, every principal angle equal.

    Mixes v with a random orthonormal block from its complement:
    z = v cos(theta) + w sin(theta). Useful for bound tests that need
    the angle pinned exactly rather than sampled.
    """
    if not 0.0 <= sin_theta < 1.0:
        raise DimensionMismatch("sin(theta) must lie in [0, 1)")
    vq = v.to_dense()
    if sin_theta == 0.0:
        return OrthonormalBasis(vq.copy())
    w_perp = complement(v)
    g = rng.standard_normal((v.n - v.r, v.r))
    w = orthonormalize(w_perp.q.dot(g))
    if w.r < v.r:
        raise EmptyBasis("random complement block lost rank")
    cos_theta = np.sqrt(1.0 - sin_theta ** 2)
    return OrthonormalBasis(vq * cos_theta + w.q * sin_theta)


def rayleigh_ritz_basis(a_op, basis):
    """Ritz pairs of a_op restricted to span(basis).

    Projects, solves the small symmetric eigenproblem, and lifts the
    vectors back; values ascending.
    """
    q = basis.to_dense()
    aq = np.column_stack([a_op.apply(q[:, j]) for j in range(basis.r)])
    small = q.T.dot(aq)
    small = 0.5 * (small + small.T)
    dec = spectra.eig_symmetric(small)
    return dec.values, OrthonormalBasis(q.dot(dec.vectors))


def res_max(a_op, values, vectors):
    """Largest eigen-residual max_i ||A v_i - lambda_i v_i||_2.

    Cheap proxy for the subspace distance when the true invariant
    subspace is unavailable.
    """
    values = np.asarray(values)
    q = vectors.to_dense() if isinstance(vectors, OrthonormalBasis) else vectors
    if q.shape[1] != values.size:
        raise DimensionMismatch("one value per vector required")
    worst = 0.0
    for i in range(values.size):
        v = q[:, i]
        r = a_op.apply(v) - values[i] * v
        worst = max(worst, float(np.linalg.norm(r)))
    return worst
