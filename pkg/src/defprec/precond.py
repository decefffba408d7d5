"""Projection matrix and preconditioner operators.

Everything is assembled from a coarse basis Z and the projection matrix
E = Z^T A Z. Exact coarse solves go through an LU of E; approximate
solves through ILU(0) factors of E or an explicitly supplied inverse.
The three preconditioners differ only in how the coarse correction is
recombined:

    deflation           x - A Z E^{-1} Z^T x
    coarse correction   x + Z E^{-1} Z^T x
    adapted deflation   x - A Z E^{-1} Z^T x + Z E^{-1} Z^T x
"""

import numpy as np
import scipy.sparse as sp

from . import matrices
from .exceptions import (DimensionMismatch, SingularLocalBlock,
                         SingularMatrix, SingularProjection)
from .operators import LinearOperator, compose, from_matrix
from .subspace import OrthonormalBasis

# Keep the dense A*Z block cached when it stays below this many entries;
# above it the deflation applies recompute A*(Z c) on the fly.
AZ_CACHE_LIMIT = 8_000_000

_CHUNK = 256


class CoarseSolve:
    """Projection matrix E together with a way to apply its inverse.

    mode is "exact" (LU of E), "ilu0" (zero-fill factors of sparse E) or
    "explicit" (a dense approximate inverse supplied by the caller).
    az, when present, caches the dense A*Z block used to build E.
    """

    def __init__(self, e, mode, solver, z, az=None):
        self.e = e
        self.mode = mode
        self._solver = solver
        self.z = z
        self.az = az
        self.r = z.r

    def solve(self, y):
        if self.mode == "explicit":
            return self._solver.dot(y)
        return matrices.solve_lu(self._solver, y)


def assemble_projection(a_op, z):
    """Dense E = Z^T A Z and the A*Z block, assembled column by column."""
    if a_op.n != z.n:
        raise DimensionMismatch(
            f"operator size {a_op.n} does not match basis rows {z.n}")
    az = np.empty((z.n, z.r))
    for lo in range(0, z.r, _CHUNK):
        hi = min(lo + _CHUNK, z.r)
        block = (z.q[:, lo:hi].toarray() if z.is_sparse
                 else z.q[:, lo:hi])
        for j in range(hi - lo):
            az[:, lo + j] = a_op.apply(block[:, j])
    e = z.tdot(az)
    e = np.asarray(e)
    return e, az


def build_projection(a_op, z, mode="exact"):
    """Assemble E = Z^T A Z and prepare the requested inverse mode.

    "exact" LU-factors E densely. "ilu0" drops the exact zeros of the
    assembled E to recover its block-sparse pattern and factors that
    without fill-in.
    """
    e, az = assemble_projection(a_op, z)
    if az.size > AZ_CACHE_LIMIT:
        az = None
    if mode == "exact":
        try:
            solver = matrices.lu_factor(e)
        except SingularMatrix as err:
            raise SingularProjection(str(err)) from err
        return CoarseSolve(e, "exact", solver, z, az)
    if mode == "ilu0":
        e_sparse = sp.csr_matrix(e)
        e_sparse.eliminate_zeros()
        solver = matrices.ilu0(e_sparse)
        return CoarseSolve(e_sparse, "ilu0", solver, z, az)
    raise DimensionMismatch(f"unknown coarse solve mode: {mode!r}")


def explicit_coarse(a_op, z, h_inv):
    """CoarseSolve applying a caller-supplied approximate inverse."""
    e, az = assemble_projection(a_op, z)
    h_inv = np.asarray(h_inv, dtype=float)
    if h_inv.shape != (z.r, z.r):
        raise DimensionMismatch(
            f"inverse must be {z.r} x {z.r}, got {h_inv.shape}")
    if az.size > AZ_CACHE_LIMIT:
        az = None
    return CoarseSolve(e, "explicit", h_inv, z, az)


def _apply_az(a_op, cs, c):
    if cs.az is not None:
        return cs.az.dot(c)
    return a_op.apply(cs.z.dot(c))


def deflation_op(a_op, z, cs):
    """x - A Z E^{-1} Z^T x."""

    def apply(x):
        c = cs.solve(z.tdot(x))
        return x - _apply_az(a_op, cs, c)

    return LinearOperator(a_op.n, apply, kind="deflation")


def coarse_correction_op(z, cs):
    """x + Z E^{-1} Z^T x."""

    def apply(x):
        return x + z.dot(cs.solve(z.tdot(x)))

    return LinearOperator(z.n, apply, kind="coarse-correction")


def adapted_deflation_op(a_op, z, cs):
    """x - A Z E^{-1} Z^T x + Z E^{-1} Z^T x."""

    def apply(x):
        c = cs.solve(z.tdot(x))
        return x - _apply_az(a_op, cs, c) + z.dot(c)

    return LinearOperator(a_op.n, apply, kind="adapted-deflation")


def variant_op(variant, a_op, z, cs):
    """Dispatch on the single-letter variant tag used by the drivers."""
    if variant == "D":
        return deflation_op(a_op, z, cs)
    if variant == "C":
        return coarse_correction_op(z, cs)
    if variant == "A":
        return adapted_deflation_op(a_op, z, cs)
    raise DimensionMismatch(f"unknown preconditioner variant: {variant!r}")


class InexactSet:
    """The three preconditioners built from an approximate coarse inverse,
    plus the perturbation matrices the interval bounds are stated in."""

    def __init__(self, pd, pc, pa, rho1, rho2, e):
        self.pd = pd
        self.pc = pc
        self.pa = pa
        self.rho1 = rho1
        self.rho2 = rho2
        self.e = e
        self.norm_rho1 = matrices.two_norm(rho1) if rho1.size else 0.0
        self.norm_rho2 = matrices.two_norm(rho2) if rho2.size else 0.0


def inexact_variants(a_op, v, h_inv):
    """Preconditioners with E^{-1} replaced by an explicit approximation.

    Also reports rho1 = E H^{-1} - I and rho2 = H^{-1} E - I, whose norms
    control how far the preconditioned spectra can drift.
    """
    cs = explicit_coarse(a_op, v, h_inv)
    eye = np.eye(v.r)
    rho1 = cs.e.dot(cs._solver) - eye
    rho2 = cs._solver.dot(cs.e) - eye
    pd = deflation_op(a_op, v, cs)
    pc = coarse_correction_op(v, cs)
    pa = adapted_deflation_op(a_op, v, cs)
    return InexactSet(pd, pc, pa, rho1, rho2, cs.e)


class RasPreconditioner(LinearOperator):
    """Restricted additive Schwarz: overlapping reads, owner-only writes.

    Each subdomain solves its overlapping principal block exactly; the
    results are glued by keeping only the owner rows, so every entry of
    the output is written by exactly one subdomain.
    """

    def __init__(self, a, partition):
        a = a.tocsr()
        n = a.shape[0]
        self.partition = partition
        self.factors = []
        self.reads = []
        self.writes_global = []
        self.writes_local = []
        for i in range(partition.nparts):
            idx = partition.overlap_sets[i]
            block = a[idx][:, idx].toarray()
            try:
                self.factors.append(matrices.lu_factor(block))
            except SingularMatrix as err:
                raise SingularLocalBlock(
                    f"subdomain {i} block is singular") from err
            owner = partition.owner_sets[i]
            local_of = {g: k for k, g in enumerate(idx)}
            self.reads.append(idx)
            self.writes_global.append(owner)
            self.writes_local.append(
                np.array([local_of[g] for g in owner], dtype=np.int64))
        super().__init__(n, self._apply_ras, kind="ras")

    def _apply_ras(self, x):
        y = np.zeros_like(x)
        for i in range(self.partition.nparts):
            local = matrices.solve_lu(self.factors[i], x[self.reads[i]])
            y[self.writes_global[i]] = local[self.writes_local[i]]
        return y


def ras_build(a, partition):
    return RasPreconditioner(a, partition)


def ras_system(m_ras, a):
    """The one-level preconditioned operator x -> M^{-1} A x."""
    a_op = from_matrix(a)
    return LinearOperator(a_op.n, lambda x: m_ras.apply(a_op.apply(x)),
                          kind="composed")


def two_level_op(m_ras, a, variant, z, cs):
    """Two-level operator P(M^{-1}A) * (M^{-1}A) for GMRES.

    The coarse solve cs must have been built from the one-level operator
    (ras_system), since the coarse space targets the spectrum that RAS
    leaves behind.
    """
    ahat = ras_system(m_ras, a)
    p = variant_op(variant, ahat, z, cs)
    op = compose(p, ahat)
    op.kind = "two-level"
    return op
