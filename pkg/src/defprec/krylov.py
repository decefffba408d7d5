"""GMRES with reorthogonalized Arnoldi, plus Ritz-pair extraction.

Full (unrestarted) GMRES: restarting would change the iteration counts
the experiments compare, and failure is defined as exceeding max_it.
The Arnoldi basis and Hessenberg matrix are kept after the solve so the
coarse space construction can harvest approximate eigenvectors from the
same run.
"""

import numpy as np
import scipy.sparse as sp

from . import spectra
from .exceptions import (ComplexRitzVectors, DimensionMismatch, EmptyBasis,
                         InsufficientSubspace)
from .subspace import OrthonormalBasis, orthonormalize

DEFAULT_TOL = 1e-12
DEFAULT_MAX_IT = 300


class ConvergenceHistory:
    """Per-iteration relative residuals of one GMRES run."""

    def __init__(self, relres, converged, iterations, label=""):
        self.relres = np.asarray(relres, dtype=float)
        self.converged = bool(converged)
        self.iterations = int(iterations)
        self.label = label

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("iter,relres\n")
            for k, r in enumerate(self.relres):
                fh.write(f"{k},{r:.16e}\n")

    @staticmethod
    def from_csv(path, label=""):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        relres = rows[:, 1]
        return ConvergenceHistory(relres, relres[-1] <= DEFAULT_TOL,
                                  relres.size - 1, label)


class ArnoldiData:
    """Arnoldi decomposition left behind by a GMRES run.

    basis has m (happy breakdown) or m+1 columns; h is the (m+1) x m
    Hessenberg matrix. op is kept so Ritz residuals can be recomputed
    against the actual operator.
    """

    def __init__(self, op, basis, h, m):
        self.op = op
        self.basis = basis
        self.h = h
        self.m = m


class RitzSet:
    """Approximate eigenpairs lifted from the Krylov subspace."""

    def __init__(self, values, vectors, residuals):
        self.values = values
        self.vectors = vectors
        self.residuals = residuals


def gmres(op, b, tol=DEFAULT_TOL, max_it=DEFAULT_MAX_IT, label=""):
    """Solve op x = b from a zero initial guess.

    Returns (x, ConvergenceHistory, ArnoldiData). The Arnoldi loop uses
    classical Gram-Schmidt applied twice, which keeps the basis
    orthogonal to machine precision while staying BLAS-2 friendly; the
    least squares problem is carried by Givens rotations so the residual
    norm is available every iteration at no extra cost.
    """
    if tol <= 0:
        raise DimensionMismatch("tol must be positive")
    b = np.asarray(b, dtype=float)
    if b.shape != (op.n,):
        raise DimensionMismatch(
            f"rhs shape {b.shape} does not match operator size {op.n}")
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        hist = ConvergenceHistory([0.0], True, 0, label)
        return np.zeros(op.n), hist, ArnoldiData(op, np.zeros((op.n, 0)),
                                                 np.zeros((1, 0)), 0)

    n = op.n
    v = np.empty((n, max_it + 1))
    h = np.zeros((max_it + 1, max_it))
    h_raw = np.zeros((max_it + 1, max_it))
    cs = np.empty(max_it)
    sn = np.empty(max_it)
    g = np.zeros(max_it + 1)
    g[0] = bnorm
    v[:, 0] = b / bnorm
    relres = [1.0]
    converged = False
    breakdown = False
    m = 0

    for k in range(max_it):
        w = op.apply(v[:, k])
        vk = v[:, :k + 1]
        coef = vk.T.dot(w)
        w -= vk.dot(coef)
        corr = vk.T.dot(w)
        w -= vk.dot(corr)
        coef += corr
        wnorm = np.linalg.norm(w)
        h[:k + 1, k] = coef
        h[k + 1, k] = wnorm
        h_raw[:k + 1, k] = coef
        h_raw[k + 1, k] = wnorm

        for i in range(k):
            hi = cs[i] * h[i, k] + sn[i] * h[i + 1, k]
            h[i + 1, k] = -sn[i] * h[i, k] + cs[i] * h[i + 1, k]
            h[i, k] = hi
        denom = np.hypot(h[k, k], h[k + 1, k])
        if denom == 0.0:
            cs[k], sn[k] = 1.0, 0.0
        else:
            cs[k], sn[k] = h[k, k] / denom, h[k + 1, k] / denom
        h[k, k] = denom
        h[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]

        m = k + 1
        relres.append(abs(g[k + 1]) / bnorm)
        if relres[-1] <= tol:
            converged = True
        if wnorm == 0.0:
            # happy breakdown: the Krylov space is invariant and the
            # current least squares solution is exact
            breakdown = True
            converged = True
            break
        v[:, k + 1] = w / wnorm
        if converged:
            break

    y = np.zeros(m)
    # h[:m,:m] now holds the rotated triangular factor
    for i in range(m - 1, -1, -1):
        y[i] = (g[i] - h[i, i + 1:m].dot(y[i + 1:m])) / h[i, i]
    x = v[:, :m].dot(y)

    basis_cols = m if breakdown else m + 1
    hist = ConvergenceHistory(relres, converged, m, label)
    arn = ArnoldiData(op, v[:, :basis_cols].copy(),
                      h_raw[:m + 1, :m].copy(), m)
    return x, hist, arn


def rayleigh_ritz(arn, count):
    """The count Ritz pairs of smallest magnitude from an Arnoldi run.

    Eigenpairs of the leading m x m Hessenberg block, lifted through the
    basis; residuals are recomputed against the operator rather than
    trusted from the Hessenberg recurrence.
    """
    m = arn.m
    if count > m:
        raise InsufficientSubspace(
            f"requested {count} Ritz pairs from a dimension-{m} subspace")
    hm = arn.h[:m, :m]
    theta, u = np.linalg.eig(hm)
    order = np.argsort(np.abs(theta))[:count]
    theta = theta[order]
    u = u[:, order]
    vm = arn.basis[:, :m]
    vectors = vm.dot(u)
    residuals = np.empty(count)
    for i in range(count):
        col = vectors[:, i]
        nrm = np.linalg.norm(col)
        col = col / nrm
        vectors[:, i] = col
        av = arn.op.apply(col.real.copy())
        if np.iscomplexobj(col) and np.abs(col.imag).max() > 0.0:
            av = av + 1j * arn.op.apply(col.imag.copy())
        residuals[i] = np.linalg.norm(av - theta[i] * col)
    return RitzSet(theta, vectors, residuals)


def keep_real_pairs(ritz):
    """Drop Ritz pairs whose value or vector is meaningfully complex.

    The coarse space construction needs real vectors; complex pairs on a
    mildly unsymmetric operator arrive in conjugate pairs and are simply
    not used.
    """
    scale = max(np.abs(ritz.values).max(), 1e-300)
    tol = spectra.REALNESS_FACTOR * scale
    keep = []
    for i in range(ritz.values.size):
        val_ok = abs(ritz.values[i].imag) <= tol
        vec = ritz.vectors[:, i]
        vec_ok = (not np.iscomplexobj(vec)) or np.abs(vec.imag).max() <= 1e-8
        if val_ok and vec_ok:
            keep.append(i)
    if not keep:
        raise ComplexRitzVectors("no real Ritz pairs available")
    keep = np.array(keep)
    return RitzSet(ritz.values[keep].real,
                   np.real(ritz.vectors[:, keep]),
                   ritz.residuals[keep])


def split_coarse_space(ritz, partition, drop_tol=1e-12):
    """Block-diagonal coarse basis from subdomain-restricted Ritz vectors.

    Each Ritz vector is restricted to every subdomain's owner rows and
    the local blocks are orthonormalized independently, so the result
    spans nparts times the information of the plain Ritz basis. Vectors
    must be real; complex input is an error, not silently truncated.
    """
    values = np.asarray(ritz.values)
    vectors = np.asarray(ritz.vectors)
    if np.iscomplexobj(values):
        scale = max(np.abs(values).max(), 1e-300)
        if np.abs(values.imag).max() > spectra.REALNESS_FACTOR * scale:
            raise ComplexRitzVectors("Ritz values have imaginary parts "
                                     "beyond the realness tolerance")
        values = values.real
    if np.iscomplexobj(vectors):
        if np.abs(vectors.imag).max() > 1e-8:
            raise ComplexRitzVectors("Ritz vectors have imaginary parts "
                                     "beyond the realness tolerance")
        vectors = vectors.real
    n, r = vectors.shape

    rows = []
    cols = []
    vals = []
    ncols = 0
    for i in range(partition.nparts):
        owner = partition.owner_sets[i]
        local = vectors[owner, :]
        try:
            block = orthonormalize(local, drop_tol)
        except EmptyBasis:
            continue
        for j in range(block.r):
            rows.append(owner)
            cols.append(np.full(owner.size, ncols + j, dtype=np.int64))
            vals.append(block.q[:, j])
        ncols += block.r
    if ncols == 0:
        raise EmptyBasis("every local block dropped all columns")
    z = sp.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, ncols))
    basis = OrthonormalBasis(z)

    # every original Ritz vector must be reconstructible from the split
    # basis; losing one means the drop tolerance ate a needed direction
    for j in range(r):
        vj = vectors[:, j]
        resid = vj - basis.dot(basis.tdot(vj))
        if np.linalg.norm(resid) > 1e-9 * max(np.linalg.norm(vj), 1e-300):
            raise InsufficientSubspace(
                f"Ritz vector {j} not contained in the split coarse space")
    return basis
