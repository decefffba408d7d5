"""Matrix kernels: LU, ILU(0), triangular solves, norms, file I/O.

Dense factorizations delegate to LAPACK through scipy; the ILU(0) is
written out because no library routine gives the plain unpivoted
zero-fill factorization whose residual the experiments measure.
"""

import warnings

import numpy as np
import scipy.io
import scipy.linalg as sla
import scipy.sparse as sp

from . import spectra
from .exceptions import DimensionMismatch, SingularMatrix, ZeroPivot

# A dense pivot below PIVOT_RTOL * max|a_ij| is treated as singular.
PIVOT_RTOL = 1e-14


class DenseLu:
    """Partially pivoted dense LU, stored in LAPACK's packed form."""

    def __init__(self, lu, piv):
        self.lu = lu
        self.piv = piv
        self.n = lu.shape[0]

    @property
    def l(self):
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def u(self):
        return np.triu(self.lu)

    @property
    def perm(self):
        """Row permutation p such that a[p] = l @ u."""
        p = np.arange(self.n)
        for i, piv_i in enumerate(self.piv):
            p[i], p[piv_i] = p[piv_i], p[i]
        return p


class SparseIlu:
    """Zero-fill incomplete LU factors of a CSR matrix.

    l is unit lower triangular (diagonal stored), u upper triangular.
    Dense copies are built lazily for repeated triangular solves; the
    factored matrices here are coarse-space sized, so this stays cheap.
    """

    def __init__(self, l, u):
        self.l = l
        self.u = u
        self.n = l.shape[0]
        self._ld = None
        self._ud = None

    def _dense_factors(self):
        if self._ld is None:
            self._ld = self.l.toarray()
            self._ud = self.u.toarray()
        return self._ld, self._ud


def lu_factor(a):
    """Dense LU with partial pivoting; raises SingularMatrix on tiny pivots."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    amax = np.abs(a).max() if a.size else 0.0
    if amax == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # lapack warns on exact zero pivots; the check below raises instead
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    if np.abs(np.diag(lu)).min() < PIVOT_RTOL * amax:
        raise SingularMatrix(
            f"pivot below {PIVOT_RTOL:g} * max|a| during factorization")
    return DenseLu(lu, piv)


def ilu0(a):
    """ILU(0): incomplete LU restricted to the sparsity pattern of a.

    Standard row-wise (IKJ) elimination. A zero diagonal pivot raises
    ZeroPivot; no perturbation or shifting is ever applied, because the
    experiments measure the residual of the plain factorization.
    """
    if not sp.issparse(a):
        raise DimensionMismatch("ilu0 expects a sparse matrix")
    a = a.tocsr().copy()
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    a.sort_indices()
    n = a.shape[0]
    indptr, indices, data = a.indptr, a.indices, a.data

    diag = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        hit = np.searchsorted(indices[indptr[i]:indptr[i + 1]], i)
        pos = indptr[i] + hit
        if pos < indptr[i + 1] and indices[pos] == i:
            diag[i] = pos
    if np.any(diag < 0):
        raise ZeroPivot("diagonal entry missing from the sparsity pattern")

    for i in range(n):
        start, end = indptr[i], indptr[i + 1]
        cols_i = indices[start:end]
        for kp in range(start, end):
            k = indices[kp]
            if k >= i:
                break
            pivot = data[diag[k]]
            if pivot == 0.0:
                raise ZeroPivot(f"zero pivot at row {k}")
            lik = data[kp] / pivot
            data[kp] = lik
            # subtract lik * U(k, j) on the entries of row i that the
            # pattern actually holds
            u_start, u_end = diag[k] + 1, indptr[k + 1]
            if u_start == u_end:
                continue
            u_cols = indices[u_start:u_end]
            where = np.searchsorted(cols_i, u_cols)
            ok = (where < cols_i.size)
            ok[ok] = cols_i[where[ok]] == u_cols[ok]
            data[start + where[ok]] -= lik * data[u_start:u_end][ok]
        if data[diag[i]] == 0.0:
            raise ZeroPivot(f"zero pivot at row {i}")

    lower = sp.tril(a, k=-1, format="csr") + sp.eye(n, format="csr")
    upper = sp.triu(a, k=0, format="csr")
    return SparseIlu(lower.tocsr(), upper.tocsr())


def solve_lu(factors, b):
    """Solve with previously computed factors; b may be a vector or matrix."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factors.n:
        raise DimensionMismatch(
            f"factors of size {factors.n} cannot solve shape {b.shape}")
    if isinstance(factors, DenseLu):
        return sla.lu_solve((factors.lu, factors.piv), b, check_finite=False)
    ld, ud = factors._dense_factors()
    y = sla.solve_triangular(ld, b, lower=True, unit_diagonal=True,
                             check_finite=False)
    return sla.solve_triangular(ud, y, lower=False, check_finite=False)


def two_norm(a):
    """Spectral norm (largest singular value)."""
    if sp.issparse(a):
        a = a.toarray()
    return float(spectra.svd_values(a)[0])


def write_matrix(path, a):
    """Write a dense or sparse matrix in Matrix Market format."""
    if sp.issparse(a):
        scipy.io.mmwrite(str(path), a.tocoo())
    else:
        scipy.io.mmwrite(str(path), np.atleast_2d(np.asarray(a, dtype=float)))


def read_matrix(path):
    """Read a Matrix Market file; returns ndarray (array format) or CSR."""
    m = scipy.io.mmread(str(path))
    if sp.issparse(m):
        return m.tocsr()
    return np.asarray(m, dtype=float)
