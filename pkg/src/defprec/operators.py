"""Matrix-free linear operators.

Everything downstream (preconditioners, Krylov solvers, spectrum checks)
works through this thin wrapper so that a dense matrix, a composed
product, or a domain-decomposition solve all look the same: a square
action ``x -> op(x)`` on vectors of length ``n``.
"""

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionMismatch, TooLargeToMaterialize

# Dense materialization above this size is almost certainly a mistake
# (column-by-column application plus an O(n^3) eigensolve downstream).
MATERIALIZE_LIMIT = 2100


class LinearOperator:
    """Square linear action with an explicit dimension and a kind tag.

    ``kind`` records how the operator was built ("matrix", "composed",
    "deflation", ...) so reports and error messages can say what they
    were looking at without inspecting closures.
    """

    def __init__(self, n, apply_fn, kind="matrix"):
        self.n = int(n)
        self._apply = apply_fn
        self.kind = kind

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch(
                f"operator of size {self.n} applied to shape {x.shape}")
        return self._apply(x)

    def __call__(self, x):
        return self.apply(x)

    def materialize(self):
        """Assemble the dense matrix by applying to the identity columns.

        Guarded: refuses above ``MATERIALIZE_LIMIT`` rows, since callers
        at that scale invariably wanted a matrix-free path instead.
        """
        if self.n > MATERIALIZE_LIMIT:
            raise TooLargeToMaterialize(
                f"n = {self.n} exceeds materialization limit {MATERIALIZE_LIMIT}")
        out = np.empty((self.n, self.n))
        e = np.zeros(self.n)
        for j in range(self.n):
            e[j] = 1.0
            out[:, j] = self._apply(e)
            e[j] = 0.0
        return out


def from_matrix(a):
    """Wrap a dense or sparse square matrix."""
    if sp.issparse(a):
        a = a.tocsr()
        n, m = a.shape
        if n != m:
            raise DimensionMismatch(f"matrix is {n} x {m}, not square")
        return LinearOperator(n, lambda x: a.dot(x), kind="matrix")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix has shape {a.shape}, not square")
    return LinearOperator(a.shape[0], lambda x: a.dot(x), kind="matrix")


def from_diagonal(d):
    d = np.asarray(d, dtype=float)
    if d.ndim != 1:
        raise DimensionMismatch("diagonal must be a 1-d array")
    return LinearOperator(d.size, lambda x: d * x, kind="matrix")


def identity(n):
    return LinearOperator(n, lambda x: x.copy(), kind="matrix")


def compose(outer, inner):
    """Product operator ``x -> outer(inner(x))``."""
    if outer.n != inner.n:
        raise DimensionMismatch(
            f"cannot compose operators of sizes {outer.n} and {inner.n}")
    return LinearOperator(outer.n, lambda x: outer.apply(inner.apply(x)),
                          kind="composed")
