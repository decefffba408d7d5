"""Test problem generators.

Two families: a diagonal matrix whose seven smallest eigenvalues sit far
below the rest (the targeted cluster every preconditioner should
remove), and a heterogeneous diffusion boundary value problem on the
unit square discretized by 5-point finite differences with harmonic
coefficient averaging, plus the structured partitioning the Schwarz
preconditioner runs on.
"""

import numpy as np
import scipy.sparse as sp

from . import subspace
from .exceptions import (DimensionMismatch, NonPositiveViscosity,
                         UnsupportedPartCount)
from .operators import from_diagonal

SMALL_COUNT = 7
FULL_SIZE = 2000
BVP_GRID = 101

_TILE_SHAPES = {16: (4, 4), 32: (8, 4), 64: (8, 8), 128: (16, 8)}


class DiagonalTestCase:
    """Diagonal system with a cluster of tiny eigenvalues.

    Entries: 1e-7 ... 1e-1, then 1, then the arithmetic tail 10.0, 10.1,
    ... The full case has 2000 entries ending at 209.1; truncation keeps
    the head and shortens the tail. The exact invariant basis for the
    small cluster is the leading identity columns.
    """

    def __init__(self, diag):
        self.diag = np.asarray(diag, dtype=float)
        self.n = self.diag.size
        self.rhs = np.ones(self.n)
        self.small_count = SMALL_COUNT
        v = np.zeros((self.n, SMALL_COUNT))
        v[np.arange(SMALL_COUNT), np.arange(SMALL_COUNT)] = 1.0
        self.exact_basis = subspace.OrthonormalBasis(v)

    def matrix(self):
        return np.diag(self.diag)

    def op(self):
        return from_diagonal(self.diag)


def diag_case(scale="full"):
    """Build the diagonal test case.

    scale is "full" (n = 2000) or an integer n >= 15 for a truncated
    version with the same head and a shorter tail.
    """
    if scale == "full":
        n = FULL_SIZE
    else:
        n = int(scale)
        if n < 15:
            raise DimensionMismatch("truncated case needs n >= 15")
    head = [10.0 ** k for k in range(-SMALL_COUNT, 0)]
    tail = 10.0 + 0.1 * np.arange(n - SMALL_COUNT - 1)
    diag = np.concatenate([head, [1.0], tail])
    assert diag.size == n
    return DiagonalTestCase(diag)


def perturb_basis(v, eps, rng):
    """Entrywise uniform(0,1)/eps noise on a basis, reorthonormalized.

    Returns the perturbed basis and its angle to the original; larger
    eps means smaller perturbation.
    """
    if not eps > 0:
        raise DimensionMismatch("eps must be positive")
    noise = rng.random((v.n, v.r)) / eps
    z = subspace.orthonormalize(v.to_dense() + noise)
    if z.r != v.r:
        raise DimensionMismatch("perturbation collapsed the basis rank")
    return z, subspace.angle(z, v)


class ViscosityField:
    """Positive coefficient field kappa(x, y) on the unit square."""

    def __init__(self, kind, fn):
        self.kind = kind
        self._fn = fn

    def __call__(self, x, y):
        return self._fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def skyscraper_field():
    """Checkerboard of tall towers: kappa = 1e4 (floor(9y) + 1) on cells
    where floor(9x) and floor(9y) are both even, 1 elsewhere."""

    def fn(x, y):
        fx = np.floor(9.0 * x)
        fy = np.floor(9.0 * y)
        tower = (np.mod(fx, 2) == 0) & (np.mod(fy, 2) == 0)
        return np.where(tower, 1e4 * (fy + 1.0), 1.0)

    return ViscosityField("skyscraper", fn)


def continuous_field():
    """Smooth large-amplitude field, folded positive.

    The raw sine takes negative values, which would break positive
    definiteness; the magnitude is used instead, floored at 1.
    """

    def fn(x, y):
        raw = 1e6 / 3.0 * np.sin(4.0 * np.pi * (x + y) + 0.1)
        return np.maximum(np.abs(raw), 1.0)

    return ViscosityField("continuous", fn)


def field_by_name(name):
    if name == "skyscraper":
        return skyscraper_field()
    if name == "continuous":
        return continuous_field()
    raise DimensionMismatch(f"unknown viscosity field: {name!r}")


def field_on_grid(field, m=BVP_GRID):
    """kappa sampled at the m x m interior nodes, for plotting."""
    h = 1.0 / (m + 1)
    xs = h * np.arange(1, m + 1)
    x, y = np.meshgrid(xs, xs)
    return field(x, y)


def assemble_bvp(field, m=BVP_GRID):
    """5-point finite difference discretization of -div(kappa grad u) = 1.

    Homogeneous Dirichlet rows eliminated; interface coefficients are
    harmonic means of the nodal kappa values, so the matrix stays
    symmetric positive definite for any positive field. Returns the CSR
    matrix (n = m^2) and the all-ones right hand side.
    """
    h = 1.0 / (m + 1)
    xs = h * np.arange(m + 2)
    x, y = np.meshgrid(xs, xs)  # [iy, ix] layout
    k = field(x, y)
    if np.any(~(k > 0.0)) or not np.all(np.isfinite(k)):
        raise NonPositiveViscosity("viscosity must be positive and finite")

    def harm(a, b):
        return 2.0 * a * b / (a + b)

    kc = k[1:-1, 1:-1]
    w_e = harm(kc, k[1:-1, 2:])
    w_w = harm(kc, k[1:-1, :-2])
    w_n = harm(kc, k[2:, 1:-1])
    w_s = harm(kc, k[:-2, 1:-1])

    n = m * m
    idx = np.arange(n).reshape(m, m)
    inv_h2 = 1.0 / (h * h)

    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [((w_e + w_w + w_n + w_s) * inv_h2).ravel()]

    rows.append(idx[:, :-1].ravel())
    cols.append(idx[:, 1:].ravel())
    vals.append((-w_e[:, :-1] * inv_h2).ravel())

    rows.append(idx[:, 1:].ravel())
    cols.append(idx[:, :-1].ravel())
    vals.append((-w_w[:, 1:] * inv_h2).ravel())

    rows.append(idx[:-1, :].ravel())
    cols.append(idx[1:, :].ravel())
    vals.append((-w_n[:-1, :] * inv_h2).ravel())

    rows.append(idx[1:, :].ravel())
    cols.append(idx[:-1, :].ravel())
    vals.append((-w_s[1:, :] * inv_h2).ravel())

    a = sp.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    a.sum_duplicates()
    a.sort_indices()
    return a, np.ones(n)


class Partition:
    """Non-overlapping owner tiling plus 2-layer overlapping read sets."""

    def __init__(self, nparts, owner, owner_sets, overlap_sets):
        self.nparts = nparts
        self.owner = owner
        self.owner_sets = owner_sets
        self.overlap_sets = overlap_sets


def tile_partition(m, nparts):
    """Rectangular tiles on the m x m grid, grown by 2 overlap rings.

    Owner tiles partition the grid exactly; each overlap set is the tile
    plus two full rings of surrounding nodes, clipped at the boundary, so
    an interior w x h tile reads (w+4)(h+4) nodes.
    """
    if nparts not in _TILE_SHAPES:
        raise UnsupportedPartCount(
            f"supported part counts: {sorted(_TILE_SHAPES)}, got {nparts}")
    px, py = _TILE_SHAPES[nparts]
    x_chunks = np.array_split(np.arange(m), px)
    y_chunks = np.array_split(np.arange(m), py)

    owner = np.empty(m * m, dtype=np.int64)
    owner_sets = []
    overlap_sets = []
    for jy, ys in enumerate(y_chunks):
        for jx, xs in enumerate(x_chunks):
            part = jy * px + jx
            mask = np.zeros((m, m), dtype=bool)
            mask[np.ix_(ys, xs)] = True
            tile = np.flatnonzero(mask.ravel())
            owner[tile] = part
            owner_sets.append(tile)
            grown = np.zeros((m, m), dtype=bool)
            grown[max(ys[0] - 2, 0):ys[-1] + 3,
                  max(xs[0] - 2, 0):xs[-1] + 3] = True
            overlap_sets.append(np.flatnonzero(grown.ravel()))
    return Partition(nparts, owner, owner_sets, overlap_sets)
