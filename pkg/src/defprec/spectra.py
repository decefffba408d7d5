"""Dense eigenvalue and singular value routines.

These are the ground truth for every spectral claim in the package:
preconditioner spectra, interval certification, and subspace angles all
come back to eigh / eig / svd on materialized matrices.
"""

import numpy as np

from .exceptions import DimensionMismatch, NoConvergence, NotSymmetric

# |Im(lambda)| <= REALNESS_FACTOR * scale classifies an eigenvalue as real.
# The perturbation intervals are conditional on a real spectrum, so this
# threshold decides when they apply at all.
REALNESS_FACTOR = 1e-8

SYMMETRY_RTOL = 1e-12


class EigenDecomposition:
    """Eigenvalues plus (for the symmetric path) orthonormal eigenvectors.

    values are real ascending when vectors is not None; the general path
    stores complex values in LAPACK order and no vectors.
    """

    def __init__(self, values, vectors=None):
        self.values = values
        self.vectors = vectors

    @property
    def is_symmetric_path(self):
        return self.vectors is not None


def _square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def eig_symmetric(a):
    """Full symmetric eigendecomposition, values ascending.

    Rejects matrices that are not symmetric to within a relative
    Frobenius tolerance rather than silently symmetrizing.
    """
    a = _square(np.asarray(a, dtype=float))
    nrm = np.linalg.norm(a, "fro")
    if nrm > 0 and np.linalg.norm(a - a.T, "fro") > SYMMETRY_RTOL * nrm:
        raise NotSymmetric("matrix is not symmetric to relative tolerance "
                           f"{SYMMETRY_RTOL:g}")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as err:
        raise NoConvergence(str(err)) from err
    return EigenDecomposition(w, v)


def eig_general(a):
    """Eigenvalues of a general square matrix, with imaginary parts kept.

    No vectors are computed; downstream code needs the values only, and
    the imaginary parts to test the realness hypotheses.
    """
    a = _square(np.asarray(a, dtype=float))
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as err:
        raise NoConvergence(str(err)) from err
    return EigenDecomposition(np.asarray(w, dtype=complex), None)


def svd_values(a):
    """Singular values, descending."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.size == 0:
        raise DimensionMismatch("empty matrix has no singular values")
    return np.linalg.svd(a, compute_uv=False)


def spectrum_is_real(values, scale):
    """Whether every eigenvalue is real to within REALNESS_FACTOR * scale."""
    values = np.asarray(values)
    if not np.iscomplexobj(values):
        return True
    tol = REALNESS_FACTOR * max(scale, 1e-300)
    return bool(np.max(np.abs(values.imag)) <= tol)
