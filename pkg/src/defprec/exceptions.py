"""Exception types shared across the package."""


class DefprecError(Exception):
    """Base class for all defprec errors."""


class DimensionMismatch(DefprecError):
    """Operands have incompatible shapes."""


class SingularMatrix(DefprecError):
    """A pivot fell below the singularity threshold during factorization."""


class ZeroPivot(DefprecError):
    """ILU(0) hit an exactly zero diagonal pivot."""


class SingularProjection(DefprecError):
    """The coarse projection matrix could not be factored."""


class SingularLocalBlock(DefprecError):
    """A subdomain block of the Schwarz preconditioner is singular."""


class NotSymmetric(DefprecError):
    """Symmetric eigensolver called on an unsymmetric matrix."""


class NoConvergence(DefprecError):
    """An iterative eigenvalue sweep failed to converge."""


class EmptyBasis(DefprecError):
    """Orthonormalization dropped every column."""


class FullSpace(DefprecError):
    """The orthogonal complement of a full basis is empty."""


class AngleDegenerate(DefprecError):
    """Subspace angle has cos(theta) = 0, tan(theta) is undefined."""


class ComplexRitzVectors(DefprecError):
    """Ritz pairs are complex beyond the realness tolerance."""


class NotApplicable(DefprecError):
    """A spectral bound is conditional on a hypothesis that does not hold."""


class Breakdown(DefprecError):
    """Non-happy breakdown of the Arnoldi process."""


class MaxIterations(DefprecError):
    """Iteration cap reached without convergence."""


class InsufficientSubspace(DefprecError):
    """More Ritz pairs requested than the Krylov subspace provides."""


class UnsupportedPartCount(DefprecError):
    """Requested subdomain count has no rectangular tiling."""


class NonPositiveViscosity(DefprecError):
    """Viscosity field is not strictly positive on the grid."""


class TooLargeToMaterialize(DefprecError):
    """Dense materialization requested above the size guard."""
