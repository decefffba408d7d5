"""Eigenvalue interval bounds and spectrum certification.

Each preconditioner's spectrum is confined to an interval computable
from a handful of scalars: the extreme eigenvalues of the two invariant
blocks, the angle to the exact invariant subspace, and (for approximate
coarse inverses) the norms of rho1 = E H^{-1} - I and rho2 = H^{-1} E - I.
This module evaluates those intervals and checks computed spectra
against them.
"""

import numpy as np

from . import spectra
from .exceptions import AngleDegenerate, DimensionMismatch, NotApplicable

# Classification tolerances are scale-relative; see certify().
ZERO_TOL_FACTOR = 1e-8
UNIT_TOL_FACTOR = 1e-8
CERT_TOL_FACTOR = 1e-8


class BoundIngredients:
    """Scalars the interval formulas are stated in.

    lambda extremes split the spectrum of A into the r targeted small
    eigenvalues (Lambda) and the rest (Lambda_perp).
    """

    def __init__(self, lambda_min_small, lambda_max_small,
                 lambda_min_perp, lambda_max_perp,
                 sin_theta=0.0, cos_theta=1.0,
                 norm_e=0.0, norm_einv=0.0,
                 norm_rho1=0.0, norm_rho2=0.0):
        self.lambda_min_small = float(lambda_min_small)
        self.lambda_max_small = float(lambda_max_small)
        self.lambda_min_perp = float(lambda_min_perp)
        self.lambda_max_perp = float(lambda_max_perp)
        self.sin_theta = float(sin_theta)
        self.cos_theta = float(cos_theta)
        self.norm_e = float(norm_e)
        self.norm_einv = float(norm_einv)
        self.norm_rho1 = float(norm_rho1)
        self.norm_rho2 = float(norm_rho2)

    @property
    def tan_theta(self):
        if self.cos_theta <= 0.0:
            raise AngleDegenerate("cos(theta) = 0, tangent undefined")
        return self.sin_theta / self.cos_theta


def ingredients(a_values, r, sin_theta=0.0, cos_theta=None,
                norm_e=0.0, norm_einv=0.0, norm_rho1=0.0, norm_rho2=0.0):
    """Build BoundIngredients from the ascending spectrum of A.

    The first r values are the targeted block, the rest its complement.
    """
    a_values = np.asarray(a_values, dtype=float)
    if not 0 < r < a_values.size:
        raise DimensionMismatch(
            f"r = {r} must split a spectrum of size {a_values.size}")
    if cos_theta is None:
        cos_theta = np.sqrt(max(0.0, 1.0 - sin_theta ** 2))
    return BoundIngredients(
        lambda_min_small=a_values[:r].min(),
        lambda_max_small=a_values[:r].max(),
        lambda_min_perp=a_values[r:].min(),
        lambda_max_perp=a_values[r:].max(),
        sin_theta=sin_theta, cos_theta=cos_theta,
        norm_e=norm_e, norm_einv=norm_einv,
        norm_rho1=norm_rho1, norm_rho2=norm_rho2)


def bound_deflation(ing):
    """Interval for the nonzero spectrum of the deflated system.

    eta widens the upper end with the angle; the lower end additionally
    pays for the coarse-solve amplification through tan(theta).
    """
    s = ing.sin_theta
    eta = ing.lambda_max_perp * (s + s * s)
    t = ing.tan_theta
    eps = eta + ing.norm_einv * (ing.norm_e + ing.lambda_max_perp) ** 2 * t * t
    return ing.lambda_min_perp - eps, ing.lambda_max_perp + eta


def bound_adapted(ing):
    """Interval for the adapted-deflation spectrum (covers all of it)."""
    lo, hi = bound_deflation(ing)
    return min(1.0, lo), max(1.0, hi)


def bound_correction(ing):
    """Interval for the coarse-grid-correction spectrum."""
    t = ing.tan_theta
    s = ing.sin_theta
    eps = 0.5 * (ing.lambda_max_perp * ing.norm_einv + 1.0) * t + s + s * s
    hi = max(1.0 + ing.lambda_max_small, ing.lambda_max_perp) + eps
    lo = min(1.0 + ing.lambda_min_small, ing.lambda_min_perp) - eps
    return lo, hi


def bound_inexact(ing, variant, spectrum=None, scale=None):
    """Interval when the coarse inverse is approximate (exact basis).

    Conditional on a real spectrum: pass the computed eigenvalues and a
    norm scale to have the hypothesis checked, raising NotApplicable
    when it fails.
    """
    if spectrum is not None:
        if scale is None:
            raise DimensionMismatch("realness check needs a norm scale")
        if not spectra.spectrum_is_real(spectrum, scale):
            raise NotApplicable(
                "spectrum has imaginary parts beyond the realness tolerance")
    if variant == "D":
        xi = ing.norm_rho1 * ing.lambda_max_small
        return -xi, ing.lambda_max_perp + xi
    if variant == "C":
        xi = ing.norm_rho2
        hi = max(1.0 + ing.lambda_max_small, ing.lambda_max_perp) + xi
        lo = min(1.0 + ing.lambda_min_small, ing.lambda_min_perp) - xi
        return lo, hi
    if variant == "A":
        xi = ing.norm_rho1 * ing.lambda_max_small + ing.norm_rho2
        return (min(1.0, ing.lambda_min_perp) - xi,
                max(1.0, ing.lambda_max_perp) + xi)
    raise DimensionMismatch(f"unknown variant: {variant!r}")


class SpectrumReport:
    """Computed eigenvalues classified against an interval.

    zero_class / unit_class mark eigenvalues the analysis places exactly
    at 0 or 1; `excluded` says which class sat outside the containment
    statement. violations lists (index, distance) pairs for real parts
    escaping [lo - cert_tol, hi + cert_tol].
    """

    def __init__(self, eigenvalues, interval, zero_class, unit_class,
                 violations, excluded):
        self.eigenvalues = eigenvalues
        self.interval = interval
        self.zero_class = zero_class
        self.unit_class = unit_class
        self.violations = violations
        self.excluded = excluded

    @property
    def ok(self):
        return not self.violations

    def class_of(self, i):
        if i in self.zero_class:
            return "zero"
        if i in self.unit_class:
            return "unit"
        return "general"

    def to_csv(self, path):
        dist = {i: d for i, d in self.violations}
        with open(path, "w", newline="") as fh:
            fh.write("re,im,class,violation_distance\n")
            for i, lam in enumerate(self.eigenvalues):
                lam = complex(lam)
                fh.write(f"{lam.real:.16e},{lam.imag:.16e},"
                         f"{self.class_of(i)},{dist.get(i, 0.0):.16e}\n")


def certify(eigenvalues, interval, zero_tol, unit_tol, cert_tol,
            exclude=None):
    """Check a computed spectrum against an interval.

    exclude names the class ("zero" or "unit") whose members the bound
    does not cover; everything else must land inside the interval padded
    by cert_tol, measured on real parts.
    """
    eigenvalues = np.asarray(eigenvalues)
    lo, hi = interval
    zero_class = set(np.flatnonzero(np.abs(eigenvalues) <= zero_tol).tolist())
    unit_class = set(np.flatnonzero(np.abs(eigenvalues - 1.0)
                                    <= unit_tol).tolist())
    skip = set()
    if exclude == "zero":
        skip = zero_class
    elif exclude == "unit":
        skip = unit_class
    elif exclude is not None:
        raise DimensionMismatch(f"unknown exclusion class: {exclude!r}")
    violations = []
    for i, lam in enumerate(eigenvalues):
        if i in skip:
            continue
        x = complex(lam).real
        if x < lo - cert_tol:
            violations.append((i, (lo - cert_tol) - x))
        elif x > hi + cert_tol:
            violations.append((i, x - (hi + cert_tol)))
    return SpectrumReport(eigenvalues, interval, zero_class, unit_class,
                          violations, exclude)


def default_tols(norm_a):
    """(zero_tol, unit_tol, cert_tol) at a given matrix scale."""
    return (ZERO_TOL_FACTOR * norm_a,
            UNIT_TOL_FACTOR * (1.0 + norm_a),
            CERT_TOL_FACTOR * norm_a)
