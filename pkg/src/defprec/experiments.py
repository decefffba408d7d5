"""Experiment drivers shared by the command line runner and the test suite.

Stopping convention used throughout: every preconditioned solve runs GMRES
on the transformed system P A x = P b, but the residual test is referenced
to the norm of the original right-hand side, i.e. iteration stops once
||P (b - A x_k)||_2 <= tol * ||b||_2.  This is the classical convention of
left-preconditioned solvers and it is what reproduces the reference
iteration counts for the diagonal study.
"""

import numpy as np
import scipy.linalg as sla

from . import bounds
from . import matrices
from . import precond
from . import spectra
from . import subspace
from .exceptions import Breakdown, NotApplicable
from .krylov import (DEFAULT_MAX_IT, DEFAULT_TOL, gmres, keep_real_pairs,
                     rayleigh_ritz, split_coarse_space)
from .operators import compose, from_matrix
from .problems import (BVP_GRID, SMALL_COUNT, assemble_bvp, diag_case,
                       field_by_name, perturb_basis, tile_partition)

VARIANTS = ("D", "C", "A")
VARIANT_NAMES = {"D": "deflation", "C": "correction", "A": "adapted"}

BASIS_EXPONENTS = (1, 2, 3, 4, 5)
COARSE_EXPONENTS = (10, 12, 14, 16)


class SolveRecord:
    """One GMRES run: count, convergence flag, and the residual history.

    iterations is -1 when the run hit max_it without converging, so the
    CSV tables keep a single integer column.
    """

    def __init__(self, label, history):
        self.label = label
        self.history = history
        self.converged = history.converged
        self.iterations = history.iterations if history.converged else -1


def transformed_solve(p_op, a_op, b, ref_norm=None, tol=DEFAULT_TOL,
                      max_it=DEFAULT_MAX_IT, label=""):
    """GMRES on P A x = P b with the stopping test referenced to ||b||.

    ref_norm overrides the reference norm (used by the two-level driver,
    where b itself is already a transformed right-hand side).
    """
    pb = p_op.apply(b)
    pbn = np.linalg.norm(pb)
    if pbn == 0.0:
        raise Breakdown("preconditioned right-hand side is zero")
    if ref_norm is None:
        ref_norm = np.linalg.norm(b)
    scaled = tol * ref_norm / pbn
    return gmres(compose(p_op, a_op), pb, tol=scaled, max_it=max_it,
                 label=label)


def cell_rng(seed, exponent):
    """The per-cell generator: one independent stream per (seed, 10^k)."""
    return np.random.default_rng([int(seed), int(exponent)])


# ---------------------------------------------------------------------------
# diagonal study


def diag_exact_counts(scale="full", tol=DEFAULT_TOL, max_it=DEFAULT_MAX_IT):
    """Iteration counts with the exact invariant basis and exact E solve.

    Returns records keyed "none", "deflation", "correction", "adapted".
    """
    case = diag_case(scale)
    a_op = case.op()
    records = {}
    _, hist, _ = gmres(a_op, case.rhs, tol=tol, max_it=max_it, label="none")
    records["none"] = SolveRecord("none", hist)
    cs = precond.build_projection(a_op, case.exact_basis)
    for tag in VARIANTS:
        name = VARIANT_NAMES[tag]
        p_op = precond.variant_op(tag, a_op, case.exact_basis, cs)
        _, hist, _ = transformed_solve(p_op, a_op, case.rhs, tol=tol,
                                       max_it=max_it, label=name)
        records[name] = SolveRecord(name, hist)
    return records


def basis_perturbation_tables(scale="full", seeds=range(5),
                              exponents=BASIS_EXPONENTS, tol=DEFAULT_TOL,
                              max_it=DEFAULT_MAX_IT):
    """Perturbed-basis study: Z drawn as orth(V + uniform/eps).

    Returns (angle_rows, count_rows).  angle_rows carry the subspace angle
    and the worst Ritz residual of the perturbed basis; count_rows carry
    the iteration counts of the three preconditioners built from it.
    """
    case = diag_case(scale)
    a_op = case.op()
    v = case.exact_basis
    angle_rows = []
    count_rows = []
    for seed in seeds:
        for expo in exponents:
            rng = cell_rng(seed, expo)
            z, rep = perturb_basis(v, 10.0 ** expo, rng)
            values, ritz_basis = subspace.rayleigh_ritz_basis(a_op, z)
            rmax = subspace.res_max(a_op, values, ritz_basis)
            angle_rows.append({"seed": seed, "epsilon": 10.0 ** expo,
                               "sin_theta": rep.sin_theta, "res_max": rmax})
            row = {"seed": seed, "epsilon": 10.0 ** expo}
            cs = precond.build_projection(a_op, z)
            for tag in VARIANTS:
                name = VARIANT_NAMES[tag]
                p_op = precond.variant_op(tag, a_op, z, cs)
                _, hist, _ = transformed_solve(p_op, a_op, case.rhs, tol=tol,
                                               max_it=max_it, label=name)
                rec = SolveRecord(name, hist)
                row["iterations_" + name] = rec.iterations
                row["converged_" + name] = rec.converged
            count_rows.append(row)
    return angle_rows, count_rows


def _perturbed_coarse(case, seed, exponent):
    """H = E + uniform(0,1)/eps with the exact basis, explicit inverse."""
    r = case.small_count
    rng = cell_rng(seed, exponent)
    e_exact = np.diag(case.diag[:r])
    h = e_exact + rng.random((r, r)) / 10.0 ** exponent
    return precond.inexact_variants(case.op(), case.exact_basis, sla.inv(h))


def coarse_perturbation_table(scale="full", seeds=range(5),
                              exponents=COARSE_EXPONENTS, tol=DEFAULT_TOL,
                              max_it=DEFAULT_MAX_IT):
    """Perturbed coarse-solve study: exact basis, approximate E inverse.

    One row per (seed, eps) with both perturbation norms and the counts.
    """
    case = diag_case(scale)
    a_op = case.op()
    rows = []
    for seed in seeds:
        for expo in exponents:
            iset = _perturbed_coarse(case, seed, expo)
            row = {"seed": seed, "epsilon": 10.0 ** expo,
                   "norm_rho1": iset.norm_rho1, "norm_rho2": iset.norm_rho2}
            for tag, p_op in (("D", iset.pd), ("C", iset.pc), ("A", iset.pa)):
                name = VARIANT_NAMES[tag]
                _, hist, _ = transformed_solve(p_op, a_op, case.rhs, tol=tol,
                                               max_it=max_it, label=name)
                rec = SolveRecord(name, hist)
                row["iterations_" + name] = rec.iterations
                row["converged_" + name] = rec.converged
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# certified spectra


def _exact_ingredients(case, rep=None, cs=None, **extra):
    values = np.sort(case.diag)
    sin_theta = rep.sin_theta if rep is not None else 0.0
    cos_theta = rep.cos_theta if rep is not None else 1.0
    if cs is not None:
        e = cs.e.toarray() if hasattr(cs.e, "toarray") else cs.e
        extra.setdefault("norm_e", matrices.two_norm(e))
        extra.setdefault("norm_einv", 1.0 / spectra.svd_values(e)[-1])
    return bounds.ingredients(values, case.small_count, sin_theta=sin_theta,
                              cos_theta=cos_theta, **extra)


def _certified(op, a_op, interval, norm_a, exclude=None):
    w = spectra.eig_general(compose(op, a_op).materialize()).values
    zt, ut, ct = bounds.default_tols(norm_a)
    return bounds.certify(w, interval, zt, ut, ct, exclude=exclude)


def diag_spectrum_reports(scale="full", seed=0, basis_exponents=(3, 5),
                          coarse_exponents=(12, 16)):
    """Certified preconditioned spectra for the perturbation figures.

    Keys look like "z1e3_deflation" (perturbed basis) and
    "h1e12_adapted" (perturbed coarse solve).
    """
    case = diag_case(scale)
    a_op = case.op()
    norm_a = case.diag.max()
    reports = {}
    for expo in basis_exponents:
        z, rep = perturb_basis(case.exact_basis, 10.0 ** expo,
                               cell_rng(seed, expo))
        cs = precond.build_projection(a_op, z)
        ing = _exact_ingredients(case, rep=rep, cs=cs)
        intervals = {"D": bounds.bound_deflation(ing),
                     "C": bounds.bound_correction(ing),
                     "A": bounds.bound_adapted(ing)}
        for tag in VARIANTS:
            p_op = precond.variant_op(tag, a_op, z, cs)
            exclude = "zero" if tag == "D" else None
            key = f"z1e{expo}_{VARIANT_NAMES[tag]}"
            reports[key] = _certified(p_op, a_op, intervals[tag], norm_a,
                                      exclude=exclude)
    for expo in coarse_exponents:
        iset = _perturbed_coarse(case, seed, expo)
        ing = _exact_ingredients(case, norm_rho1=iset.norm_rho1,
                                 norm_rho2=iset.norm_rho2)
        for tag, p_op in (("D", iset.pd), ("C", iset.pc), ("A", iset.pa)):
            w = spectra.eig_general(compose(p_op, a_op).materialize()).values
            interval = bounds.bound_inexact(ing, tag, spectrum=w,
                                            scale=norm_a)
            zt, ut, ct = bounds.default_tols(norm_a)
            key = f"h1e{expo}_{VARIANT_NAMES[tag]}"
            reports[key] = bounds.certify(w, interval, zt, ut, ct)
    return reports


# ---------------------------------------------------------------------------
# bound containment trials


class BoundTrialSummary:
    """Aggregate of a containment sweep: per-trial rows plus the extremes
    the acceptance checks look at."""

    def __init__(self, rows, violations, worst_violation,
                 multiset_max_diff=None, min_correction_eig=None,
                 skipped=0, deflation_dip=None):
        self.rows = rows
        self.violations = violations
        self.worst_violation = worst_violation
        self.multiset_max_diff = multiset_max_diff
        self.min_correction_eig = min_correction_eig
        self.skipped = skipped
        self.deflation_dip = deflation_dip

    @property
    def ok(self):
        return self.violations == 0


def basis_bound_trials(scale=50, sin_targets=(0.01, 0.1, 0.3), trials=100,
                       seed=0):
    """Random rotated-basis trials certifying the three angle intervals.

    Also tracks the worst mismatch between the nonzero deflation spectrum
    and the non-unit adapted spectrum, and the smallest eigenvalue seen
    for the correction variant (which the theory keeps positive).
    """
    case = diag_case(scale)
    a_op = case.op()
    v = case.exact_basis
    r = case.small_count
    norm_a = case.diag.max()
    zt, ut, ct = bounds.default_tols(norm_a)
    rows = []
    violations = 0
    worst = 0.0
    pair_diff = 0.0
    min_c = np.inf
    for sin_t in sin_targets:
        for trial in range(trials):
            rng = np.random.default_rng([int(seed) + trial,
                                         int(round(sin_t * 1000))])
            z = subspace.rotated_basis(v, sin_t, rng)
            rep = subspace.angle(z, v)
            cs = precond.build_projection(a_op, z)
            ing = _exact_ingredients(case, rep=rep, cs=cs)
            intervals = {"D": bounds.bound_deflation(ing),
                         "C": bounds.bound_correction(ing),
                         "A": bounds.bound_adapted(ing)}
            spectra_by_tag = {}
            for tag in VARIANTS:
                p_op = precond.variant_op(tag, a_op, z, cs)
                w = spectra.eig_general(
                    compose(p_op, a_op).materialize()).values
                spectra_by_tag[tag] = w
                exclude = "zero" if tag == "D" else None
                report = bounds.certify(w, intervals[tag], zt, ut, ct,
                                        exclude=exclude)
                nviol = len(report.violations)
                violations += nviol
                wv = max((d for _, d in report.violations), default=0.0)
                worst = max(worst, wv)
                # effective condition number: deflation is judged on its
                # nonzero eigenvalues only
                mags = np.sort(np.abs(w))
                vals = mags[r:] if tag == "D" else mags
                rows.append({"sin_target": sin_t, "trial": trial,
                             "variant": VARIANT_NAMES[tag],
                             "sin_theta": rep.sin_theta,
                             "interval_lo": intervals[tag][0],
                             "interval_hi": intervals[tag][1],
                             "violations": nviol, "worst": wv,
                             "kappa": float(vals[-1] / vals[0])})
            wd = spectra_by_tag["D"]
            wa = spectra_by_tag["A"]
            nonzero = np.sort(wd[np.argsort(np.abs(wd))][r:].real)
            nonunit = np.sort(wa[np.argsort(np.abs(wa - 1.0))][r:].real)
            pair_diff = max(pair_diff, np.abs(nonzero - nonunit).max())
            min_c = min(min_c, spectra_by_tag["C"].real.min())
    return BoundTrialSummary(rows, violations, worst,
                             multiset_max_diff=pair_diff,
                             min_correction_eig=min_c)


def coarse_bound_trials(scale="full", seeds=range(5),
                        exponents=(10, 12, 16)):
    """Approximate-coarse-solve trials certifying the perturbation intervals.

    Complex-classified spectra are skipped (the intervals only speak about
    real spectra); the summary counts them.  deflation_dip records whether
    every trial at the smallest exponent pushed some deflation eigenvalue
    below half the smallest retained eigenvalue of A.
    """
    case = diag_case(scale)
    a_op = case.op()
    r = case.small_count
    norm_a = case.diag.max()
    half_min_perp = np.sort(case.diag)[r] / 2.0
    zt, ut, ct = bounds.default_tols(norm_a)
    rows = []
    violations = 0
    worst = 0.0
    skipped = 0
    dip = True
    lo_expo = min(exponents)
    for expo in exponents:
        for seed in seeds:
            iset = _perturbed_coarse(case, seed, expo)
            ing = _exact_ingredients(case, norm_rho1=iset.norm_rho1,
                                     norm_rho2=iset.norm_rho2)
            for tag, p_op in (("D", iset.pd), ("C", iset.pc),
                              ("A", iset.pa)):
                w = spectra.eig_general(
                    compose(p_op, a_op).materialize()).values
                real = spectra.spectrum_is_real(w, norm_a)
                interval = bounds.bound_inexact(ing, tag)
                if tag == "D" and expo == lo_expo:
                    dip = dip and w.real.min() < half_min_perp
                nviol = 0
                wv = 0.0
                if real:
                    report = bounds.certify(w, interval, zt, ut, ct)
                    nviol = len(report.violations)
                    wv = max((d for _, d in report.violations), default=0.0)
                    violations += nviol
                    worst = max(worst, wv)
                else:
                    skipped += 1
                rows.append({"seed": seed, "epsilon": 10.0 ** expo,
                             "variant": VARIANT_NAMES[tag],
                             "norm_rho1": iset.norm_rho1,
                             "norm_rho2": iset.norm_rho2,
                             "interval_lo": interval[0],
                             "interval_hi": interval[1],
                             "real": real, "violations": nviol,
                             "worst": wv,
                             "min_real_eig": w.real.min()})
    return BoundTrialSummary(rows, violations, worst, skipped=skipped,
                             deflation_dip=dip)


# ---------------------------------------------------------------------------
# diffusion study


class BvpStudy:
    """Results of one two-level run on the diffusion problem."""

    def __init__(self, field, nparts, ritz_count, mode, records, res_max,
                 norm_rho1=None, norm_rho2=None):
        self.field = field
        self.nparts = nparts
        self.ritz_count = ritz_count
        self.mode = mode
        self.records = records
        self.res_max = res_max
        self.norm_rho1 = norm_rho1
        self.norm_rho2 = norm_rho2


def bvp_study(field="skyscraper", nparts=16, ritz_count=15, mode="exact",
              m=BVP_GRID, tol=DEFAULT_TOL, max_it=DEFAULT_MAX_IT):
    """One-level RAS versus the three two-level variants.

    The one-level run doubles as the source of the Krylov subspace: its
    Arnoldi data yields the Ritz vectors that are split per subdomain into
    the coarse space.  mode selects the coarse solve: "exact" factorizes
    E densely, "ilu0" replaces it with an incomplete factorization.
    """
    a, rhs = assemble_bvp(field_by_name(field), m)
    part = tile_partition(m, nparts)
    m_ras = precond.ras_build(a, part)
    ahat = precond.ras_system(m_ras, a)
    bhat = m_ras.apply(rhs)
    ref = np.linalg.norm(rhs)
    scaled = tol * ref / np.linalg.norm(bhat)
    _, hist, arn = gmres(ahat, bhat, tol=scaled, max_it=max_it,
                         label="one_level")
    records = {"one_level": SolveRecord("one_level", hist)}
    ritz = keep_real_pairs(rayleigh_ritz(arn, ritz_count))
    rmax = float(np.max(ritz.residuals))
    z = split_coarse_space(ritz, part)
    cs = precond.build_projection(ahat, z, mode=mode)
    rho1 = rho2 = None
    if mode == "ilu0":
        e = cs.e.toarray() if hasattr(cs.e, "toarray") else cs.e
        approx_inv = cs.solve(np.eye(z.r))
        eye = np.eye(z.r)
        rho1 = matrices.two_norm(e.dot(approx_inv) - eye)
        rho2 = matrices.two_norm(approx_inv.dot(e) - eye)
    for tag in VARIANTS:
        name = VARIANT_NAMES[tag]
        p_op = precond.variant_op(tag, ahat, z, cs)
        _, hist, _ = transformed_solve(p_op, ahat, bhat, ref_norm=ref,
                                       tol=tol, max_it=max_it, label=name)
        records[name] = SolveRecord(name, hist)
    return BvpStudy(field, nparts, ritz_count, mode, records, rmax,
                    norm_rho1=rho1, norm_rho2=rho2)


# ---------------------------------------------------------------------------
# ad-hoc spectrum certification


def spectrum_from_files(matrix_path, basis_path, variant="D", hmode="exact"):
    """Certify the preconditioned spectrum of a system read from disk.

    The basis file holds the coarse-space columns (orthonormalized on
    load).  The reference invariant subspace is recomputed densely, so
    this is limited to systems the materialization guard accepts.
    """
    a = matrices.read_matrix(matrix_path)
    raw = matrices.read_matrix(basis_path)
    raw = raw.toarray() if hasattr(raw, "toarray") else np.asarray(raw)
    z = subspace.orthonormalize(raw)
    a_op = from_matrix(a)
    dense = a.toarray() if hasattr(a, "toarray") else np.asarray(a, float)
    dec = spectra.eig_symmetric(dense)
    r = z.r
    values = dec.values
    norm_a = float(np.abs(values).max())
    v = subspace.OrthonormalBasis(dec.vectors[:, :r])
    rep = subspace.angle(z, v)
    ing = bounds.ingredients(values, r, sin_theta=rep.sin_theta,
                             cos_theta=rep.cos_theta)
    if hmode == "exact":
        cs = precond.build_projection(a_op, z)
        e = cs.e.toarray() if hasattr(cs.e, "toarray") else cs.e
        ing = bounds.ingredients(values, r, sin_theta=rep.sin_theta,
                                 cos_theta=rep.cos_theta,
                                 norm_e=matrices.two_norm(e),
                                 norm_einv=1.0 / spectra.svd_values(e)[-1])
        interval = {"D": bounds.bound_deflation,
                    "C": bounds.bound_correction,
                    "A": bounds.bound_adapted}[variant](ing)
        p_op = precond.variant_op(variant, a_op, z, cs)
        exclude = "zero" if variant == "D" else None
        return _certified(p_op, a_op, interval, norm_a, exclude=exclude)
    if hmode != "ilu0":
        raise NotApplicable(f"unknown coarse-solve mode: {hmode!r}")
    if rep.sin_theta > 1e-8:
        raise NotApplicable("approximate coarse-solve intervals require "
                            "the exact invariant basis")
    cs = precond.build_projection(a_op, z, mode="ilu0")
    e = cs.e.toarray() if hasattr(cs.e, "toarray") else cs.e
    approx_inv = cs.solve(np.eye(r))
    eye = np.eye(r)
    ing = bounds.ingredients(values, r, sin_theta=0.0,
                             norm_rho1=matrices.two_norm(
                                 e.dot(approx_inv) - eye),
                             norm_rho2=matrices.two_norm(
                                 approx_inv.dot(e) - eye))
    p_op = precond.variant_op(variant, a_op, z, cs)
    w = spectra.eig_general(compose(p_op, a_op).materialize()).values
    interval = bounds.bound_inexact(ing, variant, spectrum=w, scale=norm_a)
    zt, ut, ct = bounds.default_tols(norm_a)
    return bounds.certify(w, interval, zt, ut, ct)


# ---------------------------------------------------------------------------
# CSV assembly


def write_csv(path, fieldnames, rows):
    """Write rows of dicts: UTF-8, LF newlines, header, %.16e floats."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            parts = []
            for name in fieldnames:
                val = row[name]
                if isinstance(val, (bool, np.bool_)):
                    parts.append("1" if val else "0")
                elif isinstance(val, (int, np.integer)):
                    parts.append(str(int(val)))
                elif isinstance(val, (float, np.floating)):
                    parts.append("%.16e" % float(val))
                else:
                    parts.append(str(val))
            fh.write(",".join(parts) + "\n")


def count_fields(prefix="iterations_", flag="converged_"):
    """Column order for the per-variant count tables."""
    cols = []
    for tag in VARIANTS:
        name = VARIANT_NAMES[tag]
        cols.append(prefix + name)
        cols.append(flag + name)
    return cols
