import numpy as np
import pytest

from defprec.bounds import (bound_adapted, bound_correction, bound_deflation,
                            bound_inexact, certify, default_tols, ingredients)
from defprec.exceptions import (AngleDegenerate, DimensionMismatch,
                                NotApplicable)

VALUES = np.array([1e-3, 1e-2, 0.1, 2.0, 5.0, 10.0])


def test_ingredients_split():
    ing = ingredients(VALUES, 3, sin_theta=0.5)
    assert ing.lambda_min_small == 1e-3
    assert ing.lambda_max_small == 0.1
    assert ing.lambda_min_perp == 2.0
    assert ing.lambda_max_perp == 10.0
    assert ing.cos_theta == pytest.approx(np.sqrt(0.75))


def test_ingredients_bad_split():
    with pytest.raises(DimensionMismatch):
        ingredients(VALUES, 0)
    with pytest.raises(DimensionMismatch):
        ingredients(VALUES, 6)


def test_zero_angle_collapses_to_exact_intervals():
    ing = ingredients(VALUES, 3, sin_theta=0.0, norm_e=0.1, norm_einv=1e3)
    assert bound_deflation(ing) == (2.0, 10.0)
    assert bound_adapted(ing) == (1.0, 10.0)
    lo, hi = bound_correction(ing)
    assert lo == pytest.approx(min(1.0 + 1e-3, 2.0))
    assert hi == pytest.approx(max(1.0 + 0.1, 10.0))


def test_deflation_interval_formula():
    s = 0.1
    ing = ingredients(VALUES, 3, sin_theta=s, norm_e=0.1, norm_einv=1e3)
    eta = 10.0 * (s + s * s)
    t = s / np.sqrt(1.0 - s * s)
    eps = eta + 1e3 * (0.1 + 10.0) ** 2 * t * t
    lo, hi = bound_deflation(ing)
    assert hi == pytest.approx(10.0 + eta, rel=1e-12)
    assert lo == pytest.approx(2.0 - eps, rel=1e-12)
    alo, ahi = bound_adapted(ing)
    assert alo == pytest.approx(min(1.0, lo), rel=1e-12)
    assert ahi == pytest.approx(max(1.0, hi), rel=1e-12)


def test_correction_interval_formula():
    s = 0.2
    ing = ingredients(VALUES, 3, sin_theta=s, norm_einv=2.0)
    t = s / np.sqrt(1.0 - s * s)
    eps = 0.5 * (10.0 * 2.0 + 1.0) * t + s + s * s
    lo, hi = bound_correction(ing)
    assert hi == pytest.approx(max(1.1, 10.0) + eps, rel=1e-12)
    assert lo == pytest.approx(min(1.001, 2.0) - eps, rel=1e-12)


def test_interval_width_monotone_in_angle():
    widths = []
    for s in (0.0, 0.05, 0.1, 0.2, 0.4):
        ing = ingredients(VALUES, 3, sin_theta=s, norm_e=0.1, norm_einv=10.0)
        lo, hi = bound_deflation(ing)
        widths.append(hi - lo)
    assert np.all(np.diff(widths) > 0)


def test_degenerate_angle():
    ing = ingredients(VALUES, 3, sin_theta=1.0, cos_theta=0.0)
    with pytest.raises(AngleDegenerate):
        bound_deflation(ing)


def test_inexact_intervals():
    ing = ingredients(VALUES, 3, norm_rho1=1e-2, norm_rho2=1e-3)
    xi_d = 1e-2 * 0.1
    lo, hi = bound_inexact(ing, "D")
    assert lo == pytest.approx(-xi_d) and hi == pytest.approx(10.0 + xi_d)
    lo, hi = bound_inexact(ing, "C")
    assert lo == pytest.approx(min(1.0 + 1e-3, 2.0) - 1e-3)
    assert hi == pytest.approx(max(1.0 + 0.1, 10.0) + 1e-3)
    xi_a = xi_d + 1e-3
    lo, hi = bound_inexact(ing, "A")
    assert lo == pytest.approx(min(1.0, 2.0) - xi_a)
    assert hi == pytest.approx(max(1.0, 10.0) + xi_a)


def test_inexact_requires_real_spectrum():
    ing = ingredients(VALUES, 3, norm_rho1=1e-2)
    spectrum = np.array([1.0, 2.0 + 0.5j])
    with pytest.raises(NotApplicable):
        bound_inexact(ing, "D", spectrum=spectrum, scale=10.0)
    # near-real imaginary dirt is tolerated
    ok = bound_inexact(ing, "D", spectrum=np.array([1.0 + 1e-12j]),
                       scale=10.0)
    assert ok[1] > ok[0]


def test_certify_classes_and_exclusion():
    w = np.array([0.0, 1e-12, 1.0, 5.0, 12.0])
    zt, ut, ct = default_tols(10.0)
    report = certify(w, (2.0, 10.0), zt, ut, ct, exclude="zero")
    classes = [report.class_of(i) for i in range(5)]
    assert classes[0] == "zero" and classes[1] == "zero"
    assert classes[2] == "unit"
    # 1.0 and 12.0 violate; the zeros are excluded
    idx = {i for i, _ in report.violations}
    assert idx == {2, 4}
    assert not report.ok
    dist = dict(report.violations)
    assert dist[4] == pytest.approx(2.0 - ct)


def test_certify_exclude_unit():
    w = np.array([1.0, 3.0])
    zt, ut, ct = default_tols(1.0)
    report = certify(w, (2.0, 4.0), zt, ut, ct, exclude="unit")
    assert report.ok


def test_certify_unknown_class():
    with pytest.raises(DimensionMismatch):
        certify(np.array([1.0]), (0.0, 2.0), 1e-8, 1e-8, 1e-8,
                exclude="negative")


def test_certify_tolerance_padding():
    w = np.array([2.0 - 5e-9, 10.0 + 5e-9])
    zt, ut, ct = default_tols(1.0)
    assert certify(w, (2.0, 10.0), zt, ut, ct).ok


def test_spectrum_report_csv(tmp_path):
    w = np.array([0.0, 1.0, 11.0])
    zt, ut, ct = default_tols(1.0)
    report = certify(w, (0.5, 10.0), zt, ut, ct, exclude="zero")
    p = tmp_path / "report.csv"
    report.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "re,im,class,violation_distance"
    assert len(lines) == 4
    assert lines[1].split(",")[2] == "zero"
    assert float(lines[3].split(",")[3]) > 0.0


def test_default_tols_scale():
    zt, ut, ct = default_tols(100.0)
    assert zt == pytest.approx(1e-6)
    assert ct == pytest.approx(1e-6)
    assert ut == pytest.approx(1e-8 * 101.0)
