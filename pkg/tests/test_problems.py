import numpy as np
import pytest

from defprec.exceptions import (DimensionMismatch, NonPositiveViscosity,
                                UnsupportedPartCount)
from defprec.problems import (BVP_GRID, ViscosityField, assemble_bvp,
                              continuous_field, diag_case, field_by_name,
                              field_on_grid, perturb_basis, skyscraper_field,
                              tile_partition)
from defprec.spectra import eig_symmetric


def test_full_diag_entries():
    case = diag_case("full")
    assert case.diag.size == 2000
    head = [10.0 ** k for k in range(-7, 0)]
    np.testing.assert_allclose(case.diag[:7], head, rtol=0)
    assert case.diag[7] == 1.0
    np.testing.assert_allclose(case.diag[8:], 10.0 + 0.1 * np.arange(1992))
    assert case.diag[-1] == pytest.approx(209.1)
    np.testing.assert_array_equal(case.rhs, np.ones(2000))
    assert case.small_count == 7


def test_truncated_diag_keeps_head():
    case = diag_case(50)
    assert case.diag.size == 50
    np.testing.assert_allclose(case.diag[:8], diag_case("full").diag[:8])
    np.testing.assert_allclose(case.diag[8:], 10.0 + 0.1 * np.arange(42))


def test_truncated_minimum_size():
    with pytest.raises(DimensionMismatch):
        diag_case(10)


def test_exact_basis_is_leading_identity():
    case = diag_case(20)
    np.testing.assert_array_equal(case.exact_basis.to_dense(),
                                  np.eye(20)[:, :7])


def test_perturb_basis_angle_shrinks_with_epsilon():
    case = diag_case(30)
    v = case.exact_basis
    last = None
    for expo in (1, 2, 3, 4, 5):
        rng = np.random.default_rng([0, expo])
        _, rep = perturb_basis(v, 10.0 ** expo, rng)
        if last is not None:
            assert rep.sin_theta < last
        last = rep.sin_theta
    rng = np.random.default_rng(0)
    _, rep = perturb_basis(v, 1e12, rng)
    assert rep.sin_theta <= 1e-9


def test_perturb_basis_rejects_nonpositive():
    case = diag_case(20)
    with pytest.raises(DimensionMismatch):
        perturb_basis(case.exact_basis, 0.0, np.random.default_rng(1))


def test_skyscraper_values():
    f = skyscraper_field()
    # both floor(9x) and floor(9y) even: high channel
    assert f(0.5, 0.5) == pytest.approx(5e4)
    assert f(0.05, 0.05) == pytest.approx(1e4)
    # floor(9x) odd: background
    assert f(0.2, 0.05) == pytest.approx(1.0)
    assert f(0.05, 0.2) == pytest.approx(1.0)


def test_continuous_field_positive_and_clamped():
    f = continuous_field()
    xs, ys = np.meshgrid(np.linspace(0, 1, 97), np.linspace(0, 1, 97))
    vals = f(xs, ys)
    assert vals.min() >= 1.0
    assert vals.max() == pytest.approx(1e6 / 3.0, rel=5e-3)


def test_field_by_name():
    assert field_by_name("skyscraper").kind == "skyscraper"
    assert field_by_name("continuous").kind == "continuous"
    with pytest.raises(DimensionMismatch):
        field_by_name("rough")


def test_field_on_grid_shape():
    grid = field_on_grid(skyscraper_field(), 31)
    assert grid.shape == (31, 31)
    assert grid.min() >= 1.0


def unit_field():
    return ViscosityField("unit", lambda x, y: np.ones_like(x))


def test_assemble_unit_laplacian():
    a, rhs = assemble_bvp(unit_field(), m=9)
    assert a.shape == (81, 81)
    np.testing.assert_array_equal(rhs, np.ones(81))
    dense = a.toarray()
    np.testing.assert_array_equal(dense, dense.T)
    h2 = (1.0 / 10.0) ** 2
    # interior row: 4/h^2 diagonal, -1/h^2 neighbours, zero row sum
    center = 4 * 9 + 4
    assert dense[center, center] == pytest.approx(4.0 / h2)
    assert dense[center].sum() == pytest.approx(0.0, abs=1e-9)
    # boundary-adjacent rows keep the eliminated Dirichlet mass
    assert dense[0].sum() > 0


def test_assemble_default_size():
    a, _ = assemble_bvp(skyscraper_field())
    assert a.shape == (BVP_GRID ** 2, BVP_GRID ** 2)


def test_assembled_matrix_positive_definite():
    a, _ = assemble_bvp(skyscraper_field(), m=20)
    dense = a.toarray()
    np.testing.assert_array_equal(dense, dense.T)
    assert eig_symmetric(dense).values.min() > 0


def test_assemble_rejects_nonpositive_field():
    bad = ViscosityField("bad", lambda x, y: np.zeros_like(x))
    with pytest.raises(NonPositiveViscosity):
        assemble_bvp(bad, m=5)


def test_partition_tiles_cover_grid():
    for nparts, shape in ((16, (4, 4)), (32, (8, 4)), (64, (8, 8))):
        part = tile_partition(24, nparts)
        assert part.nparts == nparts
        all_idx = np.concatenate(part.owner_sets)
        assert all_idx.size == 24 * 24
        assert np.unique(all_idx).size == all_idx.size
        sizes = [s.size for s in part.owner_sets]
        assert len(sizes) == shape[0] * shape[1]


def test_partition_owner_sizes_balanced():
    part = tile_partition(BVP_GRID, 16)
    sizes = np.array([s.size for s in part.owner_sets])
    assert sizes.sum() == BVP_GRID ** 2
    assert sizes.max() - sizes.min() <= BVP_GRID


def test_partition_interior_overlap_geometry():
    # interior tiles gain exactly two rings: (w+4)(h+4) entries
    part = tile_partition(20, 16)
    owner = part.owner_sets[5]  # second tile of second row: interior
    overlap = part.overlap_sets[5]
    assert owner.size == 25
    assert overlap.size == (5 + 4) * (5 + 4)
    assert np.isin(owner, overlap).all()


def test_partition_owner_array_consistent():
    part = tile_partition(12, 16)
    for k, owner_set in enumerate(part.owner_sets):
        assert np.all(part.owner[owner_set] == k)


def test_partition_unsupported_count():
    with pytest.raises(UnsupportedPartCount):
        tile_partition(20, 7)
