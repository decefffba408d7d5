import json

import numpy as np
import pytest

from defprec import experiments as ex
from defprec.bounds import certify
from defprec.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, main, parse_scale


def test_parse_scale_forms():
    assert parse_scale("full") == "full"
    assert parse_scale("trunc:40") == 40
    assert parse_scale(25) == 25
    with pytest.raises(ValueError):
        parse_scale("big")


def test_gen_problem_diag_and_spectrum_roundtrip(tmp_path):
    gen = tmp_path / "prob"
    code = main(["gen-problem", "--kind", "diag", "--scale", "trunc:15",
                 "--out", str(gen)])
    assert code == EXIT_OK
    for name in ("a.mtx", "rhs.mtx", "basis.mtx"):
        assert (gen / name).exists()
    rep = tmp_path / "report"
    code = main(["spectrum", "--matrix", str(gen / "a.mtx"),
                 "--basis", str(gen / "basis.mtx"), "--variant", "A",
                 "--out", str(rep)])
    assert code == EXIT_OK
    assert (rep / "spectrum.csv").exists()
    assert (rep / "spectrum.png").exists()


def test_gen_problem_field_grid(tmp_path):
    out = tmp_path / "field"
    code = main(["gen-problem", "--kind", "field", "--grid", "9",
                 "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "field.csv").read_text().splitlines()
    assert len(lines) == 10
    assert lines[0].startswith("x0,x1,")


def test_spectrum_missing_inputs(tmp_path, capsys):
    code = main(["spectrum", "--out", str(tmp_path / "s")])
    assert code == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_bad_scale_is_an_error(tmp_path, capsys):
    code = main(["gen-problem", "--kind", "diag", "--scale", "huge",
                 "--out", str(tmp_path / "p")])
    assert code == EXIT_ERROR
    assert "unknown scale" in capsys.readouterr().err


def test_unknown_config_field_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "field", "gridd": 9}))
    code = main(["gen-problem", "--config", str(cfg),
                 "--out", str(tmp_path / "p")])
    assert code == EXIT_ERROR
    assert "gridd" in capsys.readouterr().err


def test_config_then_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "field", "grid": 21}))
    out = tmp_path / "cfgrun"
    assert main(["gen-problem", "--config", str(cfg),
                 "--out", str(out)]) == EXIT_OK
    assert len((out / "field.csv").read_text().splitlines()) == 22

    out2 = tmp_path / "flagrun"
    assert main(["gen-problem", "--config", str(cfg), "--grid", "11",
                 "--out", str(out2)]) == EXIT_OK
    assert len((out2 / "field.csv").read_text().splitlines()) == 12


def test_spectrum_violation_exit_code(tmp_path, monkeypatch):
    gen = tmp_path / "prob"
    main(["gen-problem", "--kind", "diag", "--scale", "trunc:15",
          "--out", str(gen)])

    def fake(matrix_path, basis_path, variant="D", hmode="exact"):
        return certify(np.array([5.0, 0.5]), (0.0, 1.0), 1e-8, 1e-8, 1e-8)

    monkeypatch.setattr(ex, "spectrum_from_files", fake)
    code = main(["spectrum", "--matrix", str(gen / "a.mtx"),
                 "--basis", str(gen / "basis.mtx"),
                 "--out", str(tmp_path / "s")])
    assert code == EXIT_VIOLATION


def test_bounds_check_small(tmp_path):
    out = tmp_path / "bc"
    code = main(["bounds-check", "--scale", "trunc:25", "--trials", "2",
                 "--nseeds", "1", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "basis_bounds.csv").exists()
    assert (out / "coarse_bounds.csv").exists()
    assert (out / "basis_margins.png").exists()


def test_diag_tables_reproducible(tmp_path):
    argv = ["diag-tables", "--scale", "trunc:15", "--nseeds", "1"]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert main(argv + ["--out", str(out1)]) == EXIT_OK
    assert main(argv + ["--out", str(out2)]) == EXIT_OK
    csvs = sorted(p.name for p in out1.glob("*.csv"))
    assert "exact_counts.csv" in csvs and "table2.csv" in csvs
    for name in csvs:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_bvp_outputs(tmp_path):
    out = tmp_path / "bvp"
    code = main(["bvp", "--grid", "16", "--nparts", "16",
                 "--ritz-count", "4", "--tol", "1e-10", "--out", str(out)])
    assert code == EXIT_OK
    for name in ("summary.csv", "res_max.csv", "history_one_level.csv",
                 "history_adapted.csv", "convergence.png", "viscosity.png"):
        assert (out / name).exists()
    assert not (out / "rho_norms.csv").exists()
