"""Command line runner for the preconditioner studies.

Each subcommand writes CSV tables plus rendered PNG figures into --out.
Exit codes: 0 on success, 2 when a certified spectrum violates its
interval, 1 on any execution error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import plots
from .exceptions import DefprecError
from .matrices import write_matrix
from .problems import assemble_bvp, diag_case, field_by_name, field_on_grid

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2


def parse_scale(value):
    """Accept "full", "trunc:<n>", or a bare size from a config file."""
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value == "full":
        return "full"
    if isinstance(value, str) and value.startswith("trunc:"):
        return int(value.split(":", 1)[1])
    raise ValueError(f"unknown scale: {value!r}")


def _settings(args, defaults):
    """Layer the run configuration: defaults, then config file, then flags."""
    cfg = dict(defaults)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config must be a JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ValueError(
                f"unknown config fields: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _outdir(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record_rows(records, order):
    return [{"method": name, "iterations": records[name].iterations,
             "converged": records[name].converged} for name in order]


def cmd_diag_tables(args):
    cfg = _settings(args, dict(seed=0, scale="full", out="diag_tables",
                               nseeds=5, tol=1e-12, max_it=300))
    scale = parse_scale(cfg["scale"])
    out = _outdir(cfg)
    seeds = range(cfg["seed"], cfg["seed"] + cfg["nseeds"])
    tol, max_it = cfg["tol"], cfg["max_it"]

    exact = ex.diag_exact_counts(scale, tol=tol, max_it=max_it)
    order = ["none"] + list(ex.VARIANT_NAMES.values())
    ex.write_csv(out / "exact_counts.csv",
                 ["method", "iterations", "converged"],
                 _record_rows(exact, order))
    plots.convergence_figure([(name, exact[name].history) for name in order],
                             out / "exact_convergence.png")

    angle_rows, count_rows = ex.basis_perturbation_tables(
        scale, seeds=seeds, tol=tol, max_it=max_it)
    ex.write_csv(out / "table1.csv",
                 ["seed", "epsilon", "sin_theta", "res_max"], angle_rows)
    ex.write_csv(out / "table2.csv",
                 ["seed", "epsilon"] + ex.count_fields(), count_rows)
    plots.counts_figure(count_rows, out / "basis_counts.png",
                        title="perturbed basis")

    coarse_rows = ex.coarse_perturbation_table(scale, seeds=seeds, tol=tol,
                                               max_it=max_it)
    ex.write_csv(out / "table3.csv",
                 ["seed", "epsilon", "norm_rho1", "norm_rho2"]
                 + ex.count_fields(), coarse_rows)
    plots.counts_figure(coarse_rows, out / "coarse_counts.png",
                        title="perturbed coarse solve")

    reports = ex.diag_spectrum_reports(scale, seed=cfg["seed"])
    groups = {}
    for key, report in reports.items():
        report.to_csv(out / f"spectrum_{key}.csv")
        prefix, name = key.rsplit("_", 1)
        groups.setdefault(prefix, []).append((name, report))
    for prefix, group in groups.items():
        plots.spectrum_figure(group, out / f"spectrum_{prefix}.png",
                              title=prefix)
    bad = sum(len(report.violations) for report in reports.values())
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_bvp(args):
    cfg = _settings(args, dict(field="skyscraper", nparts=16, ritz_count=15,
                               mode="exact", grid=101, out="bvp", tol=1e-12,
                               max_it=300))
    out = _outdir(cfg)
    study = ex.bvp_study(field=cfg["field"], nparts=cfg["nparts"],
                         ritz_count=cfg["ritz_count"], mode=cfg["mode"],
                         m=cfg["grid"], tol=cfg["tol"],
                         max_it=cfg["max_it"])
    order = ["one_level"] + list(ex.VARIANT_NAMES.values())
    for name in order:
        study.records[name].history.to_csv(out / f"history_{name}.csv")
    ex.write_csv(out / "summary.csv", ["method", "iterations", "converged"],
                 _record_rows(study.records, order))
    ex.write_csv(out / "res_max.csv",
                 ["field", "nparts", "ritz_count", "res_max"],
                 [{"field": study.field, "nparts": study.nparts,
                   "ritz_count": study.ritz_count,
                   "res_max": study.res_max}])
    if study.mode == "ilu0":
        ex.write_csv(out / "rho_norms.csv",
                     ["field", "nparts", "ritz_count", "norm_rho1",
                      "norm_rho2"],
                     [{"field": study.field, "nparts": study.nparts,
                       "ritz_count": study.ritz_count,
                       "norm_rho1": study.norm_rho1,
                       "norm_rho2": study.norm_rho2}])
    plots.convergence_figure(
        [(name, study.records[name].history) for name in order],
        out / "convergence.png",
        title=f"{study.field}, {study.nparts} subdomains")
    plots.viscosity_figure(field_by_name(cfg["field"]),
                           out / "viscosity.png", m=cfg["grid"])
    return EXIT_OK


def cmd_spectrum(args):
    cfg = _settings(args, dict(matrix=None, basis=None, variant="D",
                               hmode="exact", out="spectrum"))
    if not cfg["matrix"] or not cfg["basis"]:
        raise ValueError("spectrum needs --matrix and --basis")
    out = _outdir(cfg)
    report = ex.spectrum_from_files(cfg["matrix"], cfg["basis"],
                                    variant=cfg["variant"],
                                    hmode=cfg["hmode"])
    report.to_csv(out / "spectrum.csv")
    plots.spectrum_figure([(ex.VARIANT_NAMES[cfg["variant"]], report)],
                          out / "spectrum.png")
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_bounds_check(args):
    cfg = _settings(args, dict(seed=0, trials=100, nseeds=5, basis_scale=50,
                               coarse_scale="full", out="bounds_check"))
    if args.scale is not None:
        cfg["basis_scale"] = cfg["coarse_scale"] = args.scale
    out = _outdir(cfg)
    basis = ex.basis_bound_trials(scale=parse_scale(cfg["basis_scale"]),
                                  trials=cfg["trials"], seed=cfg["seed"])
    ex.write_csv(out / "basis_bounds.csv",
                 ["sin_target", "trial", "variant", "sin_theta",
                  "interval_lo", "interval_hi", "violations", "worst",
                  "kappa"],
                 basis.rows)
    plots.margins_figure(basis.rows, out / "basis_margins.png",
                         title="perturbed basis containment")
    seeds = range(cfg["seed"], cfg["seed"] + cfg["nseeds"])
    coarse = ex.coarse_bound_trials(scale=parse_scale(cfg["coarse_scale"]),
                                    seeds=seeds)
    ex.write_csv(out / "coarse_bounds.csv",
                 ["seed", "epsilon", "variant", "norm_rho1", "norm_rho2",
                  "interval_lo", "interval_hi", "real", "violations",
                  "worst", "min_real_eig"],
                 coarse.rows)
    plots.margins_figure(coarse.rows, out / "coarse_margins.png",
                         title="perturbed coarse-solve containment")
    bad = basis.violations + coarse.violations
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_gen_problem(args):
    cfg = _settings(args, dict(kind="diag", scale="full", field="skyscraper",
                               grid=101, out="problem"))
    out = _outdir(cfg)
    kind = cfg["kind"]
    if kind == "diag":
        case = diag_case(parse_scale(cfg["scale"]))
        write_matrix(out / "a.mtx", case.matrix())
        write_matrix(out / "rhs.mtx", case.rhs.reshape(-1, 1))
        write_matrix(out / "basis.mtx", case.exact_basis.to_dense())
    elif kind == "bvp":
        a, rhs = assemble_bvp(field_by_name(cfg["field"]), cfg["grid"])
        write_matrix(out / "a.mtx", a)
        write_matrix(out / "rhs.mtx", rhs.reshape(-1, 1))
    elif kind == "field":
        field = field_by_name(cfg["field"])
        grid = field_on_grid(field, cfg["grid"])
        header = ",".join(f"x{j}" for j in range(grid.shape[1]))
        with open(out / "field.csv", "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(header + "\n")
            for row in grid:
                fh.write(",".join("%.16e" % v for v in row) + "\n")
        plots.viscosity_figure(field, out / "field.png", m=cfg["grid"])
    else:
        raise ValueError(f"unknown problem kind: {kind!r}")
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="defprec",
        description="deflation and coarse-correction preconditioner studies")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override")
    common.add_argument("--seed", type=int, help="base seed (default 0)")
    common.add_argument("--scale", help='problem scale: "full" or "trunc:<n>"')
    common.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diag-tables", parents=[common],
                       help="diagonal study: count tables and spectra")
    p.add_argument("--nseeds", type=int, help="seeds per table (default 5)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-it", dest="max_it", type=int)
    p.set_defaults(func=cmd_diag_tables)

    p = sub.add_parser("bvp", parents=[common],
                       help="heterogeneous diffusion study")
    p.add_argument("--field", choices=["skyscraper", "continuous"])
    p.add_argument("--nparts", type=int, choices=[16, 32, 64, 128])
    p.add_argument("--ritz-count", dest="ritz_count", type=int)
    p.add_argument("--mode", choices=["exact", "ilu0"])
    p.add_argument("--grid", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-it", dest="max_it", type=int)
    p.set_defaults(func=cmd_bvp)

    p = sub.add_parser("spectrum", parents=[common],
                       help="certify one preconditioned spectrum from files")
    p.add_argument("--matrix", help="Matrix Market system matrix")
    p.add_argument("--basis", help="Matrix Market coarse-space columns")
    p.add_argument("--variant", choices=["D", "C", "A"])
    p.add_argument("--hmode", choices=["exact", "ilu0"])
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bounds-check", parents=[common],
                       help="random containment trials for all intervals")
    p.add_argument("--trials", type=int)
    p.add_argument("--nseeds", type=int)
    p.set_defaults(func=cmd_bounds_check)

    p = sub.add_parser("gen-problem", parents=[common],
                       help="export a test system as Matrix Market / CSV")
    p.add_argument("--kind", choices=["diag", "bvp", "field"])
    p.add_argument("--field", choices=["skyscraper", "continuous"])
    p.add_argument("--grid", type=int)
    p.set_defaults(func=cmd_gen_problem)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DefprecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
