"""Matplotlib renderings of the experiment artifacts.

Every function writes a PNG next to the CSV it illustrates and closes the
figure; nothing here touches an interactive backend.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .problems import BVP_GRID, field_on_grid

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "savefig.dpi": 150,
}

_COLORS = {"none": "0.4", "one_level": "0.4", "deflation": "tab:blue",
           "correction": "tab:orange", "adapted": "tab:green"}


def _finish(fig, path):
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def convergence_figure(histories, path, title=None):
    """Semilogy residual curves; histories is a list of (label, history)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, hist in histories:
            ax.semilogy(np.arange(hist.relres.size), hist.relres,
                        label=label, color=_COLORS.get(label))
        ax.set_xlabel("iteration")
        ax.set_ylabel("relative residual")
        if title:
            ax.set_title(title)
        ax.legend()
        _finish(fig, path)


def spectrum_figure(groups, path, title=None):
    """Eigenvalue scatter per variant, one panel per group.

    groups is a list of (label, SpectrumReport); the certified interval is
    drawn as a shaded band on the real axis.
    """
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(groups), 1, sharex=False,
                                 figsize=(6.4, 2.2 * len(groups)),
                                 squeeze=False)
        for ax, (label, report) in zip(axes[:, 0], groups):
            w = np.asarray(report.eigenvalues, dtype=complex)
            ax.scatter(w.real, w.imag, s=8, color="tab:blue", zorder=3)
            lo, hi = report.interval
            ax.axvspan(lo, hi, color="tab:green", alpha=0.15, zorder=1)
            bad = [i for i, _ in report.violations]
            if bad:
                ax.scatter(w.real[bad], w.imag[bad], s=16, color="tab:red",
                           zorder=4)
            ax.set_ylabel(label, fontsize=8)
        axes[-1, 0].set_xlabel("Re")
        if title:
            fig.suptitle(title)
        _finish(fig, path)


def counts_figure(rows, path, x="epsilon", title=None):
    """Iteration counts against the perturbation size, one line per variant.

    Unconverged cells (count -1) are dropped from their line.
    """
    from .experiments import VARIANT_NAMES

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name in VARIANT_NAMES.values():
            pts = {}
            for row in rows:
                count = row["iterations_" + name]
                if count < 0:
                    continue
                pts.setdefault(row[x], []).append(count)
            if not pts:
                continue
            xs = sorted(pts)
            ys = [np.mean(pts[v]) for v in xs]
            ax.semilogx(xs, ys, marker="o", label=name,
                        color=_COLORS.get(name))
        ax.set_xlabel(x)
        ax.set_ylabel("iterations")
        if title:
            ax.set_title(title)
        ax.legend()
        _finish(fig, path)


def viscosity_figure(field, path, m=BVP_GRID):
    """Heat map of the diffusion coefficient on the interior grid."""
    grid = field_on_grid(field, m)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        im = ax.imshow(grid, origin="lower", extent=(0, 1, 0, 1),
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label="viscosity")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(field.kind)
        _finish(fig, path)


def margins_figure(rows, path, title=None):
    """Containment margins per trial: distance of each spectrum edge from
    its interval, positive when inside."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        idx = np.arange(len(rows))
        worst = np.array([row["worst"] for row in rows])
        ok = worst == 0.0
        ax.scatter(idx[ok], np.zeros(ok.sum()), s=6, color="tab:green",
                   label="contained")
        if (~ok).any():
            ax.scatter(idx[~ok], worst[~ok], s=12, color="tab:red",
                       label="violation")
        ax.set_xlabel("trial")
        ax.set_ylabel("violation distance")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
        _finish(fig, path)
