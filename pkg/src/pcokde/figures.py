"""Matplotlib rendering for the report paths.

Each CLI report command writes its delimited output first and then, via
these helpers, a figure next to it.  Rendering is file-only (Agg
backend); nothing here feeds back into results.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_criterion_curve(rows, path, dim: int) -> None:
    """Criterion-vs-bandwidth curve for a single selection run."""
    if dim == 1:
        xs = np.array([r["h"] for r in rows])
        ys = np.array([r["criterion"] for r in rows])
        xlabel = "bandwidth h"
    else:
        xs = np.array([r["detH"] for r in rows])
        ys = np.array([r["criterion"] for r in rows])
        xlabel = "det(H)"
    order = np.argsort(xs)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs[order], ys[order], lw=0.8, marker=".", ms=2)
    best = int(np.argmin(ys))
    ax.plot(xs[best], ys[best], "rs", ms=6, label="selected")
    ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("criterion")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_aggregate_figure(agg_rows, path) -> None:
    """Grouped bars of mean ISE^(1/2) per density and method."""
    densities = sorted({r["density"] for r in agg_rows})
    methods = sorted({r["method"] for r in agg_rows})
    width = 0.8 / max(len(methods), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(densities) * len(methods) * 0.4), 4))
    base = np.arange(len(densities))
    table = {(r["density"], r["method"]): r["mean_ise_sqrt"] for r in agg_rows}
    for k, meth in enumerate(methods):
        vals = [table.get((d, meth), np.nan) for d in densities]
        ax.bar(base + k * width, vals, width=width, label=meth)
    ax.set_xticks(base + 0.4 - width / 2)
    ax.set_xticklabels(densities)
    ax.set_ylabel("mean ISE$^{1/2}$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_lambda_figure(sweep_rows, path) -> None:
    """Mean risk against the penalty multiplier, one curve per density."""
    densities = sorted({r["density"] for r in sweep_rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for dens in densities:
        rows = sorted((r for r in sweep_rows if r["density"] == dens),
                      key=lambda r: r["lambda"])
        ax.plot([r["lambda"] for r in rows], [r["mean_ise"] for r in rows],
                marker="o", ms=3, label=dens)
    ax.set_xlabel("penalty multiplier")
    ax.set_ylabel("mean ISE")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
