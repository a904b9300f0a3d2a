"""Figure rendering for CLI reports (written alongside the delimited output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .field import DisplacementField
from .minimize import IterationRecord
from .verify import ConvergenceResult, ExponentFit, PoincareResult, SweepTable


def plot_sweep(table: SweepTable, fit: ExponentFit, path: str | Path) -> Path:
    path = Path(path)
    x = table.coordinates()
    y = table.densities()
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.loglog(x, y, "o", label="energy density")
    xs = np.array([x.min(), x.max()])
    ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, "-",
              label=f"fit slope {fit.slope:.3f}")
    ax.set_xlabel(table.spec.coordinate)
    ax.set_ylabel("energy / area")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_convergence(result: ConvergenceResult, path: str | Path) -> Path:
    path = Path(path)
    spd = np.array(result.samples_per_delta[: len(result.errors)], dtype=float)
    err = np.array(result.errors)
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    if np.any(err > 0):
        ax.loglog(spd, np.maximum(err, 1e-18), "o-", label="|E_h - E_ref|")
        ref = err[0] * (spd / spd[0]) ** -2.0
        ax.loglog(spd, np.maximum(ref, 1e-18), "--", label="order 2")
    else:
        ax.semilogx(spd, err, "o-", label="|E_h - E_ref| (exact)")
    ax.set_xlabel("samples per finest scale")
    ax.set_ylabel("energy error")
    ax.set_title(result.label)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_field(field: DisplacementField, path: str | Path) -> Path:
    path = Path(path)
    g = field.grid
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    extent = (g.x0, g.x0 + g.lx, g.y0, g.y0 + g.ly)
    im = ax.imshow(field.w.T, origin="lower", extent=extent, aspect="auto",
                   cmap="viridis")
    fig.colorbar(im, ax=ax, label="w")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    label = field.meta.get("construction", "field")
    ax.set_title(f"{label}: vertical displacement")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_minimize_log(log: list[IterationRecord], path: str | Path) -> Path:
    path = Path(path)
    it = [r.iteration for r in log]
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.plot(it, [r.total for r in log], "-", label="total")
    ax.plot(it, [r.stretching for r in log], "--", label="stretching")
    ax.plot(it, [r.bending for r in log], "--", label="bending")
    ax.plot(it, [r.bonding for r in log], "--", label="bonding")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_poincare(result: PoincareResult, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.hist(result.ratios, bins=24, color="tab:blue", alpha=0.8)
    ax.axvline(result.bound, color="tab:red", linestyle="--",
               label=f"bound {result.bound:.4f}")
    ax.set_xlabel("|f|^2 integral over |Df|^2 integral")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
