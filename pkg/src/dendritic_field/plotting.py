"""Matplotlib figures written next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so repeated runs write identical SVGs
matplotlib.rcParams["svg.hashsalt"] = "dendritic-field"
_META = {"Date": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_META if str(path).endswith(".svg") else None)
    plt.close(fig)
    return path


def plot_sweep(result, path, width=5.0):
    fig, ax = plt.subplots(figsize=(width, 0.75 * width))
    ax.plot(result.nus, result.e, "o", color="k", label=r"$e(\nu)$")
    nn = np.linspace(0.0, float(np.max(result.nus)), 50)
    ax.plot(nn, result.slope * nn + result.intercept, "-", color="C0",
            label=f"fit: slope {result.slope:.4g}, $R^2$={result.r2:.4f}")
    ax.set_xlabel(r"$\nu$")
    ax.set_ylabel(r"$\|v - v_\nu\|^2_{L^\infty(0,T;L^2)}$")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_slices(xi, slices, path, width=5.0):
    """``slices`` maps a legend label to the x=0 profile along xi."""
    fig, ax = plt.subplots(figsize=(width, 0.75 * width))
    for i, (label, v) in enumerate(slices.items()):
        ax.plot(xi, v, ls="--" if i % 2 else "-", label=label)
    ax.set_xlabel(r"$\xi$")
    ax.set_ylabel(r"$v(0,\xi,t)$")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_field(f, t, path, width=6.0):
    g = f.grid
    fig, ax = plt.subplots(figsize=(width, 0.5 * width))
    im = ax.pcolormesh(g.x_nodes, g.xi_nodes, f.values.T, shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="v")
    ax.set_xlabel("x")
    ax.set_ylabel(r"$\xi$")
    ax.set_title(f"t = {t:g}")
    return _save(fig, path)
