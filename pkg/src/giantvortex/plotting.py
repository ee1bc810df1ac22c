"""Optional figures for the CLI (Agg backend, PNG)."""
import os

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0
params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 150,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}


def _save(fig, outdir, name):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_profile(outdir, y, g, title="", name="profile.png"):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(y, g, color="k")
        ax.set_xlabel(r"$y$")
        ax.set_ylabel(r"$g$")
        ax.set_title(title)
        return _save(fig, outdir, name)


def plot_cost(outdir, y, g, F, K, region=None, name="cost.png"):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(y, 0.5 * g**2, label=r"$g^2/2$", color="0.5")
        ax.plot(y, F, label=r"$F$", ls="--", color="C0")
        ax.plot(y, K, label=r"$K$", color="C3")
        ax.axhline(0, color="k", lw=0.5)
        if region is not None:
            ax.axvspan(region[0], region[1], color="C2", alpha=0.12, lw=0)
        ax.set_xlabel(r"$y$")
        ax.legend(frameon=False)
        return _save(fig, outdir, name)


def plot_scan(outdir, x, f, xlabel, ylabel, mark=None, name="scan.png", logx=False):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(x, f, "o-", ms=3, color="k")
        if mark is not None:
            ax.axvline(mark, color="C3", lw=0.8)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        return _save(fig, outdir, name)


def plot_field(outdir, r, theta, values, name="density.png"):
    """Density and phase of a polar field on Cartesian axes."""
    R, TH = np.meshgrid(r, np.append(theta, theta[0] + 2 * np.pi), indexing="ij")
    vals = np.concatenate([values, values[:, :1]], axis=1)
    X, Y = R * np.cos(TH), R * np.sin(TH)
    with plt.rc_context(params):
        fig, axes = plt.subplots(1, 2, figsize=(2 * fig_width, fig_width))
        m0 = axes[0].pcolormesh(X, Y, np.abs(vals) ** 2, shading="gouraud", cmap="viridis")
        axes[0].set_title(r"$|\psi|^2$")
        fig.colorbar(m0, ax=axes[0], shrink=0.8)
        axes[1].pcolormesh(X, Y, np.angle(vals), shading="gouraud", cmap="twilight")
        axes[1].set_title(r"arg $\psi$")
        for ax in axes:
            ax.set_aspect("equal")
            ax.set_axis_off()
        return _save(fig, outdir, name)


def plot_sweep(outdir, x, columns, xlabel, name="sweep.png"):
    """One panel per numeric column against the sweep axis."""
    keys = list(columns)
    with plt.rc_context(params):
        fig, axes = plt.subplots(len(keys), 1, sharex=True,
                                 figsize=(fig_width, 1.6 * max(len(keys), 1)))
        axes = np.atleast_1d(axes)
        for ax, k in zip(axes, keys):
            ax.plot(x, columns[k], "o-", ms=3, color="k")
            ax.set_ylabel(k, fontsize=7)
        axes[-1].set_xlabel(xlabel)
        return _save(fig, outdir, name)
