"""Summary figures for verification reports.

All figures are rendered headless to SVG with a fixed hash salt and no
creation-date metadata, so the bytes are reproducible for a fixed seed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .verify import MonteCarloReport, TheoreticalQuantities

_RC = {
    "svg.hashsalt": "spherefield",
    "figure.figsize": (6.0, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_ergodicity(
    theos: list[TheoreticalQuantities], reports: list[MonteCarloReport], path: Path
) -> None:
    ells = [t.ell for t in theos]
    theo = [t.mse for t in theos]
    emp = [r.emp_mse for r in reports]
    err = [4.0 * r.emp_mse_se for r in reports]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.loglog(ells, theo, "k-", marker="s", label="theoretical MSE")
        ax.errorbar(ells, emp, yerr=err, fmt="o", color="tab:red", capsize=3,
                    label="empirical MSE (4 SE)")
        ax.set_xlabel("degree")
        ax.set_ylabel("E ||sample op - truth||_HS^2")
        ax.set_title("High-frequency ergodicity rate")
        ax.legend()
        _save(fig, path)


def plot_clt(theos: list[TheoreticalQuantities], reports: list[MonteCarloReport], path: Path) -> None:
    ells = np.array([t.ell for t in theos])
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.semilogy(ells, [t.d2_bound_simplified for t in theos], "k--", label="smooth bound (simplified)")
        ax.semilogy(ells, [t.d2_bound_exact for t in theos], "k-", label="smooth bound (exact)")
        ax.semilogy(ells, [r.d2_proxy for r in reports], "o", color="tab:red", label="smooth-distance proxy")
        ax.semilogy(ells, [t.tv_bound for t in theos], "b--", label="total-variation bound")
        ax.semilogy(ells, [r.ks_distance for r in reports], "s", color="tab:blue", label="empirical KS")
        ax.set_xlabel("degree")
        ax.set_ylabel("distance")
        ax.set_title("Quantitative CLT bounds vs empirical proxies")
        ax.legend(fontsize=7)
        _save(fig, path)


def plot_schoenberg(rows: list[list], nuclear_at_one: float, path: Path) -> None:
    ts = [row[0] for row in rows]
    nuclear = [row[2] for row in rows]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(ts, nuclear, "-", color="tab:green", label="nuclear norm of kernel")
        ax.axhline(nuclear_at_one, color="k", linestyle=":", label="value at coincidence")
        ax.set_xlabel("angular separation t")
        ax.set_ylabel("||R_t||_1")
        ax.set_title("Covariance kernel reconstruction")
        ax.legend()
        _save(fig, path)


def plot_field_map(theta: np.ndarray, phi: np.ndarray, values: np.ndarray, path: Path) -> None:
    """Colormap of one field coordinate on the (theta, phi) grid."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        grid = values.reshape(theta.shape[0], phi.shape[0])
        mesh = ax.pcolormesh(phi, theta, grid, shading="nearest", cmap="RdBu_r")
        fig.colorbar(mesh, ax=ax, label="first coordinate")
        ax.set_xlabel("longitude")
        ax.set_ylabel("colatitude")
        ax.invert_yaxis()
        ax.set_title("Simulated field realization")
        _save(fig, path)
