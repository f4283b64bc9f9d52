"""Figure rendering for the report path: energy surface and convergence."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_energy_surface", "render_convergence"]


def render_energy_surface(axis0_deg, axis1_deg, energies, out_path,
                          path_deg=None, axis_names=("theta_0", "theta_1")) -> None:
    """Heat map of E over a 2-parameter grid, optional descent path overlay.

    ``axis0_deg`` indexes the rows of ``energies`` and is drawn vertically.
    ``path_deg`` is an (n, 2) array of iterates in the same parameter order.
    """
    axis0_deg = np.asarray(axis0_deg, dtype=float)
    axis1_deg = np.asarray(axis1_deg, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (axis0_deg.size, axis1_deg.size):
        raise ValueError("energy grid shape does not match the axes")
    fig, ax = plt.subplots(figsize=(6.4, 4.8), constrained_layout=True)
    mesh = ax.pcolormesh(axis1_deg, axis0_deg, energies, shading="auto",
                         cmap="viridis", rasterized=True)
    fig.colorbar(mesh, ax=ax, label="energy")
    if path_deg is not None:
        path = np.asarray(path_deg, dtype=float)
        ax.plot(path[:, 1], path[:, 0], color="crimson", lw=1.6,
                marker="o", ms=2.5, label="descent path")
        ax.plot(path[0, 1], path[0, 0], "s", color="white", ms=6,
                mec="crimson", label="start")
        ax.plot(path[-1, 1], path[-1, 0], "*", color="gold", ms=11,
                mec="black", label="optimum")
        ax.legend(loc="upper right", fontsize=8, framealpha=0.85)
    ax.set_xlabel(f"{axis_names[1]} [deg]")
    ax.set_ylabel(f"{axis_names[0]} [deg]")
    fig.savefig(out_path, dpi=160)
    plt.close(fig)


def render_convergence(iterations, energies, out_path) -> None:
    """Energy against iteration for one optimization run."""
    fig, ax = plt.subplots(figsize=(5.6, 3.8), constrained_layout=True)
    ax.plot(list(iterations), list(energies), color="tab:blue", marker="o", ms=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    ax.grid(True, alpha=0.3)
    fig.savefig(out_path, dpi=160)
    plt.close(fig)
