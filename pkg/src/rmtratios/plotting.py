"""Figures written next to the CSV grids of the kpoint command."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402


def _style(ax, title: str, xlabel: str, ylabel: str):
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_axisbelow(True)
    ax.grid(ls=":", lw=0.6)


def _save(fig, path) -> Path:
    import io as _io

    buf = _io.BytesIO()
    fig.savefig(buf, format=Path(path).suffix.lstrip(".") or "png", dpi=150, bbox_inches="tight")
    plt.close(fig)
    return atomic_write_bytes(path, buf.getvalue())


def plot_density(x: np.ndarray, values: np.ndarray, path, title: str = "") -> Path:
    """Real and imaginary part of a one-point function on a 1-D grid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, values.real, lw=1.5, label="Re $R_1$")
    if np.any(np.abs(values.imag) > 1e-12 * max(1.0, float(np.max(np.abs(values.real))))):
        ax.plot(x, values.imag, lw=1.0, ls="--", label="Im $R_1$")
    ax.axhline(0, lw=0.8, color="0.4", zorder=1)
    ax.legend(frameon=False)
    _style(ax, title, "$x$", "$R_1(x)$")
    return _save(fig, path)


def plot_surface(x1: np.ndarray, x2: np.ndarray, values: np.ndarray, path, title: str = "") -> Path:
    """Heat map of Re R_2 on a tensor grid (values shaped len(x1) x len(x2))."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    mesh = ax.pcolormesh(x1, x2, values.real.T, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="Re $R_2$")
    _style(ax, title, "$x_1$", "$x_2$")
    return _save(fig, path)


def plot_grid(axes: list[np.ndarray], values: np.ndarray, path, title: str = "") -> Path | None:
    """Dispatch on the grid dimension; k > 2 grids are not plotted."""
    if len(axes) == 1:
        return plot_density(axes[0], values.ravel(), path, title)
    if len(axes) == 2:
        return plot_surface(axes[0], axes[1], values.reshape(len(axes[0]), len(axes[1])), path, title)
    return None
