"""Standalone SVG figures from the CSV files the CLI writes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .io import CsvFormatError, read_csv  # noqa: E402

_RC = {
    "svg.hashsalt": "atominterface",  # stable element ids
    "svg.fonttype": "path",           # glyphs as paths: no external fonts
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_LINE_DEFAULTS = {
    "delta": ("T", "R"),
    "eta1": ("pop_E1", "pop_E2", "pop_S1", "pop_S2", "pop_P1", "pop_P2"),
}


def _pick_series(header, columns, x, y):
    numeric = [h for h in header if isinstance(columns[h], np.ndarray)]
    if not numeric:
        raise CsvFormatError("no numeric columns to plot")
    x = x or numeric[0]
    if x not in numeric:
        raise CsvFormatError(f"column {x!r} not found (columns: {', '.join(header)})")
    if not y:
        y = [c for c in _LINE_DEFAULTS.get(x, ()) if c in numeric] or \
            [c for c in numeric if c != x]
    for name in y:
        if name not in numeric:
            raise CsvFormatError(f"column {name!r} not found (columns: {', '.join(header)})")
    return x, list(y)


def _save(fig, out):
    out = Path(out)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def line_plot(csv_path, out, x=None, y=(), log_x=False, log_y=False, title=None) -> Path:
    """One line per ``y`` column against column ``x``."""
    header, cols = read_csv(csv_path)
    x, y = _pick_series(header, cols, x, y)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for name in y:
            ax.plot(cols[x], cols[name], label=name, linewidth=1.0)
        ax.set_xlabel(x)
        ax.set_ylabel(y[0] if len(y) == 1 else ", ".join(y))
        if log_x:
            ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        if len(y) > 1:
            ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, out)


def contour_plot(csv_path, out, x=None, y=None, z=None, log_x=False, log_y=False,
                 log_z=False, title=None) -> Path:
    """Filled contour of ``z`` over a rectangular ``(x, y)`` grid.

    Non-finite ``z`` (divergent points) is left blank.
    """
    header, cols = read_csv(csv_path)
    numeric = [h for h in header if isinstance(cols[h], np.ndarray)]
    x = x or "eta_c"
    y = y or "delta2"
    z = z or "product"
    for name in (x, y, z):
        if name not in numeric:
            raise CsvFormatError(f"column {name!r} not found (columns: {', '.join(header)})")
    xs = np.unique(cols[x])
    ys = np.unique(cols[y])
    if xs.size < 2 or ys.size < 2 or xs.size * ys.size != cols[z].size:
        raise CsvFormatError("contour data must cover a rectangular grid with >= 2 points per axis")
    grid = np.full((ys.size, xs.size), np.nan)
    ix = np.searchsorted(xs, cols[x])
    iy = np.searchsorted(ys, cols[y])
    grid[iy, ix] = cols[z]
    data = np.ma.masked_invalid(grid)
    if log_z:
        data = np.ma.masked_less_equal(data, 0.0)
    if data.count() == 0:
        raise CsvFormatError(f"column {z!r} has no finite values to contour")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        if log_z:
            lo, hi = float(data.min()), float(data.max())
            levels = np.logspace(np.log10(lo), np.log10(hi), 25) if hi > lo else None
            cs = ax.contourf(xs, ys, data, levels=levels, norm=LogNorm(vmin=lo, vmax=hi))
        else:
            cs = ax.contourf(xs, ys, data, levels=24)
        fig.colorbar(cs, ax=ax, label=z)
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if log_x:
            ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.grid(False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, out)
