"""Figure rendering: success-rate lines and the log-log threshold contour.

Rendering is deterministic for a given CSV: fixed figure geometry, fixed
colormap, no timestamps in the output. SVG is the primary format (diffable);
PNG works through the same entry point.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data import CellGrid, load_cells

matplotlib.rcParams["svg.hashsalt"] = "bcsplot"

KINDS = ("lines_vs_s", "lines_vs_M", "contour")
_FIGSIZE = (6.4, 4.8)
_CMAP = "viridis"


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str  # lines_vs_s | lines_vs_M | contour
    out_path: str
    overlay_nsq: bool = False  # draw M = (n/s)^2 on the contour

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def _save(fig, out_path: str) -> None:
    meta = {"Date": None} if str(out_path).endswith(".svg") else None
    fig.savefig(out_path, metadata=meta)
    plt.close(fig)


def _lines_vs_s(grid: CellGrid):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    colors = plt.get_cmap(_CMAP)(np.linspace(0.15, 0.9, len(grid.M_values)))
    for i, M in enumerate(grid.M_values):
        ax.plot(grid.s_values, grid.rates[i, :], marker="o", ms=3, color=colors[i], label=f"M={M}")
    ax.set_xlabel("plaintext sparsity s")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.03, 1.03)
    ax.set_title(f"key recovery, n={grid.n}, m={grid.m}")
    ax.legend(fontsize=7, ncol=2)
    return fig


def _lines_vs_M(grid: CellGrid):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    colors = plt.get_cmap(_CMAP)(np.linspace(0.15, 0.9, len(grid.s_values)))
    for j, s in enumerate(grid.s_values):
        ax.plot(grid.M_values, grid.rates[:, j], marker="o", ms=3, color=colors[j], label=f"s={s}")
    ax.set_xscale("log")
    ax.set_xlabel("number of plaintexts M")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.03, 1.03)
    ax.set_title(f"key recovery, n={grid.n}, m={grid.m}")
    ax.legend(fontsize=7, ncol=2)
    return fig


def _log_edges(values) -> np.ndarray:
    v = np.log(np.asarray(values, dtype=float))
    if len(v) == 1:
        return np.exp(np.array([v[0] - 0.5, v[0] + 0.5]))
    mids = (v[1:] + v[:-1]) / 2
    first = v[0] - (mids[0] - v[0])
    last = v[-1] + (v[-1] - mids[-1])
    return np.exp(np.concatenate([[first], mids, [last]]))


def _contour(grid: CellGrid, overlay_nsq: bool):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    se = _log_edges(grid.s_values)
    Me = _log_edges(grid.M_values)
    C = np.ma.masked_invalid(grid.rates)
    pm = ax.pcolormesh(se, Me, C, cmap=_CMAP, vmin=0.0, vmax=1.0, shading="flat")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("plaintext sparsity s")
    ax.set_ylabel("number of plaintexts M")
    ax.set_title(f"success rate, n={grid.n}, m={grid.m}")
    fig.colorbar(pm, ax=ax, label="success rate")
    if overlay_nsq:
        ss = np.exp(np.linspace(np.log(se[0]), np.log(se[-1]), 200))
        curve = (grid.n / ss) ** 2
        keep = (curve >= Me[0]) & (curve <= Me[-1])
        ax.plot(ss[keep], curve[keep], "w--", lw=1.8, label="M = (n/s)^2")
        ax.legend(loc="upper right", fontsize=8)
    return fig


def render(spec: PlotSpec) -> str:
    """Render the requested figure; returns the output path."""
    grid = load_cells(spec.csv_path)
    if np.all(np.isnan(grid.rates)):
        raise ValueError(f"{spec.csv_path}: no complete (M, s) cell to plot")
    if spec.kind == "lines_vs_s":
        fig = _lines_vs_s(grid)
    elif spec.kind == "lines_vs_M":
        fig = _lines_vs_M(grid)
    else:
        fig = _contour(grid, spec.overlay_nsq)
    _save(fig, spec.out_path)
    return spec.out_path
