"""Figure rendering for solver traces and benchmark comparisons.

Every CLI path that writes delimited output can render a matplotlib figure
next to it.  Rendering is file-only (Agg backend); nothing here opens a
window.  Traces must have been recorded with snapshots for the path panels.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PATH_STYLE = dict(marker="o", markersize=3, linewidth=1.0)


def _draw_path(ax, columns: np.ndarray, trace: list, final_y: np.ndarray,
               title: str) -> None:
    points = [rec.y_snapshot for rec in trace if rec.y_snapshot is not None]
    points.append(final_y)
    path = np.array(points)
    ax.plot(columns[0], columns[1], "ks", markersize=6, label="columns")
    ax.plot(path[:, 0], path[:, 1], color="tab:blue", label="iterates",
            **_PATH_STYLE)
    ax.plot(0.0, 0.0, "r+", markersize=10)
    ax.set_title(title)
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)


def render_trace_figure(columns: np.ndarray, trace: list, final_y: np.ndarray,
                        out_path, title: str = "") -> None:
    """One figure per solve: iterate path (2-d instances) plus objective decay."""
    two_d = columns.shape[0] == 2 and trace and trace[0].y_snapshot is not None
    if two_d:
        fig, (ax_path, ax_obj) = plt.subplots(1, 2, figsize=(10, 4.2))
        _draw_path(ax_path, columns, trace, final_y, title)
    else:
        fig, ax_obj = plt.subplots(figsize=(5.5, 4.2))
    objs = [rec.obj for rec in trace]
    if objs:
        ax_obj.semilogy(range(len(objs)), np.maximum(objs, 1e-300), color="tab:blue")
    ax_obj.set_xlabel("iteration")
    ax_obj.set_ylabel("objective")
    ax_obj.set_title("objective decay")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_comparison_figure(columns: np.ndarray, runs: dict, out_path) -> None:
    """Stacked path panels (one per algorithm) plus a shared decay panel.

    ``runs`` maps an algorithm name to its RunResult; path panels appear only
    for 2-d instances with snapshot traces.
    """
    two_d = columns.shape[0] == 2 and all(
        r.trace and r.trace[0].y_snapshot is not None for r in runs.values()
    )
    n_rows = len(runs) if two_d else 0
    fig = plt.figure(figsize=(7, 3.2 * (n_rows + 1)))
    if two_d:
        for row, (name, result) in enumerate(runs.items()):
            ax = fig.add_subplot(n_rows + 1, 1, row + 1)
            _draw_path(ax, columns, result.trace, np.asarray(result.iterate.y),
                       f"{name}: {result.status} in {result.iterations} iterations")
    ax = fig.add_subplot(n_rows + 1, 1, n_rows + 1)
    for name, result in runs.items():
        objs = [rec.obj for rec in result.trace]
        if objs:
            ax.semilogy(range(len(objs)), np.maximum(objs, 1e-300), label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("squared image norm")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
