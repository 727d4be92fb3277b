"""SVG line charts of sweep results, rendered with matplotlib's Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweeps import SweepResult  # noqa: E402

# fixed salt and no timestamp keep the SVG bytes reproducible
STYLE = {"svg.hashsalt": "tmsnet", "svg.fonttype": "none", "figure.figsize": (5.0, 3.4), "font.size": 9}


def line_plot(
    result: SweepResult,
    x: str,
    ys: Sequence[str],
    path: str | Path,
    xlabel: str | None = None,
    ylabel: str = "",
    logx: bool = False,
    title: str | None = None,
) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xv = result.column(x)
        for name in ys:
            ax.plot(xv, result.column(name), marker="o", markersize=2.5, linewidth=1.2, label=name)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel or x)
        ax.set_ylabel(ylabel)
        ax.set_title(title or result.name)
        if len(ys) > 1:
            ax.legend(frameon=False)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def overlay_plot(
    x: np.ndarray,
    curves: dict[str, np.ndarray],
    path: str | Path,
    xlabel: str,
    ylabel: str,
    title: str,
    logx: bool = False,
    logy: bool = False,
) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, y in curves.items():
            ax.plot(x, y, linewidth=1.2, label=label)
        ax.set_xscale("log" if logx else "linear")
        ax.set_yscale("log" if logy else "linear")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(frameon=False)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
