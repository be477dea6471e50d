"""Deterministic SVG line plots."""

import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)

golden_mean = (5**0.5 - 1.0) / 2.0
fig_width = 5.0

params = {
    "svg.hashsalt": "spoison",
    "svg.fonttype": "path",
    "axes.labelsize": 10,
    "font.family": "serif",
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "lines.linewidth": 1.2,
    "figure.subplot.left": 0.16,
    "figure.subplot.bottom": 0.16,
    "figure.subplot.right": 0.95,
    "figure.subplot.top": 0.90,
}


def line_plot(
    path: Path,
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str = "",
    title: str = "",
    vline: float | None = None,
) -> Path:
    with matplotlib.rc_context(params):
        fig, ax = plt.subplots()
        for label, y in series.items():
            ax.plot(x, y, label=label)
        if vline is not None:
            ax.axvline(vline, color="0.6", linestyle="--", linewidth=0.8)
        ax.axhline(0.0, color="0.8", linewidth=0.6)
        ax.set_xlabel(xlabel)
        if ylabel:
            ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info(f"Wrote {path}")
    return path
