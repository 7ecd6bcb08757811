"""Line-plot emission for year series (PNG or SVG)."""

from __future__ import annotations

from pathlib import Path

from .metrics import YearSeries


def plot_series(
    series: dict[str, YearSeries] | YearSeries,
    path: str | Path,
    title: str = "",
    ylabel: str = "",
) -> None:
    """Write a simple line plot; the output format follows the file suffix."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if isinstance(series, YearSeries):
        series = {"": series}
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name, s in series.items():
        ax.plot(s.years, s.values, marker="o", markersize=3, linewidth=1.2, label=name or None)
    ax.set_xlabel("year")
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any(name for name in series):
        ax.legend(frameon=False, fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
