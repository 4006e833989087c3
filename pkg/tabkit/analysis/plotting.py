import logging

import matplotlib.pyplot as plt
import seaborn as sea


DESIGN_PALETTE = sea.color_palette("husl", 5)
DESIGN_ORDER = ["NS", "SS", "FS", "PAS", "PAC"]
sea.set(font="serif", style="whitegrid", palette=DESIGN_PALETTE, color_codes=False)

log = logging.getLogger(__name__)


def overhead_plot(report, scheduling=None):
    """Average overhead per thread count, one line per design.

    Parameters
    ----------
    report: OverheadReport
        Output of :func:`overhead_report`.
    scheduling: None | str
        Restrict to one scheduling; both are drawn, dashed for batched, by default.

    Returns
    -------
    fig: Figure
        Pyplot handle
    """
    data = report.summary
    if scheduling is not None:
        data = data[data.scheduling == scheduling]
    fig = plt.figure(figsize=(11, 8.5))
    ax = fig.add_subplot(111)
    sea.lineplot(
        data=data,
        x="threads",
        y="avg",
        hue="design",
        hue_order=[d for d in DESIGN_ORDER if d in set(data.design)],
        style="scheduling",
        markers=True,
        ax=ax,
    )
    ax.axhline(1.0, linestyle="--", color="k", linewidth=1)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("Threads")
    ax.set_ylabel("Overhead (time / NS single-thread time)")
    ax.set_title("Average overhead per design")
    plt.tight_layout()
    return fig


def ratio_plot(report):
    """Overhead ratio of every benchmark, one panel per scheduling.

    Returns
    -------
    fig: FacetGrid
    """
    fig = sea.catplot(
        kind="bar",
        data=report.ratios,
        x="threads",
        y="overhead",
        hue="design",
        hue_order=[d for d in DESIGN_ORDER if d in set(report.ratios.design)],
        col="scheduling",
        row="benchmark",
        palette=DESIGN_PALETTE,
        height=4,
        aspect=1.5,
    )
    fig.set_ylabels("Overhead")
    fig.set_xlabels("Threads")
    fig.tight_layout()
    return fig
