"""Worst-case overhead of a design against the single-threaded NS run.

The overhead of a benchmark under design D, scheduling S and NT threads is
its average time divided by the average time of the same benchmark under NS
with one thread. Ratios are then summarised over benchmarks per context.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from tabkit.exceptions import MissingBaseRunError


log = logging.getLogger(__name__)

CONTEXT = ["design", "scheduling", "threads"]
BASE_DESIGN = "NS"


@dataclass
class OverheadReport:
    """Overhead ratios per run and their summary per context.

    ``ratios`` has one row per (benchmark, context) with the columns ``time``,
    ``base`` and ``overhead``; ``summary`` one row per context with ``n``,
    ``min``, ``avg``, ``max`` and ``std`` of the ratios.
    """

    ratios: pd.DataFrame
    summary: pd.DataFrame

    def to_dict(self):
        return {
            "summary": self.summary.to_dict(orient="records"),
            "ratios": self.ratios.to_dict(orient="records"),
        }


def _as_frame(runs):
    if isinstance(runs, pd.DataFrame):
        return runs
    rows = [
        {
            "benchmark": r.benchmark,
            "design": r.design,
            "scheduling": r.scheduling,
            "threads": r.threads,
            "time": r.time,
        }
        for r in runs
    ]
    return pd.DataFrame(rows, columns=["benchmark"] + CONTEXT + ["time"])


def average_times(runs):
    """Mean time per benchmark and context, repetitions collapsed."""
    df = _as_frame(runs)
    return df.groupby(["benchmark"] + CONTEXT, as_index=False)["time"].mean()


def _base_times(base):
    base = base[(base.design == BASE_DESIGN) & (base.threads == 1)]
    per_sched = {(b, s): t for b, s, t in zip(base.benchmark, base.scheduling, base.time)}
    per_bench = {}
    # local scheduling first, so it wins the per benchmark fallback
    rows = zip(base.benchmark, base.scheduling, base.time)
    for b, s, t in sorted(rows, key=lambda r: r[1] != "local"):
        per_bench.setdefault(b, t)
    return per_sched, per_bench


def overhead_report(runs, base=None) -> OverheadReport:
    """Compute the overhead ratios of ``runs``.

    Parameters
    ----------
    runs: pd.DataFrame | list of RunStats
        Runs to compare; a DataFrame needs the columns benchmark, design,
        scheduling, threads and time (one row per repetition is fine).
    base: None | pd.DataFrame | list of RunStats
        Runs holding the NS single-thread base; taken from ``runs`` by default.
        The base of a benchmark is the NS/1 run with the same scheduling,
        else any NS/1 run of the benchmark.

    Raises
    ------
    MissingBaseRunError
        If a benchmark has no NS single-thread run.
    """
    times = average_times(runs)
    base_times = times if base is None else average_times(base)
    per_sched, per_bench = _base_times(base_times)

    bases = []
    for bench, sched in zip(times.benchmark, times.scheduling):
        if (bench, sched) in per_sched:
            bases.append(per_sched[bench, sched])
        elif bench in per_bench:
            bases.append(per_bench[bench])
        else:
            raise MissingBaseRunError(f"no {BASE_DESIGN} single-thread run of {bench}")
    ratios = times.assign(base=bases)
    ratios["overhead"] = ratios["time"] / ratios["base"]

    summary = []
    for context, group in ratios.groupby(CONTEXT):
        desc = stats.describe(group["overhead"].to_numpy(), ddof=0)
        summary.append(
            dict(
                zip(CONTEXT, context),
                n=desc.nobs,
                min=desc.minmax[0],
                avg=desc.mean,
                max=desc.minmax[1],
                std=float(np.sqrt(desc.variance)),
            )
        )
    summary = pd.DataFrame(summary, columns=CONTEXT + ["n", "min", "avg", "max", "std"])
    log.debug(f"overhead of {len(summary)} contexts over {times.benchmark.nunique()} benchmarks")
    return OverheadReport(ratios=ratios, summary=summary)
