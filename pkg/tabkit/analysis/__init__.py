import logging
import os
import platform
from datetime import datetime

from tabkit.analysis.overhead import OverheadReport, overhead_report  # noqa: F401
from tabkit.analysis.results import Results  # noqa: F401
from tabkit.exceptions import MissingBaseRunError


log = logging.getLogger(__name__)


def analyze(results, out_path, name="analysis", plot=False):
    """Analyze results.

    Given a results dataframe, generates a folder with the data, the overhead
    ratios and a description of the host computer.

    Parameters
    ----------
    results: DataFrame
        Output of :meth:`Results.to_dataframe`.
    out_path: str
        Existing folder in which the analysis folder is created.
    name: str
        Name of the analysis folder.
    plot: bool
        Also save the overhead plots.

    Returns
    -------
    report: None | OverheadReport
        None when the results hold no NS single-thread base run.
    """
    if not isinstance(out_path, str):
        raise ValueError("Given out_path argument is not string")
    elif not os.path.isdir(out_path):
        raise IOError("Given directory does not exist")
    else:
        analysis_path = os.path.join(out_path, name)

    os.makedirs(analysis_path, exist_ok=True)
    with open(os.path.join(analysis_path, "info.txt"), "a") as f:
        dt = datetime.now()
        f.write("Date: {:%Y-%m-%d}\n Time: {:%H:%M}\n".format(dt, dt))
        f.write("System: {}\n".format(platform.system()))
        f.write("CPU: {}\n".format(platform.processor()))
        f.write("CPU count: {}\n".format(os.cpu_count()))

    results.to_csv(os.path.join(analysis_path, "data.csv"))

    try:
        report = overhead_report(results)
    except MissingBaseRunError as e:
        log.warning(f"No overhead report: {e}")
        return None
    report.summary.to_csv(os.path.join(analysis_path, "overhead.csv"))
    report.ratios.to_csv(os.path.join(analysis_path, "ratios.csv"))
    if plot:
        from tabkit.analysis import plotting as plt

        fig = plt.overhead_plot(report)
        fig.savefig(os.path.join(analysis_path, "overhead.pdf"))
        fig = plt.ratio_plot(report)
        fig.savefig(os.path.join(analysis_path, "ratios.pdf"))
    return report
