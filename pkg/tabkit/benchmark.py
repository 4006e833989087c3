import logging
import os
import os.path as osp
from glob import glob
from pathlib import Path

import pandas as pd
import yaml

from tabkit.analysis import analyze
from tabkit.evaluations import DPEvaluation, PathEvaluation, make_contexts


try:
    from codecarbon import EmissionsTracker  # noqa

    _carbonfootprint = True
except ImportError:
    _carbonfootprint = False

log = logging.getLogger(__name__)

EVALUATIONS = {"Path": PathEvaluation, "DP": DPEvaluation}

DEFAULT_CONTEXT = {
    "designs": ["NS"],
    "schedulings": ["local"],
    "threads": [1],
    "repeat": 1,
    "seed": None,
}


def parse_benchmarks_from_directory(dir_path):
    """Read every benchmark configuration file of a directory.

    Each ``.yml`` file has a ``name``, an ``evaluation`` (``Path`` or ``DP``)
    and a list of ``benchmarks`` in the format of that evaluation.

    Returns
    -------
    configs: list of dict
    """
    if not os.path.isdir(os.path.abspath(dir_path)):
        raise ValueError(f"Given benchmark path {dir_path} is not valid")
    configs = []
    for yaml_file in sorted(glob(os.path.join(dir_path, "*.yml"))):
        with open(yaml_file, "r") as _file:
            config = yaml.load(_file.read(), Loader=yaml.FullLoader)
        if config.get("evaluation") not in EVALUATIONS:
            raise ValueError(
                f"{yaml_file}: evaluation must be one of {list(EVALUATIONS)}"
            )
        configs.append(config)
    return configs


def load_context(contexts=None):
    """Context parameters from a YAML file, missing keys set to defaults."""
    params = dict(DEFAULT_CONTEXT)
    if contexts is not None:
        with open(contexts, "r") as cfile:
            params.update(yaml.load(cfile.read(), Loader=yaml.FullLoader) or {})
    return params


def benchmark(
    benchmarks="./benchmarks/",
    evaluations=None,
    results="./results/",
    overwrite=False,
    output="./benchmark/",
    plot=False,
    contexts=None,
    include_benchmarks=None,
    exclude_benchmarks=None,
):
    """Run the benchmark suite over a grid of evaluation contexts.

    Every benchmark configuration runs in every context of the grid; runs are
    stored in the results folder, where runs already present are not redone,
    and analysed per evaluation under the output folder.

    Parameters
    ----------
    benchmarks: str
        Folder containing the benchmark configuration files.
    evaluations: None | list of str
        Restrict to ``"Path"`` and/or ``"DP"``. All by default.
    results: str
        Folder to store the results.
    overwrite: bool
        Force evaluation of cached runs.
    output: str
        Folder to store the analysis results.
    plot: bool
        Plot results after computing.
    contexts: None | str
        Path to a context YAML file with the keys designs, schedulings,
        threads, repeat, seed and optionally trie and allocator.
    include_benchmarks: None | list of str
        Names of the configuration files' ``name`` entries to run.
    exclude_benchmarks: None | list of str
        Names to skip. Cannot be combined with ``include_benchmarks``.

    Returns
    -------
    eval_results: DataFrame
        One row per repetition of every run.
    """
    if evaluations is None:
        evaluations = list(EVALUATIONS)
    if include_benchmarks is not None and exclude_benchmarks is not None:
        raise AttributeError("You could not specify both include and exclude benchmarks")

    output = Path(output)
    if not osp.isdir(output):
        os.makedirs(output)

    configs = parse_benchmarks_from_directory(benchmarks)
    if include_benchmarks is not None:
        configs = [c for c in configs if c["name"] in include_benchmarks]
    elif exclude_benchmarks is not None:
        configs = [c for c in configs if c["name"] not in exclude_benchmarks]

    params = load_context(contexts)
    context_grid = make_contexts(
        designs=params["designs"],
        schedulings=params["schedulings"],
        threads=params["threads"],
        seed=params["seed"],
        trie=params.get("trie"),
        allocator=params.get("allocator"),
    )
    log.debug(f"{len(context_grid)} contexts: {[c.design for c in context_grid]}")

    df_eval = []
    for evaluation in evaluations:
        benches = [b for c in configs if c["evaluation"] == evaluation for b in c["benchmarks"]]
        if not benches:
            continue
        context = EVALUATIONS[evaluation](
            benchmarks=benches,
            contexts=context_grid,
            repeat=params["repeat"],
            overwrite=overwrite,
            hdf5_path=results,
        )
        eval_results = context.process()
        eval_results["evaluation"] = evaluation
        analyze(eval_results, str(output), name=evaluation, plot=plot)
        df_eval.append(eval_results)

    if not df_eval:
        log.warning("No benchmark selected")
        return pd.DataFrame()
    df_eval = pd.concat(df_eval, ignore_index=True)
    _display_results(df_eval)
    return df_eval


def _display_results(results):
    """Print results after computation."""
    keys = ["benchmark", "design", "scheduling", "threads"]
    agg = {"avg time": ("time", "mean"), "result": ("result", "first")}
    if _carbonfootprint and "carbon_emission" in results:
        agg["carbon emission"] = ("carbon_emission", "sum")
    tab = results.groupby(keys, as_index=False).agg(**agg)
    print(tab)
