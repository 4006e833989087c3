import itertools
import logging
from abc import ABC, abstractmethod

import numpy as np
from tqdm import tqdm

from tabkit.analysis.results import Results
from tabkit.engine import EvalConfig
from tabkit.exceptions import ConfigurationError


try:
    from codecarbon import EmissionsTracker

    _carbonfootprint = True
except ImportError:
    _carbonfootprint = False

log = logging.getLogger(__name__)


def make_contexts(
    designs=("NS",), schedulings=("local",), threads=(1,), seed=None, trie=None, allocator=None
):
    """Evaluation contexts of a grid of designs, schedulings and thread counts.

    Combinations the engine rejects (FS with batched scheduling) are skipped
    with a warning.
    """
    contexts = []
    for design, scheduling, nt in itertools.product(designs, schedulings, threads):
        try:
            contexts.append(
                EvalConfig(
                    design=design,
                    scheduling=scheduling,
                    threads=nt,
                    seed=seed,
                    trie=dict(trie or {}),
                    allocator=dict(allocator or {}),
                )
            )
        except ConfigurationError as e:
            log.warning(f"Skipping context {design}/{scheduling}/{nt}: {e}")
    return contexts


class BaseEvaluation(ABC):
    """Base class that defines necessary operations for an evaluation.
    An evaluation runs each of its benchmarks in each evaluation context and
    stores one row per repetition in a :class:`Results` store.

    Parameters
    ----------
    benchmarks : list
        Benchmarks in the format understood by :meth:`parse_benchmark`.
    contexts : None | list of dict or EvalConfig
        Evaluation contexts. NS, local scheduling, one thread by default.
    repeat : int, default=1
        Repetitions of each run, averaged in the reported time.
    overwrite : bool, default=False
        If true, overwrite the results.
    suffix : str
        Suffix for the results file.
    hdf5_path : str
        Specific path for storing the results.
    memory : bool, default=True
        Reconcile the memory model with the allocator after each run.
    """

    def __init__(
        self,
        benchmarks,
        contexts=None,
        repeat=1,
        overwrite=False,
        suffix="",
        hdf5_path=None,
        memory=True,
    ):
        if not isinstance(benchmarks, (list, tuple)):
            benchmarks = [benchmarks]
        if len(benchmarks) == 0:
            raise (ValueError("benchmarks must not be empty"))
        self.benchmarks = [self.parse_benchmark(b) for b in benchmarks]
        if contexts is None:
            contexts = [EvalConfig()]
        self.contexts = [EvalConfig.make(c) for c in contexts]
        if repeat < 1:
            raise (ValueError("repeat must be at least 1"))
        self.repeat = repeat
        self.memory = memory
        self.hdf5_path = hdf5_path
        self.runs = []
        self.results = Results(
            type(self), suffix=suffix, overwrite=overwrite, hdf5_path=hdf5_path
        )

    def process(self):
        """Runs every benchmark in every context not yet in the results store.

        Returns
        -------
        results: pd.DataFrame
            One row per repetition of every stored run.
        """
        for bench in tqdm(self.benchmarks, desc=type(self).__name__):
            name = self.benchmark_name(bench)
            for config in self.contexts:
                if not self.is_valid(bench, config):
                    log.warning(
                        f"{name} not compatible with {config.design}/"
                        f"{config.scheduling}, skipping"
                    )
                    continue
                if self.results.already_computed(
                    name, config.design, config.scheduling, config.threads
                ):
                    log.info(f"{name} {config.design}/{config.scheduling}/{config.threads} cached")
                    continue
                if _carbonfootprint:
                    tracker = EmissionsTracker(save_to_file=False, log_level="error")
                    tracker.start()
                run = self.evaluate(bench, config)
                if _carbonfootprint:
                    emissions = tracker.stop()
                    if emissions is None:
                        emissions = np.nan
                    run.carbon_emission = 1000 * emissions
                self.push_result(run)
        return self.results.to_dataframe()

    def push_result(self, run):
        message = f"{run.benchmark} | {run.design}/{run.scheduling}/{run.threads}"
        message += f" | time {run.time:.3f}s, result {run.result}"
        log.info(message)
        self.runs.append(run)
        self.results.add(run.to_dicts())

    @abstractmethod
    def parse_benchmark(self, bench):
        """Normalized form of one benchmark description."""
        pass

    @abstractmethod
    def benchmark_name(self, bench):
        pass

    @abstractmethod
    def evaluate(self, bench, config):
        """Evaluate one benchmark in one context.

        Returns
        -------
        run: RunStats
        """
        pass

    @abstractmethod
    def is_valid(self, bench, config):
        """Whether the benchmark can run in the context."""
        pass
