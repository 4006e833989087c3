import logging
from typing import NamedTuple

from tabkit.datasets import DPDataset, EdgeConfig
from tabkit.evaluations.base import BaseEvaluation
from tabkit.evaluations.runners import APPROACHES, DIRECTIONS, run_dp, run_path
from tabkit.exceptions import ConfigurationError
from tabkit.tablespace.designs import DESIGNS


log = logging.getLogger(__name__)


class PathBenchmark(NamedTuple):
    direction: str
    edges: EdgeConfig

    @property
    def name(self):
        return f"path-{self.direction}:{self.edges.name}"

    @classmethod
    def parse(cls, text):
        """``"path-left:cycle:2000"`` -> ``PathBenchmark("left", cycle(2000))``."""
        head, _, edges = text.partition(":")
        prefix, _, direction = head.partition("-")
        if prefix != "path" or direction not in DIRECTIONS:
            raise ConfigurationError(f"Invalid path benchmark {text!r}")
        return cls(direction, EdgeConfig.parse(edges))


class DPBenchmark(NamedTuple):
    approach: str
    dataset: DPDataset

    @property
    def name(self):
        return f"{self.dataset.code}-{self.approach}"


class PathEvaluation(BaseEvaluation):
    """Transitive closure of ``edge/2`` facts, all threads asking ``path(X, Y)``.

    Benchmarks are given as ``"path-<left|right>:<shape>:<depth>"``, as
    ``(direction, edges)`` pairs or as dicts with these keys.

    Parameters
    ----------
    benchmarks : list
        Path benchmarks.
    **kwargs
        See :class:`BaseEvaluation`.
    """

    def parse_benchmark(self, bench):
        if isinstance(bench, PathBenchmark):
            return bench
        if isinstance(bench, str):
            return PathBenchmark.parse(bench)
        if isinstance(bench, dict):
            bench = (bench["direction"], bench["edges"])
        direction, edges = bench
        if direction not in DIRECTIONS:
            raise ConfigurationError(f"Unknown direction {direction}")
        return PathBenchmark(direction, EdgeConfig.make(edges))

    def benchmark_name(self, bench):
        return bench.name

    def evaluate(self, bench, config):
        return run_path(bench.direction, bench.edges, config, self.repeat, self.memory)

    def is_valid(self, bench, config):
        return True


class DPEvaluation(BaseEvaluation):
    """Knapsack and LCS instances solved with the TD1, TD2 and BU schedulers.

    Benchmarks are ``(approach, dataset)`` pairs or dicts with the keys
    ``approach`` and ``dataset`` (a :class:`DPDataset` or its parameters).
    Top-down approaches need mode-directed tabling and are skipped under FS
    and PAC.
    """

    def parse_benchmark(self, bench):
        if isinstance(bench, DPBenchmark):
            return bench
        if isinstance(bench, dict):
            bench = (bench["approach"], bench["dataset"])
        approach, dataset = bench
        approach = approach.lower()
        if approach not in APPROACHES:
            raise ConfigurationError(f"Unknown approach {approach}, use one of {APPROACHES}")
        return DPBenchmark(approach, DPDataset.make(dataset))

    def benchmark_name(self, bench):
        return bench.name

    def evaluate(self, bench, config):
        run = run_dp(bench.approach, bench.dataset, config, self.repeat, self.memory)
        expected = bench.dataset.oracle()
        if run.result != expected:
            log.error(f"{bench.name}: found {run.result}, the direct solution is {expected}")
        return run

    def is_valid(self, bench, config):
        return bench.approach == "bu" or DESIGNS[config.design].supports_modes
