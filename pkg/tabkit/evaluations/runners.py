"""Benchmark runners: path closures and the dynamic-programming schedulers."""

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from tabkit.datasets import DPDataset, EdgeConfig, gen_edges
from tabkit.engine import Engine, EvalConfig, EvalStats, Program, run_fixpoint, solve
from tabkit.exceptions import ConfigurationError
from tabkit.memmodel import MemReport, reconcile
from tabkit.pagealloc import HeapStats
from tabkit.tablespace.base import TableStats
from tabkit.term import Compound


log = logging.getLogger(__name__)

DIRECTIONS = ("left", "right")
APPROACHES = ("td1", "td2", "bu")
DISPLACEMENT_FRACTION = 0.10

_PROGRAMS = {
    ("knapsack", "td"): ("knapsack_td", "ks"),
    ("knapsack", "bu"): ("knapsack_bu", "ksb"),
    ("lcs", "td"): ("lcs_td", "lcs"),
    ("lcs", "bu"): ("lcs_bu", "lcsb"),
}


@dataclass
class RunStats:
    """Statistics of one benchmark in one evaluation context.

    ``stats`` are the evaluation counters of thread 0 (all threads evaluate the
    same queries); ``table_stats``, ``heap`` and ``memory`` are taken on the
    finished table space of the last repetition, before it is abolished, and
    ``leaked`` counts the blocks still live after abolish.
    """

    benchmark: str
    design: str
    scheduling: str
    threads: int
    times: List[float]
    stats: EvalStats
    table_stats: TableStats
    heap: HeapStats
    result: object = None
    leaked: int = 0
    memory: Optional[MemReport] = None
    carbon_emission: Optional[float] = None
    thread_stats: List[EvalStats] = field(default_factory=list, repr=False)

    @property
    def time(self):
        return float(np.mean(self.times)) if self.times else 0.0

    @property
    def calls(self):
        return self.stats.calls

    @property
    def unique(self):
        return self.stats.unique

    @property
    def repeated(self):
        return self.stats.repeated

    def to_dicts(self):
        """One flat row per repetition, the columns of the results store."""
        row = {
            "benchmark": self.benchmark,
            "design": self.design,
            "scheduling": self.scheduling,
            "threads": self.threads,
            "calls": self.calls,
            "unique": self.unique,
            "repeated": self.repeated,
            "subgoal_nodes": self.table_stats.subgoal_trie.nodes,
            "answer_nodes": self.table_stats.answer_trie.nodes,
            "live_bytes": self.heap.live_bytes(),
            "predicted_bytes": self.memory.predicted if self.memory else None,
            "result": self.result if isinstance(self.result, (int, float)) else None,
            "carbon_emission": self.carbon_emission,
        }
        return [dict(row, repeat=i, time=t) for i, t in enumerate(self.times)]

    def to_json(self):
        """Nested, JSON serialisable summary."""
        out = {
            "benchmark": self.benchmark,
            "design": self.design,
            "scheduling": self.scheduling,
            "threads": self.threads,
            "time": self.time,
            "times": list(self.times),
            "result": self.result,
            "stats": dataclasses.asdict(self.stats),
            "table_stats": dataclasses.asdict(self.table_stats),
            "heap": {
                "pages": self.heap.pages,
                "bytes": self.heap.bytes,
                "live_blocks": self.heap.live_blocks(),
                "live_bytes": self.heap.live_bytes(),
            },
            "leaked": self.leaked,
        }
        if self.memory is not None:
            out["memory"] = {
                "predicted": self.memory.predicted,
                "measured": self.memory.measured,
                "delta": self.memory.delta,
                "by_type": dict(self.memory.measured_by_type),
            }
        if self.carbon_emission is not None:
            out["carbon_emission"] = self.carbon_emission
        return out


def _finish(engine, name, times, result, solve_result=None, thread_results=None, memory=True):
    config = engine.config
    if solve_result is not None:
        stats = solve_result.thread_stats[0]
        thread_stats = solve_result.thread_stats
        table_stats = solve_result.table_stats
        heap = solve_result.heap
    else:
        thread_stats = [s for _, s in thread_results]
        stats = thread_stats[0]
        table_stats = engine.tablespace.table_stats(0)
        heap = engine.allocator.heap_stats()
    report = None
    if memory:
        report = reconcile(
            config.design,
            engine.tablespace.census(),
            engine.tablespace.sizes,
            heap=heap,
            threads=config.threads,
        )
    engine.abolish()
    leaked = engine.allocator.heap_stats().live_blocks()
    if leaked:
        log.error(f"{name}: {leaked} blocks still live after abolish")
    return RunStats(
        benchmark=name,
        design=config.design,
        scheduling=config.scheduling,
        threads=config.threads,
        times=times,
        stats=stats,
        table_stats=table_stats,
        heap=heap,
        result=result,
        leaked=leaked,
        memory=report,
        thread_stats=thread_stats,
    )


def path_program(direction, edges):
    """The path program of ``direction`` over the ``edge/2`` facts of ``edges``."""
    if direction not in DIRECTIONS:
        raise ConfigurationError(f"Unknown direction {direction}, use one of {DIRECTIONS}")
    program = Program.from_resource(f"path_{direction}")
    program.add_facts("edge", gen_edges(edges).tolist())
    return program


def run_path(direction, edges, eval_config=None, repeat=1, memory=True):
    """Evaluate ``path(X, Y)`` to completion ``repeat`` times.

    Every thread starts with the same query. Each repetition builds fresh
    tables, which are abolished once the statistics are taken.

    Parameters
    ----------
    direction: str
        ``"left"`` or ``"right"`` recursive definition.
    edges: str | dict | EdgeConfig
        Edge configuration, e.g. ``"cycle:2000"``.
    eval_config: None | dict | EvalConfig
        Evaluation context.
    repeat: int
        Number of repetitions averaged in the wall time.
    memory: bool
        Reconcile the memory model with the allocator on the last repetition.

    Returns
    -------
    run: RunStats
        ``result`` is the number of answers of thread 0.
    """
    edges = EdgeConfig.make(edges)
    config = EvalConfig.make(eval_config)
    if repeat < 1:
        raise ConfigurationError("repeat must be at least 1")
    program = path_program(direction, edges)
    name = f"path-{direction}:{edges.name}"
    log.info(f"{name} {config.design}/{config.scheduling}/{config.threads} x{repeat}")
    times = []
    for i in range(repeat):
        engine = Engine(program, config)
        res = solve(program, "path(X, Y)", engine=engine, keep_tables=True)
        times.append(res.elapsed)
        if i < repeat - 1:
            engine.abolish()
    return _finish(engine, name, times, len(res.solutions), solve_result=res, memory=memory)


def _dp_queries(dataset: DPDataset, approach, predicate, nt):
    rows, cols = dataset.size

    def cell(i, j):
        return f"{predicate}({i}, {j}, R)"

    if approach == "td1":
        return lambda tid, worker: [cell(rows, cols)]
    if approach == "td2":
        max_random = max(1, math.floor(DISPLACEMENT_FRACTION * rows))

        def displaced(tid, worker):
            d = int(worker.rng.integers(1, max_random, endpoint=True))
            log.debug(f"thread {tid} displaced by {d}")
            return [cell(max(0, rows - d), cols), cell(rows, cols)]

        return displaced

    k = math.ceil(cols / nt) if cols else 0

    def chunked(tid, worker):
        lo, hi = tid * k + 1, min(cols, (tid + 1) * k)
        queries = [cell(i, j) for i in range(1, rows + 1) for j in range(lo, hi + 1)]
        if tid == 0:
            queries.append(cell(rows, cols))
        return queries

    return chunked


def _best(solutions):
    values = [s.args[-1] for s in solutions if type(s) is Compound]
    return max(values) if values else None


def run_dp(approach, dataset, eval_config=None, repeat=1, memory=True):
    """Solve a knapsack or LCS instance with one of the thread schedulers.

    ``td1``: every thread queries the final cell; its clauses are tried in a
    per-thread random order. ``td2``: as ``td1``, after first solving a
    problem smaller by a random displacement of up to 10% of the items.
    ``bu``: each thread fills its column chunk row by row, thread 0 then
    queries the final cell.

    Returns
    -------
    run: RunStats
        ``result`` is the optimal profit or the LCS length found by thread 0.

    Raises
    ------
    UnsupportedDesignError
        Top-down approaches under FS or PAC, whose answer tries cannot keep
        mode-directed answers.
    """
    approach = approach.lower()
    if approach not in APPROACHES:
        raise ConfigurationError(f"Unknown approach {approach}, use one of {APPROACHES}")
    dataset = DPDataset.make(dataset)
    config = EvalConfig.make(eval_config)
    if approach != "bu":
        config = dataclasses.replace(config, clause_order="random")
    if repeat < 1:
        raise ConfigurationError("repeat must be at least 1")
    resource, predicate = _PROGRAMS[dataset.problem, approach[:2]]
    program = Program.from_resource(resource)
    for name, rows in dataset.facts().items():
        program.add_facts(name, rows)
    bench = f"{dataset.code}-{approach}"
    log.info(f"{bench} {config.design}/{config.scheduling}/{config.threads} x{repeat}")
    goals = _dp_queries(dataset, approach, predicate, config.threads)
    times = []
    for i in range(repeat):
        engine = Engine(program, config)
        start = time.perf_counter()
        results = run_fixpoint(engine, goals)
        times.append(time.perf_counter() - start)
        if i < repeat - 1:
            engine.abolish()
    result = _best(results[0][0][-1])
    for tid, (per_query, _) in enumerate(results[1:], 1):
        if approach != "bu" and _best(per_query[-1]) != result:
            log.error(f"thread {tid} of {bench} found {_best(per_query[-1])}, not {result}")
    return _finish(engine, bench, times, result, thread_results=results, memory=memory)


def run_knapsack(approach, dataset, eval_config=None, repeat=1, memory=True):
    """Best knapsack profit, see :func:`run_dp`."""
    dataset = DPDataset.make(dataset)
    if dataset.problem != "knapsack":
        raise ConfigurationError(f"{dataset.code} is not a knapsack instance")
    return run_dp(approach, dataset, eval_config, repeat, memory)


def run_lcs(approach, dataset, eval_config=None, repeat=1, memory=True):
    """Longest common subsequence length, see :func:`run_dp`."""
    dataset = DPDataset.make(dataset)
    if dataset.problem != "lcs":
        raise ConfigurationError(f"{dataset.code} is not an LCS instance")
    return run_dp(approach, dataset, eval_config, repeat, memory)
