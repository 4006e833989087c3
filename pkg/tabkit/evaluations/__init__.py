"""
An evaluation runs benchmarks of the tabling engine in evaluation contexts
(table-space design, scheduling and thread count) and stores their statistics.
"""

# flake8: noqa
from .base import BaseEvaluation, make_contexts
from .evaluations import DPBenchmark, DPEvaluation, PathBenchmark, PathEvaluation
from .runners import RunStats, run_dp, run_knapsack, run_lcs, run_path
