"""Benchmark inputs: edge configurations of the path programs, dynamic
programming instances and the oracles their results are checked against.
"""

# flake8: noqa
from .dp import FRACTIONS, PROBLEMS, DPDataset
from .edges import SHAPES, EdgeConfig, gen_edges, n_nodes
from .oracles import knapsack_dp, knapsack_exhaustive, lcs_length, reachability_closure
