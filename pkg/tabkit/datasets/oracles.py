"""Reference results the tabled evaluations are checked against."""

import itertools
from collections import defaultdict

import numpy as np


def reachability_closure(edges):
    """Set of ``(x, y)`` pairs such that ``y`` is reachable from ``x`` in one or more edges."""
    succ = defaultdict(set)
    for x, y in np.asarray(edges).reshape(-1, 2).tolist():
        succ[x].add(y)
    closure = set()
    for start in list(succ):
        seen = set()
        frontier = list(succ[start])
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(succ.get(node, ()))
        closure.update((start, node) for node in seen)
    return closure


def knapsack_dp(weights, profits, capacity):
    """Best profit of the 0-1 knapsack, row by row over the items."""
    best = np.zeros(capacity + 1, dtype=np.int64)
    for w, p in zip(weights, profits):
        w = int(w)
        if w <= capacity:
            best[w:] = np.maximum(best[w:], best[: capacity + 1 - w] + p)
    return int(best[capacity])


def knapsack_exhaustive(weights, profits, capacity):
    """Best profit by enumerating every subset; for small instances only."""
    best = 0
    items = list(zip(weights, profits))
    for r in range(len(items) + 1):
        for subset in itertools.combinations(items, r):
            if sum(w for w, _ in subset) <= capacity:
                best = max(best, sum(p for _, p in subset))
    return int(best)


def lcs_length(a, b):
    """Length of the longest common subsequence, textbook table."""
    a = list(a)
    b = list(b)
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i, j] = table[i - 1, j - 1] + 1
            else:
                table[i, j] = max(table[i - 1, j], table[i, j - 1])
    return int(table[len(a), len(b)])
