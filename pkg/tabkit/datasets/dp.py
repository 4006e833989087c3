import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np

from tabkit.datasets.oracles import knapsack_dp, lcs_length
from tabkit.exceptions import ConfigurationError


log = logging.getLogger(__name__)

PROBLEMS = ("knapsack", "lcs")
FRACTIONS = (0.10, 0.30, 0.50)


@dataclass(frozen=True)
class DPDataset:
    """
    Random instance of a dynamic-programming benchmark.

    Knapsack weights and profits, and LCS symbols, are drawn uniformly from
    ``[1, max(1, floor(fraction * n))]`` by a generator seeded with ``seed``.

    Parameters
    ----------
    problem: str
        ``"knapsack"`` or ``"lcs"``.
    n: int
        Number of items, or length of both sequences.
    capacity: None | int
        Knapsack capacity; twice the number of items by default.
    fraction: float
        Value range as a fraction of ``n``.
    seed: int
        Seed of the instance.
    """

    problem: str = "knapsack"
    n: int = 200
    capacity: Optional[int] = None
    fraction: float = 0.10
    seed: int = 42
    data: Dict[str, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigurationError(f"Unknown problem {self.problem}, use one of {PROBLEMS}")
        if self.n < 0:
            raise ConfigurationError("n must be non-negative")
        if not 0 < self.fraction <= 1:
            raise ConfigurationError("fraction must be in (0, 1]")
        if self.problem == "knapsack":
            capacity = 2 * self.n if self.capacity is None else self.capacity
            if capacity < 0:
                raise ConfigurationError("capacity must be non-negative")
            object.__setattr__(self, "capacity", capacity)
        rng = np.random.default_rng(self.seed)
        high = self.max_value
        if self.problem == "knapsack":
            data = {
                "weights": rng.integers(1, high, size=self.n, endpoint=True),
                "profits": rng.integers(1, high, size=self.n, endpoint=True),
            }
        else:
            data = {
                "a": rng.integers(1, high, size=self.n, endpoint=True),
                "b": rng.integers(1, high, size=self.n, endpoint=True),
            }
        object.__setattr__(self, "data", data)

    @property
    def max_value(self):
        return max(1, int(self.fraction * self.n))

    @property
    def code(self):
        frac = int(round(self.fraction * 100))
        if self.problem == "knapsack":
            return f"knapsack-{self.n}-{self.capacity}-d{frac}"
        return f"lcs-{self.n}-d{frac}"

    @classmethod
    def make(cls, dic: Union[None, Dict, "DPDataset"] = None) -> "DPDataset":
        if dic is None:
            return cls()
        elif isinstance(dic, dict):
            return cls(**dic)
        elif isinstance(dic, cls):
            return dic
        else:
            raise ConfigurationError(f"Expected dict or DPDataset, got {type(dic)}")

    @classmethod
    def from_items(cls, weights, profits, capacity):
        """Knapsack instance with explicit items."""
        dataset = cls("knapsack", len(weights), capacity)
        data = {
            "weights": np.asarray(weights, dtype=np.int64),
            "profits": np.asarray(profits, dtype=np.int64),
        }
        object.__setattr__(dataset, "data", data)
        return dataset

    @classmethod
    def from_sequences(cls, a, b):
        """LCS instance with explicit sequences; symbols may be any atoms or integers."""
        if len(a) != len(b):
            log.debug("sequences of different lengths, n is the first length")
        dataset = cls("lcs", len(a))
        object.__setattr__(dataset, "data", {"a": list(a), "b": list(b)})
        return dataset

    def facts(self):
        """Fact rows per predicate: ``item(I, W, P)`` or ``a(I, X)`` and ``b(J, Y)``."""
        if self.problem == "knapsack":
            weights = self.data["weights"]
            profits = self.data["profits"]
            return {
                "item": [(i + 1, int(w), int(p)) for i, (w, p) in enumerate(zip(weights, profits))]
            }
        return {
            name: [(i + 1, s if isinstance(s, str) else int(s)) for i, s in enumerate(seq)]
            for name, seq in self.data.items()
        }

    @property
    def size(self):
        """Problem dimensions ``(rows, columns)`` of the DP table."""
        if self.problem == "knapsack":
            return len(self.data["weights"]), self.capacity
        return len(self.data["a"]), len(self.data["b"])

    def oracle(self):
        """Optimal profit or LCS length computed directly."""
        if self.problem == "knapsack":
            return knapsack_dp(self.data["weights"], self.data["profits"], self.capacity)
        return lcs_length(self.data["a"], self.data["b"])
