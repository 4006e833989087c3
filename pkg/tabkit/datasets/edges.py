"""Edge configurations of the path benchmarks."""

import logging
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from tabkit.exceptions import ConfigurationError


log = logging.getLogger(__name__)

SHAPES = ("btree", "cycle", "grid", "pyramid", "pyramid-lattice")


@dataclass(frozen=True)
class EdgeConfig:
    """
    Shape and depth of an ``edge/2`` fact set.

    Parameters
    ----------
    shape: str
        One of ``btree``, ``cycle``, ``grid``, ``pyramid`` and ``pyramid-lattice``.
    depth: int
        Depth parameter, at least 1.

    Notes
    -----
    ``pyramid`` is the ladder of two chains ``L1..Ld`` and ``R1..Rd`` joined by
    rungs ``Li -> Ri``: path-left at depth 1500 finds 3,374,250 unique answers.
    ``pyramid-lattice`` is the triangular lattice.
    """

    shape: str = "cycle"
    depth: int = 3

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigurationError(f"Unknown edge shape {self.shape}, use one of {SHAPES}")
        if type(self.depth) is not int or self.depth < 1:
            raise ConfigurationError(f"depth must be a positive integer, got {self.depth}")

    @property
    def name(self):
        return f"{self.shape}:{self.depth}"

    @classmethod
    def parse(cls, text):
        """``"cycle:2000"`` -> ``EdgeConfig("cycle", 2000)``."""
        shape, _, depth = text.rpartition(":")
        try:
            depth = int(depth)
        except ValueError:
            raise ConfigurationError(f"Invalid edge configuration {text!r}")
        return cls(shape, depth)

    @classmethod
    def make(cls, dic: Union[None, str, Dict, "EdgeConfig"] = None) -> "EdgeConfig":
        if dic is None:
            return cls()
        elif isinstance(dic, str):
            return cls.parse(dic)
        elif isinstance(dic, dict):
            return cls(**dic)
        elif isinstance(dic, cls):
            return dic
        else:
            raise ConfigurationError(f"Expected dict or EdgeConfig, got {type(dic)}")


def _btree(d):
    parents = np.arange(1, 2 ** (d - 1), dtype=np.int64)
    left = np.stack([parents, 2 * parents], axis=1)
    right = np.stack([parents, 2 * parents + 1], axis=1)
    edges = np.empty((2 * len(parents), 2), dtype=np.int64)
    edges[0::2] = left
    edges[1::2] = right
    return edges


def _cycle(d):
    src = np.arange(1, d + 1, dtype=np.int64)
    return np.stack([src, src % d + 1], axis=1)


def _grid(d):
    ids = np.arange(1, d * d + 1, dtype=np.int64).reshape(d, d)
    horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    forward = np.concatenate([horizontal, vertical])
    return np.concatenate([forward, forward[:, ::-1]])


def _ladder(d):
    left = np.arange(1, d + 1, dtype=np.int64)
    right = left + d
    chains = np.concatenate(
        [np.stack([left[:-1], left[1:]], axis=1), np.stack([right[:-1], right[1:]], axis=1)]
    )
    rungs = np.stack([left, right], axis=1)
    return np.concatenate([chains, rungs])


def _lattice(d):
    edges = []
    first = 1
    for row in range(1, d):
        below = first + row
        for k in range(row):
            edges.append((first + k, below + k))
            edges.append((first + k, below + k + 1))
        first = below
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


_GENERATORS = {
    "btree": _btree,
    "cycle": _cycle,
    "grid": _grid,
    "pyramid": _ladder,
    "pyramid-lattice": _lattice,
}


def gen_edges(config) -> np.ndarray:
    """Deterministic ``edge/2`` facts of ``config`` as an ``(n_edges, 2)`` array.

    Nodes are numbered from 1:

    * ``btree``: complete binary tree of ``2**d - 1`` nodes, parent to children;
    * ``cycle``: ``i -> i + 1`` and ``d -> 1``;
    * ``grid``: ``d * d`` nodes, both directions between orthogonal neighbours;
    * ``pyramid``: chains ``1 .. d`` and ``d + 1 .. 2d`` with rungs ``i -> d + i``;
    * ``pyramid-lattice``: triangular lattice of ``d`` rows, each node pointing
      to the two nodes below it.
    """
    config = EdgeConfig.make(config)
    edges = _GENERATORS[config.shape](config.depth)
    log.debug(f"{config.name}: {len(edges)} edges")
    return edges


def n_nodes(config):
    config = EdgeConfig.make(config)
    d = config.depth
    return {
        "btree": 2**d - 1,
        "cycle": d,
        "grid": d * d,
        "pyramid": 2 * d,
        "pyramid-lattice": d * (d + 1) // 2,
    }[config.shape]
