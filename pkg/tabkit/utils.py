"""Util functions for tabkit."""

import logging
import random
import sys
import threading
from contextlib import contextmanager

import numpy as np


log = logging.getLogger(__name__)

VALID_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# tabled evaluation recurses once per nested generator (path-right on a cycle of
# 2000 nodes nests 2000 generators), so workers get a deep stack
WORKER_STACK_SIZE = 512 * 1024 * 1024
WORKER_RECURSION_LIMIT = 1_000_000


def _set_random_seed(seed: int) -> None:
    """Set the seed for Python's built-in random module and numpy.

    Parameters
    ----------
    seed: int
        The random seed to use.
    Returns
    -------
    None
    """
    random.seed(seed)
    np.random.seed(seed)


def setup_seed(seed: int) -> None:
    """Set the seed for random and numpy.

    Benchmark generators and workers use their own :func:`thread_rng` streams;
    this only fixes the global generators used by ad hoc code and tests.

    Parameters
    ----------
    seed: int
        The random seed to use.
    """
    _set_random_seed(seed)


def thread_rng(seed, tid):
    """Deterministic per-thread generator seeded with ``seed ^ tid``."""
    return np.random.default_rng((seed or 0) ^ tid)


def set_log_level(level="INFO"):
    """Set log level.

    Set the general log level. Use one of the levels supported by python
    logging, i.e.: DEBUG, INFO, WARNING, ERROR, CRITICAL
    """
    level = level.upper()
    if level not in VALID_LEVELS:
        raise ValueError(f"Invalid level {level}. Choose one of {VALID_LEVELS}.")
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(threadName)s %(name)s %(message)s",
    )
    logging.getLogger("tabkit").setLevel(level)


_stack_lock = threading.Lock()


@contextmanager
def worker_stack(stack_size=WORKER_STACK_SIZE, recursion_limit=WORKER_RECURSION_LIMIT):
    """Raise the thread stack size and recursion limit while workers are spawned.

    Threads created inside the block get ``stack_size`` bytes of stack; the
    previous settings are restored on exit.
    """
    with _stack_lock:
        old_limit = sys.getrecursionlimit()
        try:
            old_size = threading.stack_size(stack_size)
        except (ValueError, RuntimeError):
            log.warning(f"Could not set worker stack size to {stack_size} bytes")
            old_size = None
        sys.setrecursionlimit(max(old_limit, recursion_limit))
        try:
            yield
        finally:
            if old_size is not None:
                threading.stack_size(old_size)
            sys.setrecursionlimit(old_limit)
