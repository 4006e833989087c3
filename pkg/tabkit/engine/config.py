import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

from tabkit.exceptions import ConfigurationError
from tabkit.pagealloc import AllocatorConfig
from tabkit.tablespace.buckets import MAX_THREADS
from tabkit.tablespace.designs import DESIGNS
from tabkit.trie import TrieConfig


log = logging.getLogger(__name__)

SCHEDULINGS = ("local", "batched")
CLAUSE_ORDERS = ("source", "random")


@dataclass
class EvalConfig:
    """
    Configuration of one tabled evaluation.

    Parameters
    ----------
    design: str
        Table-space design, one of NS, SS, FS, PAS, PAC.
    scheduling: str
        ``"local"`` or ``"batched"``.
    threads: int
        Number of workers, all evaluating the same queries.
    seed: None | int
        Seed of the per-worker generators (``seed ^ tid``).
    clause_order: str
        ``"source"`` or ``"random"``; random shuffles the clauses of every
        generator with the worker's generator.
    trie: dict | TrieConfig
        Hash-level configuration of every trie.
    allocator: dict | AllocatorConfig
        Page allocator configuration.
    record_answers: bool
        Keep, per worker, the log of every answer it derived and whether the
        table took it as new (see :attr:`Engine.answer_logs`).
    """

    design: str = "NS"
    scheduling: str = "local"
    threads: int = 1
    seed: Optional[int] = None
    clause_order: str = "source"
    trie: Union[Dict, TrieConfig] = field(default_factory=dict)
    allocator: Union[Dict, AllocatorConfig] = field(default_factory=dict)
    record_answers: bool = False

    def __post_init__(self):
        self.design = self.design.upper()
        if self.design not in DESIGNS:
            raise ConfigurationError(
                f"Unknown design {self.design}, use one of {list(DESIGNS)}"
            )
        if self.scheduling not in SCHEDULINGS:
            raise ConfigurationError(
                f"Unknown scheduling {self.scheduling}, use one of {SCHEDULINGS}"
            )
        if self.design == "FS" and self.scheduling == "batched":
            raise ConfigurationError(
                "FS cannot tell apart new answers per thread under batched "
                "scheduling; use PAC"
            )
        if not 1 <= self.threads <= MAX_THREADS:
            raise ConfigurationError(f"threads must be in [1, {MAX_THREADS}]")
        if self.clause_order not in CLAUSE_ORDERS:
            raise ConfigurationError(
                f"Unknown clause order {self.clause_order}, use one of {CLAUSE_ORDERS}"
            )
        self.trie = TrieConfig.make(self.trie)
        self.allocator = AllocatorConfig.make(self.allocator)

    @classmethod
    def make(cls, dic: Union[None, Dict, "EvalConfig"] = None) -> "EvalConfig":
        """Create an EvalConfig from None, a dict or another EvalConfig."""
        if dic is None:
            return cls()
        elif isinstance(dic, dict):
            return cls(**dic)
        elif isinstance(dic, cls):
            return dic
        else:
            raise ConfigurationError(f"Expected dict or EvalConfig, got {type(dic)}")
