import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from tabkit.exceptions import (
    ConfigurationError,
    ContractViolation,
    DuplicateRegistrationError,
    UnsupportedDesignError,
)
from tabkit.pagealloc import MAIN_THREAD, PageAllocator
from tabkit.tablespace.frames import COMPLETE, SubgoalFrame
from tabkit.term import SubgoalKey, atom_token
from tabkit.trie import INVALID, Trie, TrieConfig, TrieStats


log = logging.getLogger(__name__)

# answer of a call without variables
NO_BINDINGS = (atom_token("true"),)

MODES = ("index", "first", "last", "min", "max", "sum", "all")


class AnswerResult(Enum):
    NEW = "new"
    REPEATED = "repeated"


@dataclass
class TableEntry:
    """Per-predicate table entry, read-only once registered.

    ``root`` depends on the design: a bucket array of per-thread subgoal tries
    under NS, one shared subgoal trie otherwise.
    """

    name: str
    arity: int
    strategy: str = "variant"
    modes: Optional[Tuple[str, ...]] = None
    root: object = None
    block: object = None

    @property
    def predicate(self):
        return (self.name, self.arity)


class SubgoalHandle:
    """What a thread holds on a subgoal after lookup.

    ``frame`` is the thread's own frame, or under PAS a frame completed and
    published by another thread. ``fresh`` is True when the lookup created the
    thread's frame, i.e. the thread is the generator of the call.
    """

    __slots__ = ("table", "key", "tid", "frame", "fresh")

    def __init__(self, table, key, tid, frame, fresh):
        self.table = table
        self.key = key
        self.tid = tid
        self.frame = frame
        self.fresh = fresh

    @property
    def complete(self):
        return self.frame.state == COMPLETE

    def __repr__(self):
        return f"SubgoalHandle({self.key}, tid={self.tid}, fresh={self.fresh})"


@dataclass
class SubgoalCensus:
    key: SubgoalKey
    frames: int = 0
    frame_bytes: int = 0
    answer_tries: List[int] = field(default_factory=list)
    entry_bytes: int = 0
    ba_bytes: int = 0
    chain_bytes: int = 0


@dataclass
class PredicateCensus:
    name: str
    arity: int
    te_bytes: int = 0
    ba_bytes: int = 0
    subgoal_tries: List[int] = field(default_factory=list)
    subgoals: List[SubgoalCensus] = field(default_factory=list)


@dataclass
class Census:
    """Structure counts and bytes of a quiescent table space."""

    design: str
    predicates: List[PredicateCensus] = field(default_factory=list)

    @property
    def n_subgoals(self):
        return sum(len(p.subgoals) for p in self.predicates)


@dataclass
class TableStats:
    subgoals: int = 0
    subgoal_trie: TrieStats = field(default_factory=TrieStats)
    answer_trie: TrieStats = field(default_factory=TrieStats)


class TableSpace(ABC):
    """Base class of the table-space designs.

    Parameters
    ----------
    allocator: None | PageAllocator
        Allocator every structure is accounted in. A fresh one by default.
    trie_config: None | dict | TrieConfig
        Hash-level configuration of every trie.
    scheduling: str
        ``"local"`` or ``"batched"``; designs that cannot tell apart per-thread
        new answers refuse batched scheduling.
    """

    design = None
    supports_batched = True
    supports_modes = True

    def __init__(self, allocator=None, trie_config=None, scheduling="local"):
        if scheduling not in ("local", "batched"):
            raise ConfigurationError(f"Unknown scheduling {scheduling}")
        if scheduling == "batched" and not self.supports_batched:
            raise ConfigurationError(
                f"{self.design} cannot discriminate new answers per thread; "
                "use PAC for batched scheduling"
            )
        self.allocator = allocator if allocator is not None else PageAllocator()
        self.trie_config = TrieConfig.make(trie_config)
        self.scheduling = scheduling
        self.sizes = self.allocator.block_sizes
        self.entries: Dict[Tuple[str, int], TableEntry] = {}
        self._lock = threading.Lock()
        self._live = set()

    def __repr__(self):
        return f"{type(self).__name__}(scheduling={self.scheduling})"

    # registration and thread membership

    def register_predicate(self, name, arity, strategy="variant", modes=None, tid=MAIN_THREAD):
        """Allocate and publish the table entry of ``name/arity``.

        Raises
        ------
        DuplicateRegistrationError
            If the predicate already has a table entry.
        """
        if modes is not None:
            modes = tuple(modes)
            if len(modes) != arity:
                raise ConfigurationError(f"{len(modes)} modes given for {name}/{arity}")
            for mode in modes:
                if mode not in MODES:
                    raise ConfigurationError(f"Unknown mode {mode}, use one of {MODES}")
            if not self.supports_modes:
                raise UnsupportedDesignError(
                    f"mode-directed tabling of {name}/{arity} is not available under "
                    f"{self.design}"
                )
            strategy = "mode"
        with self._lock:
            if (name, arity) in self.entries:
                raise DuplicateRegistrationError(f"{name}/{arity} is already tabled")
            entry = TableEntry(name, arity, strategy, modes)
            entry.block = self.allocator.alloc_block(tid, "table_entry")
            entry.root = self._new_root(tid)
            self.entries[(name, arity)] = entry
        return entry

    def attach(self, tid):
        with self._lock:
            self._live.add(tid)

    def detach(self, tid):
        """Thread ``tid`` leaves; its remaining pages go to the global heap."""
        with self._lock:
            self._live.discard(tid)
        self.allocator.release_thread(tid)

    def _subgoal_path(self, key):
        return key.arguments or key.tokens

    def _new_frame(self, key, tid, type_="subgoal_frame", private=True, entry=None):
        answers = None
        if private:
            answers = Trie("answer_trie_node", self.allocator, self.trie_config, concurrent=False)
        block = self.allocator.alloc_block(tid, type_)
        return SubgoalFrame(key, tid, block, answers, entry)

    def _free_frame(self, frame, tid):
        if frame.answers is not None:
            frame.answers.free_all(tid)
        if frame.chain is not None:
            frame.chain.free(tid)
            frame.chain = None
        if frame.block is not None:
            type_ = "subgoal_frame" if frame.answers is not None else "subgoal_frame_fs"
            self.allocator.free_block(tid, frame.block, type_)
            frame.block = None

    # design operations

    @abstractmethod
    def _new_root(self, tid):
        pass

    @abstractmethod
    def subgoal_lookup_insert(self, entry, key, tid) -> SubgoalHandle:
        """Find or create the subgoal of ``key`` for thread ``tid``."""

    @abstractmethod
    def record_answer(self, handle, tokens, tid):
        """Store an answer; returns ``(AnswerResult, leaf)``."""

    @abstractmethod
    def complete_subgoal(self, handle, tid):
        pass

    @abstractmethod
    def answer_leaves(self, handle) -> list:
        """Growing sequence of answer leaves visible to the handle's thread."""

    def _check_recordable(self, handle):
        if handle.frame.state == COMPLETE:
            raise ContractViolation(f"answer recorded on completed table {handle.key}")

    def consume_answers(self, handle):
        """Yield the substitution tokens of the visible, valid answers."""
        for leaf in self.answer_leaves(handle):
            if not leaf.flags & INVALID:
                yield leaf.payload

    def answer_trie(self, handle) -> Trie:
        """Single-writer answer trie of the handle's frame."""
        if handle.frame.answers is None:
            raise UnsupportedDesignError(f"{self.design} answer tries are shared")
        return handle.frame.answers

    def invalidate_answer(self, handle, leaf, tid):
        """Invalidate ``leaf`` in the thread's private answer trie.

        Raises
        ------
        UnsupportedDesignError
            Under designs whose answer tries are written concurrently.
        """
        self.answer_trie(handle).invalidate(leaf, tid)

    # whole-space operations

    @abstractmethod
    def _free_entry(self, entry, tid):
        pass

    @abstractmethod
    def _census_entry(self, entry) -> PredicateCensus:
        pass

    @abstractmethod
    def _visible_tries(self, entry, tid):
        """Subgoal tries and answer tries thread ``tid`` reads from."""

    def census(self) -> Census:
        census = Census(self.design)
        for entry in self.entries.values():
            census.predicates.append(self._census_entry(entry))
        return census

    def table_stats(self, tid) -> TableStats:
        """Node, leaf and depth statistics of the tables visible to ``tid``."""
        stats = TableStats()
        for entry in self.entries.values():
            subgoal_tries, answer_tries = self._visible_tries(entry, tid)
            for trie in subgoal_tries:
                trie_stats = trie.stats()
                stats.subgoal_trie = stats.subgoal_trie + trie_stats
                stats.subgoals += trie_stats.leaves
            for trie in answer_tries:
                stats.answer_trie = stats.answer_trie + trie.stats()
        return stats

    def abolish_tables(self, tid=MAIN_THREAD):
        """Free every table; the allocator ends with all pages free.

        Raises
        ------
        ContractViolation
            If worker threads are still attached.
        """
        with self._lock:
            if self._live - {tid}:
                raise ContractViolation(
                    f"abolish_tables with live threads {sorted(self._live - {tid})}"
                )
            entries = list(self.entries.values())
            self.entries = {}
        if not entries:
            return
        self.allocator.release_all()
        adopted = self.allocator.adopt_all(tid)
        for entry in entries:
            self._free_entry(entry, tid)
            self.allocator.free_block(tid, entry.block, "table_entry")
            entry.block = None
        self.allocator.release_thread(tid)
        log.info(f"{self.design} tables abolished ({len(entries)} predicates, {adopted} pages adopted)")
