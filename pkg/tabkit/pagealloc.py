"""Fixed-size page allocator with per-thread local heaps and a global heap.

Every page holds blocks of a single structure type. A thread allocates only from
pages it owns; pages move between threads through the global heap, which is the
only synchronized part of the allocator.

Blocks carry no payload here: the Python objects of the table space keep their
:class:`BlockRef` and the allocator does the accounting that the memory model is
checked against.
"""

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Union

from tabkit.exceptions import (
    AllocatorExhausted,
    ConfigurationError,
    DoubleFreeError,
    OwnershipError,
    TypePurityError,
)


log = logging.getLogger(__name__)

GLOBAL = None
# thread id used by the thread that abolishes the tables
MAIN_THREAD = 1024

DEFAULT_BLOCK_SIZES = {
    "table_entry": 48,
    "bucket_array": 72,
    "bucket_group": 256,
    "subgoal_trie_node": 32,
    "answer_trie_node": 32,
    "subgoal_frame": 64,
    "subgoal_entry": 40,
    "subgoal_frame_fs": 32,
    "hash_array": 64,
    "answer_chain_node": 16,
}


@dataclass
class AllocatorConfig:
    """
    Configuration of the page allocator.

    Parameters
    ----------
    page_size: int
        Payload bytes of one page.
    block_sizes: dict
        Block size in bytes per structure type. Missing types take their size
        from ``DEFAULT_BLOCK_SIZES``.
    debug: bool
        Enable ownership, double-free and type-purity checks.
    max_pages: None | int
        Number of pages the host may hand out. ``None`` means unbounded.
    """

    page_size: int = 4096
    block_sizes: Dict[str, int] = field(default_factory=dict)
    debug: bool = False
    max_pages: Optional[int] = None

    def __post_init__(self):
        sizes = dict(DEFAULT_BLOCK_SIZES)
        sizes.update(self.block_sizes or {})
        for name, size in sizes.items():
            if size <= 0 or size > self.page_size:
                raise ConfigurationError(
                    f"Block size {size} of {name} does not fit a {self.page_size}-byte page"
                )
        self.block_sizes = sizes
        if self.max_pages is not None and self.max_pages < 0:
            raise ConfigurationError("max_pages must be non-negative")

    @classmethod
    def make(cls, dic: Union[None, Dict, "AllocatorConfig"] = None) -> "AllocatorConfig":
        """Create an AllocatorConfig from None, a dict or another AllocatorConfig."""
        if dic is None:
            return cls()
        elif isinstance(dic, dict):
            return cls(**dic)
        elif isinstance(dic, cls):
            return dic
        else:
            raise ConfigurationError(f"Expected dict or AllocatorConfig, got {type(dic)}")


class Page:
    __slots__ = (
        "number",
        "type",
        "owner",
        "block_size",
        "capacity",
        "free_slots",
        "in_use",
        "live",
    )

    def __init__(self, number):
        self.number = number
        self.type = None
        self.owner = GLOBAL
        self.block_size = 0
        self.capacity = 0
        self.free_slots: List[int] = []
        self.in_use = 0
        self.live = None

    def format(self, type_, block_size, page_size, debug):
        self.type = type_
        self.block_size = block_size
        self.capacity = page_size // block_size
        # popped from the end, so slot 0 is handed out first
        self.free_slots = list(range(self.capacity - 1, -1, -1))
        self.in_use = 0
        self.live = set() if debug else None

    def __repr__(self):
        return (
            f"Page({self.number}, type={self.type}, owner={self.owner}, "
            f"in_use={self.in_use}/{self.capacity})"
        )


class BlockRef(NamedTuple):
    page: Page
    slot: int
    # block type given at allocation
    type: str


class LocalHeap:
    """Pages owned by one thread."""

    def __init__(self, tid):
        self.tid = tid
        self.owned = set()
        self.avail: Dict[str, "OrderedDict[int, Page]"] = {}
        self.free_pages: List[Page] = []


class GlobalHeap:
    def __init__(self):
        self.avail: Dict[str, "OrderedDict[int, Page]"] = {}
        self.full: Dict[str, Dict[int, Page]] = {}
        self.free_pages: List[Page] = []

    def put(self, page):
        page.owner = GLOBAL
        if page.type is None:
            self.free_pages.append(page)
        elif page.free_slots:
            self.avail.setdefault(page.type, OrderedDict())[page.number] = page
        else:
            self.full.setdefault(page.type, {})[page.number] = page


@dataclass
class TypeStats:
    local_pages: int = 0
    global_pages: int = 0
    live_blocks: int = 0
    block_size: int = 0
    page_bytes: int = 0
    tail_waste: int = 0

    @property
    def live_bytes(self):
        return self.live_blocks * self.block_size


@dataclass
class HeapStats:
    """Snapshot of the allocator.

    ``types`` maps a structure type to its page and block counters; free pages
    are not typed and are counted apart.
    """

    page_size: int
    types: Dict[str, TypeStats] = field(default_factory=dict)
    free_local_pages: int = 0
    free_global_pages: int = 0
    host_pages: int = 0

    @property
    def pages(self):
        typed = sum(t.local_pages + t.global_pages for t in self.types.values())
        return typed + self.free_local_pages + self.free_global_pages

    @property
    def bytes(self):
        return self.pages * self.page_size

    def live_blocks(self, type_=None):
        if type_ is not None:
            return self.types[type_].live_blocks if type_ in self.types else 0
        return sum(t.live_blocks for t in self.types.values())

    def live_bytes(self, type_=None):
        if type_ is not None:
            return self.types[type_].live_bytes if type_ in self.types else 0
        return sum(t.live_bytes for t in self.types.values())


class PageAllocator:
    """
    Fixed-size user-level allocator.

    Parameters
    ----------
    config: None | dict | AllocatorConfig
        Page size, block sizes, debug accounting and host page budget.
    """

    def __init__(self, config=None):
        self.config = AllocatorConfig.make(config)
        self.page_size = self.config.page_size
        self.block_sizes = self.config.block_sizes
        self.debug = self.config.debug
        self._heaps: Dict[int, LocalHeap] = {}
        self._global = GlobalHeap()
        self._lock = threading.Lock()
        self._pages: List[Page] = []

    def block_size(self, type_):
        return self.block_sizes[type_]

    def _heap(self, tid):
        heap = self._heaps.get(tid)
        if heap is None:
            with self._lock:
                heap = self._heaps.setdefault(tid, LocalHeap(tid))
        return heap

    def _new_page(self):
        limit = self.config.max_pages
        if limit is not None and len(self._pages) >= limit:
            raise AllocatorExhausted(f"host page budget of {limit} pages exhausted")
        page = Page(len(self._pages))
        self._pages.append(page)
        return page

    def _take_page(self, tid, type_):
        """Typed global page, then free global page, then a new host page."""
        with self._lock:
            avail = self._global.avail.get(type_)
            if avail:
                _, page = avail.popitem(last=False)
                log.debug(f"thread {tid} takes global {type_} page {page.number}")
            elif self._global.free_pages:
                page = self._global.free_pages.pop()
            else:
                page = self._new_page()
        return page

    def alloc_block(self, tid, type_) -> BlockRef:
        """Allocate one block of ``type_`` for thread ``tid``.

        Raises
        ------
        AllocatorExhausted
            If a new page is needed and the host budget is spent.
        """
        heap = self._heap(tid)
        avail = heap.avail.get(type_)
        if avail:
            # first page that became available
            page = next(iter(avail.values()))
        else:
            if avail is None:
                avail = heap.avail[type_] = OrderedDict()
            if heap.free_pages:
                page = heap.free_pages.pop()
            else:
                page = self._take_page(tid, type_)
                page.owner = tid
                heap.owned.add(page)
            if page.type is None:
                page.format(type_, self.block_sizes[type_], self.page_size, self.debug)
            avail[page.number] = page
        slot = page.free_slots.pop()
        page.in_use += 1
        if page.live is not None:
            page.live.add(slot)
        if not page.free_slots:
            del avail[page.number]
        return BlockRef(page, slot, type_)

    def free_block(self, tid, block: BlockRef, type_=None):
        """Return ``block`` to its page; an emptied page joins the free pages of ``tid``.

        Raises
        ------
        OwnershipError, DoubleFreeError, TypePurityError
            In debug mode only.
        """
        page, slot, allocated = block
        if self.debug:
            if page.owner != tid:
                raise OwnershipError(f"thread {tid} frees a block of {page!r}")
            if page.live is None or slot not in page.live:
                raise DoubleFreeError(f"slot {slot} of {page!r} is not allocated")
            if type_ is None:
                type_ = allocated
            if page.type != type_ or allocated != type_:
                raise TypePurityError(
                    f"{type_} block freed on {page!r}, allocated as {allocated}"
                )
            page.live.discard(slot)
        heap = self._heap(tid)
        page.free_slots.append(slot)
        page.in_use -= 1
        avail = heap.avail.setdefault(page.type, OrderedDict())
        if page.in_use == 0:
            avail.pop(page.number, None)
            page.type = None
            page.live = None
            heap.free_pages.append(page)
        elif page.number not in avail:
            avail[page.number] = page

    def check_type(self, block: BlockRef, type_):
        """Raise TypePurityError, in debug mode, unless ``block`` holds a ``type_``."""
        if self.debug and (block.page.type != type_ or block.type != type_):
            raise TypePurityError(f"{type_} block read from {block.page!r}")

    def release_thread(self, tid):
        """Move every page still owned by ``tid`` to the global heap."""
        heap = self._heaps.pop(tid, None)
        if heap is None or not heap.owned:
            return
        with self._lock:
            for page in heap.owned:
                self._global.put(page)
        log.debug(f"thread {tid} released {len(heap.owned)} pages to the global heap")

    def adopt_pages(self, tid, type_) -> int:
        """Make every global page of ``type_`` local to ``tid``; returns the count."""
        heap = self._heap(tid)
        with self._lock:
            pages = list(self._global.avail.pop(type_, {}).values())
            pages.extend(self._global.full.pop(type_, {}).values())
        if not pages:
            return 0
        avail = heap.avail.setdefault(type_, OrderedDict())
        for page in pages:
            page.owner = tid
            heap.owned.add(page)
            if page.free_slots:
                avail[page.number] = page
        log.debug(f"thread {tid} adopted {len(pages)} {type_} pages")
        return len(pages)

    def release_all(self):
        for tid in list(self._heaps):
            self.release_thread(tid)

    def adopt_all(self, tid) -> int:
        with self._lock:
            types = set(self._global.avail) | set(self._global.full)
        return sum(self.adopt_pages(tid, type_) for type_ in types)

    def heap_stats(self) -> HeapStats:
        with self._lock:
            pages = list(self._pages)
        stats = HeapStats(page_size=self.page_size, host_pages=len(pages))
        for page in pages:
            type_ = page.type
            if type_ is None:
                if page.owner is GLOBAL:
                    stats.free_global_pages += 1
                else:
                    stats.free_local_pages += 1
                continue
            counters = stats.types.get(type_)
            if counters is None:
                counters = stats.types[type_] = TypeStats(
                    block_size=self.block_sizes[type_]
                )
            if page.owner is GLOBAL:
                counters.global_pages += 1
            else:
                counters.local_pages += 1
            counters.live_blocks += page.in_use
            counters.page_bytes += self.page_size
            counters.tail_waste += self.page_size - page.capacity * page.block_size
        return stats

    def owned_pages(self, tid):
        heap = self._heaps.get(tid)
        return 0 if heap is None else len(heap.owned)
