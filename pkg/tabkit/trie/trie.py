"""Subgoal and answer tries.

A trie stores token sequences so that common prefixes are represented once.
Children of a node form a first-child/next-sibling chain until the chain holds
``threshold`` nodes; the next insertion installs a hash level (doubling bucket
array or hash trie of fixed ``2**w`` arrays) under the node.

New nodes are published with a single compare-and-set on the chain head or
bucket entry, so the caller whose CAS succeeds is the only inserter of a
sequence.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Union

from tabkit.exceptions import ConfigurationError, ContractViolation
from tabkit.trie.atomic import AtomicCounter, compare_and_set, compare_and_set_item, set_flag
from tabkit.trie.hashing import token_hash
from tabkit.trie.levels import (
    DoublingLevel,
    Frozen,
    HashTrieArray,
    Link,
    iter_links,
    remove_link,
    scan_links,
)


log = logging.getLogger(__name__)

LEAF = 1
INVALID = 2

SCHEMES = ("doubling", "hashtrie")


@dataclass
class TrieConfig:
    """
    Hash-level configuration of tries.

    Parameters
    ----------
    scheme: str
        ``"hashtrie"`` (fixed-size arrays drawn from the page allocator) or
        ``"doubling"`` (bucket arrays doubled in a separate arena).
    threshold: int
        Chain length that saturates a level or triggers an expansion.
    initial_size: int
        Bucket count of a fresh doubling level (power of two).
    w: int
        Hash bits consumed per hash-trie depth; arrays hold ``2**w`` entries.
    """

    scheme: str = "hashtrie"
    threshold: int = 8
    initial_size: int = 8
    w: int = 3

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"Unknown hash scheme {self.scheme}, use one of {SCHEMES}")
        if self.threshold < 1:
            raise ConfigurationError("threshold must be at least 1")
        if self.initial_size < 1 or self.initial_size & (self.initial_size - 1):
            raise ConfigurationError("initial_size must be a power of two")
        if not 1 <= self.w <= 16:
            raise ConfigurationError("w must be between 1 and 16")

    @property
    def array_size(self):
        return 1 << self.w

    @classmethod
    def make(cls, dic: Union[None, Dict, "TrieConfig"] = None) -> "TrieConfig":
        """Create a TrieConfig from None, a dict or another TrieConfig."""
        if dic is None:
            return cls()
        elif isinstance(dic, dict):
            return cls(**dic)
        elif isinstance(dic, cls):
            return dic
        else:
            raise ConfigurationError(f"Expected dict or TrieConfig, got {type(dic)}")


class TrieNode:
    __slots__ = ("token", "parent", "child", "next", "flags", "payload", "block")

    def __init__(self, token, parent, flags=0, block=None):
        self.token = token
        self.parent = parent
        self.child = None
        self.next = None
        self.flags = flags
        self.payload = None
        self.block = block

    @property
    def is_leaf(self):
        return bool(self.flags & LEAF)

    @property
    def is_invalid(self):
        return bool(self.flags & INVALID)

    def __repr__(self):
        return f"TrieNode({self.token}, flags={self.flags})"


@dataclass
class TrieStats:
    nodes: int = 0
    leaves: int = 0
    min_depth: int = 0
    avg_depth: float = 0.0
    max_depth: int = 0
    hash_levels: int = 0
    arrays: int = 0
    arena_bytes: int = 0

    def __add__(self, other):
        if not self.leaves:
            min_depth = other.min_depth
        elif not other.leaves:
            min_depth = self.min_depth
        else:
            min_depth = min(self.min_depth, other.min_depth)
        leaves = self.leaves + other.leaves
        total = self.avg_depth * self.leaves + other.avg_depth * other.leaves
        return TrieStats(
            nodes=self.nodes + other.nodes,
            leaves=leaves,
            min_depth=min_depth,
            avg_depth=total / leaves if leaves else 0.0,
            max_depth=max(self.max_depth, other.max_depth),
            hash_levels=self.hash_levels + other.hash_levels,
            arrays=self.arrays + other.arrays,
            arena_bytes=self.arena_bytes + other.arena_bytes,
        )


class Trie:
    """
    Trie of token sequences.

    Parameters
    ----------
    node_type: str
        Allocator structure type of the nodes.
    allocator: None | PageAllocator
        Source of node and hash-array blocks; ``None`` disables accounting.
    config: None | dict | TrieConfig
        Hash-level configuration.
    concurrent: bool
        Publish nodes with compare-and-set. Private tries use plain stores.
    rooted: bool
        Whether the root node is a counted, allocated node.
    """

    def __init__(self, node_type, allocator=None, config=None, concurrent=True, rooted=True):
        self.node_type = node_type
        self.allocator = allocator
        self.config = TrieConfig.make(config)
        self.concurrent = concurrent
        self.rooted = rooted
        self.threshold = self.config.threshold
        self.max_depth = 64 // self.config.w
        self.root = None
        self.leaves = []
        self.expansions = AtomicCounter()

    def __len__(self):
        return len(self.leaves)

    # allocation

    def _alloc(self, tid, type_):
        if self.allocator is None:
            return None
        return self.allocator.alloc_block(tid, type_)

    def _free(self, tid, block, type_=None):
        if block is not None:
            self.allocator.free_block(tid, block, type_ or self.node_type)

    def _new_node(self, token, parent, tid, leaf, payload=None):
        node = TrieNode(token, parent, LEAF if leaf else 0, self._alloc(tid, self.node_type))
        if leaf:
            node.payload = payload
        return node

    def _get_root(self, tid):
        root = self.root
        if root is None:
            block = self._alloc(tid, self.node_type) if self.rooted else None
            root = TrieNode(None, None, 0, block)
            if self._publish(self, "root", None, root):
                return root
            self._free(tid, block)
            root = self.root
        return root

    def _publish(self, obj, attr, expected, new):
        if self.concurrent:
            return compare_and_set(obj, attr, expected, new)
        setattr(obj, attr, new)
        return True

    def _publish_item(self, seq, index, expected, new):
        if self.concurrent:
            return compare_and_set_item(seq, index, expected, new)
        seq[index] = new
        return True

    # lookup / insertion

    def lookup(self, tokens):
        """Leaf of ``tokens`` or ``None``; lock-free."""
        node = self.root
        if node is None:
            return None
        for token in tokens:
            node = self._find_child(node, token)
            if node is None:
                return None
        return node if node.flags & LEAF and not node.flags & INVALID else None

    def _find_child(self, parent, token):
        child = parent.child
        kind = type(child)
        if child is None or kind is TrieNode:
            while child is not None:
                if child.token == token:
                    return child
                child = child.next
            return None
        if kind is Frozen:
            node = child.head
            while node is not None:
                if node.token == token:
                    return node
                node = node.next
            child = child.target
        h = token_hash(token)
        if type(child) is DoublingLevel:
            return child.find(token, h)
        return child.find(token, h, self.config.w, self.config.array_size - 1)

    def check_insert(self, tokens, tid=0, payload=None):
        """Find or insert the path of ``tokens``.

        Returns
        -------
        leaf: TrieNode
            The node identifying the sequence.
        inserted: bool
            True for exactly one caller per distinct sequence.
        """
        if not tokens:
            raise ContractViolation("cannot insert an empty token sequence")
        node = self._get_root(tid)
        last = len(tokens) - 1
        created = False
        for i, token in enumerate(tokens):
            node, created = self._child(node, token, tid, i == last, payload)
        if not created and not node.flags & LEAF:
            if node.payload is None:
                node.payload = payload
            if self.concurrent:
                created = set_flag(node, "flags", LEAF)
            else:
                node.flags |= LEAF
                created = True
        if created:
            self.leaves.append(node)
        return node, created

    def _child(self, parent, token, tid, leaf, payload):
        new = None
        while True:
            head = parent.child
            kind = type(head)
            if head is None or kind is TrieNode:
                node = head
                count = 0
                while node is not None:
                    if node.token == token:
                        if new is not None:
                            self._free(tid, new.block)
                        return node, False
                    count += 1
                    node = node.next
                if count >= self.threshold:
                    self.saturate_level(parent, tid)
                    continue
                if new is None:
                    new = self._new_node(token, parent, tid, leaf, payload)
                new.next = head
                if self._publish(parent, "child", head, new):
                    return new, True
                continue
            if kind is Frozen:
                node = head.head
                while node is not None:
                    if node.token == token:
                        if new is not None:
                            self._free(tid, new.block)
                        return node, False
                    node = node.next
                head = head.target
            if new is not None:
                new.next = None
            if type(head) is DoublingLevel:
                return self._doubling_insert(head, parent, token, tid, leaf, new, payload)
            return self._hashtrie_insert(head, parent, token, tid, leaf, new, payload)

    def _new_level(self, tid):
        if self.config.scheme == "doubling":
            return DoublingLevel(self.config.initial_size)
        return HashTrieArray(self.config.array_size, 0, self._alloc(tid, "hash_array"))

    def saturate_level(self, parent, tid=0):
        """Install a hash level under ``parent`` and migrate its chain into it.

        The chain head is first swapped for a frozen cell, which both claims the
        saturation and redirects concurrent inserters to the new level.
        """
        head = parent.child
        if head is None or type(head) is not TrieNode:
            return parent.child
        level = self._new_level(tid)
        frozen = Frozen(head, level)
        if not self._publish(parent, "child", head, frozen):
            if type(level) is HashTrieArray:
                self._free(tid, level.block, "hash_array")
            return parent.child
        node = head
        migrated = 0
        while node is not None:
            self._push(level, node)
            migrated += 1
            node = node.next
        if type(level) is DoublingLevel:
            level.count.increment(migrated)
        parent.child = level
        log.debug(f"{self.config.scheme} level installed under {parent!r}")
        return level

    def _push(self, level, node):
        """Add a migrating node to ``level`` without a membership check."""
        h = token_hash(node.token)
        if type(level) is DoublingLevel:
            buckets = level.buckets
            while True:
                i = h & (len(buckets) - 1)
                cell = buckets[i]
                if type(cell) is Frozen:
                    buckets = cell.target
                    continue
                if self._publish_item(buckets, i, cell, Link(node, cell)):
                    return
        w = self.config.w
        mask = self.config.array_size - 1
        array = level
        while True:
            i = (h >> (w * array.depth)) & mask
            cell = array.entries[i]
            kind = type(cell)
            if kind is HashTrieArray:
                array = cell
            elif kind is Frozen:
                array = cell.target
            elif self._publish_item(array.entries, i, cell, Link(node, cell)):
                return

    def _doubling_insert(self, level, parent, token, tid, leaf, new, payload):
        h = token_hash(token)
        buckets = level.buckets
        while True:
            i = h & (len(buckets) - 1)
            cell = buckets[i]
            if type(cell) is Frozen:
                node = scan_links(cell.head, token)
                if node is not None:
                    if new is not None:
                        self._free(tid, new.block)
                    return node, False
                buckets = cell.target
                continue
            link = cell
            count = 0
            while link is not None:
                if link.node.token == token:
                    if new is not None:
                        self._free(tid, new.block)
                    return link.node, False
                count += 1
                link = link.next
            if (
                count >= self.threshold
                and level.count.value > len(buckets)
                and buckets is level.buckets
                and not level.expanding
            ):
                self.expand_doubling(level)
                buckets = level.buckets
                continue
            if new is None:
                new = self._new_node(token, parent, tid, leaf, payload)
            if self._publish_item(buckets, i, cell, Link(new, cell)):
                level.count.increment()
                return new, True

    def expand_doubling(self, level: DoublingLevel):
        """Double the bucket array of ``level``.

        Old buckets are frozen one by one and their nodes re-pushed into the new
        array; ``level.buckets`` is switched only once every bucket migrated.
        Concurrent inserters follow the frozen buckets and never wait.
        """
        if not self._publish(level, "expanding", False, True):
            return level
        old = level.buckets
        new = [None] * (2 * len(old))
        for i in range(len(old)):
            while True:
                cell = old[i]
                if self._publish_item(old, i, cell, Frozen(cell, new)):
                    break
            for node in iter_links(cell):
                self._push_buckets(new, node)
        level.buckets = new
        level.expansions += 1
        self.expansions.increment()
        level.expanding = False
        log.debug(f"doubling level expanded to {len(new)} buckets")
        return level

    def _push_buckets(self, buckets, node):
        h = token_hash(node.token)
        while True:
            i = h & (len(buckets) - 1)
            cell = buckets[i]
            if type(cell) is Frozen:
                buckets = cell.target
                continue
            if self._publish_item(buckets, i, cell, Link(node, cell)):
                return

    def _hashtrie_insert(self, root, parent, token, tid, leaf, new, payload):
        h = token_hash(token)
        w = self.config.w
        mask = self.config.array_size - 1
        array = root
        while True:
            i = (h >> (w * array.depth)) & mask
            cell = array.entries[i]
            kind = type(cell)
            if kind is HashTrieArray:
                array = cell
                continue
            if kind is Frozen:
                node = scan_links(cell.head, token)
                if node is not None:
                    if new is not None:
                        self._free(tid, new.block)
                    return node, False
                array = cell.target
                continue
            link = cell
            count = 0
            while link is not None:
                if link.node.token == token:
                    if new is not None:
                        self._free(tid, new.block)
                    return link.node, False
                count += 1
                link = link.next
            if count >= self.threshold and array.depth + 1 < self.max_depth:
                self.expand_hashtrie(array, i, tid)
                continue
            if new is None:
                new = self._new_node(token, parent, tid, leaf, payload)
            if self._publish_item(array.entries, i, cell, Link(new, cell)):
                return new, True

    def expand_hashtrie(self, array: HashTrieArray, index, tid=0):
        """Hang a child array of ``2**w`` entries under one saturated bucket entry.

        Nodes of the bucket are redistributed by the next ``w`` bits of their
        hash. Returns the child array, or ``None`` if another thread won the
        expansion of this entry.
        """
        cell = array.entries[index]
        if type(cell) is not Link:
            return None
        child = HashTrieArray(
            self.config.array_size, array.depth + 1, self._alloc(tid, "hash_array")
        )
        frozen = Frozen(cell, child)
        if not self._publish_item(array.entries, index, cell, frozen):
            self._free(tid, child.block, "hash_array")
            return None
        for node in iter_links(cell):
            self._push(child, node)
        array.entries[index] = child
        self.expansions.increment()
        log.debug(f"hash trie entry {index} expanded at depth {array.depth + 1}")
        return child

    # private-trie maintenance

    def _unlink(self, node):
        parent = node.parent
        child = parent.child
        if type(child) is TrieNode:
            if child is node:
                parent.child = node.next
            else:
                while child.next is not node:
                    child = child.next
                child.next = node.next
            node.next = None
            return
        h = token_hash(node.token)
        if type(child) is DoublingLevel:
            buckets = child.buckets
            i = h & (len(buckets) - 1)
            buckets[i] = remove_link(buckets[i], node)
            child.count.increment(-1)
            if buckets[i] is None and child.is_empty():
                parent.child = None
            return
        w = self.config.w
        mask = self.config.array_size - 1
        array = child
        while True:
            i = (h >> (w * array.depth)) & mask
            cell = array.entries[i]
            if type(cell) is HashTrieArray:
                array = cell
                continue
            array.entries[i] = remove_link(cell, node)
            break
        if array.entries[i] is None and child.is_empty():
            parent.child = None
            return list(child.arrays())

    def invalidate(self, leaf, tid=0):
        """Tag ``leaf`` invalid and free the path nodes it alone was using.

        The leaf itself keeps its block until :meth:`purge_invalid`. Only valid
        on private tries.
        """
        if self.concurrent:
            raise ContractViolation("invalidation requires a single-writer trie")
        if leaf.flags & INVALID:
            return
        leaf.flags |= INVALID
        if leaf.child is not None:
            return
        node = leaf
        while True:
            parent = node.parent
            arrays = self._unlink(node)
            for array in arrays or ():
                self._free(tid, array.block, "hash_array")
            if node is not leaf:
                self._free(tid, node.block)
                node.block = None
            if parent is self.root or parent.child is not None:
                break
            if parent.flags & LEAF and not parent.flags & INVALID:
                break
            node = parent

    def purge_invalid(self, tid=0):
        """Free invalid leaves and drop them from the leaf sequence."""
        kept = []
        purged = 0
        for leaf in self.leaves:
            if leaf.flags & INVALID:
                self._free(tid, leaf.block)
                leaf.block = None
                purged += 1
            else:
                kept.append(leaf)
        if purged:
            self.leaves = kept
        return purged

    # traversal

    def _children(self, node):
        child = node.child
        kind = type(child)
        if child is None:
            return
        if kind is Frozen:
            head = child.head
            while head is not None:
                yield head
                head = head.next
            child = child.target
            kind = type(child)
        if kind is TrieNode:
            while child is not None:
                yield child
                child = child.next
        else:
            yield from child.nodes()

    def _levels(self, node):
        child = node.child
        if type(child) is Frozen:
            child = child.target
        if child is not None and type(child) is not TrieNode:
            yield child

    def iter_nodes(self):
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            for child in self._children(node):
                yield child
                if child.child is not None:
                    stack.append(child)

    def tokens_of(self, leaf):
        tokens = []
        node = leaf
        while node.parent is not None:
            tokens.append(node.token)
            node = node.parent
        tokens.reverse()
        return tuple(tokens)

    def stats(self) -> TrieStats:
        """Exact counts; requires a quiescent trie.

        Nodes include the root of a non-empty rooted trie; leaf depth is the
        length of the leaf's token sequence.
        """
        if self.root is None:
            return TrieStats()
        stats = TrieStats(nodes=1 if self.rooted else 0)
        total = 0
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            for level in self._levels(node):
                stats.hash_levels += 1
                if type(level) is DoublingLevel:
                    stats.arena_bytes += level.arena_bytes
                else:
                    stats.arrays += sum(1 for _ in level.arrays())
            for child in self._children(node):
                stats.nodes += 1
                if child.flags & LEAF and not child.flags & INVALID:
                    d = depth + 1
                    if not stats.leaves or d < stats.min_depth:
                        stats.min_depth = d
                    if d > stats.max_depth:
                        stats.max_depth = d
                    stats.leaves += 1
                    total += d
                if child.child is not None:
                    stack.append((child, depth + 1))
        stats.avg_depth = total / stats.leaves if stats.leaves else 0.0
        return stats

    def bytes(self, block_sizes):
        """Allocator bytes held by the trie under ``block_sizes``."""
        stats = self.stats()
        return stats.nodes * block_sizes[self.node_type] + stats.arrays * block_sizes[
            "hash_array"
        ]

    def free_all(self, tid=0):
        """Return every node and hash array to the allocator and empty the trie."""
        root = self.root
        if root is None:
            return
        if self.allocator is not None:
            stack = [root]
            while stack:
                node = stack.pop()
                for level in self._levels(node):
                    if type(level) is HashTrieArray:
                        for array in level.arrays():
                            self._free(tid, array.block, "hash_array")
                for child in self._children(node):
                    if child.child is not None:
                        stack.append(child)
                    self._free(tid, child.block)
                    child.block = None
            for leaf in self.leaves:
                if leaf.flags & INVALID and leaf.block is not None:
                    self._free(tid, leaf.block)
                    leaf.block = None
            self._free(tid, root.block)
        self.root = None
        self.leaves = []
