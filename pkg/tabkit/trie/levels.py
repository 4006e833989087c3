"""Hash levels installed under saturated trie nodes.

Bucket chains are made of :class:`Link` cells, separate from the trie nodes, so a
node's own sibling link stays intact for readers still walking the chain it came
from. A chain (or bucket) being migrated is replaced by a :class:`Frozen` cell
that keeps the old chain readable and points to where new insertions go.
"""

from tabkit.trie.atomic import AtomicCounter


class Link:
    __slots__ = ("node", "next")

    def __init__(self, node, next):
        self.node = node
        self.next = next


class Frozen:
    __slots__ = ("head", "target")

    def __init__(self, head, target):
        self.head = head
        self.target = target


def scan_links(cell, token):
    while cell is not None:
        node = cell.node
        if node.token == token:
            return node
        cell = cell.next
    return None


def iter_links(cell):
    while cell is not None:
        yield cell.node
        cell = cell.next


def remove_link(cell, node):
    """Chain ``cell`` without ``node`` (private tries only)."""
    kept = [n for n in iter_links(cell) if n is not node]
    head = None
    for n in reversed(kept):
        head = Link(n, head)
    return head


class DoublingLevel:
    """Bucket array that doubles in size on expansion.

    Arrays are variable-sized, so they live outside the page allocator; their
    footprint is reported as ``arena_bytes``.
    """

    __slots__ = ("buckets", "count", "expanding", "expansions")

    def __init__(self, size):
        self.buckets = [None] * size
        self.count = AtomicCounter()
        self.expanding = False
        self.expansions = 0

    @property
    def arena_bytes(self):
        return 8 * len(self.buckets)

    def find(self, token, h):
        buckets = self.buckets
        while True:
            cell = buckets[h & (len(buckets) - 1)]
            if type(cell) is Frozen:
                node = scan_links(cell.head, token)
                if node is not None:
                    return node
                buckets = cell.target
                continue
            return scan_links(cell, token)

    def nodes(self):
        for cell in self.buckets:
            if type(cell) is Frozen:
                cell = cell.head
            yield from iter_links(cell)

    def is_empty(self):
        return all(cell is None for cell in self.buckets)


class HashTrieArray:
    """Fixed-size array of ``2**w`` entries at one depth of a hash trie.

    An entry is empty, a chain of links, a frozen chain being redistributed, or
    a child array consuming the next ``w`` bits of the hash.
    """

    __slots__ = ("entries", "depth", "block")

    def __init__(self, size, depth, block=None):
        self.entries = [None] * size
        self.depth = depth
        self.block = block

    def find(self, token, h, w, mask):
        array = self
        while True:
            cell = array.entries[(h >> (w * array.depth)) & mask]
            kind = type(cell)
            if kind is HashTrieArray:
                array = cell
            elif kind is Frozen:
                node = scan_links(cell.head, token)
                if node is not None:
                    return node
                array = cell.target
            else:
                return scan_links(cell, token)

    def arrays(self):
        stack = [self]
        while stack:
            array = stack.pop()
            yield array
            for cell in array.entries:
                if type(cell) is HashTrieArray:
                    stack.append(cell)
                elif type(cell) is Frozen:
                    stack.append(cell.target)

    def nodes(self):
        for array in self.arrays():
            for cell in array.entries:
                if type(cell) is Link:
                    yield from iter_links(cell)

    def is_empty(self):
        return all(
            cell is None or (type(cell) is HashTrieArray and cell.is_empty())
            for cell in self.entries
        )
