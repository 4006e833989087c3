"""Per-thread bucket arrays.

A bucket array has one cell per thread: a few direct cells inline and, for
thread ids beyond them, indirect groups allocated on first use.
"""

from tabkit.exceptions import ThreadCapacityError
from tabkit.trie.atomic import compare_and_set_item


DIRECT_CELLS = 8
GROUP_CELLS = 32
MAX_THREADS = 1024
N_GROUPS = -(-(MAX_THREADS - DIRECT_CELLS) // GROUP_CELLS)


def check_thread(tid):
    if not 0 <= tid < MAX_THREADS:
        raise ThreadCapacityError(
            f"thread id {tid} outside the {MAX_THREADS} supported simultaneous threads"
        )


class BucketArray:
    """Cells indexed by thread id; cell ``k`` is only written by thread ``k``."""

    __slots__ = ("direct", "groups", "block", "allocator")

    def __init__(self, allocator=None, tid=0):
        self.direct = [None] * DIRECT_CELLS
        self.groups = [None] * N_GROUPS
        self.allocator = allocator
        self.block = None if allocator is None else allocator.alloc_block(tid, "bucket_array")

    def get(self, tid):
        if tid < DIRECT_CELLS:
            return self.direct[tid]
        check_thread(tid)
        group = self.groups[(tid - DIRECT_CELLS) // GROUP_CELLS]
        if group is None:
            return None
        return group[0][(tid - DIRECT_CELLS) % GROUP_CELLS]

    def set(self, tid, value):
        check_thread(tid)
        if tid < DIRECT_CELLS:
            self.direct[tid] = value
            return
        g = (tid - DIRECT_CELLS) // GROUP_CELLS
        group = self.groups[g]
        if group is None:
            block = None
            if self.allocator is not None:
                block = self.allocator.alloc_block(tid, "bucket_group")
            fresh = ([None] * GROUP_CELLS, block)
            if compare_and_set_item(self.groups, g, None, fresh):
                group = fresh
            else:
                if block is not None:
                    self.allocator.free_block(tid, block, "bucket_group")
                group = self.groups[g]
        group[0][(tid - DIRECT_CELLS) % GROUP_CELLS] = value

    def items(self):
        for tid, value in enumerate(self.direct):
            if value is not None:
                yield tid, value
        for g, group in enumerate(self.groups):
            if group is None:
                continue
            base = DIRECT_CELLS + g * GROUP_CELLS
            for k, value in enumerate(group[0]):
                if value is not None:
                    yield base + k, value

    def values(self):
        return [value for _, value in self.items()]

    @property
    def n_groups(self):
        return sum(1 for group in self.groups if group is not None)

    def bytes(self, block_sizes):
        return block_sizes["bucket_array"] + self.n_groups * block_sizes["bucket_group"]

    def free(self, tid):
        if self.allocator is None:
            return
        for group in self.groups:
            if group is not None and group[1] is not None:
                self.allocator.free_block(tid, group[1], "bucket_group")
        if self.block is not None:
            self.allocator.free_block(tid, self.block, "bucket_array")
        self.block = None
        self.groups = [None] * N_GROUPS
