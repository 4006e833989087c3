"""Subgoal frames, subgoal entries and answer chains."""

import threading

from tabkit.trie import INVALID, Trie, TrieConfig
from tabkit.trie.atomic import compare_and_set


EVALUATING = 0
COMPLETE = 1


class SubgoalFrame:
    """Per-thread state of one subgoal call.

    Under NS/SS/PAS the frame owns a private answer trie. Under FS/PAC it points
    back to the shared :class:`SubgoalEntry`; PAC frames also hold the thread's
    private answer chain until completion.
    """

    __slots__ = ("key", "owner", "state", "answers", "entry", "chain", "block", "modes")

    def __init__(self, key, owner, block=None, answers=None, entry=None):
        self.key = key
        self.owner = owner
        self.state = EVALUATING
        self.answers = answers
        self.entry = entry
        self.chain = None
        self.block = block
        # mode-directed tables: index tokens -> SubstitutionArray
        self.modes = None

    @property
    def complete(self):
        return self.state == COMPLETE

    def __repr__(self):
        return f"SubgoalFrame({self.key}, owner={self.owner}, state={self.state})"


class SubgoalEntry:
    """Shared part of a subgoal under FS/PAC: the answer trie and per-thread frames."""

    __slots__ = ("key", "answers", "frames", "complete", "lock", "public_chain", "block")

    def __init__(self, key, answers, frames, block=None):
        self.key = key
        self.answers = answers
        self.frames = frames
        self.complete = False
        self.lock = threading.Lock()
        self.public_chain = None
        self.block = block


class AnswerChain:
    """A thread's private chain of references to shared answer-trie leaves.

    Membership is a private trie of one-token sequences keyed by the leaf's
    identity, which switches to a hash trie once it holds more than the
    threshold. ``leaves`` keeps the referenced answers in arrival order.
    """

    def __init__(self, allocator, w=3, threshold=8):
        self.index = Trie(
            "answer_chain_node",
            allocator,
            TrieConfig(scheme="hashtrie", threshold=threshold, w=w),
            concurrent=False,
            rooted=False,
        )
        self.leaves = []

    def add(self, leaf, tid):
        """Append ``leaf`` unless already chained; True if appended."""
        _, inserted = self.index.check_insert((id(leaf),), tid, payload=leaf)
        if inserted:
            self.leaves.append(leaf)
        return inserted

    def __len__(self):
        return len(self.leaves)

    def free(self, tid):
        self.index.free_all(tid)
        self.leaves = []


class PublicChain:
    """Chain of every valid leaf of a completed shared answer trie."""

    __slots__ = ("leaves", "blocks")

    def __init__(self, answers: Trie, allocator, tid):
        self.leaves = [leaf for leaf in answers.leaves if not leaf.flags & INVALID]
        self.blocks = []
        if allocator is not None:
            self.blocks = [
                allocator.alloc_block(tid, "answer_chain_node") for _ in self.leaves
            ]

    def __len__(self):
        return len(self.leaves)

    def free(self, allocator, tid):
        for block in self.blocks:
            allocator.free_block(tid, block, "answer_chain_node")
        self.blocks = []


class FrameList:
    """PAS frame list of one subgoal, replaced copy-on-write.

    ``frames`` is a tuple; a completed frame, once published, is its first item.
    """

    __slots__ = ("frames",)

    def __init__(self):
        self.frames = ()

    def published(self):
        frames = self.frames
        if frames and frames[0].state == COMPLETE:
            return frames[0]
        return None

    def own(self, tid):
        for frame in self.frames:
            if frame.owner == tid:
                return frame
        return None

    def push(self, frame):
        """Prepend an evaluating frame; fails if a completed frame got published."""
        while True:
            frames = self.frames
            if frames and frames[0].state == COMPLETE:
                return False
            if compare_and_set(self, "frames", frames, (frame,) + frames):
                return True

    def publish(self, frame):
        """Move completed ``frame`` to the head; False if another was published first."""
        while True:
            frames = self.frames
            if frames and frames[0].state == COMPLETE and frames[0] is not frame:
                return False
            rest = tuple(f for f in frames if f is not frame)
            if compare_and_set(self, "frames", frames, (frame,) + rest):
                return True

    def remove(self, frame):
        while True:
            frames = self.frames
            rest = tuple(f for f in frames if f is not frame)
            if compare_and_set(self, "frames", frames, rest):
                return
