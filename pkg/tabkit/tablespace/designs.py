"""The five table-space designs.

=====  ===================  ==================  ======================
name   subgoal trie         subgoal frame        answer trie
=====  ===================  ==================  ======================
NS     private per thread   private              private
SS     shared               private (BA cell)    private
FS     shared               shared entry +       shared
                            private frame
PAS    shared               private, completed   private, shared once
                            one shared           completed
PAC    as FS                as FS + private      shared, answers
                            answer chain         propagated per thread
=====  ===================  ==================  ======================
"""

import logging

from tabkit.exceptions import ConfigurationError
from tabkit.tablespace.base import (
    NO_BINDINGS,
    AnswerResult,
    PredicateCensus,
    SubgoalCensus,
    SubgoalHandle,
    TableSpace,
)
from tabkit.tablespace.buckets import BucketArray, check_thread
from tabkit.tablespace.frames import (
    COMPLETE,
    AnswerChain,
    FrameList,
    PublicChain,
    SubgoalEntry,
)
from tabkit.trie import Trie
from tabkit.trie.atomic import compare_and_set


log = logging.getLogger(__name__)


def _leaf_payload(leaf, factory, discard):
    """Install ``factory()`` as the payload of a shared subgoal leaf once."""
    payload = leaf.payload
    if payload is None:
        fresh = factory()
        if compare_and_set(leaf, "payload", None, fresh):
            return fresh
        discard(fresh)
        payload = leaf.payload
    return payload


class _PrivateAnswers(TableSpace):
    """Designs whose frames own a private answer trie (NS, SS, PAS)."""

    def record_answer(self, handle, tokens, tid):
        self._check_recordable(handle)
        tokens = tokens or NO_BINDINGS
        leaf, inserted = handle.frame.answers.check_insert(tokens, tid, payload=tokens)
        return (AnswerResult.NEW if inserted else AnswerResult.REPEATED), leaf

    def complete_subgoal(self, handle, tid):
        frame = handle.frame
        frame.answers.purge_invalid(tid)
        frame.state = COMPLETE

    def answer_leaves(self, handle):
        return handle.frame.answers.leaves

    def _subgoal_census(self, key, frames):
        return SubgoalCensus(
            key=key,
            frames=len(frames),
            frame_bytes=self.sizes["subgoal_frame"],
            answer_tries=[frame.answers.bytes(self.sizes) for frame in frames],
        )


class NoSharing(_PrivateAnswers):
    """NS: every thread has its own subgoal trie, frames and answer tries."""

    design = "NS"

    def _new_root(self, tid):
        return BucketArray(self.allocator, tid)

    def _thread_trie(self, entry, tid):
        trie = entry.root.get(tid)
        if trie is None:
            trie = Trie("subgoal_trie_node", self.allocator, self.trie_config, concurrent=False)
            entry.root.set(tid, trie)
        return trie

    def subgoal_lookup_insert(self, entry, key, tid):
        check_thread(tid)
        trie = self._thread_trie(entry, tid)
        leaf, _ = trie.check_insert(self._subgoal_path(key), tid)
        frame = leaf.payload
        fresh = frame is None
        if fresh:
            frame = leaf.payload = self._new_frame(key, tid)
        return SubgoalHandle(entry, key, tid, frame, fresh)

    def _free_entry(self, entry, tid):
        for _, trie in entry.root.items():
            for leaf in trie.leaves:
                self._free_frame(leaf.payload, tid)
            trie.free_all(tid)
        entry.root.free(tid)

    def _census_entry(self, entry):
        census = PredicateCensus(
            entry.name,
            entry.arity,
            te_bytes=self.sizes["table_entry"],
            ba_bytes=entry.root.bytes(self.sizes),
        )
        by_key = {}
        for _, trie in entry.root.items():
            census.subgoal_tries.append(trie.bytes(self.sizes))
            for leaf in trie.leaves:
                by_key.setdefault(leaf.payload.key, []).append(leaf.payload)
        census.subgoals = [self._subgoal_census(k, f) for k, f in by_key.items()]
        return census

    def _visible_tries(self, entry, tid):
        trie = entry.root.get(tid)
        if trie is None:
            return [], []
        return [trie], [leaf.payload.answers for leaf in trie.leaves]


class _SharedSubgoals(TableSpace):
    """Designs with one concurrent subgoal trie per predicate."""

    def _new_root(self, tid):
        return Trie("subgoal_trie_node", self.allocator, self.trie_config, concurrent=True)

    def _subgoal_leaf(self, entry, key, tid):
        check_thread(tid)
        leaf, _ = entry.root.check_insert(self._subgoal_path(key), tid)
        return leaf

    def _free_entry(self, entry, tid):
        for leaf in entry.root.leaves:
            self._free_subgoal(leaf.payload, tid)
        entry.root.free_all(tid)

    def _census_entry(self, entry):
        census = PredicateCensus(entry.name, entry.arity, te_bytes=self.sizes["table_entry"])
        census.subgoal_tries.append(entry.root.bytes(self.sizes))
        census.subgoals = [self._census_subgoal(leaf.payload) for leaf in entry.root.leaves]
        return census


class SubgoalSharing(_SharedSubgoals, _PrivateAnswers):
    """SS: shared subgoal trie, per-thread frames reached through a bucket array."""

    design = "SS"

    def subgoal_lookup_insert(self, entry, key, tid):
        leaf = self._subgoal_leaf(entry, key, tid)
        buckets = _leaf_payload(
            leaf, lambda: BucketArray(self.allocator, tid), lambda ba: ba.free(tid)
        )
        frame = buckets.get(tid)
        fresh = frame is None
        if fresh:
            frame = self._new_frame(key, tid)
            buckets.set(tid, frame)
        return SubgoalHandle(entry, key, tid, frame, fresh)

    def _free_subgoal(self, buckets, tid):
        for frame in buckets.values():
            self._free_frame(frame, tid)
        buckets.free(tid)

    def _census_subgoal(self, buckets):
        frames = buckets.values()
        census = self._subgoal_census(frames[0].key, frames)
        census.ba_bytes = buckets.bytes(self.sizes)
        return census

    def _visible_tries(self, entry, tid):
        answers = []
        for leaf in entry.root.leaves:
            frame = leaf.payload.get(tid)
            if frame is not None:
                answers.append(frame.answers)
        return [entry.root], answers


class PartialAnswerSharing(_SharedSubgoals, _PrivateAnswers):
    """PAS: private answer tries until completion; the first completed one is shared.

    Lookup returns a published completed frame when there is one, without
    allocating anything; otherwise the thread evaluates in a private frame.
    A thread completing after another published discards its private frame.
    """

    design = "PAS"

    def subgoal_lookup_insert(self, entry, key, tid):
        leaf = self._subgoal_leaf(entry, key, tid)
        holder = _leaf_payload(leaf, FrameList, lambda _: None)
        while True:
            published = holder.published()
            if published is not None:
                return SubgoalHandle(entry, key, tid, published, False)
            own = holder.own(tid)
            if own is not None:
                return SubgoalHandle(entry, key, tid, own, False)
            frame = self._new_frame(key, tid, entry=holder)
            if holder.push(frame):
                return SubgoalHandle(entry, key, tid, frame, True)
            self._free_frame(frame, tid)

    def published(self, handle):
        """Completed frame of another thread for the handle's subgoal, if any."""
        published = handle.frame.entry.published()
        if published is handle.frame:
            return None
        return published

    def complete_subgoal(self, handle, tid):
        frame = handle.frame
        if frame.owner != tid:
            return
        super().complete_subgoal(handle, tid)
        holder = frame.entry
        if holder.publish(frame):
            log.debug(f"thread {tid} published completed frame of {frame.key}")
            return
        holder.remove(frame)
        self._free_frame(frame, tid)
        handle.frame = holder.published()
        log.debug(f"thread {tid} discarded its frame of {frame.key}")

    def _free_subgoal(self, holder, tid):
        for frame in holder.frames:
            self._free_frame(frame, tid)
        holder.frames = ()

    def _census_subgoal(self, holder):
        frames = list(holder.frames)
        return self._subgoal_census(frames[0].key, frames)

    def _visible_tries(self, entry, tid):
        answers = []
        for leaf in entry.root.leaves:
            frame = leaf.payload.published() or leaf.payload.own(tid)
            if frame is not None:
                answers.append(frame.answers)
        return [entry.root], answers


class FullSharing(_SharedSubgoals):
    """FS: one subgoal entry and one concurrent answer trie per subgoal.

    Threads keep a small private frame pointing back to the entry. Whether an
    answer is new is decided by the shared trie, so a thread cannot tell the
    answers it has not seen yet from those found by others: local scheduling
    only, and no mode-directed tables.
    """

    design = "FS"
    supports_batched = False
    supports_modes = False

    def _new_entry(self, key, tid):
        answers = Trie("answer_trie_node", self.allocator, self.trie_config, concurrent=True)
        block = self.allocator.alloc_block(tid, "subgoal_entry")
        return SubgoalEntry(key, answers, BucketArray(self.allocator, tid), block)

    def _drop_entry(self, entry, tid):
        entry.frames.free(tid)
        self.allocator.free_block(tid, entry.block, "subgoal_entry")

    def subgoal_lookup_insert(self, entry, key, tid):
        leaf = self._subgoal_leaf(entry, key, tid)
        shared = _leaf_payload(
            leaf, lambda: self._new_entry(key, tid), lambda se: self._drop_entry(se, tid)
        )
        frame = shared.frames.get(tid)
        fresh = False
        if frame is None:
            frame = self._new_frame(key, tid, "subgoal_frame_fs", private=False, entry=shared)
            if shared.complete:
                frame.state = COMPLETE
            else:
                fresh = True
                self._init_frame(frame)
            shared.frames.set(tid, frame)
        return SubgoalHandle(entry, key, tid, frame, fresh)

    def _init_frame(self, frame):
        pass

    def record_answer(self, handle, tokens, tid):
        self._check_recordable(handle)
        tokens = tokens or NO_BINDINGS
        leaf, inserted = handle.frame.entry.answers.check_insert(tokens, tid, payload=tokens)
        return (AnswerResult.NEW if inserted else AnswerResult.REPEATED), leaf

    def complete_subgoal(self, handle, tid):
        handle.frame.state = COMPLETE
        handle.frame.entry.complete = True

    def answer_leaves(self, handle):
        return handle.frame.entry.answers.leaves

    def _free_subgoal(self, shared, tid):
        for frame in shared.frames.values():
            self._free_frame(frame, tid)
        shared.answers.free_all(tid)
        if shared.public_chain is not None:
            shared.public_chain.free(self.allocator, tid)
            shared.public_chain = None
        self._drop_entry(shared, tid)

    def _census_subgoal(self, shared):
        frames = shared.frames.values()
        chain = 0
        if shared.public_chain is not None:
            chain = len(shared.public_chain) * self.sizes["answer_chain_node"]
        return SubgoalCensus(
            key=shared.key,
            frames=len(frames),
            frame_bytes=self.sizes["subgoal_frame_fs"],
            answer_tries=[shared.answers.bytes(self.sizes)],
            entry_bytes=self.sizes["subgoal_entry"],
            ba_bytes=shared.frames.bytes(self.sizes),
            chain_bytes=chain,
        )

    def _visible_tries(self, entry, tid):
        return [entry.root], [leaf.payload.answers for leaf in entry.root.leaves]


class PrivateAnswerChaining(FullSharing):
    """PAC: FS representation, with answer propagation kept per thread.

    Each thread chains the shared leaves it derived itself, so an answer is new
    for a thread the first time that thread derives it. At completion one thread
    builds the public chain of the whole answer trie and every thread drops its
    private chain.
    """

    design = "PAC"
    supports_batched = True

    def _init_frame(self, frame):
        frame.chain = AnswerChain(self.allocator, w=self.trie_config.w)

    def record_answer(self, handle, tokens, tid):
        self._check_recordable(handle)
        tokens = tokens or NO_BINDINGS
        frame = handle.frame
        leaf, _ = frame.entry.answers.check_insert(tokens, tid, payload=tokens)
        new = frame.chain.add(leaf, tid)
        return (AnswerResult.NEW if new else AnswerResult.REPEATED), leaf

    def complete_subgoal(self, handle, tid):
        frame = handle.frame
        shared = frame.entry
        with shared.lock:
            if shared.public_chain is None:
                shared.public_chain = PublicChain(shared.answers, self.allocator, tid)
                log.debug(
                    f"thread {tid} chained {len(shared.public_chain)} answers of {frame.key}"
                )
            shared.complete = True
        frame.state = COMPLETE
        if frame.chain is not None:
            frame.chain.free(tid)
            frame.chain = None

    def answer_leaves(self, handle):
        frame = handle.frame
        if frame.chain is not None:
            return frame.chain.leaves
        return frame.entry.public_chain.leaves


DESIGNS = {
    "NS": NoSharing,
    "SS": SubgoalSharing,
    "FS": FullSharing,
    "PAS": PartialAnswerSharing,
    "PAC": PrivateAnswerChaining,
}


def make_tablespace(design, allocator=None, trie_config=None, scheduling="local"):
    """Instantiate the table space of ``design`` (case-insensitive)."""
    try:
        cls = DESIGNS[design.upper()]
    except KeyError:
        raise ConfigurationError(f"Unknown design {design}, use one of {list(DESIGNS)}")
    return cls(allocator, trie_config, scheduling)
