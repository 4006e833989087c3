"""Tabled evaluation over the table-space designs.

Each worker thread runs a continuation-passing resolution of its queries:

* the first call of a tabled subgoal by a worker is a *generator*: its clauses
  are resolved once and every solution is recorded as an answer;
* a variant call of an incomplete generator registers a *consumer*, which keeps
  a cursor in the answers visible to the worker and resumes its continuation
  once per answer;
* a generator that does not depend on an older incomplete generator is the
  leader of its component: consumers of the component are resumed in rounds
  until a round consumes nothing, then the whole component is completed;
* calls of completed tables read the answers directly.

Under local scheduling a new answer only goes to the table; the consumers pick
it up in the next round. Under batched scheduling the consumers of the
generator are resumed as soon as it records a new answer.

A consumer outlives the bindings under which it was created, so it stores them
and has them switched in whenever it is resumed.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

from tabkit.engine.builtins import BUILTINS
from tabkit.engine.config import EvalConfig
from tabkit.engine.modes import ModeOutcome, SubstitutionArray, mode_directed_insert
from tabkit.engine.parser import parse_term
from tabkit.exceptions import ContractViolation, ProgramError
from tabkit.pagealloc import MAIN_THREAD, HeapStats, PageAllocator
from tabkit.tablespace import AnswerResult, Census, TableStats, make_tablespace
from tabkit.tablespace.designs import PartialAnswerSharing
from tabkit.term import (
    Compound,
    Var,
    canonical_call,
    instantiate,
    resolve,
    substitution_tokens,
    term_from_tokens,
    term_tokens,
    terms_from_tokens,
    unify_all,
)
from tabkit.trie import INVALID
from tabkit.utils import thread_rng, worker_stack


log = logging.getLogger(__name__)


@dataclass
class EvalStats:
    """Counters of one evaluation.

    ``calls`` counts generators, i.e. distinct subgoals evaluated by a worker;
    ``unique`` and ``repeated`` count recorded answers found new or already
    tabled. Mode-directed answers count as unique when kept or replaced.
    """

    calls: int = 0
    unique: int = 0
    repeated: int = 0
    consumers: int = 0
    rounds: int = 0
    completions: int = 0

    @property
    def answers(self):
        return self.unique + self.repeated

    def __add__(self, other):
        return EvalStats(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )


class Consumer:
    __slots__ = ("vars", "cont", "cursor", "env", "active", "seen")

    def __init__(self, variables, cont, env=None):
        self.vars = variables
        self.cont = cont
        self.cursor = 0
        self.env = env
        self.active = False
        self.seen = None


class Generator:
    __slots__ = (
        "key",
        "entry",
        "handle",
        "goal",
        "vars",
        "array",
        "consumers",
        "dfn",
        "link",
        "index",
        "mark",
        "source",
        "completed",
    )

    def __init__(self, entry, handle, dfn, index, mark):
        self.key = handle.key
        self.entry = entry
        self.handle = handle
        self.goal, self.vars = instantiate(handle.key)
        self.array = None
        if entry.modes is not None:
            self.array = SubstitutionArray.from_goal(self.goal, entry.modes)
        self.consumers: List[Consumer] = []
        self.dfn = dfn
        self.link = dfn
        self.index = index
        self.mark = mark
        # completed frame of another thread read instead of the own answers (PAS)
        self.source = None
        self.completed = False

    def __repr__(self):
        return f"Generator({self.key}, dfn={self.dfn}, link={self.link})"


class Worker:
    """Evaluation state of one thread.

    Parameters
    ----------
    engine: Engine
        Program, configuration and table space shared by all workers.
    tid: int
        Thread id, also the bucket-array cell and allocator heap of the worker.
    """

    def __init__(self, engine, tid):
        self.engine = engine
        self.program = engine.program
        self.tablespace = engine.tablespace
        self.tid = tid
        self.batched = engine.config.scheduling == "batched"
        self.shuffle = engine.config.clause_order == "random"
        self.rng = thread_rng(engine.config.seed, tid)
        self.trail: List[Var] = []
        self.stack: List[Generator] = []
        self.generators = {}
        self.stats = EvalStats()
        self._dfn = 0
        self._pas = isinstance(self.tablespace, PartialAnswerSharing)
        self.answer_log: Optional[list] = None

    # queries

    def query(self, goal):
        """All solutions of ``goal``, as resolved copies of it."""
        if isinstance(goal, str):
            goal = parse_term(goal)
        solutions = []
        self.trail = []
        self._call(goal, lambda: solutions.append(resolve(goal)))
        self._undo(0)
        if self.stack:
            raise ContractViolation(f"query ended with incomplete generators {self.stack}")
        return solutions

    # resolution

    def _undo(self, mark):
        trail = self.trail
        while len(trail) > mark:
            trail.pop().binding = None

    def _call(self, goal, cont):
        while type(goal) is Var and goal.binding is not None:
            goal = goal.binding
        kind = type(goal)
        if kind is Compound:
            predicate = (goal.name, goal.arity)
            args = goal.args
        elif kind is str:
            predicate = (goal, 0)
            args = ()
        else:
            raise ProgramError(f"{goal!r} is not callable")
        entry = self.tablespace.entries.get(predicate)
        if entry is not None:
            return self._call_tabled(entry, goal, cont)
        if predicate == (",", 2):
            return self._call(args[0], lambda: self._call(args[1], cont))
        builtin = BUILTINS.get(predicate)
        if builtin is not None:
            mark = len(self.trail)
            if builtin(args, self.trail):
                cont()
            self._undo(mark)
            return
        self._call_facts(predicate, args, cont)
        for clause in self.program.rules.get(predicate, ()):
            self._resolve(clause, goal, cont)

    def _call_facts(self, predicate, args, cont):
        trail = self.trail
        for row in self.program.match_facts(predicate, args):
            mark = len(trail)
            if unify_all(args, row, trail):
                cont()
            self._undo(mark)

    def _resolve(self, clause, goal, cont):
        head, body = clause.rename()
        mark = len(self.trail)
        # clauses are only tried for the goal's predicate, so p and p() agree
        head_args = head.args if type(head) is Compound else ()
        goal_args = goal.args if type(goal) is Compound else ()
        if unify_all(head_args, goal_args, self.trail):
            self._solve_body(body, 0, cont)
        self._undo(mark)

    def _solve_body(self, body, i, cont):
        last = len(body) - 1
        if i > last:
            return cont()
        if i == last:
            return self._call(body[i], cont)
        self._call(body[i], lambda: self._solve_body(body, i + 1, cont))

    # tabling

    def _call_tabled(self, entry, goal, cont):
        key, variables = canonical_call(goal)
        handle = self.tablespace.subgoal_lookup_insert(entry, key, self.tid)
        if handle.complete:
            for tokens in list(self.tablespace.consume_answers(handle)):
                self._return(variables, tokens, cont)
            return
        gen = self.generators.get(key)
        if gen is not None:
            return self._consume(gen, variables, cont)
        if not handle.fresh:
            raise ContractViolation(f"thread {self.tid} holds an orphan frame of {key}")
        self._generate(entry, handle, variables, cont)

    def _snapshot(self):
        base = self.stack[0].mark if self.stack else len(self.trail)
        return [(v, v.binding) for v in self.trail[base:]]

    def _generate(self, entry, handle, variables, cont):
        self.stats.calls += 1
        self._dfn += 1
        gen = Generator(entry, handle, self._dfn, len(self.stack), len(self.trail))
        self.stack.append(gen)
        self.generators[gen.key] = gen
        caller = Consumer(variables, cont)
        if self.batched:
            caller.env = self._snapshot()
        gen.consumers.append(caller)

        clauses = self.program.clauses(gen.key.predicate)
        if self.shuffle and len(clauses) > 1:
            clauses = [clauses[i] for i in self.rng.permutation(len(clauses))]
        on_answer = lambda: self._answer(gen)  # noqa: E731
        for clause in clauses:
            self._resolve(clause, gen.goal, on_answer)

        self._drain(gen, caller, switch=False)
        if gen.link == gen.dfn:
            self._fixpoint(gen)
        elif caller.env is None:
            caller.env = self._snapshot()

    def _consume(self, gen, variables, cont):
        consumer = Consumer(variables, cont, self._snapshot())
        gen.consumers.append(consumer)
        self.stats.consumers += 1
        for other in self.stack[gen.index + 1 :]:
            if other.link > gen.link:
                other.link = gen.link
        self._drain(gen, consumer, switch=False)

    def _answer(self, gen):
        tablespace = self.tablespace
        if gen.array is not None:
            outcome, _ = mode_directed_insert(
                tablespace, gen.handle, gen.array, gen.vars, self.tid
            )
            new = outcome is not ModeOutcome.DISCARDED
            tokens = None
        else:
            tokens = substitution_tokens(gen.vars)
            result, _ = tablespace.record_answer(gen.handle, tokens, self.tid)
            new = result is AnswerResult.NEW
        if self.answer_log is not None:
            if tokens is None:
                tokens = substitution_tokens(gen.vars)
            self.answer_log.append((gen.key, tokens, new))
        if new:
            self.stats.unique += 1
            if self.batched:
                for consumer in list(gen.consumers):
                    self._drain(gen, consumer, switch=True)
        else:
            self.stats.repeated += 1

    def _leaves(self, gen):
        if gen.source is not None:
            return gen.source.answers.leaves
        return self.tablespace.answer_leaves(gen.handle)

    def _return(self, variables, tokens, cont):
        if not variables:
            return cont()
        values = terms_from_tokens(tokens, len(variables))
        trail = self.trail
        mark = len(trail)
        if unify_all(variables, values, trail):
            cont()
        self._undo(mark)

    def _switch_in(self, env):
        trail = self.trail
        current = trail[self.stack[0].mark :]
        saved = [(v, v.binding) for v in current]
        for v in current:
            v.binding = None
        mark = len(trail)
        for v, binding in env:
            v.binding = binding
            trail.append(v)
        return saved, mark

    def _switch_out(self, state):
        saved, mark = state
        self._undo(mark)
        for v, binding in saved:
            v.binding = binding

    def _drain(self, gen, consumer, switch):
        """Resume ``consumer`` on every answer past its cursor; True if any."""
        if consumer.active:
            return False
        consumer.active = True
        consumed = False
        state = self._switch_in(consumer.env) if switch else None
        try:
            leaves = self._leaves(gen)
            seen = consumer.seen
            while consumer.cursor < len(leaves):
                leaf = leaves[consumer.cursor]
                consumer.cursor += 1
                if leaf.flags & INVALID:
                    continue
                tokens = leaf.payload
                if seen is not None and tokens in seen:
                    continue
                consumed = True
                self._return(consumer.vars, tokens, consumer.cont)
        finally:
            if state is not None:
                self._switch_out(state)
            consumer.active = False
        return consumed

    def _adopt_published(self, gen):
        """Read a completed frame published by another thread from now on (PAS)."""
        published = self.tablespace.published(gen.handle)
        if published is None:
            return
        own = self.tablespace.answer_leaves(gen.handle)
        for consumer in gen.consumers:
            consumer.seen = {
                leaf.payload
                for leaf in own[: consumer.cursor]
                if not leaf.flags & INVALID
            }
            consumer.cursor = 0
        gen.source = published
        log.debug(f"thread {self.tid} switches {gen.key} to a published frame")

    def _fixpoint(self, leader):
        rounds = 0
        while True:
            rounds += 1
            progressed = False
            for gen in list(self.stack[leader.index :]):
                if self._pas and gen.source is None:
                    self._adopt_published(gen)
                for consumer in list(gen.consumers):
                    if self._drain(gen, consumer, switch=consumer.env is not None):
                        progressed = True
            if not progressed:
                break
        self.stats.rounds += rounds
        component = self.stack[leader.index :]
        del self.stack[leader.index :]
        for gen in reversed(component):
            self.tablespace.complete_subgoal(gen.handle, self.tid)
            gen.completed = True
            gen.consumers = []
            del self.generators[gen.key]
        self.stats.completions += len(component)
        log.debug(
            f"thread {self.tid} completed {len(component)} subgoals led by {leader.key} "
            f"after {rounds} rounds"
        )


class Engine:
    """
    Program, configuration and table space shared by the workers.

    Parameters
    ----------
    program: Program
        Validated on construction.
    config: None | dict | EvalConfig
        Evaluation configuration.
    """

    def __init__(self, program, config=None):
        self.config = EvalConfig.make(config)
        self.program = program.validate()
        self.allocator = PageAllocator(self.config.allocator)
        self.tablespace = make_tablespace(
            self.config.design, self.allocator, self.config.trie, self.config.scheduling
        )
        # tid -> [(subgoal key, answer tokens, new)], filled with record_answers
        self.answer_logs: Dict[int, list] = {}
        for (name, arity), modes in program.tabled.items():
            self.tablespace.register_predicate(name, arity, modes=modes)

    def worker(self, tid) -> Worker:
        worker = Worker(self, tid)
        if self.config.record_answers:
            worker.answer_log = self.answer_logs.setdefault(tid, [])
        return worker

    def abolish(self):
        self.tablespace.abolish_tables(MAIN_THREAD)


def _private_copy(goal):
    if isinstance(goal, str) and not goal.isidentifier():
        goal = parse_term(goal)
    return term_from_tokens(term_tokens(goal), fresh=True)


def run_fixpoint(
    engine,
    goals: Union[Sequence, Callable[[int, Worker], Iterable]],
    threads: Optional[int] = None,
):
    """Evaluate ``goals`` on every worker of a pool until completion.

    Parameters
    ----------
    engine: Engine
        Shared program and table space.
    goals: sequence | callable
        The queries every worker runs (each on a private copy), or a function
        ``goals(tid, worker)`` yielding the queries of one worker.
    threads: None | int
        Pool size; ``engine.config.threads`` by default.

    Returns
    -------
    results: list
        Per worker, in thread-id order: ``(solutions per query, EvalStats)``.
        Worker exceptions are raised in the calling thread.
    """
    nt = threads or engine.config.threads
    tablespace = engine.tablespace

    def work(tid):
        threading.current_thread().name = f"tabkit-worker-{tid}"
        worker = engine.worker(tid)
        tablespace.attach(tid)
        try:
            queries = goals(tid, worker) if callable(goals) else goals
            solutions = [worker.query(_private_copy(goal)) for goal in queries]
            return solutions, worker.stats
        finally:
            tablespace.detach(tid)

    with worker_stack():
        with ThreadPoolExecutor(max_workers=nt, thread_name_prefix="tabkit-worker") as pool:
            futures = [pool.submit(work, tid) for tid in range(nt)]
    return [future.result() for future in futures]


@dataclass
class SolveResult:
    """Outcome of :func:`solve`.

    ``solutions`` are the resolved query instances found by thread 0; the
    snapshots are taken once all workers finished, before the tables are
    abolished.
    """

    solutions: list
    stats: EvalStats
    thread_stats: List[EvalStats] = field(default_factory=list)
    table_stats: Optional[TableStats] = None
    census: Optional[Census] = None
    heap: Optional[HeapStats] = None
    elapsed: float = 0.0

    @property
    def answers(self):
        """Set of argument tuples of the solutions."""
        return {s.args if type(s) is Compound else () for s in self.solutions}


def solve(program, query, config=None, keep_tables=False, engine=None):
    """Evaluate ``query`` with ``config.threads`` workers.

    Parameters
    ----------
    program: Program
        The program; ignored when ``engine`` is given.
    query: str | Term
        The query every worker evaluates.
    config: None | dict | EvalConfig
        Evaluation configuration.
    keep_tables: bool
        Leave the tables in place instead of abolishing them.
    engine: None | Engine
        Reuse an engine and its tables.

    Returns
    -------
    result: SolveResult
    """
    if engine is None:
        engine = Engine(program, config)
    if isinstance(query, str):
        query = parse_term(query)
    start = time.perf_counter()
    results = run_fixpoint(engine, [query])
    elapsed = time.perf_counter() - start
    solutions = results[0][0][0]
    expected = {term_tokens(s) for s in solutions}
    for tid, (per_query, _) in enumerate(results[1:], 1):
        if {term_tokens(s) for s in per_query[0]} != expected:
            log.error(f"thread {tid} found a different answer set than thread 0")
    thread_stats = [stats for _, stats in results]
    total = EvalStats()
    for stats in thread_stats:
        total = total + stats
    result = SolveResult(
        solutions=solutions,
        stats=total,
        thread_stats=thread_stats,
        table_stats=engine.tablespace.table_stats(0),
        census=engine.tablespace.census(),
        heap=engine.allocator.heap_stats(),
        elapsed=elapsed,
    )
    if not keep_tables:
        engine.abolish()
    return result
