import os
import unittest

import numpy as np

from tabkit.datasets import EdgeConfig, gen_edges, reachability_closure
from tabkit.engine import Engine, EvalConfig, Program, parse_term, run_fixpoint, solve
from tabkit.exceptions import ArithmeticTypeError, ConfigurationError, ProgramError
from tabkit.tablespace import DESIGNS
from tabkit.term import Compound, Var


FULL_SCALE = os.environ.get("TABKIT_FULL_SCALE") == "1"


def contexts(threads=(1, 4)):
    for design, cls in DESIGNS.items():
        for scheduling in ("local", "batched"):
            if scheduling == "batched" and not cls.supports_batched:
                continue
            for nt in threads:
                yield EvalConfig(design=design, scheduling=scheduling, threads=nt, seed=7)


def path_program(direction, edges):
    program = Program.from_resource(f"path_{direction}")
    program.add_facts("edge", edges)
    return program


def chain(n):
    src = np.arange(1, n)
    return np.stack([src, src + 1], axis=1)


def random_graph(seed, n_nodes=12, n_edges=20):
    rng = np.random.default_rng(seed)
    edges = rng.integers(1, n_nodes, size=(n_edges, 2), endpoint=True)
    return np.unique(edges, axis=0)


class Test_EvalConfig(unittest.TestCase):
    def test_defaults(self):
        config = EvalConfig.make()
        self.assertEqual((config.design, config.scheduling, config.threads), ("NS", "local", 1))
        self.assertEqual(EvalConfig.make({"design": "pac"}).design, "PAC")

    def test_invalid(self):
        with self.assertRaises(ConfigurationError):
            EvalConfig(design="CS")
        with self.assertRaises(ConfigurationError):
            EvalConfig(design="FS", scheduling="batched")
        with self.assertRaises(ConfigurationError):
            EvalConfig(threads=0)
        with self.assertRaises(ConfigurationError):
            EvalConfig(threads=1025)
        with self.assertRaises(ConfigurationError):
            EvalConfig(clause_order="reversed")
        with self.assertRaises(ConfigurationError):
            EvalConfig.make(3)


class Test_Program(unittest.TestCase):
    def test_parse_term(self):
        term = parse_term("f(X, g(1, a), X, _)")
        self.assertEqual(term.name, "f")
        self.assertIs(term.args[0], term.args[2])
        self.assertEqual(term.args[1], Compound("g", [1, "a"]))
        self.assertIsNot(term.args[3], term.args[0])

    def test_operators(self):
        term = parse_term("P is P0 + V * 2 - 1")
        self.assertEqual(term.name, "is")
        self.assertEqual(term.args[1].name, "-")
        self.assertEqual(term.args[1].args[0].args[1], Compound("*", [Var(2), 2]))
        self.assertEqual(parse_term("[1, 2 | T]").name, ".")
        self.assertEqual(parse_term("f(-3)").args, (-3,))

    def test_consult(self):
        program = Program(
            """
            % comment
            :- table path/2.
            :- table ks(index, index, max).
            edge(1, 2).
            path(X, Z) :- edge(X, Z).
            """
        )
        self.assertEqual(program.tabled, {("path", 2): None, ("ks", 3): ("index", "index", "max")})
        self.assertEqual(program.facts[("edge", 2)], [(1, 2)])
        self.assertEqual(len(program.rules[("path", 2)]), 1)

    def test_errors(self):
        with self.assertRaises(ProgramError):
            Program(":- dynamic p/1.")
        with self.assertRaises(ProgramError):
            Program(":- table p(index, median).")
        with self.assertRaises(ProgramError):
            Program("p(X) :- q(X).").validate()
        with self.assertRaises(ProgramError):
            Program("X is 1.")
        with self.assertRaises(ProgramError):
            Program("p(X :- q.")

    def test_fact_index(self):
        program = Program()
        program.add_facts("edge", [(1, 2), (1, 3), (2, 3)])
        self.assertEqual(program.match_facts(("edge", 2), (1, Var(0))), [(1, 2), (1, 3)])
        self.assertEqual(program.match_facts(("edge", 2), (Var(0), 3)), [(1, 3), (2, 3)])
        self.assertEqual(program.match_facts(("edge", 2), (4, Var(0))), ())


class Test_Solve(unittest.TestCase):
    def test_cycle_of_three(self):
        edges = [(1, 2), (2, 3), (3, 1)]
        expected = reachability_closure(edges)
        self.assertEqual(len(expected), 9)
        for config in contexts():
            result = solve(path_program("left", edges), "path(X, Y)", config)
            self.assertEqual(result.answers, expected, config)

    def test_left_statistics(self):
        for scheduling in ("local", "batched"):
            config = EvalConfig(scheduling=scheduling)
            result = solve(path_program("left", gen_edges("cycle:3")), "path(X, Y)", config)
            self.assertEqual(result.stats.calls, 1)
            self.assertEqual(result.stats.unique, 9)
            self.assertEqual(result.stats.repeated, 3)
            self.assertEqual(result.table_stats.answer_trie.leaves, 9)
            self.assertEqual(result.table_stats.answer_trie.nodes, 13)
            self.assertEqual(result.table_stats.subgoals, 1)

    def test_right_statistics(self):
        for design in DESIGNS:
            result = solve(
                path_program("right", gen_edges("cycle:3")),
                "path(X, Y)",
                {"design": design},
            )
            self.assertEqual(result.stats.calls, 4, design)
            self.assertEqual(result.stats.unique, 18, design)
            self.assertEqual(len(result.answers), 9, design)

    def test_chain(self):
        edges = chain(6)
        for direction in ("left", "right"):
            result = solve(path_program(direction, edges), "path(X, Y)")
            self.assertEqual(len(result.answers), 15)
            self.assertLessEqual(result.stats.rounds, 6 * result.stats.completions)

    def test_bound_query(self):
        program = path_program("left", chain(6))
        result = solve(program, "path(2, Y)")
        self.assertEqual(result.answers, {(2, y) for y in range(3, 7)})
        self.assertEqual(len(solve(program, "path(1, 6)").solutions), 1)
        self.assertEqual(solve(program, "path(6, 1)").solutions, [])

    def test_non_recursive(self):
        program = Program(":- table p/1.\nq(1).\nq(2).\np(X) :- q(X).")
        result = solve(program, "p(X)")
        self.assertEqual(result.answers, {(1,), (2,)})
        self.assertEqual(result.stats.rounds, 1)

    def test_zero_arity_goals(self):
        program = Program(":- table t/0.\nok.\nyes :- ok.\nt :- yes.")
        for config in contexts(threads=(1, 2)):
            for name in ("yes", "t"):
                self.assertEqual(len(solve(program, name, config).solutions), 1, config)
                result = solve(program, Compound(name, []), config)
                self.assertEqual(result.answers, {()}, (name, config))

    def test_builtins(self):
        program = Program(
            """
            :- table sq/2.
            n(1). n(2). n(3).
            sq(X, Y) :- n(X), X =\\= 2, Y is X * X.
            """
        )
        self.assertEqual(solve(program, "sq(X, Y)").answers, {(1, 1), (3, 9)})
        bad = Program(":- table p/1.\np(X) :- X is foo + 1.")
        with self.assertRaises(ArithmeticTypeError):
            solve(bad, "p(X)")

    def test_statistics_integrity(self):
        for design in DESIGNS:
            result = solve(path_program("left", random_graph(3)), "path(X, Y)", {"design": design})
            stats = result.stats
            self.assertEqual(stats.unique + stats.repeated, stats.answers)
            self.assertEqual(stats.unique, result.table_stats.answer_trie.leaves, design)

    def test_closure_oracle(self):
        threads = (1, 2, 4, 8)
        for seed in range(50):
            rng = np.random.default_rng(1000 + seed)
            n_nodes = int(rng.integers(4, 25))
            edges = random_graph(seed, n_nodes, int(rng.integers(n_nodes, 3 * n_nodes)))
            expected = reachability_closure(edges)
            # every seed in full, a rotating thread count otherwise
            grid = threads if FULL_SCALE else threads[seed % 4 : seed % 4 + 1]
            for direction in ("left", "right"):
                program = path_program(direction, edges)
                for config in contexts(threads=grid):
                    result = solve(program, "path(X, Y)", config)
                    self.assertEqual(result.answers, expected, (seed, direction, config))

    def test_random_clause_order(self):
        edges = random_graph(11)
        expected = reachability_closure(edges)
        for seed in range(3):
            config = EvalConfig(clause_order="random", seed=seed, threads=2)
            result = solve(path_program("left", edges), "path(X, Y)", config)
            self.assertEqual(result.answers, expected)

    def test_tables_abolished(self):
        for config in contexts():
            engine = Engine(path_program("right", random_graph(5)), config)
            solve(None, "path(X, Y)", engine=engine, keep_tables=True)
            self.assertGreater(engine.allocator.heap_stats().live_blocks(), 0)
            engine.abolish()
            self.assertEqual(engine.allocator.heap_stats().live_blocks(), 0, config)
            self.assertEqual(engine.tablespace.entries, {})


class Test_RunFixpoint(unittest.TestCase):
    def test_same_query_on_every_worker(self):
        engine = Engine(path_program("left", chain(6)), {"design": "SS", "threads": 8})
        results = run_fixpoint(engine, ["path(X, Y)"])
        self.assertEqual(len(results), 8)
        for solutions, stats in results:
            self.assertEqual(len(solutions[0]), 15)
            self.assertEqual(stats.calls, 1)
        engine.abolish()

    def test_per_worker_queries(self):
        engine = Engine(path_program("right", chain(6)), {"design": "FS", "threads": 3})

        def goals(tid, worker):
            return [Compound("path", [tid + 1, Var(0)])]

        results = run_fixpoint(engine, goals)
        for tid, (solutions, _) in enumerate(results):
            self.assertEqual(len(solutions[0]), 5 - tid)
        engine.abolish()
        self.assertEqual(engine.allocator.heap_stats().live_blocks(), 0)

    def test_worker_error_raised(self):
        engine = Engine(Program(":- table p/1.\np(X) :- X is a."), {"threads": 2})
        with self.assertRaises(ArithmeticTypeError):
            run_fixpoint(engine, ["p(X)"])


class Test_PAC(unittest.TestCase):
    def check_answer_logs(self, engine, n_answers):
        evaluated = 0
        for tid, log in engine.answer_logs.items():
            seen = set()
            for key, tokens, new in log:
                self.assertEqual(new, (key, tokens) not in seen, (tid, key, tokens))
                seen.add((key, tokens))
            if log:
                evaluated += 1
                self.assertEqual(len(seen), n_answers, tid)
                self.assertEqual(sum(1 for _, _, new in log if new), n_answers, tid)
        self.assertGreater(evaluated, 0)

    def test_new_per_thread_under_batched(self):
        for seed in (8, 9, 10):
            edges = random_graph(seed)
            expected = reachability_closure(edges)
            config = EvalConfig(
                design="PAC", scheduling="batched", threads=4, seed=1, record_answers=True
            )
            engine = Engine(path_program("left", edges), config)
            result = solve(None, "path(X, Y)", engine=engine)
            self.assertEqual(result.answers, expected)
            self.check_answer_logs(engine, len(expected))
            for tid, stats in enumerate(result.thread_stats):
                log = engine.answer_logs.get(tid, [])
                self.assertEqual(stats.unique, sum(1 for _, _, new in log if new))
                self.assertEqual(stats.repeated, sum(1 for _, _, new in log if not new))

    def test_answer_log_off_by_default(self):
        engine = Engine(path_program("left", chain(4)), {"design": "PAC", "threads": 2})
        solve(None, "path(X, Y)", engine=engine)
        self.assertEqual(engine.answer_logs, {})

    def test_fs_shares_new(self):
        edges = random_graph(8)
        expected = reachability_closure(edges)
        config = EvalConfig(design="FS", threads=4)
        result = solve(path_program("left", edges), "path(X, Y)", config)
        self.assertEqual(sum(s.unique for s in result.thread_stats), len(expected))


@unittest.skipUnless(FULL_SCALE, "set TABKIT_FULL_SCALE=1 for the full-size counts")
class Test_FullScale(unittest.TestCase):
    def test_left_cycle(self):
        result = solve(path_program("left", gen_edges("cycle:2000")), "path(X, Y)")
        self.assertEqual(result.stats.calls, 1)
        self.assertEqual(result.stats.unique, 4_000_000)
        self.assertEqual(result.stats.repeated, 2_000)
        self.assertEqual(result.table_stats.answer_trie.nodes, 4_002_001)
        # single worker, one generator and four million answers
        self.assertLess(result.elapsed, 120.0)

    def test_left_grid(self):
        result = solve(path_program("left", gen_edges("grid:35")), "path(X, Y)")
        self.assertEqual(result.stats.unique, 1_500_625)

    def test_right_cycle(self):
        result = solve(path_program("right", gen_edges("cycle:2000")), "path(X, Y)")
        self.assertEqual(result.stats.calls, 2_001)
        self.assertEqual(result.stats.unique, 8_000_000)

    def test_right_btree(self):
        config = EdgeConfig("btree", 17)
        result = solve(path_program("right", gen_edges(config)), "path(X, Y)")
        self.assertEqual(result.stats.calls, 131_071)


if __name__ == "__main__":
    unittest.main()
