import unittest

import numpy as np

from tabkit.exceptions import ParameterError
from tabkit.memmodel import (
    MODEL_DESIGNS,
    MemParams,
    PredicateParams,
    census_bytes,
    check_pas_dominance,
    check_theorem1,
    check_theorem2,
    predict,
    reconcile,
    sweep,
)
from tabkit.pagealloc import PageAllocator
from tabkit.tablespace import make_tablespace
from tabkit.term import Compound, Var, canonicalize, int_token


def example():
    return MemParams(
        te=1, ba=4, sf=2, nt=4, predicates=(PredicateParams(st=10, at=(7, 7, 7)),)
    )


def random_params(rng, premise=False):
    nt = int(rng.integers(1, 65))
    nc = int(rng.integers(1, 9))
    bp = int(rng.integers(1, 17))
    if premise:
        sf_fs = int(rng.integers(0, 101))
        sf = sf_fs + bp + int(rng.integers(1, 101))
        at = tuple(int(a) for a in rng.integers(bp, 5000, size=nc))
    else:
        sf = int(rng.integers(0, 201))
        sf_fs = int(rng.integers(0, sf + 1))
        at = tuple(int(a) for a in rng.integers(0, 5000, size=nc))
    return MemParams(
        te=int(rng.integers(0, 200)),
        ba=int(rng.integers(0, 500)),
        sf=sf,
        nt=nt,
        sf_fs=sf_fs,
        se_fs=sf - sf_fs,
        bp=bp,
        predicates=(PredicateParams(st=int(rng.integers(0, 10000)), at=at),),
    )


class Test_Predict(unittest.TestCase):
    def test_worked_example(self):
        params = example()
        self.assertEqual(predict("NS", params), 153)
        self.assertEqual(predict("SS", params), 131)
        self.assertEqual(predict("CS", params), 1 + 10 + 3 * (2 + 7))

    def test_fs_and_pac(self):
        params = MemParams(
            te=48, ba=72, sf=64, nt=8, se_fs=40, sf_fs=24, bp=8,
            predicates=(PredicateParams(st=100, at=(500, 300), pc=(32, 16)),),
        )
        fs = 48 + 100 + sum(40 + 72 + 8 * (24 + 8) + a for a in (500, 300))
        self.assertEqual(predict("FS", params), fs)
        self.assertEqual(predict("PAC", params), fs + 48)

    def test_pas_kept_frames(self):
        params = MemParams(
            te=1, ba=4, sf=2, nt=4,
            predicates=(PredicateParams(st=10, at=(7, 7, 7), nt_calls=(1, 4, 2)),),
        )
        self.assertEqual(predict("PAS", params), 1 + 10 + (1 + 4 + 2) * 9)
        self.assertTrue(check_pas_dominance(params))
        default = example()
        self.assertEqual(predict("PAS", default), 1 + 10 + 3 * 4 * 9)

    def test_sum_over_predicates(self):
        one = PredicateParams(st=10, at=(7,))
        two = PredicateParams(st=20, at=(5, 5))
        both = MemParams(te=1, ba=4, sf=2, nt=3, predicates=(one, two))
        for design in MODEL_DESIGNS:
            split = sum(
                predict(design, MemParams(te=1, ba=4, sf=2, nt=3, predicates=(p,)))
                for p in (one, two)
            )
            self.assertEqual(predict(design, both), split, design)

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            MemParams(te=1, ba=1, sf=2, nt=0)
        with self.assertRaises(ParameterError):
            MemParams(te=1, ba=1, sf=10, nt=1, se_fs=4, sf_fs=4)
        with self.assertRaises(ParameterError):
            MemParams(te=1, ba=1, sf=2, nt=2, predicates=(PredicateParams(1, (1,), nt_calls=(3,)),))
        with self.assertRaises(ParameterError):
            PredicateParams(st=-1, at=())
        with self.assertRaises(ParameterError):
            PredicateParams(st=1, at=(1, 2), pc=(0,))
        with self.assertRaises(ParameterError):
            predict("XS", example())

    def test_no_calls(self):
        params = MemParams(te=1, ba=4, sf=2, nt=4, predicates=(PredicateParams(st=10, at=()),))
        self.assertEqual(predict("NS", params), 1 + 4 + 4 * 10)
        with self.assertRaises(ParameterError):
            check_theorem1(params)


class Test_Theorems(unittest.TestCase):
    def test_theorem1_random(self):
        rng = np.random.default_rng(42)
        for _ in range(10_000):
            params = random_params(rng)
            check = check_theorem1(params)
            self.assertTrue(check.holds_iff, params)
            self.assertEqual(check.difference, predict("SS", params) - predict("NS", params))

    def test_theorem2_random(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            params = random_params(rng, premise=True)
            check = check_theorem2(params)
            self.assertTrue(check.premise)
            self.assertTrue(check.holds, params)
            if params.nt > 1:
                self.assertLess(check.difference, 0)

    def test_corollaries(self):
        # a single call per predicate: SS never above NS
        params = MemParams(te=5, ba=90, sf=64, nt=3, predicates=(PredicateParams(0, (100,)),))
        self.assertTrue(check_theorem1(params).holds_lhs)
        # one thread and several calls: SS pays the extra bucket arrays
        params = MemParams(te=5, ba=90, sf=64, nt=1, predicates=(PredicateParams(50, (9, 9)),))
        check = check_theorem1(params)
        self.assertFalse(check.holds_lhs)
        self.assertEqual(check.difference, 90)
        # one thread: FS above SS by the back pointer of each call
        params = MemParams(
            te=5, ba=90, sf=64, nt=1, se_fs=40, sf_fs=24, bp=8,
            predicates=(PredicateParams(50, (9, 9)),),
        )
        check = check_theorem2(params)
        self.assertTrue(check.premise)
        self.assertTrue(check.holds)
        self.assertEqual(check.difference, 16)

    def test_theorem2_premise_reported(self):
        params = MemParams(
            te=1, ba=1, sf=10, nt=4, se_fs=2, sf_fs=8, bp=8,
            predicates=(PredicateParams(1, (100,)),),
        )
        self.assertFalse(check_theorem2(params).premise)


class Test_Sweep(unittest.TestCase):
    def test_example_row(self):
        table = sweep({"te": 1, "ba": 4, "sf": 2, "se_fs": 1, "st": 10, "at": 7, "nt": 4, "nc": 3})
        self.assertEqual(len(table), 1)
        row = table.iloc[0]
        self.assertEqual(row["mu_ns"], 153)
        self.assertEqual(row["mu_ss"], 131)
        self.assertTrue(row["theorem1_iff"])

    def test_grid(self):
        table = sweep({"nt": [1, 2, 4, 8], "nc": [1, 3], "st": [0, 500], "at": 64})
        self.assertEqual(len(table), 16)
        for design in MODEL_DESIGNS:
            self.assertIn(f"mu_{design.lower()}", table)
        self.assertTrue(table["theorem1_iff"].all())
        self.assertTrue(table["theorem2_premise"].all())
        self.assertTrue(table["theorem2_holds"].all())

    def test_unknown_key(self):
        with self.assertRaises(ParameterError):
            sweep({"nt": [1], "threads": [2]})


class Test_Reconcile(unittest.TestCase):
    def fill(self, design, threads):
        allocator = PageAllocator()
        space = make_tablespace(design, allocator=allocator)
        entry = space.register_predicate("path", 2)
        for tid in range(threads):
            space.attach(tid)
            for source in range(3):
                key = canonicalize(Compound("path", [source, Var(0)]))
                handle = space.subgoal_lookup_insert(entry, key, tid)
                if handle.complete:
                    continue
                for value in range(10):
                    space.record_answer(handle, (int_token(value),), tid)
                space.complete_subgoal(handle, tid)
        for tid in range(threads):
            space.detach(tid)
        return space

    def test_census_matches_allocator(self):
        for design in ("NS", "SS", "FS", "PAS", "PAC"):
            for threads in (1, 4):
                space = self.fill(design, threads)
                heap = space.allocator.heap_stats()
                census = space.census()
                self.assertEqual(census_bytes(census), heap.live_bytes(), (design, threads))
                report = reconcile(design, census, space.sizes, heap, threads)
                self.assertEqual(report.measured, heap.live_bytes())
                self.assertIn("table_entry", report.measured_by_type)

    def test_worst_case_delta(self):
        for design in ("NS", "SS", "FS", "PAS", "PAC"):
            space = self.fill(design, 4)
            report = reconcile(design, space.census(), space.sizes, threads=4)
            self.assertEqual(report.delta, 0, design)


if __name__ == "__main__":
    unittest.main()
