import os
import shutil
import tempfile
import unittest

import matplotlib
import numpy as np
import pandas as pd

from tabkit.analysis import analyze, overhead_report
from tabkit.analysis.results import Results, get_config_digest
from tabkit.evaluations import PathEvaluation
from tabkit.exceptions import MissingBaseRunError


matplotlib.use("Agg")


def to_result_input(benchmark, design, scheduling="local", threads=1, time=1.0, repeat=0):
    return {
        "benchmark": benchmark,
        "design": design,
        "scheduling": scheduling,
        "threads": threads,
        "time": time,
        "calls": 1,
        "unique": 9,
        "repeated": 3,
        "subgoal_nodes": 2,
        "answer_nodes": 13,
        "live_bytes": 1024,
        "predicted_bytes": 1024,
        "result": 9,
        "repeat": repeat,
    }


def runs(rows):
    return pd.DataFrame([to_result_input(*row) for row in rows])


class Test_Results(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.obj = Results(PathEvaluation, suffix="test", hdf5_path=self.tmp)

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_digest(self):
        self.assertEqual(get_config_digest("ns", "local", 1), get_config_digest("NS", "local", 1))
        self.assertNotEqual(get_config_digest("NS", "local", 1), get_config_digest("NS", "local", 2))

    def test_store(self):
        self.obj.add([to_result_input("a", "NS", repeat=i, time=0.5 + i) for i in range(3)])
        self.obj.add(to_result_input("a", "PAC", "batched", 4))
        df = self.obj.to_dataframe()
        self.assertEqual(len(df), 4)
        ns = df[df.design == "NS"].sort_values("repeat")
        self.assertEqual(list(ns.time), [0.5, 1.5, 2.5])
        self.assertEqual(list(ns.repeat), ["0", "1", "2"])
        pac = df[df.design == "PAC"].iloc[0]
        self.assertEqual((pac.scheduling, pac.threads), ("batched", 4))
        self.assertEqual(pac.answer_nodes, 13)

    def test_missing_values(self):
        row = to_result_input("a", "FS")
        row["predicted_bytes"] = None
        self.obj.add(row)
        self.assertTrue(np.isnan(self.obj.to_dataframe().predicted_bytes[0]))

    def test_already_computed(self):
        self.assertFalse(self.obj.already_computed("a", "NS", "local", 1))
        self.obj.add(to_result_input("a", "NS"))
        self.assertTrue(self.obj.already_computed("a", "NS", "local", 1))
        self.assertFalse(self.obj.already_computed("a", "NS", "local", 2))
        self.assertFalse(self.obj.already_computed("b", "NS", "local", 1))

    def test_overwrite(self):
        self.obj.add(to_result_input("a", "NS"))
        fresh = Results(PathEvaluation, suffix="test", overwrite=True, hdf5_path=self.tmp)
        self.assertEqual(len(fresh.to_dataframe()), 0)

    def test_bad_input(self):
        with self.assertRaises(ValueError):
            self.obj.add("a")
        with self.assertRaises(ValueError):
            Results(dict, hdf5_path=self.tmp)


class Test_Overhead(unittest.TestCase):
    def test_same_as_base(self):
        report = overhead_report(runs([("a", "NS", "local", 1, 3.0)]))
        self.assertEqual(report.ratios.overhead.tolist(), [1.0])

    def test_constant_ratio(self):
        df = runs(
            [
                ("a", "NS", "local", 1, 1.0),
                ("b", "NS", "local", 1, 2.0),
                ("a", "PAC", "local", 8, 2.0),
                ("b", "PAC", "local", 8, 4.0),
            ]
        )
        summary = overhead_report(df).summary
        row = summary[(summary.design == "PAC") & (summary.threads == 8)].iloc[0]
        self.assertEqual((row["min"], row["avg"], row["max"]), (2.0, 2.0, 2.0))
        self.assertEqual(row["std"], 0.0)
        self.assertEqual(row["n"], 2)

    def test_summary_order(self):
        df = runs(
            [
                ("a", "NS", "local", 1, 1.0),
                ("b", "NS", "local", 1, 1.0),
                ("c", "NS", "local", 1, 4.0),
                ("a", "SS", "local", 4, 1.5),
                ("b", "SS", "local", 4, 3.0),
                ("c", "SS", "local", 4, 4.0),
            ]
        )
        for _, row in overhead_report(df).summary.iterrows():
            self.assertLessEqual(row["min"], row["avg"])
            self.assertLessEqual(row["avg"], row["max"])
        ss = overhead_report(df).summary.query("design == 'SS'").iloc[0]
        self.assertAlmostEqual(ss["avg"], (1.5 + 3.0 + 1.0) / 3)
        self.assertAlmostEqual(ss["std"], np.std([1.5, 3.0, 1.0]))

    def test_repetitions_averaged(self):
        df = runs(
            [
                ("a", "NS", "local", 1, 1.0, 0),
                ("a", "NS", "local", 1, 3.0, 1),
                ("a", "FS", "local", 2, 4.0, 0),
            ]
        )
        ratios = overhead_report(df).ratios
        self.assertEqual(ratios[ratios.design == "FS"].overhead.tolist(), [2.0])

    def test_base_per_scheduling(self):
        df = runs(
            [
                ("a", "NS", "local", 1, 1.0),
                ("a", "NS", "batched", 1, 2.0),
                ("a", "SS", "batched", 4, 4.0),
                ("a", "FS", "local", 4, 4.0),
            ]
        )
        ratios = overhead_report(df).ratios.set_index(["design", "scheduling"]).overhead
        self.assertEqual(ratios["SS", "batched"], 2.0)
        self.assertEqual(ratios["FS", "local"], 4.0)

    def test_separate_base(self):
        base = runs([("a", "NS", "batched", 1, 2.0)])
        df = runs([("a", "PAC", "local", 4, 3.0)])
        self.assertEqual(overhead_report(df, base=base).ratios.overhead.tolist(), [1.5])

    def test_missing_base(self):
        with self.assertRaises(MissingBaseRunError):
            overhead_report(runs([("a", "NS", "local", 1, 1.0), ("b", "SS", "local", 4, 1.0)]))
        with self.assertRaises(MissingBaseRunError):
            overhead_report(runs([("a", "NS", "local", 2, 1.0)]))


class Test_Analyze(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_files(self):
        df = runs(
            [
                ("a", "NS", "local", 1, 1.0),
                ("a", "SS", "local", 2, 1.5),
                ("a", "PAC", "batched", 2, 2.5),
            ]
        )
        report = analyze(df, self.tmp, name="Path", plot=True)
        folder = os.path.join(self.tmp, "Path")
        for name in ("info.txt", "data.csv", "overhead.csv", "ratios.csv"):
            self.assertTrue(os.path.isfile(os.path.join(folder, name)), name)
        self.assertTrue(os.path.isfile(os.path.join(folder, "overhead.pdf")))
        self.assertEqual(len(report.summary), 3)

    def test_without_base(self):
        df = runs([("a", "SS", "local", 2, 1.5)])
        self.assertIsNone(analyze(df, self.tmp))
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, "analysis", "data.csv")))

    def test_bad_path(self):
        with self.assertRaises(ValueError):
            analyze(runs([]), 3)
        with self.assertRaises(IOError):
            analyze(runs([]), os.path.join(self.tmp, "missing"))


if __name__ == "__main__":
    unittest.main()
