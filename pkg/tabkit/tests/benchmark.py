import importlib
import json
import os
import os.path as osp
import shutil
import tempfile
import unittest

import matplotlib
import pandas as pd
import yaml

benchmark = importlib.import_module("tabkit.benchmark")
from tabkit.run import main


matplotlib.use("Agg")

PATH_CONFIG = {
    "name": "Small Path",
    "evaluation": "Path",
    "benchmarks": ["path-left:cycle:3", "path-right:btree:3"],
}
DP_CONFIG = {
    "name": "Small Knapsack",
    "evaluation": "DP",
    "benchmarks": [
        {"approach": "td1", "dataset": {"problem": "knapsack", "n": 6, "capacity": 10}},
        {"approach": "bu", "dataset": {"problem": "knapsack", "n": 6, "capacity": 10}},
    ],
}
CONTEXT = {"designs": ["NS", "FS"], "threads": [1, 2], "repeat": 2, "seed": 1}


def write_yaml(path, content):
    with open(path, "w") as f:
        yaml.dump(content, f)
    return path


class Test_Benchmark(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.bench_dir = osp.join(self.tmp, "benchmarks")
        os.makedirs(self.bench_dir)
        write_yaml(osp.join(self.bench_dir, "path.yml"), PATH_CONFIG)
        write_yaml(osp.join(self.bench_dir, "knapsack.yml"), DP_CONFIG)
        self.contexts = write_yaml(osp.join(self.tmp, "contexts.yml"), CONTEXT)
        self.results = osp.join(self.tmp, "results")
        self.output = osp.join(self.tmp, "benchmark")

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def run_suite(self, **kwargs):
        return benchmark.benchmark(
            benchmarks=self.bench_dir,
            results=self.results,
            output=self.output,
            contexts=self.contexts,
            **kwargs,
        )

    def test_suite(self):
        res = self.run_suite()
        path = res[res.evaluation == "Path"]
        # 2 benchmarks, 4 contexts, 2 repetitions
        self.assertEqual(len(path), 16)
        cycle = path[path.benchmark == "path-left:cycle:3"]
        self.assertTrue((cycle.result == 9).all())
        dp = res[res.evaluation == "DP"]
        # td1 runs under NS only
        self.assertEqual(len(dp), 2 * 4 + 2 * 2)
        self.assertEqual(dp.result.nunique(), 1)
        for name in ("Path", "DP"):
            self.assertTrue(osp.isfile(osp.join(self.output, name, "overhead.csv")))

    def test_cached_runs(self):
        first = self.run_suite(evaluations=["Path"])
        again = self.run_suite(evaluations=["Path"])
        pd.testing.assert_series_equal(
            first.sort_values(["benchmark", "design", "threads", "repeat"]).time.reset_index(
                drop=True
            ),
            again.sort_values(["benchmark", "design", "threads", "repeat"]).time.reset_index(
                drop=True
            ),
            check_exact=False,
        )

    def test_include_exclude(self):
        res = self.run_suite(include_benchmarks=["Small Path"])
        self.assertEqual(set(res.evaluation), {"Path"})
        res = self.run_suite(exclude_benchmarks=["Small Path"])
        self.assertEqual(set(res.evaluation), {"DP"})
        res = self.run_suite(include_benchmarks=["Unknown"])
        self.assertEqual(len(res), 0)
        with self.assertRaises(AttributeError):
            self.run_suite(include_benchmarks=["Small Path"], exclude_benchmarks=["Small Path"])

    def test_invalid_directory(self):
        with self.assertRaises(ValueError):
            benchmark.benchmark(benchmarks=osp.join(self.tmp, "missing"), output=self.output)
        write_yaml(osp.join(self.bench_dir, "bad.yml"), {"name": "Bad", "evaluation": "Walk"})
        with self.assertRaises(ValueError):
            benchmark.parse_benchmarks_from_directory(self.bench_dir)

    def test_default_context(self):
        params = benchmark.load_context()
        self.assertEqual(params["designs"], ["NS"])
        self.assertEqual(benchmark.load_context(self.contexts)["threads"], [1, 2])


class Test_Main(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def load(self, name):
        with open(osp.join(self.tmp, name)) as f:
            return json.load(f)

    def test_bench(self):
        out = osp.join(self.tmp, "bench.json")
        argv = ["bench", "--bench", "path-left:cycle:3", "--design", "ns", "pac"]
        self.assertEqual(main(argv + ["--threads", "1", "2", "--out", out]), 0)
        payload = self.load("bench.json")
        self.assertEqual(set(payload), {"config", "stats", "overhead"})
        self.assertEqual(len(payload["stats"]), 4)
        self.assertTrue(all(s["result"] == 9 for s in payload["stats"]))
        self.assertTrue(all(s["memory"]["delta"] == 0 for s in payload["stats"]))
        self.assertEqual(payload["config"]["benchmarks"], ["path-left:cycle:3"])
        designs = {row["design"] for row in payload["overhead"]["summary"]}
        self.assertEqual(designs, {"NS", "PAC"})

    def test_bench_without_base(self):
        out = osp.join(self.tmp, "bench.json")
        argv = ["bench", "--bench", "path-right:cycle:3", "--design", "SS", "--threads", "2"]
        self.assertEqual(main(argv + ["--no-memory", "--out", out]), 0)
        payload = self.load("bench.json")
        self.assertNotIn("overhead", payload)
        self.assertNotIn("memory", payload["stats"][0])

    def test_dp(self):
        out = osp.join(self.tmp, "dp.json")
        argv = ["dp", "--problem", "knapsack", "--approach", "td2", "--n", "8", "--c", "12"]
        argv += ["--design", "SS", "FS", "--threads", "2", "--out", out]
        self.assertEqual(main(argv), 0)
        payload = self.load("dp.json")
        # td2 is skipped under FS
        self.assertEqual([s["design"] for s in payload["stats"]], ["SS"])
        self.assertEqual(payload["stats"][0]["result"], payload["oracle"])
        self.assertEqual(payload["config"]["approach"], "td2")

    def test_memmodel(self):
        grid = write_yaml(osp.join(self.tmp, "grid.yml"), {"nt": [1, 4], "nc": 3, "at": 7})
        out = osp.join(self.tmp, "sweep.csv")
        self.assertEqual(main(["memmodel", "--sweep", grid, "--out", out]), 0)
        table = pd.read_csv(out)
        self.assertEqual(len(table), 2)
        self.assertTrue(table.theorem1_iff.all())
        out = osp.join(self.tmp, "sweep.json")
        self.assertEqual(main(["memmodel", "--sweep", grid, "--out", out]), 0)
        self.assertEqual(len(self.load("sweep.json")), 2)

    def test_errors(self):
        self.assertEqual(main(["bench", "--bench", "path:cycle:3"]), 1)
        grid = write_yaml(osp.join(self.tmp, "grid.yml"), {"threads": [1]})
        self.assertEqual(main(["memmodel", "--sweep", grid]), 1)
        with self.assertRaises(SystemExit):
            main(["dp", "--problem", "tsp"])
        with self.assertRaises(SystemExit):
            main(["bench", "--bench", "path-left:cycle:3", "--design", "XS"])


if __name__ == "__main__":
    unittest.main()
