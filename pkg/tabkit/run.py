import json
import logging
import os.path as osp
import sys
from argparse import ArgumentParser

import numpy as np
import yaml

from tabkit.analysis import overhead_report
from tabkit.benchmark import benchmark
from tabkit.datasets import DPDataset
from tabkit.evaluations import make_contexts, run_dp, run_path
from tabkit.evaluations.evaluations import PathBenchmark
from tabkit.exceptions import MissingBaseRunError, TabkitError
from tabkit.memmodel import sweep
from tabkit.tablespace import DESIGNS
from tabkit.utils import set_log_level, setup_seed


log = logging.getLogger(__name__)


def _add_context_options(parser):
    parser.add_argument(
        "--design",
        dest="designs",
        type=str.upper,
        nargs="+",
        choices=list(DESIGNS),
        default=["NS"],
        help="Table-space designs among NS, SS, FS, PAS and PAC.",
    )
    parser.add_argument(
        "--sched",
        dest="schedulings",
        nargs="+",
        choices=["local", "batched"],
        default=["local"],
        help="Scheduling strategies.",
    )
    parser.add_argument(
        "--threads", dest="threads", type=int, nargs="+", default=[1], help="Thread counts."
    )
    parser.add_argument(
        "--repeat", dest="repeat", type=int, default=1, help="Repetitions of each run."
    )
    parser.add_argument("--seed", dest="seed", type=int, default=None)
    parser.add_argument(
        "--scheme",
        dest="scheme",
        choices=["hashtrie", "doubling"],
        default=None,
        help="Hash level scheme of the tries, hashtrie by default.",
    )
    parser.add_argument(
        "--no-memory",
        dest="memory",
        action="store_false",
        default=True,
        help="Skip the memory model reconciliation.",
    )
    parser.add_argument(
        "--out",
        dest="out",
        type=str,
        default=None,
        help="JSON file for the statistics; printed when omitted.",
    )


def parser_init():
    parser = ArgumentParser(prog="tabkit", description="Concurrent tabling benchmarks")
    parser.add_argument(
        "-v", "--verbose", dest="verbose", action="store_true", default=False
    )
    parser.add_argument(
        "-d",
        "--debug",
        dest="debug",
        action="store_true",
        default=False,
        help="Print debug level parse statements. Overrides verbose",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="Path benchmarks over a context grid.")
    bench.add_argument(
        "--bench",
        dest="benches",
        nargs="+",
        required=True,
        help="Benchmarks as path-<left|right>:<shape>:<depth>, e.g. path-left:cycle:2000.",
    )
    _add_context_options(bench)

    dp = sub.add_parser("dp", help="Knapsack or LCS with a thread scheduler.")
    dp.add_argument("--problem", dest="problem", choices=["knapsack", "lcs"], required=True)
    dp.add_argument(
        "--approach", dest="approach", type=str.lower, choices=["td1", "td2", "bu"], default="bu"
    )
    dp.add_argument("--n", dest="n", type=int, default=200, help="Items or sequence length.")
    dp.add_argument("--c", dest="capacity", type=int, default=None, help="Knapsack capacity.")
    dp.add_argument(
        "--frac", dest="fraction", type=float, default=0.10, help="Value range fraction."
    )
    dp.add_argument("--data-seed", dest="data_seed", type=int, default=42)
    _add_context_options(dp)

    mem = sub.add_parser("memmodel", help="Memory model sweep over a parameter grid.")
    mem.add_argument(
        "--sweep",
        dest="sweep",
        type=str,
        required=True,
        help="JSON or YAML file mapping te, ba, sf, se_fs, bp, st, at, nt, nc to values.",
    )
    mem.add_argument(
        "--out", dest="out", type=str, default=None, help="CSV or JSON output file."
    )

    suite = sub.add_parser("suite", help="Benchmark suite from configuration files.")
    suite.add_argument(
        "-b",
        "--benchmarks",
        dest="benchmarks",
        type=str,
        default="./benchmarks/",
        help="Folder containing the benchmark configuration files.",
    )
    suite.add_argument(
        "-e",
        "--evaluations",
        dest="evaluations",
        nargs="+",
        default=None,
        help='Evaluation types to be run among "Path" and "DP". All by default.',
    )
    suite.add_argument(
        "-r",
        "--results",
        dest="results",
        type=str,
        default="./results/",
        help="Folder to store the results.",
    )
    suite.add_argument(
        "-f",
        "--force-update",
        dest="force",
        action="store_true",
        default=False,
        help="Force evaluation of cached runs.",
    )
    suite.add_argument(
        "-o",
        "--output",
        dest="output",
        type=str,
        default="./benchmark/",
        help="Folder to put analysis results",
    )
    suite.add_argument(
        "--plot",
        dest="plot",
        action="store_true",
        default=False,
        help="Plot results after computing. Defaults false",
    )
    suite.add_argument(
        "-c",
        "--contexts",
        dest="context",
        type=str,
        default=None,
        help="File path to a context .yml file with designs, schedulings, threads, "
        "repeat and seed. If none, a single NS, local, one-thread context.",
    )
    return parser


def _to_builtin(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _dump(payload, out):
    text = json.dumps(payload, indent=2, default=_to_builtin)
    if out is None:
        print(text)
    else:
        with open(out, "w") as f:
            f.write(text + "\n")
        log.info(f"statistics written to {out}")


def _contexts(options):
    trie = {"scheme": options.scheme} if options.scheme else None
    return make_contexts(
        designs=options.designs,
        schedulings=options.schedulings,
        threads=options.threads,
        seed=options.seed,
        trie=trie,
    )


def _report(runs, contexts, options):
    payload = {
        "config": {
            "contexts": [
                {"design": c.design, "scheduling": c.scheduling, "threads": c.threads}
                for c in contexts
            ],
            "repeat": options.repeat,
            "seed": options.seed,
        },
        "stats": [run.to_json() for run in runs],
    }
    try:
        payload["overhead"] = overhead_report(runs).to_dict()
    except MissingBaseRunError:
        log.debug("no NS single-thread run, overhead omitted")
    return payload


def _bench(options):
    contexts = _contexts(options)
    runs = []
    for text in options.benches:
        bench = PathBenchmark.parse(text)
        for config in contexts:
            runs.append(
                run_path(bench.direction, bench.edges, config, options.repeat, options.memory)
            )
    payload = _report(runs, contexts, options)
    payload["config"]["benchmarks"] = list(options.benches)
    _dump(payload, options.out)


def _dp(options):
    dataset = DPDataset(
        problem=options.problem,
        n=options.n,
        capacity=options.capacity,
        fraction=options.fraction,
        seed=options.data_seed,
    )
    contexts = _contexts(options)
    if options.approach != "bu":
        skipped = [c for c in contexts if not DESIGNS[c.design].supports_modes]
        for c in skipped:
            log.warning(f"{options.approach} needs mode-directed tabling, skipping {c.design}")
        contexts = [c for c in contexts if c not in skipped]
    runs = [
        run_dp(options.approach, dataset, config, options.repeat, options.memory)
        for config in contexts
    ]
    expected = dataset.oracle()
    for run in runs:
        if run.result != expected:
            log.error(f"{run.benchmark} {run.design}: {run.result}, expected {expected}")
    payload = _report(runs, contexts, options)
    payload["config"]["dataset"] = dataset.code
    payload["config"]["approach"] = options.approach
    payload["oracle"] = expected
    _dump(payload, options.out)


def _memmodel(options):
    with open(options.sweep, "r") as f:
        grid = yaml.load(f.read(), Loader=yaml.FullLoader)
    table = sweep(grid)
    if options.out is None:
        print(table.to_string(index=False))
    elif osp.splitext(options.out)[1] == ".json":
        table.to_json(options.out, orient="records", indent=2)
    else:
        table.to_csv(options.out, index=False)


def _suite(options):
    benchmark(
        benchmarks=options.benchmarks,
        evaluations=options.evaluations,
        results=options.results,
        overwrite=options.force,
        output=options.output,
        plot=options.plot,
        contexts=options.context,
    )


COMMANDS = {"bench": _bench, "dp": _dp, "memmodel": _memmodel, "suite": _suite}


def main(argv=None):
    parser = parser_init()
    options = parser.parse_args(argv)
    if options.debug:
        set_log_level("DEBUG")
    elif options.verbose:
        set_log_level("INFO")
    else:
        set_log_level("WARNING")
    if getattr(options, "seed", None) is not None:
        setup_seed(options.seed)
    try:
        COMMANDS[options.command](options)
    except TabkitError as e:
        log.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
