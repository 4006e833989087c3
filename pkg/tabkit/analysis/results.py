import hashlib
import logging
import os
import os.path as osp
from datetime import datetime

import h5py
import numpy as np
import pandas as pd


try:
    from codecarbon import EmissionsTracker  # noqa

    _carbonfootprint = True
except ImportError:
    _carbonfootprint = False


log = logging.getLogger(__name__)

COLUMNS = [
    "time",
    "calls",
    "unique",
    "repeated",
    "subgoal_nodes",
    "answer_nodes",
    "live_bytes",
    "predicted_bytes",
    "result",
]
CONTEXT = ["design", "scheduling", "threads"]


def get_config_digest(design, scheduling, threads):
    """Digest of an evaluation context, the group name of its runs."""
    text = f"{design.upper()}|{scheduling}|{threads}"
    return hashlib.md5(text.encode("utf8")).hexdigest()


def default_results_dir():
    return os.environ.get("TABKIT_RESULTS", osp.join(osp.expanduser("~"), "tabkit_data"))


class Results:
    """Run statistics stored in one HDF5 file.

    One group per evaluation context (design, scheduling, threads), one
    subgroup per benchmark holding a row per repetition.

    Parameters
    ----------
    evaluation_class: type
        Evaluation that produced the runs, part of the file path.
    suffix: str
        Suffix of the file name.
    overwrite: bool
        Remove an existing file first.
    hdf5_path: None | str
        Root folder; ``$TABKIT_RESULTS`` or ``~/tabkit_data`` by default.
    """

    def __init__(self, evaluation_class, suffix="", overwrite=False, hdf5_path=None):
        from tabkit.evaluations.base import BaseEvaluation

        if not issubclass(evaluation_class, BaseEvaluation):
            raise ValueError(f"{evaluation_class} is not an evaluation class")
        self.mod_dir = osp.abspath(hdf5_path or default_results_dir())
        self.filepath = osp.join(
            self.mod_dir,
            "results",
            evaluation_class.__name__,
            "results{}.hdf5".format("_" + suffix),
        )
        os.makedirs(osp.dirname(self.filepath), exist_ok=True)
        if overwrite and osp.isfile(self.filepath):
            os.remove(self.filepath)
        if not osp.isfile(self.filepath):
            with h5py.File(self.filepath, "w") as f:
                f.attrs["create_time"] = "{:%Y-%m-%d, %H:%M}".format(datetime.now())

    @property
    def columns(self):
        if _carbonfootprint:
            return COLUMNS + ["carbon_emission"]
        return list(COLUMNS)

    def add(self, results):
        """Append run dicts (or a single one) as produced by an evaluation."""
        if isinstance(results, dict):
            results = [results]
        elif not isinstance(results, list):
            raise ValueError(
                f"Results are given as neither dict nor list but {type(results).__name__}"
            )
        columns = self.columns
        with h5py.File(self.filepath, "r+") as f:
            for res in results:
                digest = get_config_digest(res["design"], res["scheduling"], res["threads"])
                if digest not in f.keys():
                    grp = f.create_group(digest)
                    grp.attrs["design"] = res["design"]
                    grp.attrs["scheduling"] = res["scheduling"]
                    grp.attrs["threads"] = res["threads"]
                grp = f[digest]
                bname = res["benchmark"]
                if bname not in grp.keys():
                    dset = grp.create_group(bname)
                    dt = h5py.special_dtype(vlen=str)
                    dset.create_dataset("id", (0,), dtype=dt, maxshape=(None,))
                    dset.create_dataset(
                        "data", (0, len(columns)), maxshape=(None, len(columns))
                    )
                    dset.attrs.create("columns", columns, dtype=dt)
                dset = grp[bname]
                length = len(dset["id"]) + 1
                dset["id"].resize(length, 0)
                dset["data"].resize(length, 0)
                dset["id"][-1] = str(res.get("repeat", length - 1))
                row = [res.get(c, np.nan) for c in columns]
                dset["data"][-1, :] = np.asarray(
                    [np.nan if v is None else float(v) for v in row]
                )

    def to_dataframe(self):
        df_list = []
        with h5py.File(self.filepath, "r") as f:
            for _, grp in f.items():
                for bname, dset in grp.items():
                    columns = list(dset.attrs["columns"])
                    df = pd.DataFrame(np.array(dset["data"]), columns=columns)
                    df["repeat"] = [
                        s.decode() if isinstance(s, bytes) else s for s in np.array(dset["id"])
                    ]
                    df["benchmark"] = bname
                    df["design"] = grp.attrs["design"]
                    df["scheduling"] = grp.attrs["scheduling"]
                    df["threads"] = int(grp.attrs["threads"])
                    df_list.append(df)
        if not df_list:
            return pd.DataFrame(columns=self.columns + ["repeat", "benchmark"] + CONTEXT)
        return pd.concat(df_list, ignore_index=True)

    def already_computed(self, benchmark, design, scheduling, threads):
        """Whether runs of ``benchmark`` exist for the context."""
        with h5py.File(self.filepath, "r") as f:
            digest = get_config_digest(design, scheduling, threads)
            return digest in f.keys() and benchmark in f[digest].keys()
