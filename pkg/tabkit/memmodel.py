"""Analytic memory usage of the table-space designs.

All quantities are integer byte counts, so every formula and every difference
between formulas is exact.

Symbols
-------
TE, BA, SF
    table entry, bucket array and subgoal frame sizes.
SE_FS, SF_FS, BP
    FS subgoal entry, FS private frame and its back pointer; SE_FS + SF_FS = SF.
ST(i), AT(i, j)
    subgoal trie of predicate i and answer trie of its j-th call.
NT, NC(i), NT(i, j)
    threads, calls of predicate i, and (PAS) frames kept for call j.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple

import pandas as pd

from tabkit.exceptions import ParameterError


log = logging.getLogger(__name__)

MODEL_DESIGNS = ("CS", "NS", "SS", "FS", "PAS", "PAC")
POINTER_BYTES = 8


@dataclass(frozen=True)
class PredicateParams:
    """Per-predicate symbols.

    Parameters
    ----------
    st: int
        Subgoal trie bytes.
    at: tuple of int
        Answer trie bytes of each call, so ``len(at)`` is NC.
    nt_calls: None | tuple of int
        PAS frames kept per call; defaults to NT for every call.
    pc: None | tuple of int
        PAC public answer chain bytes per call; defaults to zero.
    """

    st: int
    at: Tuple[int, ...]
    nt_calls: Optional[Tuple[int, ...]] = None
    pc: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "at", tuple(self.at))
        if self.st < 0 or any(a < 0 for a in self.at):
            raise ParameterError("trie sizes must be non-negative")
        for name in ("nt_calls", "pc"):
            values = getattr(self, name)
            if values is None:
                continue
            values = tuple(values)
            object.__setattr__(self, name, values)
            if len(values) != len(self.at):
                raise ParameterError(f"{name} needs one value per call ({len(self.at)})")
            if any(v < 0 for v in values):
                raise ParameterError(f"{name} must be non-negative")

    @property
    def nc(self):
        return len(self.at)


@dataclass(frozen=True)
class MemParams:
    """Implementation sizes, thread count and per-predicate symbols."""

    te: int
    ba: int
    sf: int
    nt: int
    predicates: Tuple[PredicateParams, ...] = field(default_factory=tuple)
    se_fs: Optional[int] = None
    sf_fs: Optional[int] = None
    bp: int = POINTER_BYTES

    def __post_init__(self):
        object.__setattr__(self, "predicates", tuple(self.predicates))
        if self.se_fs is None and self.sf_fs is None:
            object.__setattr__(self, "sf_fs", self.sf // 2)
        if self.se_fs is None:
            object.__setattr__(self, "se_fs", self.sf - self.sf_fs)
        if self.sf_fs is None:
            object.__setattr__(self, "sf_fs", self.sf - self.se_fs)
        for name in ("te", "ba", "sf", "se_fs", "sf_fs", "bp"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name.upper()} must be non-negative")
        if self.nt < 1:
            raise ParameterError("NT must be at least 1")
        if self.se_fs + self.sf_fs != self.sf:
            raise ParameterError(
                f"SE_FS + SF_FS = {self.se_fs + self.sf_fs} differs from SF = {self.sf}"
            )
        for p in self.predicates:
            if p.nt_calls is not None and any(n > self.nt for n in p.nt_calls):
                raise ParameterError("NT(i, j) cannot exceed NT")

    @property
    def np(self):
        return len(self.predicates)

    @classmethod
    def from_sizes(cls, block_sizes, nt, predicates=()):
        """Symbols of the sizes configured in the page allocator."""
        frame_fs = block_sizes["subgoal_frame_fs"]
        return cls(
            te=block_sizes["table_entry"],
            ba=block_sizes["bucket_array"],
            sf=block_sizes["subgoal_frame"],
            nt=nt,
            predicates=tuple(predicates),
            se_fs=block_sizes["subgoal_entry"],
            sf_fs=frame_fs - POINTER_BYTES,
            bp=POINTER_BYTES,
        )


def _usage(design, m: MemParams, p: PredicateParams):
    nt = m.nt
    if design == "CS":
        return m.te + p.st + sum(m.sf + a for a in p.at)
    if design == "NS":
        return m.te + m.ba + nt * (p.st + sum(m.sf + a for a in p.at))
    if design == "SS":
        return m.te + p.st + sum(m.ba + nt * (m.sf + a) for a in p.at)
    if design in ("FS", "PAC"):
        usage = m.te + p.st + sum(m.se_fs + m.ba + nt * (m.sf_fs + m.bp) + a for a in p.at)
        if design == "PAC" and p.pc is not None:
            usage += sum(p.pc)
        return usage
    if design == "PAS":
        kept = p.nt_calls if p.nt_calls is not None else (nt,) * p.nc
        return m.te + p.st + sum(k * (m.sf + a) for k, a in zip(kept, p.at))
    raise ParameterError(f"Unknown design {design}, use one of {MODEL_DESIGNS}")


def predict(design, params: MemParams) -> int:
    """Total memory usage of ``design``: the sum of its usage over all predicates."""
    return sum(_usage(design.upper(), params, p) for p in params.predicates)


def _single(params, p):
    return MemParams(
        te=params.te,
        ba=params.ba,
        sf=params.sf,
        nt=params.nt,
        predicates=(p,),
        se_fs=params.se_fs,
        sf_fs=params.sf_fs,
        bp=params.bp,
    )


class Theorem1Check(NamedTuple):
    holds_lhs: bool
    holds_iff: bool
    difference: int


class Theorem2Check(NamedTuple):
    premise: bool
    holds: bool
    difference: int


def check_theorem1(params: MemParams) -> Theorem1Check:
    """SS uses no more memory than NS iff (NC - 1) * BA <= (NT - 1) * ST.

    Checked per predicate; ``holds_iff`` is False as soon as one predicate's
    comparison disagrees with its condition or with the closed-form difference.
    """
    holds_lhs = True
    holds_iff = True
    difference = 0
    for p in params.predicates:
        if p.nc < 1:
            raise ParameterError("NC must be at least 1")
        single = _single(params, p)
        diff = predict("SS", single) - predict("NS", single)
        closed = (p.nc - 1) * params.ba - (params.nt - 1) * p.st
        lhs = diff <= 0
        condition = (p.nc - 1) * params.ba <= (params.nt - 1) * p.st
        holds_lhs &= lhs
        holds_iff &= lhs == condition and diff == closed
        difference += diff
    return Theorem1Check(holds_lhs, holds_iff, difference)


def theorem2_premise(params: MemParams):
    """SF_FS + BP < SF, BP > 0 and every answer trie at least BP bytes."""
    return (
        params.sf_fs + params.bp < params.sf
        and params.bp > 0
        and all(a >= params.bp for p in params.predicates for a in p.at)
    )


def check_theorem2(params: MemParams) -> Theorem2Check:
    """FS uses less memory than SS with several threads, more with a single one.

    A failed premise is reported in ``premise`` and ``holds`` is then only
    informative.
    """
    premise = theorem2_premise(params)
    holds = True
    difference = 0
    nt = params.nt
    for p in params.predicates:
        if p.nc < 1:
            raise ParameterError("NC must be at least 1")
        single = _single(params, p)
        diff = predict("FS", single) - predict("SS", single)
        closed = sum(
            nt * params.bp + (nt - 1) * (params.sf_fs - params.sf) - (nt - 1) * a for a in p.at
        )
        holds &= (diff < 0 if nt > 1 else diff > 0) and diff == closed
        difference += diff
    if not premise:
        log.debug("theorem 2 premise does not hold for these parameters")
    return Theorem2Check(premise, holds, difference)


def check_pas_dominance(params: MemParams) -> bool:
    return predict("PAS", params) <= predict("SS", params)


@dataclass
class MemReport:
    design: str
    predicted: int
    measured: int
    params: MemParams
    measured_by_type: Dict[str, int] = field(default_factory=dict)

    @property
    def delta(self):
        return self.predicted - self.measured


def params_from_census(census, sizes, threads=None) -> MemParams:
    """Symbols measured on a quiescent table space.

    NT is ``threads`` when given, else the largest number of frames of any
    subgoal (per-thread subgoal tries under NS). Trie sizes are taken from the
    first instance of each structure; they agree across threads when every
    thread evaluated the same query.
    """
    design = census.design
    nt = threads
    if nt is None:
        counts = [s.frames for p in census.predicates for s in p.subgoals]
        if design == "NS":
            counts += [len(p.subgoal_tries) for p in census.predicates]
        nt = max(counts, default=1) or 1
    ba = sizes["bucket_array"]
    predicates = []
    for p in census.predicates:
        if design == "NS":
            ba = p.ba_bytes
            tries = p.subgoal_tries
            if len(set(tries)) > 1:
                log.warning(f"{p.name}/{p.arity}: per-thread subgoal tries differ {tries}")
        else:
            tries = p.subgoal_tries
        for s in p.subgoals:
            if s.ba_bytes:
                ba = s.ba_bytes
            if len(set(s.answer_tries)) > 1:
                log.warning(f"{s.key}: answer tries differ across threads")
        predicates.append(
            PredicateParams(
                st=tries[0] if tries else 0,
                at=tuple(s.answer_tries[0] if s.answer_tries else 0 for s in p.subgoals),
                nt_calls=tuple(s.frames for s in p.subgoals) if design == "PAS" else None,
                pc=tuple(s.chain_bytes for s in p.subgoals) if design == "PAC" else None,
            )
        )
    frame_fs = sizes["subgoal_frame_fs"]
    return MemParams(
        te=sizes["table_entry"],
        ba=ba,
        sf=sizes["subgoal_frame"],
        nt=nt,
        predicates=tuple(predicates),
        se_fs=sizes["subgoal_entry"],
        sf_fs=frame_fs - POINTER_BYTES,
        bp=POINTER_BYTES,
    )


def reconcile(design, census, sizes, heap=None, threads=None) -> MemReport:
    """Compare the model, fed with measured trie sizes, to the allocator.

    Parameters
    ----------
    design: str
        Table-space design of ``census``.
    census: Census
        Structure census of the finished, quiescent table space.
    sizes: dict
        Block sizes of the allocator.
    heap: None | HeapStats
        Allocator snapshot; without it the census bytes are used as measure.
    threads: None | int
        NT of the run.
    """
    design = design.upper()
    params = params_from_census(census, sizes, threads)
    predicted = predict(design, params)
    by_type = {}
    if heap is not None:
        by_type = {name: t.live_bytes for name, t in heap.types.items() if t.live_blocks}
        measured = heap.live_bytes()
    else:
        measured = census_bytes(census)
    report = MemReport(design, predicted, measured, params, by_type)
    if report.delta:
        log.warning(f"{design}: model predicts {predicted} bytes, measured {measured}")
    return report


def census_bytes(census) -> int:
    total = 0
    for p in census.predicates:
        total += p.te_bytes + p.ba_bytes + sum(p.subgoal_tries)
        for s in p.subgoals:
            total += s.entry_bytes + s.ba_bytes + s.chain_bytes
            total += s.frames * s.frame_bytes + sum(s.answer_tries)
    return total


SWEEP_KEYS = ("te", "ba", "sf", "se_fs", "bp", "st", "at", "nt", "nc")


def sweep(grid: Dict[str, object]) -> pd.DataFrame:
    """Evaluate every design and both theorems over a parameter grid.

    ``grid`` maps symbols (lower case: te, ba, sf, se_fs, bp, st, at, nt, nc) to
    a value or a list of values; one single-predicate tuple is built from each
    combination, with NC calls of identical answer tries.
    """
    unknown = set(grid) - set(SWEEP_KEYS)
    if unknown:
        raise ParameterError(f"Unknown sweep keys {sorted(unknown)}")
    defaults = {"te": 48, "ba": 72, "sf": 64, "se_fs": 40, "bp": 8, "st": 0, "at": 0}
    axes = {}
    for key in SWEEP_KEYS:
        values = grid.get(key, defaults.get(key, 1))
        axes[key] = list(values) if isinstance(values, (list, tuple)) else [values]
    rows = []
    for combo in itertools.product(*axes.values()):
        row = dict(zip(axes, combo))
        params = MemParams(
            te=row["te"],
            ba=row["ba"],
            sf=row["sf"],
            nt=row["nt"],
            se_fs=row["se_fs"],
            sf_fs=row["sf"] - row["se_fs"],
            bp=row["bp"],
            predicates=(PredicateParams(st=row["st"], at=(row["at"],) * row["nc"]),),
        )
        for design in MODEL_DESIGNS:
            row[f"mu_{design.lower()}"] = predict(design, params)
        t1 = check_theorem1(params)
        t2 = check_theorem2(params)
        row["theorem1_iff"] = t1.holds_iff
        row["theorem2_premise"] = t2.premise
        row["theorem2_holds"] = t2.holds
        rows.append(row)
    log.info(f"memory model swept over {len(rows)} parameter tuples")
    return pd.DataFrame(rows)
