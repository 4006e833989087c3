"""Mode-directed answer aggregation.

A moded table keeps, for every combination of its ``index`` (and ``all``)
variables, the preferred answer only. The first aggregating variable decides
the outcome:

========  ==============================================
mode      new answer for an occupied index
========  ==============================================
first     discarded
last      replaces the stored one
min, max  replaces it when strictly better, ties keep it
sum       replaces it with the accumulated sum
========  ==============================================

Answers of the ``all`` mode are all kept; their order is unspecified.
"""

import logging
from enum import Enum
from typing import NamedTuple, Tuple

from tabkit.exceptions import ArithmeticTypeError, ContractViolation
from tabkit.tablespace.base import AnswerResult
from tabkit.term import format_term, goal_variables, resolve, substitution_tokens


log = logging.getLogger(__name__)

KEY_MODES = ("index", "all")


class ModeOutcome(Enum):
    KEPT = "kept"
    REPLACED = "replaced"
    DISCARDED = "discarded"


class SubstitutionArray(NamedTuple):
    """Modes of a moded call.

    ``counts[i]`` is the number of variables first occurring in argument ``i``
    and ``var_modes`` the mode of each variable of the call, in canonical order.
    """

    modes: Tuple[str, ...]
    counts: Tuple[int, ...]
    var_modes: Tuple[str, ...]

    @classmethod
    def from_goal(cls, goal, modes):
        if len(goal.args) != len(modes):
            raise ContractViolation(f"{len(modes)} modes for a call of arity {len(goal.args)}")
        seen = set()
        counts = []
        var_modes = []
        for arg, mode in zip(goal.args, modes):
            fresh = [v for v in goal_variables(arg) if v not in seen]
            seen.update(fresh)
            counts.append(len(fresh))
            var_modes.extend([mode] * len(fresh))
        return cls(tuple(modes), tuple(counts), tuple(var_modes))

    @property
    def aggregates(self):
        return [i for i, m in enumerate(self.var_modes) if m not in KEY_MODES]


def _number(value, mode):
    if type(value) is not int:
        raise ArithmeticTypeError(f"{mode} mode needs an integer, got {format_term(value)}")
    return value


def _preferred(mode, new, old):
    if mode == "min":
        return _number(new, mode) < _number(old, mode)
    return _number(new, mode) > _number(old, mode)


def mode_directed_insert(tablespace, handle, array: SubstitutionArray, values, tid):
    """Table the answer ``values`` of a moded call if it is preferable.

    Parameters
    ----------
    tablespace: TableSpace
        A design with private answer tries (NS, SS or PAS).
    handle: SubgoalHandle
        The generator's handle.
    array: SubstitutionArray
        Modes of the call.
    values: list
        Terms bound to the call's variables, in canonical order.
    tid: int
        Calling thread.

    Returns
    -------
    outcome: ModeOutcome
    leaf: TrieNode
        Leaf of the stored answer after the insertion.
    """
    frame = handle.frame
    if frame.modes is None:
        frame.modes = {}
    values = [resolve(v) for v in values]
    aggregates = array.aggregates
    for i in aggregates:
        if array.var_modes[i] in ("min", "max", "sum"):
            _number(values[i], array.var_modes[i])
    if not aggregates:
        result, leaf = tablespace.record_answer(handle, substitution_tokens(values), tid)
        if result is AnswerResult.NEW:
            return ModeOutcome.KEPT, leaf
        return ModeOutcome.DISCARDED, leaf
    key = substitution_tokens(
        [v for v, m in zip(values, array.var_modes) if m in KEY_MODES]
    )
    stored = frame.modes.get(key)
    if stored is not None:
        old_leaf, old_values = stored
        mode = array.var_modes[aggregates[0]]
        if mode == "first":
            return ModeOutcome.DISCARDED, old_leaf
        if mode == "sum":
            values = list(values)
            for i in aggregates:
                if array.var_modes[i] == "sum":
                    values[i] = old_values[i] + values[i]
        elif mode in ("min", "max"):
            if not _preferred(mode, values[aggregates[0]], old_values[aggregates[0]]):
                return ModeOutcome.DISCARDED, old_leaf
        if mode == "last" and substitution_tokens(values) == substitution_tokens(old_values):
            return ModeOutcome.DISCARDED, old_leaf
        tablespace.invalidate_answer(handle, old_leaf, tid)
    _, leaf = tablespace.record_answer(handle, substitution_tokens(values), tid)
    frame.modes[key] = (leaf, values)
    return (ModeOutcome.KEPT if stored is None else ModeOutcome.REPLACED), leaf


def invalidate_answer(tablespace, handle, leaf, tid):
    """Invalidate ``leaf`` in the handle's answer trie and forget it as a preferred answer.

    Raises
    ------
    UnsupportedDesignError
        When the answer trie is shared (FS, PAC).
    """
    tablespace.invalidate_answer(handle, leaf, tid)
    modes = handle.frame.modes
    if modes:
        for key, (stored, _) in list(modes.items()):
            if stored is leaf:
                del modes[key]
