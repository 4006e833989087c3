import logging
import threading
from collections import defaultdict
from importlib import resources
from typing import Dict, List, Optional, Tuple

from tabkit.engine.builtins import BUILTINS
from tabkit.engine.parser import parse_clauses
from tabkit.exceptions import ProgramError
from tabkit.tablespace.base import MODES
from tabkit.term import Compound, Var, fresh_var, goal_predicate


log = logging.getLogger(__name__)


def _rename(term, variables):
    kind = type(term)
    if kind is Var:
        return variables[term.id]
    if kind is Compound:
        return Compound(term.name, [_rename(a, variables) for a in term.args])
    return term


def _is_ground(term):
    kind = type(term)
    if kind is Var:
        return False
    if kind is Compound:
        return all(_is_ground(a) for a in term.args)
    return True


def _flatten(body):
    goals = []
    stack = [body]
    while stack:
        goal = stack.pop()
        if type(goal) is Compound and goal.name == "," and goal.arity == 2:
            stack.append(goal.args[1])
            stack.append(goal.args[0])
        else:
            goals.append(goal)
    return tuple(goals)


class Clause:
    """Program clause; its variables are ``Var(0) .. Var(n_vars - 1)``."""

    __slots__ = ("head", "body", "n_vars")

    def __init__(self, head, body=(), n_vars=0):
        self.head = head
        self.body = tuple(body)
        self.n_vars = n_vars

    @property
    def predicate(self):
        return goal_predicate(self.head)

    def rename(self):
        """Head and body with fresh runtime variables."""
        if not self.n_vars:
            return self.head, self.body
        variables = [fresh_var() for _ in range(self.n_vars)]
        return _rename(self.head, variables), tuple(_rename(g, variables) for g in self.body)

    def __repr__(self):
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(repr(g) for g in self.body)}."


class Program:
    """
    Definite program with tabled predicate declarations.

    Ground facts are kept as argument tuples and indexed, per argument
    position, on first use; other clauses are kept in source order.

    Parameters
    ----------
    text: None | str
        Program text, see :mod:`tabkit.engine.parser`.
    """

    def __init__(self, text=None):
        self.rules: Dict[Tuple[str, int], List[Clause]] = defaultdict(list)
        self.facts: Dict[Tuple[str, int], List[tuple]] = defaultdict(list)
        self.tabled: Dict[Tuple[str, int], Optional[Tuple[str, ...]]] = {}
        self._index: Dict[Tuple[str, int], Dict[int, Dict[object, list]]] = {}
        self._lock = threading.Lock()
        if text is not None:
            self.consult(text)

    @classmethod
    def from_resource(cls, name):
        """Program shipped in :mod:`tabkit.programs`, e.g. ``"path_left"``."""
        text = resources.files("tabkit.programs").joinpath(f"{name}.pl").read_text()
        return cls(text)

    def consult(self, text):
        for term, n_vars in parse_clauses(text):
            if type(term) is Compound and term.name == ":-" and term.arity == 1:
                self._directive(term.args[0])
            elif type(term) is Compound and term.name == ":-" and term.arity == 2:
                self.add_clause(term.args[0], _flatten(term.args[1]), n_vars)
            else:
                self.add_clause(term, (), n_vars)
        return self

    def _directive(self, term):
        if type(term) is not Compound or term.name != "table" or term.arity != 1:
            raise ProgramError(f"Unknown directive {term!r}")
        for spec in _flatten(term.args[0]):
            if type(spec) is Compound and spec.name == "/" and spec.arity == 2:
                name, arity = spec.args
                self.table(name, arity)
            elif type(spec) is Compound:
                self.table(spec.name, spec.arity, spec.args)
            else:
                raise ProgramError(f"Invalid table declaration {spec!r}")

    def table(self, name, arity, modes=None):
        """Declare ``name/arity`` tabled, with one mode per argument if given."""
        if type(name) is not str or type(arity) is not int or arity < 0:
            raise ProgramError(f"Invalid tabled predicate {name}/{arity}")
        if modes is not None:
            modes = tuple(modes)
            if len(modes) != arity:
                raise ProgramError(f"{len(modes)} modes declared for {name}/{arity}")
            for mode in modes:
                if mode not in MODES:
                    raise ProgramError(f"Unknown mode {mode!r}, use one of {MODES}")
        self.tabled[(name, arity)] = modes

    def add_clause(self, head, body=(), n_vars=None):
        predicate = goal_predicate(head)
        if predicate in BUILTINS:
            raise ProgramError(f"Cannot redefine builtin {predicate[0]}/{predicate[1]}")
        if n_vars is None:
            n_vars = 0
            for term in (head, *body):
                stack = [term]
                while stack:
                    t = stack.pop()
                    if type(t) is Var:
                        n_vars = max(n_vars, t.id + 1)
                    elif type(t) is Compound:
                        stack.extend(t.args)
        if not body and _is_ground(head):
            self.add_fact(predicate[0], head.args if type(head) is Compound else ())
        else:
            self.rules[predicate].append(Clause(head, body, n_vars))
            self._index.pop(predicate, None)

    def add_fact(self, name, args):
        self.facts[(name, len(args))].append(tuple(args))
        self._index.pop((name, len(args)), None)

    def add_facts(self, name, rows):
        """Add ground facts from an iterable of rows (tuples or array rows)."""
        rows = [tuple(int(v) if hasattr(v, "item") else v for v in row) for row in rows]
        if not rows:
            return
        self.facts[(name, len(rows[0]))].extend(rows)
        self._index.pop((name, len(rows[0])), None)

    def defines(self, predicate):
        return predicate in self.rules or predicate in self.facts

    def clauses(self, predicate):
        """Facts (as clauses) followed by rules, for generator evaluation."""
        name = predicate[0]
        facts = [
            Clause(Compound(name, row) if row else name) for row in self.facts.get(predicate, ())
        ]
        return facts + list(self.rules.get(predicate, ()))

    def match_facts(self, predicate, args):
        """Facts of ``predicate`` whose first bound atomic argument matches."""
        rows = self.facts.get(predicate)
        if not rows:
            return ()
        for pos, arg in enumerate(args):
            while type(arg) is Var and arg.binding is not None:
                arg = arg.binding
            if type(arg) is Var or type(arg) is Compound:
                continue
            return self._position_index(predicate, pos).get(arg, ())
        return rows

    def _position_index(self, predicate, pos):
        by_position = self._index.get(predicate)
        if by_position is None or pos not in by_position:
            with self._lock:
                by_position = self._index.setdefault(predicate, {})
                if pos not in by_position:
                    index = defaultdict(list)
                    for row in self.facts[predicate]:
                        index[row[pos]].append(row)
                    by_position[pos] = dict(index)
        return by_position[pos]

    def validate(self):
        """Check that every called predicate is defined, tabled or builtin.

        Raises
        ------
        ProgramError
            On the first undefined body predicate.
        """
        known = set(self.rules) | set(self.facts) | set(self.tabled) | set(BUILTINS)
        for clauses in self.rules.values():
            for clause in clauses:
                for goal in clause.body:
                    if type(goal) is Var:
                        raise ProgramError(f"variable goal in {clause!r}")
                    predicate = goal_predicate(goal)
                    if predicate not in known:
                        raise ProgramError(
                            f"{predicate[0]}/{predicate[1]} is called in {clause!r} "
                            "but never defined"
                        )
        for predicate in self.tabled:
            if not self.defines(predicate):
                log.warning(f"tabled predicate {predicate[0]}/{predicate[1]} has no clauses")
        return self
