"""Term representation, variant canonicalization and trie tokens.

Terms are plain Python values:

* atoms are ``str``;
* integers are ``int``;
* variables are :class:`Var` cells (``binding`` is ``None`` while unbound);
* compound terms are :class:`Compound` instances.

A term is turned into a flat sequence of tagged integer tokens, which is the
payload stored in trie nodes. Variables are numbered ``0, 1, 2, ...`` in order of
first occurrence, so two terms are variants exactly when their token sequences are
equal.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from tabkit.exceptions import ContractViolation, TermStructureError


log = logging.getLogger(__name__)

TAG_INT = 0
TAG_ATOM = 1
TAG_VAR = 2
TAG_FUNCTOR = 3
TAG_BITS = 2
TAG_MASK = (1 << TAG_BITS) - 1

# runtime variables never collide with the small ids used in parsed clauses
_FRESH_IDS = itertools.count(1 << 32)


class Var:
    """Logic variable.

    Parameters
    ----------
    id: int
        Non-negative identifier, local to the term (or clause) it appears in.
    """

    __slots__ = ("id", "binding")

    def __init__(self, id):
        self.id = id
        self.binding = None

    def __eq__(self, other):
        return type(other) is Var and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        return f"_{self.id}" if self.id >= 1 << 32 else f"V{self.id}"


class Compound:
    """Compound term ``name(args...)``.

    ``arity`` defaults to ``len(args)``; an explicit, different arity builds a
    malformed term that :func:`canonicalize` rejects.
    """

    __slots__ = ("name", "args", "arity")

    def __init__(self, name, args, arity=None):
        self.name = name
        self.args = tuple(args)
        self.arity = len(self.args) if arity is None else arity

    def __eq__(self, other):
        return (
            type(other) is Compound
            and other.name == self.name
            and other.arity == self.arity
            and other.args == self.args
        )

    def __hash__(self):
        return hash((self.name, self.arity, self.args))

    def __repr__(self):
        return format_term(self)


Term = Union[str, int, Var, Compound]


def fresh_var():
    """Return a new unbound runtime variable."""
    return Var(next(_FRESH_IDS))


def deref(term):
    """Follow variable bindings until an unbound variable or a non-variable."""
    while type(term) is Var:
        bound = term.binding
        if bound is None:
            return term
        term = bound
    return term


class SymbolTable:
    """Interns atom names and functors into dense integer ids.

    Lookups are lock-free; the first registration of a symbol takes a lock so ids
    are unique across threads.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._atoms: Dict[str, int] = {}
        self._atom_names: List[str] = []
        self._functors: Dict[Tuple[str, int], int] = {}
        self._functor_keys: List[Tuple[str, int]] = []

    def atom(self, name):
        ident = self._atoms.get(name)
        if ident is None:
            with self._lock:
                ident = self._atoms.get(name)
                if ident is None:
                    ident = len(self._atom_names)
                    self._atom_names.append(name)
                    self._atoms[name] = ident
        return ident

    def atom_name(self, ident):
        return self._atom_names[ident]

    def functor(self, name, arity):
        key = (name, arity)
        ident = self._functors.get(key)
        if ident is None:
            with self._lock:
                ident = self._functors.get(key)
                if ident is None:
                    ident = len(self._functor_keys)
                    self._functor_keys.append(key)
                    self._functors[key] = ident
        return ident

    def functor_key(self, ident):
        return self._functor_keys[ident]


SYMBOLS = SymbolTable()


def int_token(value):
    zigzag = value << 1 if value >= 0 else ((-value) << 1) - 1
    return zigzag << TAG_BITS


def atom_token(name):
    return (SYMBOLS.atom(name) << TAG_BITS) | TAG_ATOM


def var_token(index):
    return (index << TAG_BITS) | TAG_VAR


def functor_token(name, arity):
    return (SYMBOLS.functor(name, arity) << TAG_BITS) | TAG_FUNCTOR


def token_tag(token):
    return token & TAG_MASK


def _int_value(token):
    zigzag = token >> TAG_BITS
    return zigzag >> 1 if not zigzag & 1 else -((zigzag + 1) >> 1)


def format_token(token):
    """Human readable form of a token, e.g. ``int(3)``, ``atom(a)``, ``var(0)``, ``p/3``."""
    tag = token & TAG_MASK
    payload = token >> TAG_BITS
    if tag == TAG_INT:
        return f"int({_int_value(token)})"
    if tag == TAG_ATOM:
        return f"atom({SYMBOLS.atom_name(payload)})"
    if tag == TAG_VAR:
        return f"var({payload})"
    name, arity = SYMBOLS.functor_key(payload)
    return f"{name}/{arity}"


def format_term(term):
    term = deref(term)
    if type(term) is Compound:
        return f"{term.name}({','.join(format_term(a) for a in term.args)})"
    return repr(term) if type(term) is Var else str(term)


@dataclass(frozen=True)
class SubgoalKey:
    """Canonical form of a tabled call.

    ``tokens[0]`` is the predicate's functor token; ``tokens[1:]`` are the argument
    tokens stored along the subgoal-trie path.
    """

    predicate: Tuple[str, int]
    tokens: Tuple[int, ...]

    @property
    def arguments(self):
        return self.tokens[1:]

    @property
    def n_vars(self):
        return len({t for t in self.tokens if t & TAG_MASK == TAG_VAR})

    def __str__(self):
        return "[" + ", ".join(format_token(t) for t in self.tokens) + "]"


def _encode(term, out, varmap):
    stack = [term]
    pop = stack.pop
    append = out.append
    while stack:
        t = pop()
        while type(t) is Var:
            bound = t.binding
            if bound is None:
                break
            t = bound
        kind = type(t)
        if kind is int:
            append((t << 3) if t >= 0 else ((((-t) << 1) - 1) << TAG_BITS))
        elif kind is str:
            append(atom_token(t))
        elif kind is Var:
            index = varmap.get(t)
            if index is None:
                if t.id < 0:
                    raise TermStructureError(f"negative variable id {t.id}")
                index = len(varmap)
                varmap[t] = index
            append((index << TAG_BITS) | TAG_VAR)
        elif kind is Compound:
            if t.arity != len(t.args):
                raise TermStructureError(
                    f"{t.name}/{t.arity} built with {len(t.args)} arguments"
                )
            append(functor_token(t.name, t.arity))
            stack.extend(reversed(t.args))
        elif isinstance(t, int):
            append(int_token(int(t)))
        else:
            raise TermStructureError(f"{t!r} is not a term")


def term_tokens(term):
    """Token sequence of any term, variables renamed canonically."""
    out: List[int] = []
    _encode(term, out, {})
    return tuple(out)


def substitution_tokens(terms: Sequence[Term]):
    """Token sequence of several terms sharing one canonical variable numbering."""
    out: List[int] = []
    varmap: Dict[Var, int] = {}
    append = out.append
    for t in terms:
        while type(t) is Var:
            bound = t.binding
            if bound is None:
                break
            t = bound
        kind = type(t)
        if kind is int:
            append((t << 3) if t >= 0 else ((((-t) << 1) - 1) << TAG_BITS))
        elif kind is str:
            append(atom_token(t))
        else:
            _encode(t, out, varmap)
    return tuple(out)


def goal_predicate(goal):
    goal = deref(goal)
    if type(goal) is str:
        return (goal, 0)
    if type(goal) is Compound:
        return (goal.name, goal.arity)
    raise TermStructureError(f"{goal!r} is not a callable goal")


def canonical_call(goal):
    """Canonicalize ``goal`` and also return its free variables.

    Returns
    -------
    key: SubgoalKey
    variables: list of Var
        Distinct unbound variables of ``goal`` in first-occurrence order; the
        answers of the call are substitutions for exactly these variables.
    """
    predicate = goal_predicate(goal)
    goal = deref(goal)
    if predicate[1] == 0:
        # p and p() are the same call
        return SubgoalKey(predicate, (functor_token(predicate[0], 0),)), []
    out: List[int] = []
    varmap: Dict[Var, int] = {}
    _encode(goal, out, varmap)
    return SubgoalKey(predicate, tuple(out)), list(varmap)


def canonicalize(goal):
    """Return the :class:`SubgoalKey` of ``goal``.

    Raises
    ------
    TermStructureError
        If the goal is not an atom or compound, or contains a compound whose arity
        does not match its argument count.
    """
    return canonical_call(goal)[0]


def is_variant(a, b):
    """True iff ``a`` and ``b`` are identical up to a bijective variable renaming."""
    return term_tokens(a) == term_tokens(b)


def goal_variables(term):
    """Distinct unbound variables of ``term`` in first-occurrence order."""
    varmap: Dict[Var, int] = {}
    _encode(term, [], varmap)
    return list(varmap)


def _decode(tokens, i, variables, fresh):
    token = tokens[i]
    tag = token & TAG_MASK
    if tag == TAG_INT:
        zigzag = token >> TAG_BITS
        return (zigzag >> 1 if not zigzag & 1 else -((zigzag + 1) >> 1)), i + 1
    if tag == TAG_ATOM:
        return SYMBOLS.atom_name(token >> TAG_BITS), i + 1
    if tag == TAG_VAR:
        index = token >> TAG_BITS
        var = variables.get(index)
        if var is None:
            var = fresh_var() if fresh else Var(index)
            variables[index] = var
        return var, i + 1
    name, arity = SYMBOLS.functor_key(token >> TAG_BITS)
    i += 1
    args = []
    for _ in range(arity):
        arg, i = _decode(tokens, i, variables, fresh)
        args.append(arg)
    return Compound(name, args), i


def _flat_terms(tokens, variables, fresh):
    # one token per term: no functor here may take arguments
    names = SYMBOLS._atom_names
    terms = []
    append = terms.append
    for token in tokens:
        tag = token & TAG_MASK
        if tag == TAG_INT:
            zigzag = token >> TAG_BITS
            append(zigzag >> 1 if not zigzag & 1 else -((zigzag + 1) >> 1))
        elif tag == TAG_ATOM:
            append(names[token >> TAG_BITS])
        elif tag == TAG_VAR:
            index = token >> TAG_BITS
            var = variables.get(index)
            if var is None:
                var = fresh_var() if fresh else Var(index)
                variables[index] = var
            append(var)
        else:
            name, arity = SYMBOLS.functor_key(token >> TAG_BITS)
            if arity:
                raise TermStructureError(f"{name}/{arity} is missing its arguments")
            append(Compound(name, ()))
    return terms


def terms_from_tokens(tokens, count, fresh=True, variables=None):
    """Decode ``count`` consecutive terms from ``tokens``.

    Variable tokens with the same index decode to the same :class:`Var`; with
    ``fresh=True`` these are new runtime variables, otherwise ``Var(index)``.
    """
    if variables is None:
        variables = {}
    if len(tokens) == count:
        return _flat_terms(tokens, variables, fresh)
    terms = []
    i = 0
    for _ in range(count):
        term, i = _decode(tokens, i, variables, fresh)
        terms.append(term)
    if i != len(tokens):
        raise TermStructureError(f"{len(tokens) - i} trailing tokens after {count} terms")
    return terms


def term_from_tokens(tokens, fresh=False):
    """Rebuild a single term from its token sequence."""
    return terms_from_tokens(tokens, 1, fresh=fresh)[0]


def instantiate(key: SubgoalKey, fresh=True):
    """Rebuild the goal of ``key``.

    Returns the goal and its variables indexed by canonical number.
    """
    if key.predicate[1] == 0:
        return key.predicate[0], []
    variables: Dict[int, Var] = {}
    goal, end = _decode(key.tokens, 0, variables, fresh)
    if end != len(key.tokens):
        raise TermStructureError("subgoal key has trailing tokens")
    return goal, [variables[k] for k in range(len(variables))]


def _constant_token(term):
    if type(term) is str:
        return atom_token(term)
    return int_token(term)


def _identical(a, b):
    varmap: Dict[Var, int] = {}
    out_a: List[int] = []
    out_b: List[int] = []
    _encode(a, out_a, varmap)
    _encode(b, out_b, varmap)
    return out_a == out_b


def _match(tokens, i, term, bindings):
    token = tokens[i]
    tag = token & TAG_MASK
    term = deref(term)
    if tag == TAG_VAR:
        index = token >> TAG_BITS
        if index in bindings:
            if not _identical(bindings[index], term):
                raise ContractViolation("answer binds one generator variable twice")
        else:
            bindings[index] = term
        return i + 1
    if tag == TAG_FUNCTOR:
        functor = SYMBOLS.functor_key(token >> TAG_BITS)
        if functor[1] == 0:
            # an atom goal is the only bare atom a functor token stands for
            if term != Compound(functor[0], ()) and not (i == 0 and term == functor[0]):
                raise ContractViolation(f"{format_term(term)} does not match {functor[0]}")
            return i + 1
        if type(term) is not Compound or (term.name, term.arity) != functor:
            raise ContractViolation(
                f"{format_term(term)} does not match {functor[0]}/{functor[1]}"
            )
        i += 1
        for arg in term.args:
            i = _match(tokens, i, arg, bindings)
        return i
    if type(term) is Var or type(term) is Compound or _constant_token(term) != token:
        raise ContractViolation(
            f"{format_term(term)} does not match {format_token(token)}"
        )
    return i + 1


def answer_tokens(generator_key: SubgoalKey, answer) -> Tuple[int, ...]:
    """Substitution tokens of ``answer`` relative to the generator's call.

    One sub-sequence is produced per generator variable, in canonical order, with
    the remaining answer variables renamed canonically.

    Raises
    ------
    ContractViolation
        If ``answer`` is not an instance of the generator's goal.
    """
    bindings: Dict[int, Term] = {}
    end = _match(generator_key.tokens, 0, answer, bindings)
    if end != len(generator_key.tokens):
        raise ContractViolation("answer is shorter than its generator")
    return substitution_tokens([bindings[k] for k in range(len(bindings))])


def unify(a, b, trail: Optional[list] = None):
    """Unify two runtime terms by binding variables, without occurs check.

    Bound variables are appended to ``trail`` so the caller can undo them.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x)
        y = deref(y)
        if x is y:
            continue
        if type(x) is Var:
            x.binding = y
            if trail is not None:
                trail.append(x)
            continue
        if type(y) is Var:
            y.binding = x
            if trail is not None:
                trail.append(y)
            continue
        if type(x) is Compound:
            if type(y) is not Compound or x.name != y.name or x.arity != y.arity:
                return False
            stack.extend(zip(x.args, y.args))
            continue
        if type(y) is Compound or x != y or type(x) is not type(y):
            return False
    return True


def unify_all(terms, values, trail):
    """Unify ``terms`` pairwise with ``values``; stops at the first clash.

    Unbound variables and matching constants are handled inline, anything else
    goes through :func:`unify`.
    """
    for term, value in zip(terms, values):
        while type(term) is Var:
            bound = term.binding
            if bound is None:
                break
            term = bound
        kind = type(term)
        if kind is Var:
            if type(value) is Var:
                value = deref(value)
            if term is not value:
                term.binding = value
                trail.append(term)
        elif kind is type(value) and kind is not Compound:
            if term != value:
                return False
        elif not unify(term, value, trail):
            return False
    return True


def resolve(term):
    """Copy of ``term`` with every bound variable replaced by its value."""
    term = deref(term)
    if type(term) is Compound:
        return Compound(term.name, [resolve(a) for a in term.args])
    return term
