"""Builtin predicates: arithmetic, comparison and (dis)unification.

Every builtin takes the argument tuple and the trail, binds through
:func:`tabkit.term.unify` and returns whether it succeeded.
"""

import operator

from tabkit.exceptions import ArithmeticTypeError
from tabkit.term import Compound, Var, deref, format_term, unify


def _div(a, b):
    if b == 0:
        raise ArithmeticTypeError("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a, b):
    if b == 0:
        raise ArithmeticTypeError("mod by zero")
    return a % b


FUNCTIONS = {
    ("+", 2): operator.add,
    ("-", 2): operator.sub,
    ("*", 2): operator.mul,
    ("//", 2): _div,
    ("mod", 2): _mod,
    ("max", 2): max,
    ("min", 2): min,
    ("-", 1): operator.neg,
    ("abs", 1): abs,
}


def evaluate(term):
    """Value of an integer expression.

    Raises
    ------
    ArithmeticTypeError
        On unbound variables, atoms and unknown functions.
    """
    term = deref(term)
    kind = type(term)
    if kind is int:
        return term
    if kind is Compound:
        fn = FUNCTIONS.get((term.name, term.arity))
        if fn is None:
            raise ArithmeticTypeError(f"{term.name}/{term.arity} is not an arithmetic function")
        return fn(*(evaluate(a) for a in term.args))
    if kind is Var:
        raise ArithmeticTypeError("arguments are not sufficiently instantiated")
    raise ArithmeticTypeError(f"{format_term(term)} is not a number")


def _is(args, trail):
    return unify(args[0], evaluate(args[1]), trail)


def _compare(op):
    def builtin(args, trail):
        return op(evaluate(args[0]), evaluate(args[1]))

    return builtin


def _unify(args, trail):
    return unify(args[0], args[1], trail)


def _not_unifiable(args, trail):
    local = []
    result = unify(args[0], args[1], local)
    for var in local:
        var.binding = None
    return not result


BUILTINS = {
    ("is", 2): _is,
    ("=", 2): _unify,
    ("\\=", 2): _not_unifiable,
    ("<", 2): _compare(operator.lt),
    (">", 2): _compare(operator.gt),
    ("=<", 2): _compare(operator.le),
    (">=", 2): _compare(operator.ge),
    ("=:=", 2): _compare(operator.eq),
    ("=\\=", 2): _compare(operator.ne),
    ("true", 0): lambda args, trail: True,
    ("fail", 0): lambda args, trail: False,
}
