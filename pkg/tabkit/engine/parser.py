"""Reader of the program text format.

The supported syntax is the Prolog subset the benchmark programs use::

    :- table path/2.
    :- table ks(index, index, max).
    edge(1, 2).
    path(X, Z) :- path(X, Y), edge(Y, Z).

Variables of one clause are numbered ``0, 1, ...`` in order of appearance;
every ``_`` is a distinct variable. ``%`` starts a comment.
"""

import logging
import re
from typing import List, NamedTuple

from tabkit.exceptions import ProgramError
from tabkit.term import Compound, Var


log = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<punct>[(),\[\]|])
  | (?P<symbol>[-+*/\\^<>=~:.?@#&$]+)
    """,
    re.VERBOSE,
)

# name: (priority, type)
INFIX = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    "mod": (400, "yfx"),
}
PREFIX = {
    ":-": (1200, "fx"),
    "table": (1150, "fx"),
    "-": (200, "fy"),
}


class Token(NamedTuple):
    kind: str
    text: str
    line: int


def tokenize(text) -> List[Token]:
    tokens = []
    pos = 0
    line = 1
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ProgramError(f"line {line}: unexpected character {text[pos]!r}")
        kind = match.lastgroup
        value = match.group()
        if kind == "symbol" and value.endswith(".") and (
            match.end() == len(text) or text[match.end()] in " \t\r\n%"
        ):
            # the clause terminator glued to an operator, e.g. ``X = a.``
            if len(value) > 1:
                tokens.append(Token("symbol", value[:-1], line))
            tokens.append(Token("end", ".", line))
        elif kind == "quoted":
            tokens.append(Token("atom", value[1:-1].replace("\\'", "'"), line))
        elif kind != "ws":
            tokens.append(Token(kind, value, line))
        line += value.count("\n")
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.varmap = {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        token = self.peek()
        if token is None:
            raise ProgramError("unexpected end of text")
        self.pos += 1
        return token

    def expect(self, text):
        token = self.next()
        if token.text != text:
            raise ProgramError(f"line {token.line}: expected {text!r}, got {token.text!r}")

    def variable(self, name):
        if name == "_":
            var = Var(len(self.varmap))
            self.varmap[object()] = var
            return var
        var = self.varmap.get(name)
        if var is None:
            var = self.varmap[name] = Var(len(self.varmap))
        return var

    def _infix(self, token):
        if token is None or token.kind not in ("symbol", "atom", "punct"):
            return None
        return INFIX.get(token.text)

    def parse(self, max_priority=1200):
        left, left_priority = self.primary(max_priority)
        while True:
            token = self.peek()
            op = self._infix(token)
            if op is None:
                break
            priority, kind = op
            if priority > max_priority:
                break
            left_max = priority - 1 if kind in ("xfx", "xfy") else priority
            if left_priority > left_max:
                break
            self.next()
            right_max = priority if kind == "xfy" else priority - 1
            right = self.parse(right_max)
            left = Compound(token.text, [left, right])
            left_priority = priority
        return left

    def arguments(self):
        args = [self.parse(999)]
        while self.peek() is not None and self.peek().text == ",":
            self.next()
            args.append(self.parse(999))
        self.expect(")")
        return args

    def primary(self, max_priority):
        token = self.next()
        kind, text = token.kind, token.text
        if kind == "int":
            return int(text), 0
        if kind == "var":
            return self.variable(text), 0
        if text == "(":
            term = self.parse(1200)
            self.expect(")")
            return term, 0
        if text == "[":
            return self.list_tail(), 0
        if kind in ("atom", "symbol"):
            follow = self.peek()
            if follow is not None and follow.text == "(" and kind == "atom":
                self.next()
                return Compound(text, self.arguments()), 0
            if text == "-" and follow is not None and follow.kind == "int":
                self.next()
                return -int(follow.text), 0
            prefix = PREFIX.get(text)
            if prefix is not None and follow is not None and self._starts_term(follow):
                priority, op = prefix
                if priority <= max_priority:
                    arg = self.parse(priority if op == "fy" else priority - 1)
                    return Compound(text, [arg]), priority
            return text, 0
        raise ProgramError(f"line {token.line}: unexpected {text!r}")

    def list_tail(self):
        if self.peek() is not None and self.peek().text == "]":
            self.next()
            return "[]"
        items = [self.parse(999)]
        while self.peek().text == ",":
            self.next()
            items.append(self.parse(999))
        tail = "[]"
        if self.peek().text == "|":
            self.next()
            tail = self.parse(999)
        self.expect("]")
        for item in reversed(items):
            tail = Compound(".", [item, tail])
        return tail

    def _starts_term(self, token):
        if token.kind in ("int", "var", "atom"):
            return token.text not in INFIX or token.text in PREFIX
        return token.text in ("(", "[") or token.text in PREFIX

    def clause(self):
        self.varmap = {}
        term = self.parse(1200)
        token = self.next()
        if token.kind != "end":
            raise ProgramError(f"line {token.line}: expected '.', got {token.text!r}")
        return term, len(self.varmap)


def parse_clauses(text):
    """Yield ``(term, n_vars)`` for every clause or directive of ``text``."""
    parser = _Parser(tokenize(text))
    while parser.peek() is not None:
        yield parser.clause()


def parse_term(text):
    """Parse one term, with or without the final ``.``.

    Examples
    --------
    >>> parse_term("path(X, Y)")
    path(V0,V1)
    """
    parser = _Parser(tokenize(text))
    term = parser.parse(1200)
    token = parser.peek()
    if token is not None and token.kind == "end":
        parser.next()
        token = parser.peek()
    if token is not None:
        raise ProgramError(f"line {token.line}: trailing {token.text!r}")
    return term
