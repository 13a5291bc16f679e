"""Small recursive-descent parser for source expressions in x and y.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | 'y' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .torus import Field2D, grid_coordinates

__all__ = ["ExpressionError", "NonPeriodicWarning", "Expression", "parse_expression", "parse_source_expression"]

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
CONSTANTS = {"pi": np.pi}
VARIABLES = ("x", "y")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class ExpressionError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonPeriodicWarning(UserWarning):
    pass


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if not mt:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = mt.lastgroup
        start = mt.start(kind)
        toks.append(_Tok(kind, mt.group(kind), start))
        pos = mt.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            raise ExpressionError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExpressionError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text in ("+", "-"):
            op = self.take().text
            operand = self.unary()
            return operand if op == "+" else ("neg", operand)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return ("num", float(t.text))
        if t.kind == "name":
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", t.text, arg)
            if t.text in CONSTANTS:
                return ("num", CONSTANTS[t.text])
            if t.text in VARIABLES:
                return ("var", t.text)
            raise ExpressionError(f"unknown name {t.text!r}", t.pos)
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected {t.text or 'end of input'!r}", t.pos)


def _eval(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -_eval(node[1], env)
    if kind == "call":
        return FUNCTIONS[node[1]](_eval(node[2], env))
    a, b = _eval(node[1], env), _eval(node[2], env)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        return a / b
    return np.power(a, b)


class Expression:
    def __init__(self, text: str):
        self.text = text
        self.tree = _Parser(text).parse()

    def __call__(self, x, y):
        return _eval(self.tree, {"x": x, "y": y})

    def sample(self, n: int, period: float = 1.0) -> Field2D:
        x, y = grid_coordinates(n, period)
        with np.errstate(all="ignore"):
            values = np.broadcast_to(np.asarray(self(x, y), dtype=float), (n, n))
        return Field2D(values, period)

    def is_periodic(self, n: int, period: float = 1.0, rtol: float = 1e-9) -> bool:
        x, y = grid_coordinates(n, period)
        base = np.broadcast_to(self(x, y), (n, n))
        shifted_x = np.broadcast_to(self(x + period, y), (n, n))
        shifted_y = np.broadcast_to(self(x, y + period), (n, n))
        scale = 1.0 + np.max(np.abs(base))
        return bool(
            np.max(np.abs(shifted_x - base)) <= rtol * scale
            and np.max(np.abs(shifted_y - base)) <= rtol * scale
        )


def parse_expression(text: str) -> Expression:
    return Expression(text)


def parse_source_expression(text: str, n: int, period: float = 1.0) -> Field2D:
    """Sample an expression on the grid; warns with NonPeriodicWarning if not L-periodic."""
    e = Expression(text)
    field = e.sample(n, period)
    if not e.is_periodic(n, period):
        warnings.warn(
            f"expression {text!r} is not {period:g}-periodic; spectral derivatives will be inaccurate",
            NonPeriodicWarning,
            stacklevel=2,
        )
    return field
