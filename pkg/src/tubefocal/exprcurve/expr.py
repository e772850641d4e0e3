"""Infix expression trees over named real variables.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom (("^" | "**") unary)?
    atom    := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Functions: sin, cos, tan, ln (alias log), sqrt, exp.  Built-in constants:
pi, e, sqrt2.  The exponent of ``^`` must not depend on any variable.

Trees are immutable; :func:`evaluate` works on floats, numpy arrays and
:class:`~tubefocal.exprcurve.jet.Jet` values alike.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import jet as J
from .jet import DomainError, Jet

BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e, "sqrt2": math.sqrt(2.0)}
FUNCTIONS = ("sin", "cos", "tan", "ln", "sqrt", "exp")
_ALIASES = {"log": "ln"}


class ExpressionError(ValueError):
    """Base class for expression parse/evaluation problems."""


class ExprSyntaxError(ExpressionError):
    def __init__(self, text: str, pos: int, expected):
        self.text = text
        self.pos = pos
        self.expected = tuple(sorted(expected))
        found = text[pos] if pos < len(text) else "end of input"
        super().__init__(
            f"syntax error at position {pos} (found {found!r}); expected one of {', '.join(self.expected)}"
        )


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, pos: int):
        self.name = name
        self.pos = pos
        super().__init__(f"unknown identifier {name!r} at position {pos}")


# nodes -------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str
    value: float


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Const, Unary, Binary]


def variables_of(node: Node) -> frozenset:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Unary):
        return variables_of(node.arg)
    if isinstance(node, Binary):
        return variables_of(node.left) | variables_of(node.right)
    return frozenset()


# tokenizer / parser -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(text, start, {"number", "name", "operator"})
        kind = m.lastgroup
        start = m.start(kind)
        val = m.group(kind)
        if kind == "op" and val == "**":
            val = "^"
        toks.append((kind, val, start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, variables, constants):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables)
        self.constants = dict(BUILTIN_CONSTANTS)
        self.constants.update(constants or {})

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, pos = self.peek()
        if v != val or kind == "end":
            raise ExprSyntaxError(self.text, pos, {repr(val)})
        self.i += 1

    def parse(self):
        node = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(self.text, pos, {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in ("-", "+"):
            self.take()
            arg = self.unary()
            return Unary("neg", arg) if v == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        kind, v, pos = self.peek()
        if kind == "op" and v == "^":
            self.take()
            exponent = self.unary()
            if variables_of(exponent):
                raise ExprSyntaxError(self.text, pos + 1, {"constant exponent"})
            return Binary("^", base, exponent)
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Num(float(v))
        if kind == "name":
            name = _ALIASES.get(v, v)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            if v in self.variables:
                return Var(v)
            if v in self.constants:
                return Const(v, float(self.constants[v]))
            raise UnknownIdentifier(v, pos)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(self.text, pos, {"number", "name", "'('", "'-'"})


def parse_expr(text: str, variables=("u",), constants: Mapping[str, float] | None = None) -> Node:
    """Parse ``text`` into an expression tree.

    ``variables`` lists the free variable names; ``constants`` adds named
    constants on top of the built-ins.
    """
    if not text or not text.strip():
        raise ExprSyntaxError(text or "", 0, {"expression"})
    return _Parser(text, variables, constants).parse()


def to_text(node: Node) -> str:
    """Fully parenthesised text that reparses to an identical tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


# evaluation -------------------------------------------------------------------


def _num_check(cond, msg):
    if np.any(cond):
        raise DomainError(msg)


def _apply(op: str, x):
    if isinstance(x, Jet):
        return {"sin": J.sin, "cos": J.cos, "tan": J.tan, "ln": J.log, "sqrt": J.sqrt, "exp": J.exp}[op](x)
    x = np.asarray(x, dtype=float)
    if op == "ln":
        _num_check(x <= 0, "ln of a nonpositive value")
        return np.log(x)
    if op == "sqrt":
        _num_check(x < 0, "sqrt of a negative value")
        return np.sqrt(x)
    if op == "tan":
        _num_check(np.abs(np.cos(x)) < 1e-12, "tan evaluated at a pole")
        return np.tan(x)
    return {"sin": np.sin, "cos": np.cos, "exp": np.exp}[op](x)


def evaluate(node: Node, env: Mapping[str, object]):
    """Evaluate a tree; variable values may be floats, arrays or jets."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownIdentifier(node.name, -1) from None
    if isinstance(node, Unary):
        a = evaluate(node.arg, env)
        return -a if node.op == "neg" else _apply(node.op, a)
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if isinstance(b, Jet):
            return a * J.reciprocal(b)
        _num_check(np.asarray(b) == 0, "division by zero")
        return a / b
    # constant exponent: b is a plain number
    p = float(b)
    if isinstance(a, Jet):
        return J.power(a, p)
    a = np.asarray(a, dtype=float)
    if not p.is_integer():
        _num_check(a < 0, "fractional power of a negative value")
    elif p < 0:
        _num_check(a == 0, "negative power of zero")
    return a**p


def eval_jet(node: Node, u: float, order: int = 3, var: str = "u", env=None) -> Jet:
    """Value and derivatives through ``order`` with respect to ``var`` at ``u``."""
    scope = dict(env or {})
    scope[var] = Jet.variable(u, order)
    out = evaluate(node, scope)
    shape = np.shape(u)
    if not isinstance(out, Jet):
        out = Jet.constant(np.broadcast_to(out, shape), order)
    elif out.shape != shape:
        out = Jet(np.broadcast_to(out.c, out.c.shape[:1] + shape).copy())
    return out


def eval_jet3(node: Node, u: float) -> Jet:
    return eval_jet(node, u, 3)


# symbolic partial derivative (no simplification beyond dropping zeros) -------

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_zero(n):
    return isinstance(n, Num) and n.value == 0.0


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    return Binary("*", a, b)


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Binary("+", a, b)


def _sub(a, b):
    if _is_zero(b):
        return a
    if _is_zero(a):
        return Unary("neg", b)
    return Binary("-", a, b)


def diff(node: Node, var: str) -> Node:
    """Partial derivative tree of ``node`` with respect to ``var``."""
    if isinstance(node, (Num, Const)):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Unary):
        da = diff(node.arg, var)
        if _is_zero(da):
            return _ZERO
        a = node.arg
        if node.op == "neg":
            return Unary("neg", da)
        outer = {
            "sin": lambda: Unary("cos", a),
            "cos": lambda: Unary("neg", Unary("sin", a)),
            "tan": lambda: Binary("/", _ONE, Binary("^", Unary("cos", a), Num(2.0))),
            "ln": lambda: Binary("/", _ONE, a),
            "sqrt": lambda: Binary("/", Num(0.5), Unary("sqrt", a)),
            "exp": lambda: Unary("exp", a),
        }[node.op]()
        return _mul(outer, da)
    a, b = node.left, node.right
    da, db = diff(a, var), diff(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        num = _sub(_mul(da, b), _mul(a, db))
        return _ZERO if _is_zero(num) else Binary("/", num, Binary("^", b, Num(2.0)))
    # a ^ const
    if _is_zero(da):
        return _ZERO
    return _mul(_mul(b, Binary("^", a, Binary("-", b, _ONE))), da)
