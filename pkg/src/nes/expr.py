"""Arithmetic expressions for config-defined cost functions.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``2^(-1)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .errors import DomainViolation

__all__ = [
    "ExprSyntaxError", "Num", "Var", "BinOp", "Neg", "Call", "ExprAst",
    "FUNCTIONS", "parse_cost_expr", "eval_ast", "compile_ast", "to_source",
    "ClampCounter",
]


class ExprSyntaxError(ValueError):
    """Malformed expression; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"


ExprAst = Union[Num, Var, BinOp, Neg, Call]

FUNCTIONS = ("log", "exp", "sin", "cos", "sqrt", "abs")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: frozenset[str]):
        self.text = text
        self.names = names
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            found = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self) -> ExprAst:
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {v!r}", pos, self.text)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        kind, v, _ = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and v == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.primary()
        kind, v, _ = self.peek()
        if kind == "op" and v == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> ExprAst:
        kind, v, pos = self.take()
        if kind == "num":
            return Num(float(v))
        if kind == "name":
            if self.peek()[1] == "(":
                if v not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {v!r}", pos, self.text)
                self.take()
                if self.peek()[1] == ")":
                    raise ExprSyntaxError(
                        f"{v}() takes exactly 1 argument (0 given)", self.peek()[2], self.text)
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ExprSyntaxError(
                        f"{v}() takes exactly 1 argument", self.peek()[2], self.text)
                self.expect(")")
                return Call(v, arg)
            if v in FUNCTIONS:
                raise ExprSyntaxError(f"function {v!r} used without arguments", pos, self.text)
            if v not in self.names:
                raise ExprSyntaxError(f"unknown identifier {v!r}", pos, self.text)
            return Var(v)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"unexpected {found}", pos, self.text)


def parse_cost_expr(text: str, params: Mapping[str, float] | None = None,
                    variables: Sequence[str] = ("x1", "x2")) -> ExprAst:
    """Parse ``text`` into an expression tree.

    Identifiers must be one of ``variables`` or a key of ``params``;
    parameters are substituted as constants at parse time.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text or "")
    params = dict(params or {})
    clash = set(params) & set(variables)
    if clash:
        raise ValueError(f"parameter names shadow variables: {sorted(clash)}")
    tree = _Parser(text, frozenset(variables) | frozenset(params)).parse()
    return _substitute(tree, params) if params else tree


def _substitute(node: ExprAst, params: Mapping[str, float]) -> ExprAst:
    if isinstance(node, Var):
        return Num(float(params[node.name])) if node.name in params else node
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute(node.left, params), _substitute(node.right, params))
    if isinstance(node, Neg):
        return Neg(_substitute(node.operand, params))
    if isinstance(node, Call):
        return Call(node.func, _substitute(node.arg, params))
    return node


class ClampCounter:
    """Counts soft-clamped evaluations near a domain boundary.

    Shared by every cost of a game running under the ``clamp`` boundary
    policy; ``floor`` is the smallest argument passed to ``log``.
    """

    def __init__(self, floor: float = 1e-9):
        self.floor = floor
        self.count = 0

    def log(self, a: float) -> float:
        if a < self.floor:
            self.count += 1
            a = self.floor
        return math.log(a)

    def base(self, a: float) -> float:
        if a < 0.0:
            self.count += 1
            return 0.0
        return a

    def reset(self) -> None:
        self.count = 0


def _log(a: float, clamp: ClampCounter | None) -> float:
    if clamp is not None:
        return clamp.log(a)
    if a <= 0.0:
        raise DomainViolation(f"log of non-positive argument {a!r}")
    return math.log(a)


def _sqrt(a: float, clamp: ClampCounter | None) -> float:
    if a < 0.0:
        if clamp is None:
            raise DomainViolation(f"sqrt of negative argument {a!r}")
        clamp.count += 1
        a = 0.0
    return math.sqrt(a)


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainViolation("division by zero")
    return a / b


def _pow(a: float, b: float, clamp: ClampCounter | None) -> float:
    if a < 0.0 and b != int(b):
        if clamp is None:
            raise DomainViolation(f"negative base {a!r} raised to non-integer power {b!r}")
        a = clamp.base(a)
    if a == 0.0 and b < 0.0:
        raise DomainViolation("zero raised to a negative power")
    return a ** b


_UNARY: dict[str, Callable] = {
    "exp": lambda a, c: math.exp(a),
    "sin": lambda a, c: math.sin(a),
    "cos": lambda a, c: math.cos(a),
    "abs": lambda a, c: abs(a),
    "log": _log,
    "sqrt": _sqrt,
}


def eval_ast(ast: ExprAst, x1: float, x2: float, variables: Sequence[str] = ("x1", "x2"),
             clamp: ClampCounter | None = None) -> float:
    """Evaluate ``ast`` at ``(x1, x2)`` by direct recursion.

    Raises DomainViolation for log/sqrt of invalid arguments, division by
    zero and fractional powers of negative numbers.  OverflowError from
    ``exp`` is left to propagate.
    """
    env = {variables[0]: x1, variables[1]: x2}

    def ev(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Call):
            return _UNARY[node.func](ev(node.arg), clamp)
        a, b = ev(node.left), ev(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return _div(a, b)
        return _pow(a, b, clamp)

    return ev(ast)


def compile_ast(ast: ExprAst, variables: Sequence[str] = ("x1", "x2"),
                clamp: ClampCounter | None = None) -> Callable[[float, float], float]:
    """Build a closure ``f(x1, x2)`` equivalent to :func:`eval_ast`.

    Roughly an order of magnitude faster than tree walking, which matters
    inside the integrator.
    """
    first, second = variables

    def build(node):
        if isinstance(node, Num):
            c = node.value
            return lambda a, b: c
        if isinstance(node, Var):
            if node.name == first:
                return lambda a, b: a
            return lambda a, b: b
        if isinstance(node, Neg):
            f = build(node.operand)
            return lambda a, b: -f(a, b)
        if isinstance(node, Call):
            f = build(node.arg)
            g = _UNARY[node.func]
            return lambda a, b: g(f(a, b), clamp)
        left, right = build(node.left), build(node.right)
        if node.op == "+":
            return lambda a, b: left(a, b) + right(a, b)
        if node.op == "-":
            return lambda a, b: left(a, b) - right(a, b)
        if node.op == "*":
            return lambda a, b: left(a, b) * right(a, b)
        if node.op == "/":
            return lambda a, b: _div(left(a, b), right(a, b))
        return lambda a, b: _pow(left(a, b), right(a, b), clamp)

    return build(ast)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_source(ast: ExprAst) -> str:
    """Pretty-print ``ast`` so that re-parsing gives an equivalent tree."""
    if isinstance(ast, Num):
        text = repr(ast.value)
        return f"({text})" if ast.value < 0 or text in ("inf", "nan") else text
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Call):
        return f"{ast.func}({to_source(ast.arg)})"
    if isinstance(ast, Neg):
        return f"-({to_source(ast.operand)})"
    return f"({to_source(ast.left)} {ast.op} {to_source(ast.right)})"
