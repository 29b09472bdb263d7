"""Parse scalar expressions such as ``"x3^4 + sin(x2)*x4"`` into evaluable trees.

Grammar (whitespace is ignored)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

so ``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``. A power whose exponent
is an integer literal is evaluated by repeated multiplication and accepts a
negative base; any other exponent requires a positive base.

Trees evaluate on plain floats or on :class:`~siklos.jets.Jet2` values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import jets
from .errors import DivisionByZero, DomainError, ExprSyntaxError, UnknownIdentifier
from .jets import Jet2

H_VARS = ("x2", "x3", "x4")
U_VARS = ("u1", "u2", "u3")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)

# binding strength used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


class Node:
    offset: int

    def free_vars(self) -> frozenset:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Node):
    value: float
    offset: int = field(default=0, compare=False)

    def evaluate(self, env):
        return self.value

    def free_vars(self):
        return frozenset()

    def is_integer(self) -> bool:
        return float(self.value).is_integer()


@dataclass(frozen=True)
class Var(Node):
    name: str
    offset: int = field(default=0, compare=False)

    def evaluate(self, env):
        return env[self.name]

    def free_vars(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    offset: int = field(default=0, compare=False)

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def free_vars(self):
        return self.arg.free_vars()


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node
    offset: int = field(default=0, compare=False)

    def evaluate(self, env):
        a = self.arg.evaluate(env)
        try:
            return jets.FUNCTIONS[self.func](a)
        except DomainError as exc:
            raise _located(exc, self) from None

    def free_vars(self):
        return self.arg.free_vars()


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node
    offset: int = field(default=0, compare=False)

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        try:
            if self.op == "+":
                return a + b
            if self.op == "-":
                return a - b
            if self.op == "*":
                return a * b
            if self.op == "/":
                if not isinstance(b, Jet2) and b == 0:
                    raise DivisionByZero("division by zero")
                return a / b
            return _power(a, b, self.right)
        except (DomainError, DivisionByZero) as exc:
            raise _located(exc, self) from None

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()


def _power(a, b, exponent: Node):
    if isinstance(exponent, Const) and exponent.is_integer():
        k = int(exponent.value)
        if isinstance(a, Jet2):
            return a.ipow(k)
        if a == 0 and k < 0:
            raise DivisionByZero("zero to a negative power")
        return float(a) ** k
    base = a.value if isinstance(a, Jet2) else a
    if base <= 0.0:
        raise DomainError(f"non-integer power of non-positive base {base}")
    if isinstance(a, Jet2) or isinstance(b, Jet2):
        if not isinstance(a, Jet2):
            return b.__rpow__(a)
        return a ** b
    return float(a) ** float(b)


def _located(exc, node):
    if getattr(exc, "located", False):
        return exc
    new = type(exc)(f"{exc} in '{to_text(node)}' at offset {node.offset}")
    new.located = True
    new.offset = node.offset
    return new


class _Parser:
    def __init__(self, src: str, variables: Sequence[str]):
        self.src = src
        self.variables = set(variables)
        self.tokens = self._tokenize(src)
        self.pos = 0

    @staticmethod
    def _tokenize(src):
        tokens = []
        i = 0
        while i < len(src):
            if src[i].isspace():
                i += 1
                continue
            m = _TOKEN.match(src, i)
            if not m or m.end() == i:
                raise ExprSyntaxError(f"unexpected character {src[i]!r}", i)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            i = m.end()
        tokens.append(("end", "", len(src)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        kind, value, off = self.take()
        if value != text or kind != "op":
            what = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", off)

    def parse(self):
        node = self.expr()
        kind, value, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, off = self.take()
            node = Binary(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, off = self.take()
            node = Binary(op, node, self.unary(), off)
        return node

    def unary(self):
        kind, value, off = self.peek()
        if kind == "op" and value in ("-", "+"):
            self.take()
            arg = self.unary()
            if value == "+":
                return arg
            if isinstance(arg, Const):
                # fold so that x^-2 keeps an integer-literal exponent
                return Const(-arg.value, off)
            return Neg(arg, off)
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, off = self.peek()
        if kind == "op" and value == "^":
            self.take()
            return Binary("^", base, self.unary(), off)
        return base

    def atom(self):
        kind, value, off = self.take()
        if kind == "num":
            return Const(float(value), off)
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if value not in jets.FUNCTIONS:
                    raise UnknownIdentifier(value, off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(value, arg, off)
            if value not in self.variables:
                raise UnknownIdentifier(value, off)
            return Var(value, off)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {what}", off)


class Expr:
    """Immutable parsed expression over a declared variable list."""

    def __init__(self, root: Node, variables: Sequence[str], src: str | None = None):
        self.root = root
        self.variables = tuple(variables)
        self.src = src if src is not None else to_text(root)

    @property
    def free_vars(self) -> frozenset:
        return self.root.free_vars()

    def _env(self, at):
        if isinstance(at, Mapping):
            env = dict(at)
        else:
            at = list(at)
            if len(at) != len(self.variables):
                raise ValueError(f"expected {len(self.variables)} values, got {len(at)}")
            env = dict(zip(self.variables, at))
        missing = self.free_vars - env.keys()
        if missing:
            raise ValueError(f"no value for {sorted(missing)}")
        return env

    def __call__(self, *values):
        """Evaluate on floats (positional, in declared variable order)."""
        return float(self.root.evaluate(self._env(values)))

    def eval_jet(self, at) -> Jet2:
        """Jet at ``at``; plain numbers are seeded as the context's variables in order."""
        env = self._env(at)
        n = next((v.n for v in env.values() if isinstance(v, Jet2)), None)
        if n is None:
            seeded = jets.seed([float(env[v]) for v in self.variables])
            env = dict(zip(self.variables, seeded))
            n = len(self.variables)
        out = self.root.evaluate(env)
        if not isinstance(out, Jet2):
            out = jets.constant(out, n)
        return out

    def __str__(self):
        return to_text(self.root)

    def __repr__(self):
        return f"Expr({self.src!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.root == other.root and self.variables == other.variables

    def __hash__(self):
        return hash((self.root, self.variables))


def parse(src: str, variables: Sequence[str] = H_VARS) -> Expr:
    """Parse ``src`` into an :class:`Expr` whose variables must come from ``variables``.

    Raises :class:`ExprSyntaxError` (with byte offset) on malformed text and
    :class:`UnknownIdentifier` on names that are neither a declared variable
    nor one of exp/ln/sin/cos/sinh/cosh/sqrt.
    """
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    root = _Parser(src, variables).parse()
    return Expr(root, variables, src)


def eval_jet(e: Expr, at) -> Jet2:
    return e.eval_jet(at)


def to_text(node: Node, parent: int = 0) -> str:
    """Print ``node`` with the minimal parentheses needed to re-parse it identically."""
    if isinstance(node, Const):
        text = repr(float(node.value))
        if "inf" in text or "nan" in text:
            raise ValueError(f"cannot print non-finite constant {node.value}")
        if text.endswith(".0"):
            text = text[:-2]
        if node.value < 0 or text.startswith("-"):
            return f"({text})"
        return text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        text = "-" + to_text(node.arg, _PREC["neg"])
        return f"({text})" if parent >= _PREC["neg"] else text
    prec = _PREC[node.op]
    if node.op == "^":
        # right associative: the left operand needs parentheses at equal precedence
        text = f"{to_text(node.left, prec + 1)}^{to_text(node.right, prec)}"
    else:
        text = f"{to_text(node.left, prec)}{node.op}{to_text(node.right, prec + 1)}"
    return f"({text})" if parent > prec else text
