"""Scalar fields from arithmetic expressions.

Grammar (left associative, no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := NUMBER | IDENT | '(' expr ')' | '-' factor | FUNC '(' expr ')'

Expressions evaluate elementwise on numpy arrays, so a coefficient can be
sampled at every quadrature point of a mesh in one call.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import (
    EllipticityViolation,
    ExprError,
    ExprSyntaxError,
    InputError,
    MissingBinding,
    NonFiniteResult,
    UnknownIdentifier,
)

FIELD_VARIABLES = frozenset({"x1", "x2", "u", "ux", "uy"})
COORDINATES = frozenset({"x1", "x2"})
BOUNDARY_VARIABLES = frozenset({"x1", "x2", "n1", "n2"})
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
MAX_LENGTH = 4096
MAX_DEPTH = 64

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/()]))"
)


# AST -------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x)) if x >= 0 else f"-{int(-x)}"
    return repr(float(x))


def to_text(node: Node) -> str:
    """Pretty-print with the minimum parentheses the grammar needs."""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[node.op]
    left = to_text(node.left)
    if _prec(node.left) < p:
        left = f"({left})"
    right = to_text(node.right)
    # left associativity: an equal-precedence right operand needs parentheses
    if _prec(node.right) <= p:
        right = f"({right})"
    if node.op in "+-":
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


# parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, variables: frozenset):
        self.text = text
        self.variables = variables
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad + 1)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start + 1))
            pos = m.end()
        self.tokens.append(("end", "", len(text) + 1))
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", off)

    def nest(self, off: int):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprSyntaxError(f"expression nested deeper than {MAX_DEPTH}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            value = float(val)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {val!r} overflows a double", off)
            return Num(value)
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                self.nest(off)
                arg = self.expr()
                self.depth -= 1
                self.expect(")")
                return Call(val, arg)
            if val not in self.variables:
                raise UnknownIdentifier(
                    f"unknown identifier {val!r} at offset {off}; "
                    f"allowed: {sorted(self.variables)} and functions {sorted(FUNCTIONS)}"
                )
            return Var(val)
        if val == "(" and kind == "op":
            self.nest(off)
            node = self.expr()
            self.depth -= 1
            self.expect(")")
            return node
        if val == "-" and kind == "op":
            self.nest(off)
            node = Neg(self.factor())
            self.depth -= 1
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


def tree_depth(node: Node) -> int:
    """Height of the AST (a leaf has depth 1); iterative so long chains are safe."""
    best = 0
    stack = [(node, 1)]
    while stack:
        n, d = stack.pop()
        best = max(best, d)
        if isinstance(n, BinOp):
            stack.append((n.left, d + 1))
            stack.append((n.right, d + 1))
        elif isinstance(n, Neg):
            stack.append((n.operand, d + 1))
        elif isinstance(n, Call):
            stack.append((n.arg, d + 1))
    return best


def _free(node: Node) -> frozenset:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, (Neg,)):
        return _free(node.operand)
    if isinstance(node, Call):
        return _free(node.arg)
    return _free(node.left) | _free(node.right)


def _compile(node: Node):
    if isinstance(node, Num):
        v = node.value
        return lambda env: v
    if isinstance(node, Var):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda env: -f(env)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.func]
        f = _compile(node.arg)
        return lambda env: fn(f(env))
    a, b = _compile(node.left), _compile(node.right)
    if node.op == "+":
        return lambda env: a(env) + b(env)
    if node.op == "-":
        return lambda env: a(env) - b(env)
    if node.op == "*":
        return lambda env: a(env) * b(env)
    return lambda env: a(env) / b(env)


@dataclass(frozen=True, eq=False)
class Expr:
    """A parsed expression; immutable and safe to share."""

    root: Node
    free_variables: frozenset
    _fn: object = field(repr=False, compare=False)

    def __str__(self) -> str:
        return to_text(self.root)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __call__(self, **bindings):
        return eval_expr(self, bindings)

    @property
    def is_constant(self) -> bool:
        return not self.free_variables


def parse_expr(text: str, variables=FIELD_VARIABLES) -> Expr:
    """Parse ``text``; identifiers must be in ``variables`` or be a known function."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 1)
    if len(text) > MAX_LENGTH:
        raise InputError(f"expression longer than {MAX_LENGTH} characters")
    root = _Parser(text, frozenset(variables)).parse()
    depth = tree_depth(root)
    if depth > MAX_DEPTH:
        raise ExprError(f"expression tree depth {depth} exceeds {MAX_DEPTH}")
    return Expr(root, _free(root), _compile(root))


def eval_expr(e: Expr, bindings: Mapping[str, object]):
    """Evaluate in IEEE double precision; arrays broadcast elementwise."""
    missing = e.free_variables - set(bindings)
    if missing:
        raise MissingBinding(f"no value bound for {sorted(missing)}")
    env = {k: np.asarray(bindings[k], dtype=np.float64) for k in e.free_variables}
    with np.errstate(all="ignore"):
        out = np.asarray(e._fn(env), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult(f"{e} evaluated to a non-finite value")
    if out.ndim == 0:
        return float(out)
    return out


def as_expr(value, variables=FIELD_VARIABLES) -> Expr:
    if isinstance(value, Expr):
        extra = value.free_variables - set(variables)
        if extra:
            raise UnknownIdentifier(f"{value} uses {sorted(extra)}, allowed {sorted(variables)}")
        return value
    if isinstance(value, (int, float)):
        value = repr(float(value))
    return parse_expr(value, variables)


def evaluate_field(e: Expr, points, **extra) -> np.ndarray:
    """Sample ``e`` at an ``(n, 2)`` array of points, always returning shape ``(n,)``."""
    pts = np.asarray(points, dtype=np.float64)
    val = eval_expr(e, {"x1": pts[:, 0], "x2": pts[:, 1], **extra})
    return np.broadcast_to(np.asarray(val, dtype=np.float64), (len(pts),))


# coefficients ----------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientField:
    """Symmetric diffusion matrix ``[[a11, a12], [a12, a22]]`` plus optional ``c0``.

    ``nu`` is the declared ellipticity floor checked by :meth:`check`.
    """

    a11: Expr
    a12: Expr
    a22: Expr
    c0: Expr | None = None
    nu: float = 1e-6

    def __post_init__(self):
        for name in ("a11", "a12", "a22", "c0"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, as_expr(value, COORDINATES))
        if not self.nu > 0:
            raise InputError(f"ellipticity floor must be positive, got {self.nu}")

    @classmethod
    def laplacian(cls, c0=None) -> "CoefficientField":
        return cls("1", "0", "1", c0)

    @property
    def is_constant(self) -> bool:
        parts = [self.a11, self.a12, self.a22] + ([self.c0] if self.c0 is not None else [])
        return all(p.is_constant for p in parts)

    def matrix(self, points) -> np.ndarray:
        """``(n, 2, 2)`` diffusion matrices at the given points."""
        a11 = evaluate_field(self.a11, points)
        a12 = evaluate_field(self.a12, points)
        a22 = evaluate_field(self.a22, points)
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    def zero_order(self, points) -> np.ndarray | None:
        if self.c0 is None:
            return None
        return evaluate_field(self.c0, points)

    def check(self, lower, upper, n: int = 32) -> None:
        """Spot-check ellipticity on an ``n x n`` grid over ``[lower, upper]``.

        A heuristic guard, not a proof: raises :class:`EllipticityViolation` if
        the smallest eigenvalue of the matrix drops below ``nu`` or ``c0`` is
        negative at any grid node.
        """
        xs = np.linspace(lower[0], upper[0], n)
        ys = np.linspace(lower[1], upper[1], n)
        gx, gy = np.meshgrid(xs, ys)
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        a11 = evaluate_field(self.a11, pts)
        a12 = evaluate_field(self.a12, pts)
        a22 = evaluate_field(self.a22, pts)
        lam_min = 0.5 * (a11 + a22) - np.sqrt(0.25 * (a11 - a22) ** 2 + a12 ** 2)
        worst = int(np.argmin(lam_min))
        if lam_min[worst] < self.nu:
            raise EllipticityViolation(
                f"smallest eigenvalue {lam_min[worst]:.4g} < nu={self.nu:g} at {pts[worst].tolist()}"
            )
        if self.c0 is not None:
            c0 = evaluate_field(self.c0, pts)
            if np.min(c0) < 0:
                k = int(np.argmin(c0))
                raise EllipticityViolation(f"c0 = {c0[k]:.4g} < 0 at {pts[k].tolist()}")

    def to_json(self) -> dict:
        return {
            "a11": str(self.a11),
            "a12": str(self.a12),
            "a22": str(self.a22),
            "c0": None if self.c0 is None else str(self.c0),
            "nu": self.nu,
        }


__all__ = [
    "BOUNDARY_VARIABLES",
    "COORDINATES",
    "FIELD_VARIABLES",
    "FUNCTIONS",
    "BinOp",
    "Call",
    "CoefficientField",
    "Expr",
    "Neg",
    "Num",
    "Var",
    "as_expr",
    "eval_expr",
    "evaluate_field",
    "parse_expr",
    "to_text",
    "tree_depth",
]
