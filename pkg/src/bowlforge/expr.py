"""Parser and evaluator for the symmetric speed-expression language.

Expressions are built from the elementary symmetric polynomials ``S1..Sn``
of the principal curvatures, the shorthands ``H`` (= S1/n) and ``K`` (= Sn),
the dimension constant ``n``, numeric literals and ``+ - * / ^``.  Only
symmetric atoms are exposed, so every parsed expression is symmetric by
construction; raw curvature variables are deliberately not part of the
grammar.

Grammar (whitespace-insensitive)::

    expr     := term (("+"|"-") term)*
    term     := factor (("*"|"/") factor)*
    factor   := base ("^" exponent)?
    exponent := number | "(" const_expr ")"
    base     := number | atom | "(" expr ")" | "-" base
    atom     := "S" digit+ | "H" | "K" | "n"

Exponents must be constants (a literal, or a parenthesized arithmetic
expression without curvature atoms, e.g. ``(1/3)``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, DomainError, NotHomogeneous, ParseError

__all__ = [
    "SpeedExpr",
    "parse_speed",
    "measure_homogeneity",
    "elementary_symmetric",
]


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Atom:
    # kind "S": order k elementary symmetric polynomial; "H": S1/n; "K": Sn;
    # "n": the dimension constant.
    kind: str
    order: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float


Node = Union[Num, Atom, Neg, Bin, Pow]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<atom>S\d+|H|K|n)"
    r"|(?P<op>[+\-*/^()])"
    r")"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.lastgroup is None:
            # skip leading whitespace before reporting
            stripped = pos + len(source[pos:]) - len(source[pos:].lstrip())
            if stripped >= len(source):
                break
            raise ParseError(f"unexpected character {source[stripped]!r}", stripped)
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, m.end() - len(text)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], dim: int):
        self.tokens = tokens
        self.dim = dim
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ParseError(f"got {text!r}" if text else "unexpected end of input",
                         pos, {op})

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {text!r}", pos, {"end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Bin(text, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Bin(text, node, self.factor())
            else:
                return node

    def factor(self) -> Node:
        # unary minus binds looser than ^, so -S1^2 means -(S1^2)
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> float:
        kind, text, pos = self.peek()
        if kind == "number":
            self.advance()
            return float(text)
        if kind == "op" and text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            value = _fold_constant(inner, pos)
            return value
        raise ParseError(f"got {text!r}" if text else "unexpected end of input",
                         pos, {"number", "("})

    def base(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "number":
            return Num(float(text))
        if kind == "atom":
            return self.atom(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and text == "-":
            return Neg(self.base())
        raise ParseError(f"got {text!r}" if text else "unexpected end of input",
                         pos, {"number", "atom", "(", "-"})

    def atom(self, text: str, pos: int) -> Node:
        if text == "H":
            return Atom("H")
        if text == "K":
            return Atom("K")
        if text == "n":
            return Atom("n")
        order = int(text[1:])
        if order < 1 or order > self.dim:
            raise DimensionError(
                f"S{order} is out of range for dimension {self.dim} "
                f"(valid: S1..S{self.dim})")
        return Atom("S", order)


def _fold_constant(node: Node, pos: int) -> float:
    """Evaluate a constant subtree; curvature atoms are not allowed."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Atom):
        if node.kind == "n":
            raise ParseError("dimension constant not allowed in exponent", pos)
        raise ParseError("exponent must be constant", pos)
    if isinstance(node, Neg):
        return -_fold_constant(node.operand, pos)
    if isinstance(node, Bin):
        a = _fold_constant(node.lhs, pos)
        b = _fold_constant(node.rhs, pos)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise ParseError("division by zero in constant exponent", pos)
        return a / b
    return math.pow(_fold_constant(node.base, pos), node.exponent)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def elementary_symmetric(z: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials of ``z``: returns [S0, S1, .., Sn].

    Uses the standard one-pass recurrence; for positive inputs every partial
    sum is positive, so there is no cancellation.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    s = np.zeros(n + 1)
    s[0] = 1.0
    for i in range(n):
        hi = min(i + 1, n)
        s[1:hi + 1] = s[1:hi + 1] + z[i] * s[0:hi]
    return s


def _eval_node(node: Node, s: np.ndarray, dim: int) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Atom):
        if node.kind == "S":
            return s[node.order]
        if node.kind == "H":
            return s[1] / dim
        if node.kind == "K":
            return s[dim]
        return float(dim)
    if isinstance(node, Neg):
        return -_eval_node(node.operand, s, dim)
    if isinstance(node, Bin):
        a = _eval_node(node.lhs, s, dim)
        b = _eval_node(node.rhs, s, dim)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero while evaluating speed expression")
        return a / b
    base = _eval_node(node.base, s, dim)
    e = node.exponent
    if base < 0.0 and e != round(e):
        raise DomainError(
            f"fractional power of negative value {base!r} in speed expression")
    if base == 0.0 and e < 0.0:
        raise DomainError("zero raised to a negative power in speed expression")
    return math.pow(base, e)


@dataclass(frozen=True)
class SpeedExpr:
    """A parsed, immutable speed expression over symmetric curvature atoms."""

    ast: Node
    dim: int
    source: str

    def evaluate(self, z: np.ndarray) -> float:
        """Evaluate at a positive curvature vector of length ``dim``.

        Raises DomainError rather than returning NaN or infinity.
        """
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise DomainError(
                f"expected a vector of {self.dim} curvatures, got shape {z.shape}")
        if not np.all(z > 0.0):
            raise DomainError("curvatures must be positive")
        s = elementary_symmetric(z)
        value = _eval_node(self.ast, s, self.dim)
        if not math.isfinite(value):
            raise DomainError(f"speed expression evaluated to {value!r}")
        if value <= 0.0:
            raise DomainError(
                f"speed expression evaluated to non-positive value {value!r}")
        return value

    def __call__(self, z: np.ndarray) -> float:
        return self.evaluate(z)


def parse_speed(source: str, dim: int) -> SpeedExpr:
    """Parse ``source`` into a SpeedExpr over ``dim`` principal curvatures."""
    if dim < 2:
        raise DimensionError(f"dimension must be at least 2, got {dim}")
    if not source or not source.strip():
        raise ParseError("empty speed expression", 0)
    tokens = _tokenize(source)
    ast = _Parser(tokens, dim).parse()
    return SpeedExpr(ast=ast, dim=dim, source=source)


def measure_homogeneity(expr: SpeedExpr, lam: float = 2.0, tol: float = 1e-8) -> float:
    """Estimate the homogeneity degree of ``expr`` by scaling probes.

    Averages log_lam(f(lam*z)/f(z)) over 20 seeded random positive points;
    raises NotHomogeneous when the per-point estimates spread more than tol.
    """
    rng = np.random.default_rng(20210615)
    log_lam = math.log(lam)
    estimates = []
    for _ in range(20):
        z = rng.uniform(0.2, 5.0, size=expr.dim)
        estimates.append(math.log(expr.evaluate(lam * z) / expr.evaluate(z)) / log_lam)
    spread = max(estimates) - min(estimates)
    if spread > tol:
        raise NotHomogeneous(
            f"homogeneity estimates spread {spread:.3e} exceeds {tol:.1e} "
            f"(range [{min(estimates)!r}, {max(estimates)!r}])")
    return float(np.mean(estimates))
