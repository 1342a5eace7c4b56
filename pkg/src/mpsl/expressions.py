"""Expression language for nonlinearities f(xi) and forcing terms h(x).

Grammar (whitespace-insensitive):

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := unary ('^' factor)?          -- power is right-associative
    unary   := '-' unary | primary          -- unary minus binds tighter than '^'
    primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Identifiers: the variables ``xi`` and ``x``, the constant ``pi``, and the
functions sin, cos, atan, exp, log, abs, sqrt.  ``**`` is accepted as an
alias for ``^`` on input; the canonical printer emits ``^``.  Note the
unary-minus rule: ``-x^2`` parses as ``(-x)^2``.

Beyond parsing, this module certifies the structural hypotheses placed on a
nonlinearity: the sign condition xi*f(xi) > 0 off 0, the limits
f0 = lim_{xi->0} f(xi)/xi and finf = lim_{|xi|->inf} f(xi)/xi, and the
quadratic envelopes F(xi) <= gamma*xi^2 / >= gamma*xi^2 for the
antiderivative F(xi) = 2*int_0^xi f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import ParseError, QuadratureError

FUNCTIONS = ("sin", "cos", "atan", "exp", "log", "abs", "sqrt")
VARIABLES = ("xi", "x")
CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Call


# ---------------------------------------------------------------------------
# lexer


_TOK_NUM = "num"
_TOK_IDENT = "ident"
_TOK_OP = "op"
_TOK_LPAREN = "("
_TOK_RPAREN = ")"
_TOK_COMMA = ","
_TOK_EOF = "eof"


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-/^(),":
            kind = {"(": _TOK_LPAREN, ")": _TOK_RPAREN, ",": _TOK_COMMA}.get(ch, _TOK_OP)
            tokens.append((kind, ch, i))
            i += 1
            continue
        if ch == "*":
            if i + 1 < n and text[i + 1] == "*":
                tokens.append((_TOK_OP, "^", i))
                i += 2
            else:
                tokens.append((_TOK_OP, "*", i))
                i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            tokens.append((_TOK_NUM, text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((_TOK_IDENT, text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append((_TOK_EOF, "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, at = self.peek()
        if kind != _TOK_EOF:
            raise ParseError(f"unexpected {val!r}", at)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == _TOK_OP and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == _TOK_OP and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.unary()
        if self.peek()[0] == _TOK_OP and self.peek()[1] == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def unary(self) -> Expr:
        kind, val, at = self.peek()
        if kind == _TOK_OP and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        kind, val, at = self.advance()
        if kind == _TOK_NUM:
            return Num(float(val))
        if kind == _TOK_IDENT:
            if val in FUNCTIONS:
                k2, v2, a2 = self.advance()
                if k2 != _TOK_LPAREN:
                    raise ParseError(f"function {val!r} needs an argument list", a2)
                arg = self.expr()
                k3, v3, a3 = self.advance()
                if k3 == _TOK_COMMA:
                    raise ParseError(f"function {val!r} takes exactly one argument", a3)
                if k3 != _TOK_RPAREN:
                    raise ParseError("expected ')'", a3)
                return Call(val, arg)
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            raise ParseError(f"unknown identifier {val!r}", at)
        if kind == _TOK_LPAREN:
            node = self.expr()
            k2, v2, a2 = self.advance()
            if k2 != _TOK_RPAREN:
                raise ParseError("expected ')'", a2)
            return node
        raise ParseError(f"expected an operand, found {val!r}" if val else "unexpected end of input", at)


def parse_expr(text: str) -> Expr:
    """Parse an expression; raises ParseError with a 0-based position."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# canonical printer

_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_UNARY_LEVEL = 4
_ATOM_LEVEL = 5


def _level(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _LEVEL[node.op]
    if isinstance(node, Neg):
        return _UNARY_LEVEL
    return _ATOM_LEVEL


def to_source(node: Expr) -> str:
    """Canonical minimal-parenthesis rendering; parse(to_source(t)) == t."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.child)
        if _level(node.child) < _UNARY_LEVEL:
            inner = f"({inner})"
        return f"-{inner}"
    lv = _LEVEL[node.op]
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        # right-associative: parenthesize an equal-level left child
        if _level(node.left) <= lv:
            left = f"({left})"
        if _level(node.right) < lv:
            right = f"({right})"
    else:
        if _level(node.left) < lv:
            left = f"({left})"
        if _level(node.right) <= lv:
            right = f"({right})"
    return f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# evaluation


def _to_python(node: Expr) -> str:
    """Fully parenthesized Python source (evaluation namespace is ours)."""
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"_{node.fn}({_to_python(node.arg)})"
    if isinstance(node, Neg):
        return f"(-{_to_python(node.child)})"
    py_op = "**" if node.op == "^" else node.op
    return f"({_to_python(node.left)}{py_op}{_to_python(node.right)})"


_EVAL_NS = {
    "_sin": math.sin,
    "_cos": math.cos,
    "_atan": math.atan,
    "_exp": math.exp,
    "_log": math.log,
    "_abs": abs,
    "_sqrt": math.sqrt,
}


def compile_callable(node: Expr, varname: str) -> Callable[[float], float]:
    """Compile to a fast scalar callable of one variable."""
    free = free_variables(node)
    if not free <= {varname}:
        raise ParseError(f"expression uses variables {sorted(free - {varname})}", 0)
    src = f"lambda {varname}: {_to_python(node)}"
    return eval(src, dict(_EVAL_NS))  # noqa: S307 - our own AST, closed namespace


def evaluate(node: Expr, **values: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name not in values:
            raise ParseError(f"unbound variable {node.name!r}", 0)
        return values[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.child, **values)
    if isinstance(node, Call):
        return _EVAL_NS[f"_{node.fn}"](evaluate(node.arg, **values))
    a = evaluate(node.left, **values)
    b = evaluate(node.right, **values)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b


def free_variables(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.child)
    if isinstance(node, Call):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    return set()


# ---------------------------------------------------------------------------
# nonlinearity / forcing wrappers


def _richardson_limit(g: Callable[[float], float], scales: list[float]) -> float:
    """Richardson-extrapolated limit of g along a geometric sequence."""
    vals = [g(s) for s in scales]
    # one extrapolation level with ratio 10: g(s) ~ L + c*s
    extr = [(10.0 * vals[i + 1] - vals[i]) / 9.0 for i in range(len(vals) - 1)]
    return extr[-1]


@dataclass
class NonlinearitySpec:
    """A parsed nonlinearity f(xi) with its structural data.

    f0 and finf may be declared in the problem file; estimation from samples
    is a fallback and is flagged, since limits are analytic facts a sampler
    can only approximate.
    """

    expr: Expr
    f0: float
    finf: float
    f0_declared: bool
    finf_declared: bool
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def from_text(cls, text: str, f0: float | None = None, finf: float | None = None):
        expr = parse_expr(text)
        free = free_variables(expr)
        if not free <= {"xi"}:
            raise ParseError(f"nonlinearity may only use 'xi', found {sorted(free)}", 0)
        f = compile_callable(expr, "xi")
        f0_declared = f0 is not None
        finf_declared = finf is not None
        warnings: list[str] = []
        if f0 is None:
            f0 = cls._estimate_f0(f)
            warnings.append("f0 estimated from samples (declare it for exactness)")
        if finf is None:
            finf = cls._estimate_finf(f)
            warnings.append("finf estimated from samples (declare it for exactness)")
        return cls(expr, float(f0), float(finf), f0_declared, finf_declared, warnings)

    @staticmethod
    def _estimate_f0(f: Callable[[float], float]) -> float:
        scales = [1e-3, 1e-4, 1e-5, 1e-6]
        plus = _richardson_limit(lambda s: f(s) / s, scales)
        minus = _richardson_limit(lambda s: f(-s) / (-s), scales)
        return 0.5 * (plus + minus)

    @staticmethod
    def _estimate_finf(f: Callable[[float], float]) -> float:
        scales = [1e4, 1e5, 1e6, 1e7]
        try:
            plus = _richardson_limit(lambda s: f(s) / s, scales)
            minus = _richardson_limit(lambda s: f(-s) / (-s), scales)
        except OverflowError:
            return math.inf
        val = 0.5 * (plus + minus)
        return val if abs(val) < 1e12 else math.inf

    def __post_init__(self):
        self._f = compile_callable(self.expr, "xi")

    def f(self, xi: float) -> float:
        return self._f(xi)

    def F(self, xi: float) -> float:
        """F(xi) = 2*int_0^xi f(s) ds by adaptive quadrature."""
        if xi == 0.0:
            return 0.0
        out = quad(self._f, 0.0, xi, epsabs=1e-10, epsrel=1e-10, limit=200, full_output=1)
        val, err = out[0], out[1]
        if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
            raise QuadratureError(f"antiderivative quadrature failed at xi={xi:.6g}")
        return 2.0 * val

    def is_linear_identity(self) -> bool:
        return self.expr == Var("xi")


@dataclass
class ForcingTerm:
    """A parsed forcing term h(x), continuous and finite on [-1, 1]."""

    expr: Expr

    @classmethod
    def from_text(cls, text: str):
        expr = parse_expr(text)
        free = free_variables(expr)
        if not free <= {"x"}:
            raise ParseError(f"forcing term may only use 'x', found {sorted(free)}", 0)
        term = cls(expr)
        for xv in np.linspace(-1.0, 1.0, 101):
            if not math.isfinite(term.h(float(xv))):
                raise ParseError(f"forcing term not finite at x={xv:.3g}", 0)
        return term

    def __post_init__(self):
        self._h = compile_callable(self.expr, "x")

    def h(self, x: float) -> float:
        return self._h(x)


F_SMALL = "F_small"  # F(xi) <= gamma*xi^2
F_BIG = "F_big"  # F(xi) >= gamma*xi^2


@dataclass
class Certificate:
    passed: bool
    reason: str
    direction: str
    gamma: float
    xi_max: float
    worst_ratio: float
    worst_xi: float
    sign_ok: bool
    sufficient_sign: str | None  # '<=0', '>=0' or None (sign of f(xi)/xi - f0)


def certify_hypotheses(
    nl: NonlinearitySpec,
    gamma: float,
    direction: str,
    xi_max: float = 1e4,
    n_grid: int = 10000,
) -> Certificate:
    """Grid certificate for the sign condition and a quadratic F-envelope.

    Checks xi*f(xi) > 0 and F(xi) <= gamma*xi^2 (direction F_small) or
    F(xi) >= gamma*xi^2 (F_big) on a log-spaced grid of n_grid points in
    [-xi_max, xi_max], accumulating F by adaptive quadrature.  Also applies
    the sufficient sign test on g(xi) = f(xi)/xi - f0 (g <= 0 certifies the
    small envelope with gamma = f0; g >= 0 the big one).  This is a desk-
    scale certificate: the envelopes are only verified on the grid.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if direction not in (F_SMALL, F_BIG):
        raise ValueError(f"direction must be {F_SMALL!r} or {F_BIG!r}")
    if not (math.isfinite(nl.f0) and nl.f0 > 0.0):
        return Certificate(False, "f0 not positive", direction, gamma, xi_max,
                           math.nan, math.nan, False, None)

    half = max(n_grid // 2, 10)
    pos = np.logspace(math.log10(xi_max) - 8.0, math.log10(xi_max), half)
    grid = np.concatenate([-pos[::-1], pos])

    f = nl.f
    sign_ok = True
    g_sign: set[str] = set()
    g_tol = 1e-12 * max(1.0, abs(nl.f0))
    for xi in grid:
        fx = f(float(xi))
        if xi * fx <= 0.0:
            sign_ok = False
        g = fx / xi - nl.f0
        if g > g_tol:
            g_sign.add(">")
        elif g < -g_tol:
            g_sign.add("<")
    sufficient = None
    if g_sign <= {"<"}:
        sufficient = "<=0"
    elif g_sign <= {">"}:
        sufficient = ">=0"

    if not sign_ok:
        return Certificate(False, "sign condition xi*f(xi) > 0 failed", direction,
                           gamma, xi_max, math.nan, math.nan, False, sufficient)

    worst_ratio = -math.inf
    worst_xi = 0.0
    for branch in (pos, -pos):
        acc = 0.0
        prev = 0.0
        for xi in branch:
            xi = float(xi)
            seg = quad(f, prev, xi, epsabs=1e-12, epsrel=1e-12, limit=200, full_output=1)[0]
            if not math.isfinite(seg):
                raise QuadratureError(f"quadrature failed on [{prev:.3g}, {xi:.3g}]")
            acc += seg
            prev = xi
            Fxi = 2.0 * acc
            denom = gamma * xi * xi
            ratio = Fxi / denom if direction == F_SMALL else denom / Fxi
            if ratio > worst_ratio:
                worst_ratio, worst_xi = ratio, xi

    passed = worst_ratio <= 1.0 + 1e-9
    reason = "" if passed else f"envelope violated by ratio {worst_ratio:.6g} at xi={worst_xi:.6g}"
    return Certificate(passed, reason, direction, gamma, xi_max,
                       worst_ratio, worst_xi, sign_ok, sufficient)
