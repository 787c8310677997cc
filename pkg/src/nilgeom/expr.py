"""Smooth-function models: expression ASTs, symbolic derivatives, jets.

An Expr is a tree over constants, variables x1..xn, field operations,
integer powers, and the analytic primitives exp/log/sin/cos/sqrt.  Exact
mode restricts to the rational-function fragment; primitives require float
mode.  Evaluation at nilpotent arguments goes through the truncated Taylor
expansion at the base point (``jet_eval``): the algebra's degree bound cuts
the sum off, so the result is the exact image of the function model in the
Weil algebra.

No simplification happens beyond constant folding; expressions are never
compared structurally, only through evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .scalars import EXACT, FLOAT, check_mode, format_scalar, to_scalar
from .weil import Polynomial, WeilElement, all_monomials, mono_degree

PRIMITIVES = ("exp", "log", "sin", "cos", "sqrt")


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, k):
        return pow_(self, k)

    def __neg__(self):
        return mul(Const(Fraction(-1)), self)

    def __repr__(self):
        return f"Expr({format_expr(self)})"


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value if isinstance(value, float) else to_scalar(value)


class Var(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("variable index must be >= 0")
        self.index = index


class _Binary(Expr):
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("powers must have non-negative integer exponents")
        self.base = base
        self.exponent = exponent


class Call(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        if name not in PRIMITIVES:
            raise ValueError(f"unknown primitive {name!r}")
        self.name = name
        self.arg = arg


def _coerce(x):
    if isinstance(x, Expr):
        return x
    return Const(x)


# -- folding constructors ----------------------------------------------------

def add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0:
        return b
    if isinstance(b, Const) and b.value == 0:
        return a
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Const) and b.value == 0:
        return a
    return Sub(a, b)


def mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const):
        if a.value == 0:
            return Const(Fraction(0))
        if a.value == 1:
            return b
    if isinstance(b, Const):
        if b.value == 0:
            return Const(Fraction(0))
        if b.value == 1:
            return a
    return Mul(a, b)


def div(a, b):
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("constant zero denominator")
        if isinstance(a, Const):
            return Const(a.value / b.value)
        if b.value == 1:
            return a
    if isinstance(a, Const) and a.value == 0:
        return Const(Fraction(0))
    return Div(a, b)


def pow_(a, k: int):
    if k == 0:
        return Const(Fraction(1))
    if k == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value ** k)
    return Pow(a, k)


def variables(e: Expr) -> set:
    """Indices of variables occurring in the expression."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Const):
        return set()
    if isinstance(e, _Binary):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.arg)


def is_constant(e: Expr) -> bool:
    return not variables(e)


# -- differentiation ---------------------------------------------------------

def diff(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative with respect to variable ``i`` (0-based)."""
    if isinstance(e, Const):
        return Const(Fraction(0))
    if isinstance(e, Var):
        return Const(Fraction(1) if e.index == i else Fraction(0))
    if isinstance(e, Add):
        return add(diff(e.left, i), diff(e.right, i))
    if isinstance(e, Sub):
        return sub(diff(e.left, i), diff(e.right, i))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, i), e.right), mul(e.left, diff(e.right, i)))
    if isinstance(e, Div):
        num = sub(mul(diff(e.left, i), e.right), mul(e.left, diff(e.right, i)))
        return div(num, pow_(e.right, 2))
    if isinstance(e, Pow):
        return mul(mul(Const(e.exponent), pow_(e.base, e.exponent - 1)), diff(e.base, i))
    if isinstance(e, Call):
        inner = diff(e.arg, i)
        if e.name == "exp":
            outer = Call("exp", e.arg)
        elif e.name == "log":
            return div(inner, e.arg)
        elif e.name == "sin":
            outer = Call("cos", e.arg)
        elif e.name == "cos":
            outer = mul(Const(Fraction(-1)), Call("sin", e.arg))
        elif e.name == "sqrt":
            return div(inner, mul(Const(2), Call("sqrt", e.arg)))
        return mul(outer, inner)
    raise TypeError(f"cannot differentiate {e!r}")


def gradient(e: Expr, n: int) -> list:
    return [diff(e, i) for i in range(n)]


# -- evaluation ---------------------------------------------------------------

_MATH = {"exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos, "sqrt": math.sqrt}


def evaluate(e: Expr, point, mode: str = EXACT):
    """Evaluate at a real point.  Exact mode rejects analytic primitives."""
    check_mode(mode)
    if isinstance(e, Const):
        return float(e.value) if mode == FLOAT else e.value
    if isinstance(e, Var):
        if e.index >= len(point):
            raise ValueError(f"expression uses x{e.index + 1} but the point has {len(point)} coordinates")
        v = point[e.index]
        return float(v) if mode == FLOAT else to_scalar(v)
    if isinstance(e, Add):
        return evaluate(e.left, point, mode) + evaluate(e.right, point, mode)
    if isinstance(e, Sub):
        return evaluate(e.left, point, mode) - evaluate(e.right, point, mode)
    if isinstance(e, Mul):
        return evaluate(e.left, point, mode) * evaluate(e.right, point, mode)
    if isinstance(e, Div):
        num = evaluate(e.left, point, mode)
        den = evaluate(e.right, point, mode)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return num / den
    if isinstance(e, Pow):
        return evaluate(e.base, point, mode) ** e.exponent
    if isinstance(e, Call):
        if mode == EXACT:
            raise ValueError(f"primitive {e.name!r} requires float mode")
        x = evaluate(e.arg, point, mode)
        try:
            return _MATH[e.name](x)
        except ValueError as exc:
            raise ArithmeticError(f"{e.name}({x}) out of domain") from exc
    raise TypeError(f"cannot evaluate {e!r}")


def compose(e: Expr, replacements) -> Expr:
    """Substitute expressions for variables (index i -> replacements[i])."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        if e.index >= len(replacements):
            raise ValueError("composition does not cover all variables")
        return replacements[e.index]
    if isinstance(e, Add):
        return add(compose(e.left, replacements), compose(e.right, replacements))
    if isinstance(e, Sub):
        return sub(compose(e.left, replacements), compose(e.right, replacements))
    if isinstance(e, Mul):
        return mul(compose(e.left, replacements), compose(e.right, replacements))
    if isinstance(e, Div):
        return div(compose(e.left, replacements), compose(e.right, replacements))
    if isinstance(e, Pow):
        return pow_(compose(e.base, replacements), e.exponent)
    return Call(e.name, compose(e.arg, replacements))


# -- Taylor data and jet evaluation -------------------------------------------

def taylor_coefficients(e: Expr, base, order: int, mode: str = EXACT) -> dict:
    """Coefficients of the Taylor polynomial at ``base`` up to total degree
    ``order``, keyed by exponent vector: derivative value over factorial."""
    check_mode(mode)
    n = len(base)
    derivs = {(0,) * n: e}
    coeffs = {}
    for alpha in all_monomials(n, order):
        if alpha not in derivs:
            i = next(k for k, a in enumerate(alpha) if a > 0)
            parent = tuple(a - (1 if k == i else 0) for k, a in enumerate(alpha))
            derivs[alpha] = diff(derivs[parent], i)
        value = evaluate(derivs[alpha], base, mode)
        fact = 1
        for a in alpha:
            fact *= math.factorial(a)
        value = value / fact
        if value != 0:
            coeffs[alpha] = value
    return coeffs


def jet_eval(e: Expr, base, offsets, mode: str = EXACT) -> WeilElement:
    """Evaluate the function model at base + offsets, offsets nilpotent.

    The offsets must share one Weil algebra; the Taylor sum truncates at the
    algebra's degree bound, making this a ring homomorphism in ``e``.
    """
    offsets = list(offsets)
    if not offsets:
        raise ValueError("need at least one offset coordinate")
    algebra = offsets[0].algebra
    for z in offsets:
        if not isinstance(z, WeilElement):
            raise TypeError("offsets must be Weil elements")
        if z.algebra != algebra:
            raise ValueError("offsets live in mixed algebras")
        if not z.is_nilpotent(None if not _has_float(z) else 0.0):
            raise ValueError("offsets must be nilpotent (zero unit coordinate)")
    used = variables(e)
    if used and max(used) >= len(offsets):
        raise ValueError("expression uses more variables than offsets provided")
    coeffs = taylor_coefficients(e, base, algebra.degree_bound, mode)
    powers = [[algebra.one()] for _ in offsets]
    result = algebra.zero()
    for alpha, c in sorted(coeffs.items(), key=lambda kv: kv[0]):
        term = algebra.scalar(c)
        for i, a in enumerate(alpha):
            while len(powers[i]) <= a:
                powers[i].append(powers[i][-1] * offsets[i])
            if a:
                term = term * powers[i][a]
        result = result + term
    return result


def _has_float(z):
    return any(isinstance(c, float) for c in z.coords)


# -- function models -----------------------------------------------------------

@dataclass(frozen=True)
class FunctionModel:
    """A smooth map modeled componentwise by expressions."""

    n_in: int
    n_out: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.n_out:
            raise ValueError("component count does not match n_out")
        for comp in self.components:
            bad = [i for i in variables(comp) if i >= self.n_in]
            if bad:
                raise ValueError(f"component uses variable index {bad[0]} >= n_in={self.n_in}")

    def evaluate(self, point, mode: str = EXACT):
        return tuple(evaluate(c, point, mode) for c in self.components)

    def jacobian(self, point, mode: str = EXACT):
        return [
            [evaluate(diff(c, j), point, mode) for j in range(self.n_in)]
            for c in self.components
        ]

    def jet(self, base, offsets, mode: str = EXACT):
        return tuple(jet_eval(c, base, offsets, mode) for c in self.components)

    def compose_exprs(self, inner) -> tuple:
        """Components of self after substituting the inner expressions."""
        return tuple(compose(c, inner) for c in self.components)


def scalar_function(e: Expr, n: int) -> FunctionModel:
    return FunctionModel(n, 1, (e,))


# -- polynomial bridge ----------------------------------------------------------

def expr_to_polynomial(e: Expr, n: int) -> Polynomial:
    """Exact expansion of a polynomial expression; rejects primitives and
    division by non-constants."""
    if isinstance(e, Const):
        return Polynomial.constant(n, e.value)
    if isinstance(e, Var):
        return Polynomial.variable(n, e.index)
    if isinstance(e, Add):
        return expr_to_polynomial(e.left, n) + expr_to_polynomial(e.right, n)
    if isinstance(e, Sub):
        return expr_to_polynomial(e.left, n) - expr_to_polynomial(e.right, n)
    if isinstance(e, Mul):
        return expr_to_polynomial(e.left, n) * expr_to_polynomial(e.right, n)
    if isinstance(e, Div):
        denom = expr_to_polynomial(e.right, n)
        if denom.degree() > 0:
            raise ValueError("division by a non-constant is not polynomial")
        c = denom.constant_term()
        if c == 0:
            raise ZeroDivisionError("zero denominator")
        return expr_to_polynomial(e.left, n) * (Fraction(1) / c)
    if isinstance(e, Pow):
        return expr_to_polynomial(e.base, n) ** e.exponent
    raise ValueError(f"{format_expr(e)} is not polynomial")


def polynomial_to_expr(p: Polynomial) -> Expr:
    out = Const(Fraction(0))
    for m in sorted(p.terms, key=lambda mm: (mono_degree(mm), tuple(-x for x in mm))):
        term = Const(p.terms[m])
        for i, e in enumerate(m):
            term = mul(term, pow_(Var(i), e))
        out = add(out, term)
    return out


# -- text grammar ----------------------------------------------------------------
#
# expr   := term (('+'|'-') term)*
# term   := unary (('*'|'/') unary)*
# unary  := '-' unary | power
# power  := atom ('^' unary)?          (right associative, integer exponent)
# atom   := NUMBER | NAME '(' expr ')' | NAME | '(' expr ')'
#
# NAME is a primitive or a variable like x1, x2, ... (the prefix letter is
# configurable so the same grammar serves distribution symbols d1, d2, ...).

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad character at {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("num") is not None:
            out.append(("num", m.group("num")))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text, prefix="x", n=None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.prefix = prefix
        self.n = n
        self.max_index = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.pos]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise ValueError(f"unexpected token {tok[1]!r}")
        self.pos += 1
        return tok

    def parse_expr(self):
        node = self.parse_term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            rhs = self.parse_term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            rhs = self.parse_unary()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def parse_unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return mul(Const(Fraction(-1)), self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek() == ("op", "^"):
            self.take()
            exponent = self.parse_unary()
            if not isinstance(exponent, Const):
                raise ValueError("exponent must be a literal integer")
            k = exponent.value
            if isinstance(k, Fraction) and k.denominator == 1 and k >= 0:
                return pow_(base, int(k))
            raise ValueError(f"exponent must be a non-negative integer, got {k}")
        return base

    def parse_atom(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return Const(Fraction(value))
        if kind == "name":
            self.take()
            if value in PRIMITIVES:
                self.take("op", "(")
                arg = self.parse_expr()
                self.take("op", ")")
                return Call(value, arg)
            m = re.fullmatch(re.escape(self.prefix) + r"(\d+)", value)
            if not m:
                raise ValueError(f"unknown name {value!r} (variables look like {self.prefix}1)")
            index = int(m.group(1))
            if index < 1:
                raise ValueError("variable indices start at 1")
            if self.n is not None and index > self.n:
                raise ValueError(f"variable {value} exceeds declared dimension {self.n}")
            self.max_index = max(self.max_index, index)
            return Var(index - 1)
        if (kind, value) == ("op", "("):
            self.take()
            node = self.parse_expr()
            self.take("op", ")")
            return node
        raise ValueError(f"unexpected token {value!r}")


def parse_expr(text: str, n=None, prefix: str = "x") -> Expr:
    """Parse one expression in the infix grammar."""
    parser = _Parser(text, prefix, n)
    node = parser.parse_expr()
    parser.take("end")
    return node


def parse_function(text: str, n=None, prefix: str = "x") -> FunctionModel:
    """Parse a comma-separated list of component expressions into a map."""
    parser = _Parser(text, prefix, n)
    components = [parser.parse_expr()]
    while parser.peek() == ("op", ","):
        parser.take()
        components.append(parser.parse_expr())
    parser.take("end")
    n_in = n if n is not None else max(parser.max_index, 1)
    return FunctionModel(n_in, len(components), tuple(components))


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def format_expr(e: Expr, prefix: str = "x") -> str:
    """Deterministic pretty-printer; output reparses to the same function."""
    return _format(e, prefix)


def _format(e, prefix):
    if isinstance(e, Const):
        if e.value < 0:
            return f"-{format_scalar(-e.value)}"
        return format_scalar(e.value)
    if isinstance(e, Var):
        return f"{prefix}{e.index + 1}"
    if isinstance(e, Call):
        return f"{e.name}({_format(e.arg, prefix)})"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 3, prefix, tight=True)}^{e.exponent}"
    ops = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}
    prec = _PREC[type(e)]
    left = _wrap(e.left, prec, prefix)
    right = _wrap(e.right, prec, prefix, tight=type(e) in (Sub, Div))
    return f"{left}{ops[type(e)]}{right}"


def _wrap(e, parent_prec, prefix, tight=False):
    text = _format(e, prefix)
    prec = _PREC.get(type(e), 4)
    if isinstance(e, Const) and text.startswith("-"):
        prec = 0
    if prec < parent_prec or (tight and prec == parent_prec):
        return f"({text})"
    return text
