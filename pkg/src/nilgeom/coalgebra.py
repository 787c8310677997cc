"""Distributions supported at the origin, and the coalgebra they span.

A distribution here is a constant-coefficient differential operator
followed by evaluation at 0, stored as a polynomial in derivative symbols.
Multiplication of test polynomials dualizes to a comultiplication on these
functionals (the generalized Leibniz rule); each distribution spans a
finite-dimensional subcoalgebra, computed as the span of the divided
derivatives of its symbol.  Dualizing that subcoalgebra back yields a Weil
algebra: starting from the sum of pure second derivatives, this loop lands,
up to an explicit table isomorphism, on ``laplace_algebra(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import _linalg
from .scalars import Scalar
from .weil import (
    Polynomial,
    WeilAlgebra,
    all_monomials,
    mono_degree,
    mono_key,
    quotient_algebra,
    unit_monomial,
)


class Distribution:
    """Linear functional on polynomials: apply a symbol of derivatives, then
    evaluate at the origin."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff != 0:
                    self.terms[tuple(mono)] = coeff

    @classmethod
    def from_polynomial(cls, symbol: Polynomial) -> "Distribution":
        return cls(symbol.n, symbol.terms)

    def symbol(self) -> Polynomial:
        return Polynomial(self.n, self.terms)

    def apply(self, f: Polynomial) -> Scalar:
        """Sum of c_alpha * (d^alpha f)(0): pairs ``d^alpha`` with ``X^alpha``
        against the factorial weight alpha!."""
        if f.n != self.n:
            raise ValueError("polynomial arity does not match the distribution")
        total = Fraction(0)
        for alpha, c in self.terms.items():
            coeff = f.terms.get(alpha)
            if coeff:
                total += c * coeff * _factorial(alpha)
        return total

    def degree(self):
        return max((mono_degree(m) for m in self.terms), default=0)

    def counit(self) -> Scalar:
        """Action on the constant polynomial 1."""
        return self.terms.get(unit_monomial(self.n), Fraction(0))

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Distribution(self.n, out)

    def __sub__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) - c
        return Distribution(self.n, out)

    def __mul__(self, scalar):
        return Distribution(self.n, {m: c * scalar for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Distribution) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items()))))

    def is_zero(self):
        return not self.terms

    def to_string(self) -> str:
        return self.symbol().to_string("d")

    def __repr__(self):
        return f"Distribution({self.to_string()})"


def _factorial(mono):
    out = 1
    for e in mono:
        out *= math.factorial(e)
    return out


def dirac(n: int) -> Distribution:
    """Evaluation at the origin."""
    return Distribution(n, {unit_monomial(n): 1})


def coordinate_derivative(n: int, i: int) -> Distribution:
    return Distribution(n, {tuple(1 if j == i else 0 for j in range(n)): 1})


def laplace_distribution(n: int) -> Distribution:
    """f maps to the sum of its pure second partials at 0."""
    return Distribution(n, {tuple(2 if j == i else 0 for j in range(n)): 1 for i in range(n)})


# ---------------------------------------------------------------------------
# comultiplication
# ---------------------------------------------------------------------------

def comultiply(d: Distribution) -> dict:
    """The tensor T with d(f*g) = sum of T'(f) * T''(g) over its terms.

    For a single derivative symbol the expansion is binomial:
    psi(d^alpha) = sum over beta <= alpha of C(alpha, beta)
    d^beta (x) d^(alpha-beta); extended linearly.  Keys are pairs of
    exponent vectors.
    """
    out = {}
    for alpha, c in d.terms.items():
        for beta in _sub_multi_indices(alpha):
            gamma = tuple(a - b for a, b in zip(alpha, beta))
            w = c * _multi_binomial(alpha, beta)
            key = (beta, gamma)
            out[key] = out.get(key, Fraction(0)) + w
            if out[key] == 0:
                del out[key]
    return out


def _sub_multi_indices(alpha):
    if not alpha:
        yield ()
        return
    for first in range(alpha[0] + 1):
        for rest in _sub_multi_indices(alpha[1:]):
            yield (first,) + rest


def _multi_binomial(alpha, beta):
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def leibniz_expand(d: Distribution, f: Polynomial, g: Polynomial) -> Scalar:
    """Evaluate d on a product through the comultiplication tensor."""
    total = Fraction(0)
    for (mu, nu), c in comultiply(d).items():
        total += c * Distribution(d.n, {mu: 1}).apply(f) * Distribution(d.n, {nu: 1}).apply(g)
    return total


# ---------------------------------------------------------------------------
# generated subcoalgebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subcoalgebra:
    """Span of distributions closed under comultiplication.

    ``comult[i]`` expands the comultiplication of ``basis[i]`` in basis-pair
    coordinates: a map (j, k) -> coefficient.
    """

    n: int
    basis: tuple
    comult: tuple

    @property
    def dimension(self):
        return len(self.basis)


def divided_derivatives(d: Distribution) -> list:
    """All nonzero divided (Hasse) derivatives of the symbol, d included."""
    out = []
    max_deg = d.degree()
    for beta in all_monomials(d.n, max_deg):
        terms = {}
        for alpha, c in d.terms.items():
            if all(a >= b for a, b in zip(alpha, beta)):
                terms_key = tuple(a - b for a, b in zip(alpha, beta))
                terms[terms_key] = terms.get(terms_key, Fraction(0)) + c * _multi_binomial(alpha, beta)
        dd = Distribution(d.n, terms)
        if not dd.is_zero():
            out.append(dd)
    return out


def subcoalgebra_generated(d: Distribution) -> Subcoalgebra:
    """Smallest subcoalgebra containing d, with its comultiplication table.

    The span of all divided derivatives of the symbol is comultiplication
    closed; row reduction gives an echelon basis ordered by symbol degree.
    """
    rows = [dd.terms for dd in divided_derivatives(d)]
    from .weil import _reduce_rows

    pivots = _reduce_rows([dict(r) for r in rows])
    basis = [
        Distribution(d.n, pivots[lead])
        for lead in sorted(pivots, key=mono_key)
    ]
    support = sorted({m for b in basis for m in b.terms}, key=mono_key)
    pair_index = {(mu, nu): i for i, (mu, nu) in enumerate(
        (mu, nu) for mu in support for nu in support
    )}
    comult_rows = []
    for b in basis:
        tensor = comultiply(b)
        for key in tensor:
            if key not in pair_index:
                raise AssertionError("comultiplication escaped the generated span")
        rhs = [tensor.get(key, Fraction(0)) for key in pair_index]
        columns = []
        for i in range(len(basis)):
            for j in range(len(basis)):
                columns.append((i, j))
        matrix = [
            [basis[i].terms.get(mu, Fraction(0)) * basis[j].terms.get(nu, Fraction(0))
             for (i, j) in columns]
            for (mu, nu) in pair_index
        ]
        solution = _linalg.solve_general(matrix, rhs)
        if solution is None:
            raise AssertionError("comultiplication escaped the generated span")
        row = {}
        for (i, j), c in zip(columns, solution):
            if c != 0:
                row[(i, j)] = c
        comult_rows.append(row)
    return Subcoalgebra(d.n, tuple(basis), tuple(comult_rows))


# ---------------------------------------------------------------------------
# the dual Weil algebra
# ---------------------------------------------------------------------------

def dual_algebra(c: Subcoalgebra, degree_bound: int | None = None) -> WeilAlgebra:
    """Quotient of the polynomial ring by the annihilator of the subcoalgebra.

    The annihilator in degrees <= degree_bound is computed by exact linear
    algebra over the derivative/monomial pairing; the quotient by the ideal
    it generates must have the subcoalgebra's dimension, otherwise the bound
    was too small.
    """
    max_deg = max((b.degree() for b in c.basis), default=0)
    if degree_bound is None:
        degree_bound = max_deg + 1
    if degree_bound < max_deg + 1:
        raise ValueError(
            f"degree bound {degree_bound} cannot present the dual algebra; need >= {max_deg + 1}"
        )
    monos = all_monomials(c.n, degree_bound)
    matrix = [
        [b.terms.get(m, Fraction(0)) * _factorial(m) for m in monos]
        for b in c.basis
    ]
    kernel = _linalg.nullspace(matrix)
    relations = [
        Polynomial(c.n, {monos[i]: v[i] for i in range(len(monos)) if v[i] != 0})
        for v in kernel
    ]
    algebra = quotient_algebra(c.n, degree_bound, relations)
    if algebra.dimension != c.dimension:
        raise ValueError(
            f"dual algebra came out {algebra.dimension}-dimensional, expected {c.dimension};"
            " inconsistent degree bound"
        )
    return algebra


def distribution_report(d: Distribution) -> dict:
    """JSON-ready summary: generated basis, dimension, dual algebra."""
    from .weil import algebra_to_json

    sub = subcoalgebra_generated(d)
    return {
        "distribution": d.to_string(),
        "n": d.n,
        "dimension": sub.dimension,
        "basis": [b.to_string() for b in sub.basis],
        "dual_algebra": algebra_to_json(dual_algebra(sub)),
    }
