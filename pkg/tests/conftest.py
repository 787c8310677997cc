"""Shared corpus builders for the test suite.

Random objects are always drawn from seeded generators so failures
reproduce; metrics are built to be invertible at their base point by
construction (identity plus terms vanishing there).
"""

from __future__ import annotations

import random
from fractions import Fraction

from nilgeom.expr import Const, Expr, Var, polynomial_to_expr
from nilgeom.geometry import MetricField
from nilgeom.weil import Polynomial, all_monomials


def random_polynomial(rng: random.Random, n: int, degree: int, terms: int = 5) -> Polynomial:
    monos = all_monomials(n, degree)
    chosen = rng.sample(monos, min(terms, len(monos)))
    poly = Polynomial(n, {m: Fraction(rng.randint(-4, 4)) for m in chosen})
    if poly.is_zero():
        poly = Polynomial(n, {monos[-1]: Fraction(1)})
    return poly


def random_poly_expr(rng: random.Random, n: int, degree: int, terms: int = 5) -> Expr:
    return polynomial_to_expr(random_polynomial(rng, n, degree, terms))


def random_point(rng: random.Random, n: int) -> tuple:
    return tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n))


def random_metric(rng: random.Random, n: int, base) -> MetricField:
    """Symmetric polynomial metric, equal to the identity at ``base`` so it is
    guaranteed invertible there."""
    entries = [[None] * n for _ in range(n)]
    vanishing = [Var(k) - Const(base[k]) for k in range(n)]
    for i in range(n):
        for j in range(i, n):
            e = Const(Fraction(1 if i == j else 0))
            for _ in range(rng.randint(1, 2)):
                factor = vanishing[rng.randrange(n)]
                term = Const(Fraction(rng.randint(-2, 2))) * factor
                if rng.random() < 0.5:
                    term = term * vanishing[rng.randrange(n)]
                e = e + term
            entries[i][j] = e
            entries[j][i] = e
    return MetricField(n, entries)


def second_partials_sum(expr, x):
    """Independent flat-Laplacian oracle: sum of pure second partials."""
    from nilgeom.expr import diff, evaluate

    return sum(evaluate(diff(diff(expr, i), i), x) for i in range(len(x)))
