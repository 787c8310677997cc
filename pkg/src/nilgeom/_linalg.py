"""Small dense linear algebra over exact rationals or floats.

Matrices are lists of row lists.  Sizes here never exceed a few dozen, so
plain Gaussian elimination is all we need; keeping one code path for
Fraction and float avoids dtype surprises.
"""

from __future__ import annotations

from fractions import Fraction


def identity(n, one=Fraction(1)):
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_vec(a, v):
    return [sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    return [
        [sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
        for i in range(rows)
    ]


def transpose(a):
    return [list(col) for col in zip(*a)]


def _pivot_row(rows, col, start, exact):
    best, best_mag = None, 0
    for r in range(start, len(rows)):
        mag = abs(rows[r][col])
        if mag > 0 and (exact or mag > best_mag):
            best, best_mag = r, mag
            if exact:
                break
    return best


def solve(a, b):
    """Solve a @ x = b for square a; b is a vector. Raises on singular a."""
    n = len(a)
    exact = not any(isinstance(x, float) for row in a for x in row)
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = _pivot_row(aug, col, col, exact)
        if piv is None or aug[piv][col] == 0:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col]
        aug[col] = [x / inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def invert(a):
    n = len(a)
    cols = [solve(a, [Fraction(1) if i == j else Fraction(0) for i in range(n)]) for j in range(n)]
    return transpose(cols)


def det(a):
    n = len(a)
    exact = not any(isinstance(x, float) for row in a for x in row)
    m = [list(row) for row in a]
    result = Fraction(1)
    for col in range(n):
        piv = _pivot_row(m, col, col, exact)
        if piv is None or m[piv][col] == 0:
            return 0 * result
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        result = result * m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] / m[col][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return result


def cholesky(a):
    """Lower-triangular L with L @ L.T = a. Float only; raises if not PD."""
    import math

    n = len(a)
    low = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = sum(low[i][k] * low[j][k] for k in range(j))
            if i == j:
                d = float(a[i][i]) - s
                if d <= 0.0:
                    raise ZeroDivisionError("matrix not positive definite")
                low[i][j] = math.sqrt(d)
            else:
                low[i][j] = (float(a[i][j]) - s) / low[j][j]
    return low


def nullspace(a):
    """Basis of the exact kernel of a rectangular matrix (list of vectors)."""
    rows, cols = len(a), len(a[0]) if a else 0
    m = [[Fraction(x) for x in row] for row in a]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((rr for rr in range(r, rows) if m[rr][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c]
        m[r] = [x / inv for x in m[r]]
        for rr in range(rows):
            if rr != r and m[rr][c] != 0:
                factor = m[rr][c]
                m[rr] = [x - factor * y for x, y in zip(m[rr], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def solve_general(a, b):
    """Solve a @ x = b for a rectangular exact system.

    Returns one solution vector, or None if inconsistent.  Gauss-Jordan on
    the augmented matrix; free variables are set to zero.
    """
    rows, cols = len(a), len(a[0]) if a else 0
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for rr in range(r, rows):
            if aug[rr][c] != 0:
                piv = rr
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = aug[r][c]
        aug[r] = [x / inv for x in aug[r]]
        for rr in range(rows):
            if rr != r and aug[rr][c] != 0:
                factor = aug[rr][c]
                aug[rr] = [x - factor * y for x, y in zip(aug[rr], aug[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for rr in range(r, rows):
        if aug[rr][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = aug[i][cols]
    return x
