"""Exact rational linear algebra on tuples of Fractions.

Matrices are lists of rows.  Sizes are tiny (dimension <= 9), so plain
Gaussian elimination is both adequate and exact.
"""

from fractions import Fraction
from math import gcd, lcm
from numbers import Rational

import numpy as np


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValueError(f"non-finite coordinate {x!r}")
        # repr round-trips, so decimal literals such as 0.1 stay 1/10
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def as_vector(xs):
    if hasattr(xs, "coords"):
        xs = xs.coords
    return tuple(as_fraction(x) for x in xs)


def is_rational_input(xs):
    """True when every entry is an exact type (int, Fraction, rational string)."""
    if hasattr(xs, "coords"):
        return True
    for x in xs:
        if isinstance(x, (float, np.floating)):
            return False
    return True


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def rank(rows):
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(A, b):
    """Solve the square system A x = b exactly; raises ZeroDivisionError if singular."""
    n = len(A)
    m = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return tuple(m[i][n] for i in range(n))


def inverse(A):
    n = len(A)
    cols = [solve(A, tuple(Fraction(int(i == j)) for i in range(n))) for j in range(n)]
    return [tuple(cols[j][i] for j in range(n)) for i in range(n)]


def det(A):
    m = [list(r) for r in A]
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            out = -out
        pv = m[c][c]
        out *= pv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return out


def nullspace(rows, ncols):
    """Basis of {x : rows x = 0} (reduced row echelon, exact)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(tuple(v))
    return basis


def primitive(vec):
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    vec = as_vector(vec)
    den = 1
    for x in vec:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def lattice_complement_basis(c):
    """Integer basis of the sublattice {m in Z^d : <m, c> = 0} for primitive integer c.

    Built from a unimodular column reduction of the row vector c.
    """
    c = [int(x) for x in c]
    d = len(c)
    U = [[int(i == j) for j in range(d)] for i in range(d)]
    row = list(c)
    # column operations on row (and U) until row = (g, 0, ..., 0)
    while sum(1 for x in row if x != 0) > 1 or row[0] == 0:
        nz = [j for j in range(d) if row[j] != 0]
        jmin = min(nz, key=lambda j: abs(row[j]))
        for j in nz:
            if j == jmin:
                continue
            q = row[j] // row[jmin]
            row[j] -= q * row[jmin]
            for i in range(d):
                U[i][j] -= q * U[i][jmin]
        if sum(1 for x in row if x != 0) == 1 and row[0] == 0:
            j = next(j for j in range(d) if row[j] != 0)
            row[0], row[j] = row[j], row[0]
            for i in range(d):
                U[i][0], U[i][j] = U[i][j], U[i][0]
    return [tuple(Fraction(U[i][j]) for i in range(d)) for j in range(1, d)]
