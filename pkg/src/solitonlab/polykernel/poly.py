"""Sparse multivariate polynomials with rational (or float) coefficients.

A polynomial is a dict mapping exponent tuples to coefficients.
"""

from fractions import Fraction

import numpy as np

from .rational import as_fraction


def constant(c, n):
    return {(0,) * n: as_fraction(c) if not isinstance(c, float) else c}


def monomial(alpha, coef=1):
    return {tuple(int(a) for a in alpha): Fraction(coef)}


def linear(w, c=0):
    """c + <x, w>."""
    n = len(w)
    out = {}
    if c != 0:
        out[(0,) * n] = c
    for k, wk in enumerate(w):
        if wk != 0:
            e = [0] * n
            e[k] = 1
            out[tuple(e)] = wk
    return out


def add(p, q):
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def scale(p, s):
    if s == 0:
        return {}
    return {e: c * s for e, c in p.items()}


def mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def power(p, k, n):
    out = constant(1, n)
    for _ in range(k):
        out = mul(out, p)
    return out


def degree(p):
    return max((sum(e) for e in p), default=0)


def nvars(p, default=None):
    for e in p:
        return len(e)
    return default


def substitute_affine(p, A, b, m):
    """Pull back p(x) under x_k = sum_j A[k][j] y_j + b[k]; result in m variables."""
    n = len(A)
    images = [linear(A[k], b[k]) for k in range(n)]
    cache = {}

    def pw(k, a):
        if (k, a) not in cache:
            if a == 0:
                cache[(k, a)] = {(0,) * m: 1}
            else:
                cache[(k, a)] = mul(pw(k, a - 1), images[k])
        return cache[(k, a)]

    out = {}
    for e, c in p.items():
        term = {(0,) * m: c}
        for k, a in enumerate(e):
            if a:
                term = mul(term, pw(k, a))
                if not term:
                    break
        out = add(out, term)
    return out


def evaluate(p, X):
    """Evaluate at points X of shape (N, n) (floats)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.zeros(X.shape[0])
    for e, c in p.items():
        term = np.full(X.shape[0], float(c))
        for k, a in enumerate(e):
            if a:
                term = term * X[:, k] ** a
        out += term
    return out


def evaluate_exact(p, x):
    total = Fraction(0)
    for e, c in p.items():
        term = as_fraction(c) if not isinstance(c, float) else c
        for xk, a in zip(x, e):
            if a:
                term = term * xk**a
        total = total + term
    return total
