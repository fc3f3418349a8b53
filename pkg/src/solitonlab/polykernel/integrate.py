"""Integration of poly(x) * kappa * h(c + <x, w>) over polytopes.

Each simplex of a triangulation is handled in barycentric coordinates.  With
no profile the integral of lambda^beta is the Dirichlet moment; with a
closed-form profile it is a confluent divided difference of an antiderivative
of h at the vertex values; anything else goes through collapsed Gauss-Jacobi
quadrature.  Measures follow the DH convention n! * Lebesgue.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, fsum

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.special import roots_jacobi

from ..errors import QuadratureDiverged
from . import poly as P
from .geometry import Polytope, build_polytope, triangulate
from .measure import Piece, PiecewiseMeasure
from .profiles import divided_difference
from .rational import as_vector, dot, solve

QUAD_MAX_POINTS = 2_000_000


def _integrand_of(weight, n):
    if weight is None:
        return P.constant(1, n), None
    return weight.integrand()


def _validate(weight, body):
    if weight is not None and hasattr(weight, "validate"):
        weight.validate(body)


# -- barycentric pieces -------------------------------------------------------


@lru_cache(maxsize=4096)
def _bary_expand(verts, poly_items):
    n = len(verts[0])
    A = [tuple(verts[i][k] for i in range(n + 1)) for k in range(n)]
    return tuple(P.substitute_affine(dict(poly_items), A, [0] * n, n + 1).items())


def _poly_key(p):
    return tuple(sorted(p.items()))


def _beta_factor(beta):
    out = 1
    for b in beta:
        out *= factorial(b)
    return out


def _dirichlet(beta, n):
    return Fraction(_beta_factor(beta), factorial(sum(beta) + n))


@lru_cache(maxsize=16)
def _stroud_rule(n, q):
    """Points (barycentric, shape (q^n, n+1)) and weights summing to 1/n!."""
    axes = []
    for k in range(1, n + 1):
        alpha = n - k
        x, w = roots_jacobi(q, alpha, 0)
        axes.append(((1 + x) / 2, w / 2 ** (alpha + 1)))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    lam = np.zeros((U.shape[0], n + 1))
    rest = np.ones(U.shape[0])
    for k in range(n):
        lam[:, k + 1] = rest * U[:, k]
        rest = rest * (1 - U[:, k])
    lam[:, 0] = rest
    return lam, W


def _quad_simplex(verts, polys, profile, tol=1e-14):
    n = len(verts[0])
    V = np.array([[float(c) for c in v] for v in verts])
    vol = abs(np.linalg.det(V[1:] - V[0])) if n else 1.0
    prev = None
    q = 8
    while True:
        if q**n > QUAD_MAX_POINTS:
            raise QuadratureDiverged("quadrature did not converge within the point budget")
        lam, W = _stroud_rule(n, q)
        X = lam @ V
        hv = profile.evaluate(X)
        vals = np.array([vol * float(np.dot(W, P.evaluate(p, X) * hv)) for p in polys])
        if prev is not None and np.all(np.abs(vals - prev) <= tol * np.maximum(np.abs(vals), 1e-300) + 1e-300):
            return vals
        if prev is not None and q >= 64 and np.all(np.abs(vals - prev) <= 1e-12 * np.maximum(np.abs(vals), 1e-300)):
            return vals
        prev = vals
        q *= 2


def _simplex_integrals(simplex, polys, profile):
    verts = simplex.vertices
    n = len(verts[0])
    if profile is not None and not profile.closed_form:
        return list(_quad_simplex(verts, polys, profile))
    nf = factorial(n)
    scale = nf * simplex.volume
    expanded = [_bary_expand(verts, _poly_key(p)) for p in polys]
    if profile is None:
        out = []
        for terms in expanded:
            out.append(sum((c * scale * _dirichlet(beta, n) for beta, c in terms), Fraction(0)))
        return out
    t = profile.nodes(verts)
    profile.check_domain(t)
    cache = {}
    kappa = float(profile.kappa)
    out = []
    for terms in expanded:
        acc = []
        for beta, c in terms:
            if beta not in cache:
                nodes = [ti for ti, b in zip(t, beta) for _ in range(b + 1)]
                cache[beta] = _beta_factor(beta) * divided_difference(profile, n + sum(beta), nodes)
            acc.append(float(c) * cache[beta])
        out.append(kappa * float(scale) * fsum(acc))
    return out


def lebesgue_integrals(body: Polytope, polys, profile=None, pivot="first"):
    """int_body poly * profile dx for each poly (plain Lebesgue, no DH factor)."""
    if body.n == 0:
        raise ValueError("zero-dimensional body")
    simplices = triangulate(body, pivot=pivot)
    parts = [_simplex_integrals(s, polys, profile) for s in simplices]
    out = []
    for j in range(len(polys)):
        vals = [p[j] for p in parts]
        if all(isinstance(v, Fraction) for v in vals):
            out.append(sum(vals, Fraction(0)))
        else:
            out.append(fsum(float(v) for v in sorted(vals, key=float)))
    return out


def _dh_factor(body):
    return factorial(body.n) * body.dh_scale


def _mul(a, f):
    if isinstance(a, Fraction):
        return a * f
    return float(a) * float(f)


def integrate_polys(body: Polytope, weight, polys, pivot="first"):
    """n! * dh_scale * int_body poly * g dx for each poly in ``polys``."""
    _validate(weight, body)
    base, profile = _integrand_of(weight, body.n)
    full = [P.mul(base, p) for p in polys]
    vals = lebesgue_integrals(body, full, profile, pivot=pivot)
    f = _dh_factor(body)
    return [_mul(v, f) for v in vals]


def integrate(body: Polytope, weight=None, monomial=None, pivot="first"):
    """n! * int_body x^monomial g(x) dx (exact rational for polynomial weights)."""
    if monomial is None:
        monomial = (0,) * body.n
    monomial = tuple(monomial)
    if len(monomial) != body.n:
        raise ValueError("monomial has the wrong number of variables")
    return integrate_polys(body, weight, [P.monomial(monomial)], pivot=pivot)[0]


@dataclass(frozen=True)
class Moments:
    volume: object
    barycenter: tuple
    covariance: tuple

    def barycenter_array(self):
        return np.array([float(x) for x in self.barycenter])

    def covariance_array(self):
        return np.array([[float(x) for x in row] for row in self.covariance])


def moments(body: Polytope, weight=None) -> Moments:
    n = body.n
    polys = [P.constant(1, n)]
    polys += [P.monomial(tuple(int(i == k) for i in range(n))) for k in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    for i, j in pairs:
        e = [0] * n
        e[i] += 1
        e[j] += 1
        polys.append(P.monomial(e))
    vals = integrate_polys(body, weight, polys)
    V = vals[0]
    xbar = tuple(v / V for v in vals[1 : n + 1])
    cov = [[0] * n for _ in range(n)]
    for (i, j), v in zip(pairs, vals[n + 1 :]):
        cij = v / V - xbar[i] * xbar[j]
        cov[i][j] = cov[j][i] = cij
    return Moments(V, xbar, tuple(tuple(r) for r in cov))


# -- one-dimensional pushforward ---------------------------------------------


def _slice_chart(body: Polytope, ell, k):
    """x = A y + b(s): eliminate coordinate k using <x, ell> = s."""
    n = body.n
    others = [j for j in range(n) if j != k]
    A = []
    for i in range(n):
        if i == k:
            A.append(tuple(-ell[j] / ell[k] for j in others))
        else:
            A.append(tuple(Fraction(int(i == j)) for j in others))
    return A, others


def _slice_body(body, ell, k, A, s):
    n = body.n
    b = [Fraction(0)] * n
    b[k] = s / ell[k]
    facets = []
    for a, off in body.facets:
        normal = tuple(sum((a[i] * A[i][j] for i in range(n)), Fraction(0)) for j in range(n - 1))
        facets.append((normal, off + dot(a, b)))
    return build_polytope(facets=facets), b


def pushforward_1d(body: Polytope, weight, ell, cheb_degree: int = 24) -> PiecewiseMeasure:
    """Pushforward of g * DH under x -> <x, ell>, as a piecewise density.

    Exact (rational piecewise polynomial) for polynomial weights; per-interval
    Chebyshev series otherwise.
    """
    _validate(weight, body)
    ell = as_vector(ell)
    n = body.n
    if len(ell) != n:
        raise ValueError("direction has the wrong dimension")
    base, profile = _integrand_of(weight, n)
    scale = _dh_factor(body)
    if all(x == 0 for x in ell):
        V = integrate_polys(body, weight, [P.constant(1, n)])[0]
        return PiecewiseMeasure([], [(Fraction(0), V)])
    vals = sorted(set(body.vertex_values(ell)))
    k = max(range(n), key=lambda i: (abs(ell[i]), -i))
    exact = profile is None

    if n == 1:

        def dens(s):
            x = s / ell[0]
            if exact:
                return P.evaluate_exact(base, (x,)) * scale / abs(ell[0])
            v = P.evaluate(base, [[float(x)]])[0] * profile.evaluate([[float(x)]])[0]
            return v * float(scale) / abs(float(ell[0]))

    else:
        A, _ = _slice_chart(body, ell, k)
        jac = scale / abs(ell[k])

        def dens(s):
            s = Fraction(s)
            Q, b = _slice_body(body, ell, k, A, s)
            pb = P.substitute_affine(base, A, b, n - 1)
            prof = profile.pullback(A, b) if profile is not None else None
            v = lebesgue_integrals(Q, [pb], prof)[0]
            return _mul(v, jac)

    pieces = []
    deg = P.degree(base) + n - 1
    for lo, hi in zip(vals[:-1], vals[1:]):
        if exact:
            pts = [lo + (hi - lo) * Fraction(j + 1, deg + 2) for j in range(deg + 1)]
            ys = [dens(s) for s in pts]
            V = [tuple(s**e for e in range(deg + 1)) for s in pts]
            coeffs = solve(V, tuple(ys))
            while len(coeffs) > 1 and coeffs[-1] == 0:
                coeffs = coeffs[:-1]
            pieces.append(Piece(lo, hi, coeffs=tuple(coeffs)))
        else:
            pieces.append(_cheb_piece(dens, lo, hi, cheb_degree))
    return PiecewiseMeasure(pieces)


def _cheb_piece(dens, lo, hi, degree):
    flo, fhi = float(lo), float(hi)
    deg = degree
    while True:
        # Chebyshev points of the first kind avoid the endpoints (kinks)
        x = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
        s = 0.5 * (fhi - flo) * x + 0.5 * (fhi + flo)
        y = np.array([float(dens(si)) for si in s])
        coef = C.chebfit(x, y, deg)
        tail = np.max(np.abs(coef[-3:]))
        if tail <= 1e-14 * max(np.max(np.abs(coef)), 1e-300) or deg >= 96:
            return Piece(lo, hi, cheb=C.Chebyshev(coef, domain=[flo, fhi]))
        deg *= 2
