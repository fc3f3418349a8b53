"""Toric non-Archimedean calculus: valuations, PL filtrations, delta estimates.

Sign conventions (pinned by tests): Fut_g(xi) = -<xbar_g, xi>, valuations
twist as u -> u + xi, filtrations twist as f -> f - <., xi>.  With these,
E(f twisted) - E(f) and (A - S)(u twisted) - (A - S)(u) both equal Fut_g(xi).
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import fsum

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import Empty, InputError, NotConcave, NotFullDim, ZeroVector
from .polykernel import poly as P
from .polykernel.geometry import Polytope, build_polytope
from .polykernel.integrate import integrate_polys, lebesgue_integrals, pushforward_1d
from .polykernel.measure import PiecewiseMeasure
from .polykernel.rational import as_fraction
from .weights import vec

log = logging.getLogger(__name__)


def _pair(x, u):
    return sum((a * b for a, b in zip(x, u)), 0)


def _weighted_barycenter(polytope, weight):
    mo_polys = [P.constant(1, polytope.n)] + [
        P.monomial(tuple(int(i == k) for i in range(polytope.n))) for k in range(polytope.n)
    ]
    vals = integrate_polys(polytope, weight, mo_polys)
    V = vals[0]
    return V, tuple(v / V for v in vals[1:])


# -- valuations --------------------------------------------------------------------


@dataclass(frozen=True)
class ToricValuation:
    u: tuple
    polytope: Polytope

    def log_discrepancy(self):
        return log_discrepancy(self.polytope, self.u)


def log_discrepancy(polytope: Polytope, u):
    """A(u) = -min_P <x, u>."""
    return -min(_pair(v, u) for v in polytope.vertices)


def expected_vanishing(polytope: Polytope, weight, u, xbar=None):
    """S_g(u) = (1/V_g) int g (<x, u> - min_P <., u>) dDH = <xbar_g, u> + A(u)."""
    if xbar is None:
        _, xbar = _weighted_barycenter(polytope, weight)
    return _pair(xbar, u) + log_discrepancy(polytope, u)


def valuation_report(polytope: Polytope, weight, u):
    u = vec(u)
    if len(u) != polytope.n:
        raise InputError("u has the wrong dimension")
    if all(a == 0 for a in u):
        raise ZeroVector("the trivial valuation has no ratio invariants")
    _, xbar = _weighted_barycenter(polytope, weight)
    A = log_discrepancy(polytope, u)
    S = _pair(xbar, u) + A
    return {"A": A, "S_g": S, "ding_special": A - S}


# -- PL filtrations ------------------------------------------------------------------


class PLFiltration:
    """Concave piecewise-linear f = min_i (<a_i, x> + b_i) on P."""

    def __init__(self, polytope: Polytope, pieces, combine="min"):
        self.polytope = polytope
        pieces = [(vec(a), as_fraction(b) if not isinstance(b, float) else b) for a, b in pieces]
        if not pieces:
            raise InputError("a PL function needs at least one affine piece")
        if any(len(a) != polytope.n for a, _ in pieces):
            raise InputError("affine piece has the wrong dimension")
        if combine == "max":
            pieces = [self._dominant(pieces)]
        elif combine != "min":
            raise InputError(f"unknown combine rule {combine!r}")
        uniq = []
        for p in pieces:
            if p not in uniq:
                uniq.append(p)
        self.pieces = tuple(uniq)
        self._cells = None

    def _dominant(self, pieces):
        # a max of affine functions is concave on P only if one piece dominates
        for a, b in pieces:
            if all(
                all(_pair(v, a) + b >= _pair(v, a2) + b2 for v in self.polytope.vertices) for a2, b2 in pieces
            ):
                return (a, b)
        raise NotConcave("max of affine pieces is not concave on the polytope")

    def __call__(self, x):
        return min(_pair(x, a) + b for a, b in self.pieces)

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.array([[float(c) for c in a] for a, _ in self.pieces])
        b = np.array([float(b) for _, b in self.pieces])
        return np.min(X @ A.T + b, axis=1)

    def cells(self):
        """Full-dimensional cells [(polytope, a, b)] on which each piece is active."""
        if self._cells is None:
            out = []
            for i, (a, b) in enumerate(self.pieces):
                facets = list(self.polytope.facets)
                for j, (a2, b2) in enumerate(self.pieces):
                    if j == i:
                        continue
                    normal = tuple(x - y for x, y in zip(a2, a))
                    off = b2 - b
                    if all(x == 0 for x in normal):
                        if off < 0:
                            break
                        if off == 0 and j < i:
                            break
                        continue
                    facets.append((normal, off))
                else:
                    try:
                        cell = build_polytope(facets=facets, frame=self.polytope.frame)
                    except (Empty, NotFullDim):
                        continue
                    out.append((cell, a, b))
            self._cells = out
        return self._cells

    def twist(self, xi) -> "PLFiltration":
        """f -> f - <., xi>."""
        xi = vec(xi)
        return PLFiltration(self.polytope, [(tuple(x - y for x, y in zip(a, xi)), b) for a, b in self.pieces])

    def shift(self, c) -> "PLFiltration":
        return PLFiltration(self.polytope, [(a, b + c) for a, b in self.pieces])

    def add_linear(self, xi) -> "PLFiltration":
        xi = vec(xi)
        return PLFiltration(self.polytope, [(tuple(x + y for x, y in zip(a, xi)), b) for a, b in self.pieces])

    def lam_max(self):
        return max(self(v) for cell, _, _ in self.cells() for v in cell.vertices)

    def lam_min(self):
        return min(self(v) for v in self.polytope.vertices)

    @property
    def bounds(self):
        """Admissibility bounds (e_-, e_+) from the range of f."""
        return self.lam_min(), self.lam_max()

    def to_json(self):
        num = lambda x: str(x) if isinstance(x, Fraction) else float(x)  # noqa: E731
        return {"affine_pieces": [{"a": [num(c) for c in a], "b": num(b)} for a, b in self.pieces], "combine": "min"}


def twist(obj, xi):
    """Valuations: u -> u + xi.  Filtrations: f -> f - <., xi>."""
    if isinstance(obj, PLFiltration):
        return obj.twist(xi)
    if isinstance(obj, ToricValuation):
        return ToricValuation(tuple(a + b for a, b in zip(obj.u, vec(xi))), obj.polytope)
    u = vec(obj)
    return tuple(a + b for a, b in zip(u, vec(xi)))


def _restrict(weight, cell):
    if weight is None:
        return None
    w = copy.copy(weight)
    w.polytope = cell
    return w


@dataclass
class NAResult:
    E: object
    Lambda: object
    J: object
    lam_min: object
    dh: PiecewiseMeasure
    V: object

    def report(self):
        num = lambda x: float(x)  # noqa: E731
        return {
            "E_NA": num(self.E),
            "Lambda_NA": num(self.Lambda),
            "J_NA": num(self.J),
            "lambda_min": num(self.lam_min),
            "dh_mass": num(self.dh.mass()),
            "dh_mean": num(self.dh.mean()),
            "exact": {k: str(v) for k, v in (("E_NA", self.E), ("Lambda_NA", self.Lambda), ("J_NA", self.J)) if isinstance(v, Fraction)},
        }


def energy(polytope: Polytope, weight, f: PLFiltration, V=None):
    """E^NA_g(f) = (1/V_g) int f g dDH, cell by cell."""
    if weight is not None:
        weight.validate(polytope)
    base, profile = (P.constant(1, polytope.n), None) if weight is None else weight.integrand()
    from math import factorial

    scale = factorial(polytope.n) * polytope.dh_scale
    if V is None:
        V = integrate_polys(polytope, weight, [P.constant(1, polytope.n)])[0]
    parts = []
    for cell, a, b in f.cells():
        parts.append(lebesgue_integrals(cell, [P.mul(base, P.linear(a, b))], profile)[0])
    if all(isinstance(x, Fraction) for x in parts) and isinstance(V, Fraction):
        return sum(parts, Fraction(0)) * scale / V
    return fsum(float(x) for x in parts) * float(scale) / float(V)


def na_eval(polytope: Polytope, weight, f: PLFiltration) -> NAResult:
    if f.polytope != polytope:
        raise InputError("the filtration lives on a different polytope")
    V = integrate_polys(polytope, weight, [P.constant(1, polytope.n)])[0]
    E = energy(polytope, weight, f, V)
    Lam = f.lam_max()
    lmin = f.lam_min()
    dh = PiecewiseMeasure()
    inv = 1 / V if isinstance(V, Fraction) else 1.0 / float(V)
    for cell, a, b in f.cells():
        w = _restrict(weight, cell)
        if all(x == 0 for x in a):
            m = integrate_polys(cell, w, [P.constant(1, cell.n)])[0]
            dh = dh + PiecewiseMeasure([], [(b, m * inv)])
        else:
            dh = dh + pushforward_1d(cell, w, a).shifted(b).scaled(inv)
    J = Lam - E
    return NAResult(E, Lam, J, lmin, dh, V)


def filtration_shadow(polytope: Polytope, f: PLFiltration, u):
    """phi(u) = max_P (f - <., u>) + min_P <., u>  (so phi + S_g >= E^NA_g)."""
    u = vec(u)
    top = max(f(v) - _pair(v, u) for cell, _, _ in f.cells() for v in cell.vertices)
    return top + min(_pair(v, u) for v in polytope.vertices)


def reduced_jna(polytope: Polytope, weight, f: PLFiltration, basis=None):
    """inf over xi in span(basis) of J^NA_g(f + <., xi>), solved as a linear program.

    J(f + l_xi) = max_v [f(v) + <v - xbar_g, xi>] - E(f), the max running over
    the vertices of the cells of f.
    """
    n = polytope.n
    if basis is None:
        basis = [tuple(int(i == k) for i in range(n)) for k in range(n)]
    B = np.array([[float(c) for c in vec(b)] for b in basis]).T  # n x k
    V, xbar = _weighted_barycenter(polytope, weight)
    E = float(energy(polytope, weight, f, V))
    xb = np.array([float(c) for c in xbar])
    pts = {}
    for cell, _, _ in f.cells():
        for v in cell.vertices:
            pts[v] = float(f(v))
    X = np.array([[float(c) for c in v] for v in pts])
    fv = np.array(list(pts.values()))
    k = B.shape[1]
    # variables (c, t): minimize t subject to (X - xbar) B c - t <= -f(v)
    Aub = np.hstack([(X - xb) @ B, -np.ones((len(fv), 1))])
    res = linprog(np.r_[np.zeros(k), 1.0], A_ub=Aub, b_ub=-fv, bounds=[(None, None)] * (k + 1), method="highs")
    if res.status != 0:
        raise InputError(f"reduced J linear program failed: {res.message}")
    c = res.x[:k]
    xi = B @ c
    value = float(np.max(fv + (X - xb) @ xi)) - E
    J0 = float(f.lam_max()) - E
    return {"value": max(value, 0.0) if value > -1e-12 else value, "xi": xi, "J_unreduced": J0}


# -- delta ----------------------------------------------------------------------------


def fibonacci_sphere(n: int, count: int, seed: int = 0):
    """Roughly uniform unit vectors in R^n (deterministic)."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        i = np.arange(count) + 0.5
        phi = np.arccos(1 - 2 * i / count)
        th = np.pi * (1 + 5**0.5) * i
        return np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


class _Ratio:
    def __init__(self, polytope, xbar):
        self.Vx = polytope.vertices_float()
        self.xbar = np.array([float(c) for c in xbar])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        nrm = np.linalg.norm(u)
        if nrm < 1e-300:
            return np.inf
        A = -np.min(self.Vx @ u)
        S = float(self.xbar @ u) + A
        if S <= 0:
            return np.inf
        return A / S


def _multistart(fun, starts, sign=1.0):
    best = []
    for s in starts:
        res = minimize(lambda z: sign * fun(z), s, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        z = res.x
        val = fun(z)
        if np.isfinite(val):
            best.append((sign * val, tuple(np.round(z / max(np.linalg.norm(z), 1e-300), 12)), z))
    if not best:
        raise InputError("delta search found no admissible direction")
    best.sort(key=lambda t: (round(t[0], 12), t[1]))
    val, _, z = best[0]
    return sign * val, z


def delta_estimate(polytope: Polytope, weight=None, reduced=False, subspace=None, seed=0, grid=64, starts=8):
    """Estimate delta_g = inf A/S_g over toric valuations (optionally reduced).

    Returns an ESTIMATE with its witnesses; deterministic given ``seed``.
    """
    _, xbar = _weighted_barycenter(polytope, weight)
    ratio = _Ratio(polytope, xbar)
    n = polytope.n
    if not reduced:
        dirs = fibonacci_sphere(n, grid, seed)
        vals = np.array([ratio(d) for d in dirs])
        order = np.lexsort((np.arange(len(vals)), vals))[:starts]
        # rays of the fan are natural candidates as well
        cands = [dirs[i] for i in order] + [np.array([float(c) for c in a]) for a, _ in polytope.facets]
        val, z = _multistart(ratio, cands)
        u = z / np.linalg.norm(z)
        return {"delta": float(val), "witness_u": u.tolist(), "estimate": True, "sampled_min": float(np.min(vals))}
    if subspace is None:
        W = np.eye(n)
    else:
        W = np.array([[float(c) for c in vec(b)] for b in subspace]).T
    Q, _ = np.linalg.qr(W)
    Wb = Q[:, : np.linalg.matrix_rank(W)]
    perp = np.eye(n) - Wb @ Wb.T
    U, s, _ = np.linalg.svd(perp)
    Wperp = U[:, s > 0.5]
    rng = np.random.default_rng(seed)

    def inner(u):
        k = Wb.shape[1]
        st = [np.zeros(k)] + [rng.standard_normal(k) for _ in range(max(starts // 2, 1))]
        if np.linalg.norm(u) < 1e-300:
            st = [rng.standard_normal(k) for _ in range(starts)] + [np.eye(k)[i] for i in range(k)]
        val, c = _multistart(lambda c: ratio(u + Wb @ c), st, sign=-1.0)
        return val, c

    if Wperp.shape[1] == 0:
        val, c = inner(np.zeros(n))
        return {"delta": float(val), "witness_u": [0.0] * n, "witness_xi": (Wb @ c).tolist(), "estimate": True}
    m = Wperp.shape[1]
    dirs = fibonacci_sphere(m, max(grid // 4, 4), seed)
    scored = []
    for d in dirs:
        u = Wperp @ d
        val, c = inner(u)
        scored.append((val, tuple(np.round(d, 12)), d, c))
    scored.sort(key=lambda t: (round(t[0], 12), t[1]))
    val, _, d, c = scored[0]
    u = Wperp @ d
    return {"delta": float(val), "witness_u": u.tolist(), "witness_xi": (Wb @ c).tolist(), "estimate": True}


def delta_exact_rays(polytope: Polytope, weight=None):
    """min over facet normals of A/S (exact for polynomial weights).

    A/S is a ratio of functions linear on each cone of the normal fan, so its
    infimum is attained on a ray; used as an oracle for the estimate.
    """
    _, xbar = _weighted_barycenter(polytope, weight)
    best = None
    for a, _ in polytope.facets:
        A = log_discrepancy(polytope, a)
        S = _pair(xbar, a) + A
        r = A / S
        if best is None or r < best[0]:
            best = (r, a)
    return best
