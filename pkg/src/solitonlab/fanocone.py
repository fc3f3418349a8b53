"""Toric Fano cones: Reeb cone, volume function, MSY minimization, quotients.

Conventions: vol(C^{n+1}) = 1 at the symmetric normalized Reeb vector, i.e.
vol(xi) = (n+1)! * Leb{y in C* : <y, xi> <= 1}; no (2 pi) factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial, gcd

import numpy as np
import sympy

from .errors import (
    EmptySlice,
    InputError,
    IrregularQuotient,
    NewtonDiverged,
    NonGorenstein,
    OutsideReebCone,
    UnboundedSection,
)
from .polykernel import poly as P
from .polykernel.geometry import Frame, PolyCone, Polytope, build_cone, build_polytope, cross_section, triangulate
from .polykernel.integrate import integrate_polys, lebesgue_integrals
from .polykernel.profiles import PowerProfile
from .polykernel.rational import (
    as_fraction,
    as_vector,
    det,
    dot,
    inverse,
    lattice_complement_basis,
    primitive,
    rank,
    solve,
)
from .solitons import solve_weight_vector
from .weights import ConePower, vec

log = logging.getLogger(__name__)


class FanoCone:
    """Moment cone C* in M with its Reeb cone C in N and Gorenstein vector gamma."""

    def __init__(self, moment_cone: PolyCone):
        if moment_cone.lattice != "M":
            raise InputError("the moment cone lives in M")
        self.moment_cone = moment_cone
        self.reeb_cone = moment_cone.dual()
        self.n = moment_cone.d - 1
        self.gamma = _gorenstein(self.reeb_cone.generators, moment_cone.d)

    @property
    def reeb_rays(self):
        return self.reeb_cone.generators

    @cached_property
    def triangulation(self):
        return triangulate(self.moment_cone)

    def triangulation_alt(self):
        return triangulate(self.moment_cone, pivot="last")

    def is_reeb(self, xi) -> bool:
        """Interior of the Reeb cone: positive on every nonzero generator of C*."""
        xi = vec(xi)
        return all(sum((a * b for a, b in zip(g, xi)), 0) > 0 for g in self.moment_cone.generators)

    def normalize(self, xi):
        xi = vec(xi)
        s = sum((a * b for a, b in zip(self.gamma, xi)), 0)
        if s <= 0:
            raise OutsideReebCone("vector pairs nonpositively with the Gorenstein vector")
        return tuple(a * (self.n + 1) / s for a in xi)

    def to_json(self):
        return {
            "n": self.n,
            "moment_generators": [[int(a) for a in g] for g in self.moment_cone.generators],
            "reeb_rays": [[int(a) for a in r] for r in self.reeb_rays],
            "gamma": [str(a) for a in self.gamma],
        }

    def __repr__(self):
        return f"FanoCone(n={self.n}, gamma={[str(a) for a in self.gamma]})"


def _gorenstein(rays, d):
    rows = [as_vector(r) for r in rays]
    idx = []
    for i, r in enumerate(rows):
        if rank([rows[j] for j in idx] + [r]) > len(idx):
            idx.append(i)
    gamma = solve([rows[i] for i in idx], tuple(Fraction(1) for _ in idx))
    if any(dot(gamma, r) != 1 for r in rows):
        raise NonGorenstein("no vector pairs to 1 with every Reeb ray generator")
    return gamma


def build_fano_cone(moment_generators=None, reeb_rays=None, n=None) -> FanoCone:
    """FanoCone from generators of C* (in M) or ray generators of C (in N)."""
    if (moment_generators is None) == (reeb_rays is None):
        raise InputError("give exactly one of moment_generators or reeb_rays")
    if moment_generators is not None:
        mc = build_cone(generators=moment_generators, lattice="M")
    else:
        mc = build_cone(generators=reeb_rays, lattice="N").dual()
    cone = FanoCone(mc)
    if n is not None and int(n) != cone.n:
        raise InputError(f"n={n} does not match the cone dimension {cone.n + 1}")
    return cone


def affine_space(m: int) -> FanoCone:
    """C^m: moment cone the positive orthant."""
    return build_fano_cone(moment_generators=[tuple(int(i == j) for j in range(m)) for i in range(m)])


def conifold() -> FanoCone:
    return build_fano_cone(moment_generators=[(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)])


# -- volume ---------------------------------------------------------------------


def _check_reeb(cone, xi):
    for g in cone.moment_cone.generators:
        if sum((a * b for a, b in zip(g, xi)), 0) <= 0:
            raise OutsideReebCone("vector is not in the interior of the Reeb cone")


def volume(cone: FanoCone, xi, pieces=None, derivatives=True):
    """vol, gradient and Hessian at xi (exact rationals for rational xi)."""
    xi = vec(xi)
    if len(xi) != cone.n + 1:
        raise InputError("Reeb vector has the wrong dimension")
    _check_reeb(cone, xi)
    pieces = cone.triangulation if pieces is None else pieces
    exact = all(isinstance(a, Fraction) for a in xi)
    if exact:
        d = len(xi)
        vol = Fraction(0)
        grad = [Fraction(0)] * d
        H = [[Fraction(0)] * d for _ in range(d)]
        for sc in pieces:
            ells = [dot(u, xi) for u in sc.generators]
            T = sc.det
            for l in ells:
                T /= l
            vol += T
            if derivatives:
                s1 = [sum((u[j] / l for u, l in zip(sc.generators, ells)), Fraction(0)) for j in range(d)]
                for j in range(d):
                    grad[j] -= T * s1[j]
                    for k in range(d):
                        s2 = sum((u[j] * u[k] / l**2 for u, l in zip(sc.generators, ells)), Fraction(0))
                        H[j][k] += T * (s1[j] * s1[k] + s2)
        return {"vol": vol, "gradient": tuple(grad), "hessian": tuple(tuple(r) for r in H)}
    x = np.array(xi, dtype=float)
    vol = 0.0
    grad = np.zeros(len(x))
    H = np.zeros((len(x), len(x)))
    for sc in pieces:
        U = np.array([[float(a) for a in u] for u in sc.generators])
        ells = U @ x
        T = float(sc.det) / np.prod(ells)
        vol += T
        if derivatives:
            s1 = (U / ells[:, None]).sum(axis=0)
            Us = U / ells[:, None]
            grad -= T * s1
            H += T * (np.outer(s1, s1) + Us.T @ Us)
    return {"vol": vol, "gradient": grad, "hessian": H}


# -- MSY minimization ----------------------------------------------------------------


@dataclass
class MSYResult:
    xi_star: np.ndarray
    vol_star: float
    gradient_norm: float
    iterations: int
    reduced_hessian_eigs: np.ndarray

    def report(self):
        return {
            "xi_star": [float(a) for a in self.xi_star],
            "vol_star": float(self.vol_star),
            "gradient_norm": float(self.gradient_norm),
            "iterations": self.iterations,
            "reduced_hessian_min_eig": float(np.min(self.reduced_hessian_eigs)),
        }


def _slice_start(cone, normal, level):
    rays = [np.array([float(a) for a in r]) for r in cone.reeb_rays]
    vals = np.array([float(normal @ r) for r in rays])
    if np.all(vals <= 0):
        raise EmptySlice("the normalization functional is nonpositive on the whole Reeb cone")
    big = 1.0 + (np.sum(np.abs(vals[vals <= 0])) + 1.0) / np.min(vals[vals > 0])
    w = np.where(vals > 0, big, 1.0)
    x0 = sum(wi * r for wi, r in zip(w, rays))
    return x0 * level / float(normal @ x0)


def msy_minimize(cone: FanoCone, normalization=None, level=None, tol=1e-10, max_iter=200, start=None) -> MSYResult:
    """Minimize vol over the slice {<gamma, xi> = n+1} of the Reeb cone.

    Newton in slice coordinates with a log barrier on the Reeb-cone facets,
    barrier weight 1 -> 1e-12 (divide by 10), then an unbarriered polish.
    ``normalization``/``level`` override gamma and n+1; ``start`` is an
    optional interior starting vector (rescaled onto the slice).
    """
    normal = np.array([float(a) for a in (cone.gamma if normalization is None else vec(normalization))])
    level = float(cone.n + 1 if level is None else level)
    if level <= 0:
        raise EmptySlice("normalization level must be positive")
    G = np.array([[float(a) for a in g] for g in cone.moment_cone.generators])
    x = _slice_start(cone, normal, level)
    if start is not None:
        s0 = np.array([float(a) for a in vec(start)])
        if np.any(G @ s0 <= 0) or float(normal @ s0) <= 0:
            raise OutsideReebCone("start vector is not an interior point of the slice")
        x = s0 * level / float(normal @ s0)
    # orthonormal basis of the slice directions
    _, _, Vt = np.linalg.svd(normal[None, :])
    K = Vt[1:].T
    pieces = cone.triangulation

    def f_parts(xv, mu):
        ells = G @ xv
        if np.any(ells <= 0):
            return None
        out = volume(cone, tuple(xv), pieces)
        v = out["vol"] - mu * np.sum(np.log(ells))
        g = out["gradient"] - mu * (G / ells[:, None]).sum(axis=0)
        Gs = G / ells[:, None]
        H = out["hessian"] + mu * Gs.T @ Gs
        return v, K.T @ g, K.T @ H @ K, out

    iters = 0
    mus = [10.0 ** (-k) for k in range(0, 13)] + [0.0]
    for mu in mus:
        for _ in range(max_iter):
            parts = f_parts(x, mu)
            v, g, H, _ = parts
            if np.max(np.abs(g)) < (tol * 1e-2 if mu == 0 else max(mu, 1e-13)):
                break
            try:
                dz = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                raise NewtonDiverged("singular reduced Hessian") from None
            t = 1.0
            while True:
                trial = x + t * (K @ dz)
                tp = f_parts(trial, mu)
                if tp is not None and tp[0] <= v + 1e-4 * t * float(g @ dz):
                    break
                t *= 0.5
                if t < 1e-16:
                    break
            iters += 1
            if t < 1e-16:
                break
            x = trial
        else:
            raise NewtonDiverged("barrier Newton did not converge")
    v, g, H, out = f_parts(x, 0.0)
    gnorm = float(np.linalg.norm(g))
    eigs = np.linalg.eigvalsh(H)
    if gnorm > tol * max(1.0, abs(out["vol"])):
        raise NewtonDiverged(f"projected gradient {gnorm:.3e} above tolerance")
    return MSYResult(x, float(out["vol"]), gnorm, iters, eigs)


# -- quotients -------------------------------------------------------------------------


def _rational_or_irregular(xs):
    out = []
    for a in xs:
        try:
            out.append(as_fraction(a))
        except (TypeError, ValueError):
            try:
                e = sympy.nsimplify(sympy.sympify(str(a)), rational=False)
            except (sympy.SympifyError, TypeError):
                raise InputError(f"cannot read coordinate {a!r}") from None
            if e.is_rational:
                out.append(Fraction(int(e.p), int(e.q)))
            else:
                raise IrregularQuotient(f"coordinate {a} is irrational; the Reeb vector is not quasi-regular") from None
    return tuple(out)


@dataclass
class QuotientModel:
    """Quasi-regular quotient at chi (normalized so <gamma, chi> = n+1).

    ``polytope`` is the anticanonically normalized polytope in coordinates z
    with y = (E z + gamma) / (n+1) on the cross-section; ``lifts[j]`` is the
    N-vector t_j realizing the tangent direction e_j, so the Reeb vector
    chi + sum xi_j t_j pairs with y to (n+1+<z, xi>)/(n+1).
    """

    cone: FanoCone
    chi: tuple
    polytope: Polytope
    frame: Frame
    lattice_basis: tuple
    lifts: tuple
    index: Fraction
    multiplicities: tuple
    scale: Fraction  # |det[gamma, E]|

    @property
    def n(self):
        return self.cone.n

    def lift(self, xi_tilde):
        """Reeb vector chi + sum_j xi_j t_j."""
        xi_tilde = vec(xi_tilde)
        out = list(self.chi)
        for xj, tj in zip(xi_tilde, self.lifts):
            out = [o + xj * t for o, t in zip(out, tj)]
        return tuple(out)

    def project(self, xi_hat):
        """Tangent coordinates of a normalized Reeb vector: xi_j = <e_j, xi_hat>."""
        xi_hat = vec(xi_hat)
        return tuple(sum((a * b for a, b in zip(e, xi_hat)), 0) for e in self.lattice_basis)

    def cone_weight(self, xi_tilde=None):
        if xi_tilde is None:
            xi_tilde = (0,) * self.n
        return ConePower(self.polytope, xi_tilde, self.n)

    def cone_volume(self, xi_tilde):
        """vol(chi + xi~) recomputed on the quotient: scale * int (n+1+<z,xi>)^(-n-1) dDH."""
        xi_tilde = vec(xi_tilde)
        n = self.n
        prof = PowerProfile(1, n + 1, xi_tilde, n + 1)
        val = lebesgue_integrals(self.polytope, [P.constant(1, n)], prof)[0]
        return float(self.scale) * factorial(n) * val

    def report(self):
        return {
            "chi": [str(a) for a in self.chi],
            "n": self.n,
            "vertices": [[str(c) for c in v] for v in self.polytope.vertices],
            "facets": [{"normal": list(a), "offset": str(b)} for a, b in self.polytope.facets],
            "lattice_basis": [[str(c) for c in e] for e in self.lattice_basis],
            "lifts": [[str(c) for c in t] for t in self.lifts],
            "gorenstein_index": str(self.index),
            "multiplicities": [int(m) for m in self.multiplicities],
            "frame": {
                "origin": [str(c) for c in self.frame.origin],
                "basis": [[str(c) for c in b] for b in self.frame.basis],
                "measure": str(self.frame.measure),
            },
        }


def quotient(cone: FanoCone, chi) -> QuotientModel:
    chi = _rational_or_irregular(chi)
    if len(chi) != cone.n + 1:
        raise InputError("Reeb vector has the wrong dimension")
    for g in cone.moment_cone.generators:
        if dot(g, chi) <= 0:
            raise UnboundedSection("chi is not in the interior of the Reeb cone")
    n = cone.n
    chi = tuple(a * (n + 1) / dot(cone.gamma, chi) for a in chi)
    chi_prim = primitive(chi)
    E = lattice_complement_basis(chi_prim)
    gamma = cone.gamma
    M = [tuple(gamma)] + [tuple(e) for e in E]
    Minv = inverse(M)
    lifts = tuple(tuple(Minv[i][j] for i in range(n + 1)) for j in range(1, n + 1))
    facets = []
    mults = []
    for v in cone.reeb_rays:
        a = tuple(dot(e, v) for e in E)
        g = 0
        for x in a:
            g = gcd(g, int(x))
        mults.append(g)
        facets.append((a, Fraction(1)))
    poly = build_polytope(facets=facets)
    origin = tuple(c / (n + 1) for c in gamma)
    basis = tuple(tuple(c / (n + 1) for c in e) for e in E)
    frame = Frame(normal=chi, origin=origin, basis=basis, measure=abs(det([origin] + list(basis))), cone=cone.moment_cone)
    scale = abs(det(M))
    index = dot(gamma, chi_prim)
    return QuotientModel(cone, chi, poly, frame, tuple(E), lifts, index, tuple(mults), scale)


def quotient_soliton(cone: FanoCone, chi, tol=1e-12):
    """Cone-weight soliton on the quotient at chi, lifted back to a Reeb vector."""
    q = quotient(cone, chi)
    sol = solve_weight_vector(q.polytope, "cone", n_cone=q.n, tol=tol)
    xi_hat = q.lift(sol.xi_star)
    return q, sol, np.array([float(a) for a in xi_hat])


# -- DH invariance ------------------------------------------------------------------


def _section_poly(frame, monomial):
    d = len(frame.origin)
    A = [tuple(frame.basis[j][k] for j in range(len(frame.basis))) for k in range(d)]
    return P.substitute_affine(P.monomial(monomial), A, list(frame.origin), len(frame.basis))


def dh_invariance_check(cone: FanoCone, xi, chi, monomial, drop_factor=False):
    """Both sides of the cross-section change of measure for a monomial in y.

    lhs = int_{P_xi} y^a dDH;  rhs = int_{P_chi} v(y / l(y)) l(y)^(-n-1) dDH with
    l = <., xi>.  For a monomial of degree k, v(y/l) = v(y) l^(-k).
    """
    xi, chi = vec(xi), vec(chi)
    monomial = tuple(int(a) for a in monomial)
    if len(monomial) != cone.n + 1:
        raise InputError("monomial has the wrong number of variables")
    n = cone.n
    Px = cross_section(cone.moment_cone, xi)
    Pc = cross_section(cone.moment_cone, chi)
    lhs = integrate_polys(Px, None, [_section_poly(Px.frame, monomial)])[0]
    k = sum(monomial)
    p = k + (0 if drop_factor else n + 1)
    fr = Pc.frame
    c = sum((a * b for a, b in zip(fr.origin, xi)), 0)
    w = tuple(sum((a * b for a, b in zip(bj, xi)), 0) for bj in fr.basis)
    base = _section_poly(fr, monomial)
    scale = factorial(n) * fr.measure
    if p == 0 or all(a == 0 for a in w):
        # l is constant on P_chi
        factor = c ** (-p) if isinstance(c, Fraction) else float(c) ** (-p)
        val = lebesgue_integrals(Pc, [base])[0]
        rhs = val * scale * factor if isinstance(val * factor, Fraction) else float(val) * float(scale) * float(factor)
    else:
        val = lebesgue_integrals(Pc, [base], PowerProfile(1, c, w, p))[0]
        rhs = float(val) * float(scale)
    return {"lhs": lhs, "rhs": rhs}
