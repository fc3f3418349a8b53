"""Weighted Futaki invariants and canonical soliton vectors.

The soliton vector of a weight family is the critical point of a potential
V(xi) = int_P a(<x, xi>) dDH with a' = g:

* kr:      a(s) = exp(s)                      (strictly convex)
* mabuchi: a(s) = s + (s - <xbar, xi>)^2 / 2  (quadratic, solved exactly)
* cone(n): a(s) = -(n+1+s)^(-n-1) / (n+1)     (strictly concave)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import Infeasible, InputError, NewtonDiverged, WeightDomain
from .polykernel import poly as P
from .polykernel.geometry import Polytope
from .polykernel.integrate import integrate_polys, lebesgue_integrals, moments
from .polykernel.profiles import ExpProfile, PowerProfile
from .polykernel.rational import solve
from .weights import AffinePinned, ConePower, Exponential, Weight, vec

log = logging.getLogger(__name__)

FUTAKI_SIGN = -1  # futaki(P, g, zeta) = -n! int <x, zeta> g dx


def futaki(polytope: Polytope, weight: Weight, zeta):
    """-int_P <x, zeta> g dDH (not divided by V_g).  Linear in zeta."""
    zeta = vec(zeta)
    if len(zeta) != polytope.n:
        raise InputError("zeta has the wrong dimension")
    val = integrate_polys(polytope, weight, [P.linear(zeta)])[0]
    return FUTAKI_SIGN * val


def fut_normalized(polytope: Polytope, weight: Weight, zeta):
    """Fut_g(zeta) = futaki / V_g."""
    V, lin = integrate_polys(polytope, weight, [P.constant(1, polytope.n), P.linear(vec(zeta))])
    return FUTAKI_SIGN * lin / V


@dataclass
class SolitonSolution:
    family: str
    xi_star: tuple
    residual: float
    iterations: int
    feasible: bool
    potential: float
    converged: bool = True
    weight: Weight = None
    volume: object = None  # V_g at xi_star
    history: list = field(default_factory=list)

    def xi_array(self):
        return np.array([float(a) for a in self.xi_star])

    def report(self):
        return {
            "family": self.family,
            "xi_star": [float(a) for a in self.xi_star],
            "xi_star_exact": [str(a) for a in self.xi_star] if all(isinstance(a, Fraction) for a in self.xi_star) else None,
            "residual": float(self.residual),
            "iterations": self.iterations,
            "feasible": self.feasible,
            "potential": float(self.potential),
            "converged": self.converged,
            "V_g": float(self.volume) if self.volume is not None else None,
        }


# -- potentials -------------------------------------------------------------------


def _basis_polys(n):
    one = P.constant(1, n)
    lin = [P.monomial(tuple(int(i == k) for i in range(n))) for k in range(n)]
    quad = {}
    for i in range(n):
        for j in range(i, n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            quad[(i, j)] = P.monomial(e)
    return one, lin, quad


def _assemble(n, vals_lin, vals_quad):
    grad = np.array([float(v) for v in vals_lin])
    H = np.zeros((n, n))
    for (i, j), v in vals_quad.items():
        H[i, j] = H[j, i] = float(v)
    return grad, H


def potential(polytope: Polytope, family: str, xi, n_cone=None, order=2):
    """(V(xi), grad, hessian) of the soliton potential of a family.

    ``order`` < 2 skips the Hessian, < 1 skips the gradient.
    """
    n = polytope.n
    xi = tuple(float(a) for a in xi)
    f = float(factorial(n) * polytope.dh_scale)
    one, lin, quad = _basis_polys(n)
    qkeys = list(quad)
    if family == "kr":
        polys = [one] + (lin if order >= 1 else []) + ([quad[k] for k in qkeys] if order >= 2 else [])
        vals = [f * v for v in lebesgue_integrals(polytope, polys, ExpProfile(1, 0, xi))]
        val = vals[0]
        grad = H = None
        if order >= 1:
            grad = np.array(vals[1 : n + 1])
        if order >= 2:
            grad, H = _assemble(n, vals[1 : n + 1], dict(zip(qkeys, vals[n + 1 :])))
        return val, grad, H
    if family == "cone":
        m = n if n_cone is None else int(n_cone)
        base_min = m + 1 + min(sum(a * float(b) for a, b in zip(xi, v)) for v in polytope.vertices)
        if base_min <= 0:
            raise WeightDomain("xi leaves the admissible set n+1+<x,xi> > 0")
        val = f * lebesgue_integrals(polytope, [one], PowerProfile(-1.0 / (m + 1), m + 1, xi, m + 1))[0]
        grad = H = None
        if order >= 1:
            grad = np.array([f * v for v in lebesgue_integrals(polytope, lin, PowerProfile(1.0, m + 1, xi, m + 2))])
        if order >= 2:
            hv = lebesgue_integrals(polytope, [quad[k] for k in qkeys], PowerProfile(-(m + 2.0), m + 1, xi, m + 3))
            _, H = _assemble(n, [0] * n, {k: f * v for k, v in zip(qkeys, hv)})
        return val, grad, H
    if family == "mabuchi":
        mo = moments(polytope)
        V = float(mo.volume)
        xbar = mo.barycenter_array()
        Cm = mo.covariance_array()
        x = np.array(xi)
        # int <x, xi> + (1/2) int <x - xbar, xi>^2
        val = V * float(xbar @ x) + 0.5 * V * float(x @ Cm @ x)
        grad = V * (xbar + Cm @ x)
        H = V * Cm
        return val, grad, H
    raise InputError(f"unknown soliton family {family!r}")


# -- solvers ------------------------------------------------------------------------


def _newton(polytope, family, sign, n_cone=None, tol_rel=1e-12, max_iter=100, armijo=1e-4):
    """Newton on sign * V (sign=+1 minimizes a convex V, -1 maximizes a concave one)."""
    n = polytope.n
    xi = np.zeros(n)
    history = []
    val, grad, H = potential(polytope, family, xi, n_cone)
    V0 = None
    for it in range(max_iter + 1):
        Vg = _vg(polytope, family, xi, n_cone, grad_val=val)
        V0 = Vg
        res = float(np.max(np.abs(grad))) if n else 0.0
        history.append({"iteration": it, "xi": xi.tolist(), "potential": val, "residual": res})
        if res < tol_rel * abs(Vg):
            return xi, val, grad, it, history, True
        if it == max_iter:
            break
        try:
            step = -np.linalg.solve(sign * H, sign * grad)
        except np.linalg.LinAlgError:
            raise NewtonDiverged("singular Hessian in soliton Newton iteration") from None
        t = 1.0
        slope = sign * float(grad @ step)
        accepted = False
        for _ in range(60):
            trial = xi + t * step
            try:
                tval, tgrad, tH = potential(polytope, family, trial, n_cone)
            except WeightDomain:
                t *= 0.5
                continue
            if sign * tval <= sign * val + armijo * t * slope or t * np.max(np.abs(step)) < 1e-15:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if family == "cone":
                raise WeightDomain("no admissible step keeps n+1+<x,xi> positive")
            raise NewtonDiverged("line search failed")
        if t * np.max(np.abs(step)) < 1e-15 and float(np.max(np.abs(tgrad))) >= res:
            # stalled at machine precision
            xi, val, grad, H = trial, tval, tgrad, tH
            res = float(np.max(np.abs(grad)))
            return xi, val, grad, it + 1, history, res < 1e3 * tol_rel * abs(V0)
        xi, val, grad, H = trial, tval, tgrad, tH
    raise NewtonDiverged(f"no convergence in {max_iter} Newton iterations (residual {res:.3e})")


def _vg(polytope, family, xi, n_cone, grad_val=None):
    if family == "kr":
        return grad_val
    m = polytope.n if n_cone is None else int(n_cone)
    f = float(factorial(polytope.n) * polytope.dh_scale)
    return f * lebesgue_integrals(polytope, [P.constant(1, polytope.n)], PowerProfile(1.0, m + 1, tuple(xi), m + 2))[0]


def solve_weight_vector(polytope: Polytope, family: str, n_cone=None, tol=1e-12, max_iter=100) -> SolitonSolution:
    """Canonical soliton vector of a weight family on ``polytope``.

    family: "kr", "mabuchi", or "cone" (with optional ``n_cone``; default the
    polytope dimension).  Mabuchi infeasibility is reported via ``feasible``.
    """
    n = polytope.n
    if family == "mabuchi":
        mo = moments(polytope)
        C = [list(r) for r in mo.covariance]
        xi = tuple(-v for v in solve(C, mo.barycenter))
        w = AffinePinned(polytope, xi, mo.barycenter)
        feasible = w.positivity_min() > 0
        # residual of the vanishing condition, computed independently of the solve
        lin = [P.monomial(tuple(int(i == k) for i in range(n))) for k in range(n)]
        c, ww = w.affine()
        vals = lebesgue_integrals(polytope, [P.mul(P.linear(ww, c), p) for p in lin])
        f = factorial(n) * polytope.dh_scale
        residual = max(abs(v * f) for v in vals)
        val = potential(polytope, "mabuchi", [float(a) for a in xi])[0]
        sol = SolitonSolution("mabuchi", xi, residual, 0, bool(feasible), val, True, w, mo.volume)
        if not feasible:
            log.info("mabuchi weight is not positive on P; reporting feasible=False")
        return sol
    if family == "kr":
        xi, val, grad, it, hist, ok = _newton(polytope, "kr", +1, tol_rel=tol, max_iter=max_iter)
        w = Exponential(polytope, tuple(xi))
        return SolitonSolution("kr", tuple(xi), float(np.max(np.abs(grad))), it, True, val, ok, w, val, hist)
    if family == "cone":
        xi, val, grad, it, hist, ok = _newton(polytope, "cone", -1, n_cone=n_cone, tol_rel=tol, max_iter=max_iter)
        w = ConePower(polytope, tuple(xi), n_cone)
        Vg = _vg(polytope, "cone", xi, n_cone)
        return SolitonSolution(
            "cone", tuple(xi), float(np.max(np.abs(grad))), it, w.admissible(), val, ok, w, Vg, hist
        )
    raise InputError(f"unknown soliton family {family!r}")


def require_feasible(sol: SolitonSolution) -> SolitonSolution:
    if not sol.feasible:
        raise Infeasible(f"{sol.family} soliton weight is not positive on the polytope")
    return sol


def kr_profile(polytope: Polytope, direction, ts):
    """Potential V along the line t * direction (plot data)."""
    d = np.array([float(a) for a in direction])
    return np.array([[t, potential(polytope, "kr", t * d, order=0)[0]] for t in ts])
