"""Identity suite: exact identities, closed-form oracles and property checks.

Each ``check_*`` function returns a list of CheckResult.  ``run_all`` drives
them in order (optionally stopping at the first failure) and is what the
``check`` command and the acceptance tests call.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import fanocone as fc
from . import nastab as na
from . import toricfunc as tf
from .errors import ObstructedFutaki
from .polykernel.geometry import build_polytope, simplex_polytope
from .solitons import fut_normalized, futaki, potential, solve_weight_vector
from .weights import AffinePinned, Exponential


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: dict = field(default_factory=dict)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: value={self.value:.3e} tol={self.tol:.1e}"

    def report(self):
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value), "tol": float(self.tol), "detail": self.detail}


def _res(name, value, tol, ok=None, **detail):
    value = float(value)
    return CheckResult(name, bool(value < tol if ok is None else ok), value, tol, detail)


def blp2():
    """Anticanonical polygon of the blow-up of P^2 at one point."""
    return build_polytope(vertices=[(-1, 0), (0, -1), (2, -1), (-1, 2)])


# -- 1: conifold MSY ---------------------------------------------------------------------


def check_conifold_msy():
    cone = fc.conifold()
    t = time.perf_counter()
    r = fc.msy_minimize(cone)
    dt = time.perf_counter() - t
    err_v = abs(r.vol_star - 16 / 27)
    err_x = float(np.max(np.abs(r.xi_star - np.array([0, 0, 1.5]))))
    # the default start is symmetric, so also come in from an asymmetric one
    t = time.perf_counter()
    r2 = fc.msy_minimize(cone, start=(0.4, -0.3, 1.6))
    dt = max(dt, time.perf_counter() - t)
    err_v = max(err_v, abs(r2.vol_star - 16 / 27))
    err_x = max(err_x, float(np.max(np.abs(r2.xi_star - np.array([0, 0, 1.5])))))
    return [
        _res("conifold vol*", err_v, 1e-9, vol_star=r.vol_star),
        _res("conifold xi*", err_x, 1e-8, xi_star=r.xi_star.tolist(), newton_steps=r2.iterations),
        _res("conifold runtime", dt, 1.0, seconds=dt),
    ]


# -- 2: affine spaces ------------------------------------------------------------------------


def check_affine_spaces():
    out = []
    for n in range(1, 5):
        cone = fc.affine_space(n + 1)
        v = fc.volume(cone, (1,) * (n + 1), derivatives=False)["vol"]
        out.append(_res(f"vol(C^{n + 1}) at (1,...,1)", abs(v - 1), 1e-300, ok=v == Fraction(1), exact=str(v)))
        r = fc.msy_minimize(cone, start=np.linspace(0.6, 1.4, n + 1))
        out.append(_res(f"MSY on C^{n + 1}", np.max(np.abs(r.xi_star - 1)), 1e-10))
    return out


# -- 3: KR soliton on Bl_1 P^2 -------------------------------------------------------------


def kr_diagonal_oracle():
    """Root of F(t) = int_{-1}^{1} s (s+2) exp(t s) ds (pushforward to s = x1 + x2)."""

    # 64-point Gauss-Legendre is exact to rounding for this entire integrand on |t| <= 5
    s, w = np.polynomial.legendre.leggauss(64)

    def F(t):
        return float(np.dot(w, s * (s + 2) * np.exp(t * s)))

    return brentq(F, -5, 5, xtol=1e-14)


def check_kr_blp2():
    P = blp2()
    t = time.perf_counter()
    sol = solve_weight_vector(P, "kr")
    dt = time.perf_counter() - t
    t_star = kr_diagonal_oracle()
    xi = sol.xi_array()
    res = max(abs(float(futaki(P, sol.weight, e))) for e in ((1, 0), (0, 1)))
    return [
        _res("KR xi* vs oracle", np.max(np.abs(xi - t_star)), 5e-3, oracle=t_star, xi_star=xi.tolist()),
        _res("KR xi* on the diagonal", abs(xi[0] - xi[1]), 1e-10),
        _res("KR futaki residual", res, 1e-10),
        _res("KR runtime", dt, 0.1, seconds=dt),
    ]


# -- 4: Mabuchi solver on random polytopes ------------------------------------------------------


def random_polytope(rng, n):
    while True:
        pts = rng.integers(-3, 4, size=(n + 4, n))
        try:
            return build_polytope(vertices=[tuple(int(a) for a in p) for p in pts])
        except Exception:  # degenerate draw, try again
            continue


def check_mabuchi(seed=0, count=5):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(1, 4))
        P = random_polytope(rng, n)
        sol = solve_weight_vector(P, "mabuchi")
        g = AffinePinned(P, sol.xi_star)
        exact_min = min(g._value_exact(v) for v in P.vertices)
        out.append(
            _res(
                f"Mabuchi #{k} (n={n})",
                sol.residual,
                1e-12,
                ok=sol.residual < 1e-12 and sol.feasible == (exact_min > 0),
                feasible=sol.feasible,
                vertex_min=str(exact_min),
            )
        )
    return out


# -- 5: cone <-> quotient ---------------------------------------------------------------------


def check_cone_quotient():
    cone = fc.conifold()
    msy = fc.msy_minimize(cone)
    chi = (Fraction(3, 4),) * 3
    _, _, xi_hat = fc.quotient_soliton(cone, chi)
    return [_res("quotient soliton lift vs MSY", np.max(np.abs(xi_hat - msy.xi_star)), 1e-8, lift=xi_hat.tolist())]


# -- 6: DH invariance --------------------------------------------------------------------------


DH_MONOMIALS = ((0, 0, 0), (1, 0, 0), (0, 1, 1))
DH_PAIRS = (((0, 0, Fraction(3, 2)), (Fraction(1, 2), Fraction(1, 2), Fraction(1))), ((1, 1, 1), (Fraction(1, 3), Fraction(1, 4), 1)))


def check_dh_invariance():
    cone = fc.conifold()
    out = []
    for xi, chi in DH_PAIRS:
        for m in DH_MONOMIALS:
            r = fc.dh_invariance_check(cone, xi, chi, m)
            bad = fc.dh_invariance_check(cone, xi, chi, m, drop_factor=True)
            diff = abs(float(r["lhs"]) - float(r["rhs"]))
            ctrl = abs(float(bad["lhs"]) - float(bad["rhs"]))
            out.append(_res(f"DH invariance {m} xi={[str(a) for a in xi]}", diff, 1e-10))
            out.append(_res(f"DH negative control {m} xi={[str(a) for a in xi]}", ctrl, 1e-3, ok=ctrl > 1e-3))
    return out


# -- 7: identity suite ------------------------------------------------------------------------


def _rand_q(rng, lo=-2, hi=2, den=7):
    return Fraction(int(rng.integers(lo * den, hi * den + 1)), den)


def check_twist_identities(seed=0, count=50):
    rng = np.random.default_rng(seed)
    P = blp2()
    worst_e = worst_a = 0.0
    for _ in range(count):
        xi_w = (_rand_q(rng, -1, 1), _rand_q(rng, -1, 1))
        w = Exponential(P, tuple(float(a) for a in xi_w))
        k = int(rng.integers(1, 4))
        pieces = [((_rand_q(rng), _rand_q(rng)), _rand_q(rng)) for _ in range(k)]
        f = na.PLFiltration(P, pieces)
        xi = (_rand_q(rng), _rand_q(rng))
        fut = float(fut_normalized(P, w, xi))
        lhs = float(na.energy(P, w, f.twist(xi))) - float(na.energy(P, w, f))
        worst_e = max(worst_e, abs(lhs - fut))
        u = (_rand_q(rng), _rand_q(rng))
        if u == (0, 0):
            u = (Fraction(1), Fraction(0))
        ut = na.twist(u, xi)
        if all(a == 0 for a in ut):
            continue
        r0 = na.valuation_report(P, w, u)
        r1 = na.valuation_report(P, w, ut)
        worst_a = max(worst_a, abs(float(r1["ding_special"]) - float(r0["ding_special"]) - fut))
    return [_res("E^NA twist identity", worst_e, 1e-12), _res("A - S twist identity", worst_a, 1e-12)]


def check_vol_homogeneity(seed=0, count=10):
    rng = np.random.default_rng(seed)
    cone = fc.conifold()
    ok = True
    for _ in range(count):
        xi = (Fraction(int(rng.integers(-3, 4)), 10), Fraction(int(rng.integers(-3, 4)), 10), Fraction(3, 2))
        lam = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        v1 = fc.volume(cone, xi, derivatives=False)["vol"]
        v2 = fc.volume(cone, tuple(lam * a for a in xi), derivatives=False)["vol"]
        ok = ok and v2 == v1 * lam ** (-(cone.n + 1))
    return [_res("vol homogeneity (exact)", 0.0 if ok else 1.0, 0.5, ok=ok)]


def check_potential_gradient(seed=0):
    rng = np.random.default_rng(seed)
    P = blp2()
    worst = 0.0
    for family in ("kr", "cone"):
        for _ in range(3):
            xi = rng.uniform(-0.3, 0.3, 2)
            _, g, _ = potential(P, family, xi)
            h = 1e-5
            fd = np.array(
                [
                    (potential(P, family, xi + h * e, order=0)[0] - potential(P, family, xi - h * e, order=0)[0]) / (2 * h)
                    for e in np.eye(2)
                ]
            )
            worst = max(worst, float(np.max(np.abs(fd - g)) / max(1.0, np.max(np.abs(g)))))
    return [_res("potential gradient vs finite differences", worst, 1e-6)]


# -- 8: delta -------------------------------------------------------------------------------------


def check_delta(seed=0):
    out = []
    P2 = simplex_polytope(2)
    dirs = na.fibonacci_sphere(2, 64, seed)
    ratio = na._Ratio(P2, na._weighted_barycenter(P2, None)[1])
    vals = np.array([ratio(d) for d in dirs])
    out.append(_res("delta(P^2) = 1 on every sampled direction", np.max(np.abs(vals - 1)), 1e-300, ok=bool(np.all(vals == 1.0))))
    B = blp2()
    d = na.delta_estimate(B, seed=seed)
    u = np.array(d["witness_u"])
    ang = float(np.degrees(np.arccos(np.clip(u @ np.array([1, 1]) / (np.linalg.norm(u) * np.sqrt(2)), -1, 1))))
    out.append(_res("delta(Bl1 P^2) = 6/7", abs(d["delta"] - 6 / 7), 1e-3, delta=d["delta"]))
    out.append(_res("delta witness angle to (1,1) in degrees", ang, 1.0))
    sol = solve_weight_vector(B, "kr")
    r = na.delta_estimate(B, sol.weight, reduced=True, seed=seed)
    out.append(_res("reduced delta at the KR weight", max(0.0, 1 - r["delta"]), 1e-6, delta=r["delta"]))
    return out


# -- 9: one-dimensional ODE ----------------------------------------------------------------------------


def check_ode():
    pot = tf.solve_gsoliton_1d((-1, 1))
    err = float(np.max(np.abs(pot.u - tf.fs_closed_form(pot.x))))
    try:
        tf.solve_gsoliton_1d((-1, Fraction(1, 2)))
        raised = False
    except ObstructedFutaki:
        raised = True
    return [
        _res("ODE vs 2 log cosh(x/2) + log 2", err, 1e-6, residual=pot.info["residual"]),
        _res("ODE ObstructedFutaki on [-1, 1/2]", 0.0 if raised else 1.0, 0.5, ok=raised),
    ]


# -- 10: functional properties -----------------------------------------------------------------------


def check_functionals(seed=0, samples=200, grid=tf.GRID):
    rng = np.random.default_rng(seed)
    u0 = tf.fs_potential(N=grid)
    worst_i = np.inf  # smallest I over non-constant pairs
    worst_c = 0.0  # largest |I| over constant shifts
    worst_md = np.inf
    pots = []
    for k in range(samples):
        u = tf.random_potential(rng, N=grid)
        f = tf.functionals(u, None, u0)
        worst_i = min(worst_i, f["I"])
        worst_md = min(worst_md, f["M"] - f["D"])
        c = rng.uniform(-2, 2)
        fc_ = tf.functionals(u0.shift(c), None, u0)
        worst_c = max(worst_c, abs(fc_["I"]))
        if k < 4:
            pots.append(u)
    out = [
        _res("I_g > 0 on random non-constant pairs (min I)", worst_i, 1e-8, ok=worst_i > 1e-8),
        _res("I_g vanishes on constant shifts", worst_c, 1e-8),
        _res("M_g >= D_g (min M - D)", max(0.0, -worst_md), 1e-8, min_gap=worst_md),
    ]
    ts = np.linspace(0, 1, 11)
    dev = d2d = d2m = 0.0
    for a, b in ((pots[0], pots[1]), (pots[2], pots[3]), (u0, pots[0])):
        fs = [tf.functionals(tf.geodesic(a, b, t), None, u0) for t in ts]
        E = np.array([f["E"] for f in fs])
        dev = max(dev, float(np.max(np.abs(E - (E[0] + ts * (E[-1] - E[0]))))))
        d2d = max(d2d, float(-np.min(np.diff([f["D"] for f in fs], 2))))
        d2m = max(d2m, float(-np.min(np.diff([f["M"] for f in fs], 2))))
    out += [
        _res("E_g affine along geodesics", dev, 1e-8),
        _res("D_g convex along geodesics", max(d2d, 0.0), 1e-8),
        _res("M_g convex along geodesics", max(d2m, 0.0), 1e-8),
    ]
    return out


SUITE = (
    ("1 conifold MSY", check_conifold_msy),
    ("2 affine spaces", check_affine_spaces),
    ("3 KR soliton", check_kr_blp2),
    ("4 Mabuchi solver", check_mabuchi),
    ("5 cone-quotient", check_cone_quotient),
    ("6 DH invariance", check_dh_invariance),
    ("7 identities", lambda: check_twist_identities() + check_vol_homogeneity() + check_potential_gradient()),
    ("8 delta", check_delta),
    ("9 ODE", check_ode),
    ("10 functionals", check_functionals),
)


def run_all(fail_fast=True, only=None):
    """Run the suite; returns (results, elapsed seconds)."""
    t = time.perf_counter()
    results = []
    for label, fn in SUITE:
        if only is not None and label.split()[0] not in only:
            continue
        for r in fn():
            r.detail.setdefault("group", label)
            results.append(r)
            if fail_fast and not r.passed:
                return results, time.perf_counter() - t
    return results, time.perf_counter() - t
