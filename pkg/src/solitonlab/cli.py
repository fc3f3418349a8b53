"""Command line interface.

    solitonlab COMMAND --in FILE [--out FILE] [--csv FILE] [--plot FILE]
               [--seed N] [--tol X] [--grid N] [--family F] [--chi V] [--xi V]

Reports are sorted JSON on stdout (or --out).  Exit status: 0 on success,
2 on mathematical infeasibility, 1 on input errors and failed checks.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import io as sio
from .errors import InputError, SolitonLabError

log = logging.getLogger("solitonlab")

CONVENTIONS = {
    "dh_measure": "DH = n! * Lebesgue on P (times the lattice frame measure on cross-sections)",
    "futaki": "futaki(zeta) = -int_P <x, zeta> g dDH; Fut_g = futaki / V_g",
    "volume": "vol(xi) = (n+1)! Leb{y in C*: <y, xi> <= 1}; vol(C^(n+1)) = 1 at (1,...,1)",
    "reeb_normalization": "<gamma, xi> = n + 1",
    "twist": "valuations u -> u + xi; filtrations f -> f - <., xi>",
    "ode_gauge": "g(u') u'' = exp(-u), u'(0) = 0, int exp(-u) dx = V_g",
}

COMMANDS = ("futaki", "soliton", "msy", "quotient", "crosscheck", "delta", "na", "ode1d", "check")


class Outcome:
    def __init__(self, result, diagnostics=None, exit_code=0, status="ok"):
        self.result = result
        self.diagnostics = diagnostics or {}
        self.exit_code = exit_code
        self.status = status


def _write_rows(path, rows, header):
    rows = np.asarray(rows, dtype=float)
    np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def _vector_opt(text):
    return None if text is None else tuple(sio.parse_cli_vector(text))


def _num(x):
    return str(x) if isinstance(x, Fraction) else float(x)


def _weight(doc, P, args):
    w = sio.weight_from(doc, P)
    if w is None and getattr(args, "family", None):
        from .solitons import solve_weight_vector

        if args.family == "constant":
            from .weights import Constant

            return Constant(P)
        return solve_weight_vector(P, args.family).weight
    return w


# -- commands ----------------------------------------------------------------------


def cmd_futaki(doc, args):
    from .polykernel.integrate import integrate
    from .solitons import futaki

    P = sio.polytope_from(doc)
    w = sio.weight_from(doc, P)
    V = integrate(P, w)
    zeta = _vector_opt(args.xi) or (tuple(doc["zeta"]) if "zeta" in doc else None)
    if zeta is not None:
        zeta = sio.parse_vector(zeta)
        val = futaki(P, w, zeta)
        res = {"zeta": [_num(a) for a in zeta], "futaki": _num(val), "Fut_normalized": _num(val / V)}
    else:
        basis = [tuple(int(i == k) for i in range(P.n)) for k in range(P.n)]
        vals = [futaki(P, w, e) for e in basis]
        res = {"futaki_vector": [_num(v) for v in vals], "Fut_normalized_vector": [_num(v / V) for v in vals]}
    res["V_g"] = _num(V)
    res["weight"] = w.to_json() if w is not None else {"family": "constant", "c": "1"}
    return Outcome(res)


def cmd_soliton(doc, args):
    from .solitons import potential, solve_weight_vector

    P = sio.polytope_from(doc)
    family = args.family or (doc.get("weight") or {}).get("family")
    if family not in ("kr", "mabuchi", "cone"):
        raise InputError("soliton needs --family kr|mabuchi|cone")
    n_cone = (doc.get("weight") or {}).get("n")
    sol = solve_weight_vector(P, family, n_cone=n_cone, tol=args.tol or 1e-12)
    rep = sol.report()
    if args.plot:
        xi = sol.xi_array()
        d = xi / np.linalg.norm(xi) if np.linalg.norm(xi) > 0 else np.eye(P.n)[0]
        rows = []
        for t in np.linspace(-1, 1, 81):
            try:
                rows.append((t, potential(P, family, xi + t * d, n_cone, order=0)[0]))
            except SolitonLabError:
                continue
        _write_rows(args.plot, rows, ["t", "potential"])
    diag = {"iterations": sol.iterations, "residual": float(sol.residual), "converged": sol.converged}
    if not sol.feasible:
        return Outcome(rep, diag, exit_code=2, status="Infeasible")
    return Outcome(rep, diag)


def cmd_msy(doc, args):
    from .fanocone import msy_minimize

    cone = sio.cone_from(doc)
    start = _vector_opt(args.xi) or (doc.get("start"))
    r = msy_minimize(cone, tol=args.tol or 1e-10, start=sio.parse_vector(start) if start else None)
    rep = r.report()
    rep["gamma"] = [str(a) for a in cone.gamma]
    rep["n"] = cone.n
    return Outcome(rep, {"iterations": r.iterations, "gradient_norm": r.gradient_norm})


def _chi(doc, args):
    chi = _vector_opt(args.chi) or doc.get("chi")
    if chi is None:
        raise InputError("a Reeb vector chi is required (--chi or 'chi' in the input)")
    return tuple(chi)


def cmd_quotient(doc, args):
    from .fanocone import quotient_soliton

    cone = sio.cone_from(doc)
    q, sol, xi_hat = quotient_soliton(cone, _chi(doc, args), tol=args.tol or 1e-12)
    rep = q.report()
    rep["soliton"] = sol.report()
    rep["lifted_reeb_vector"] = xi_hat.tolist()
    rep["cone_volume_at_soliton"] = q.cone_volume(tuple(float(a) for a in sol.xi_star))
    return Outcome(rep, {"iterations": sol.iterations, "residual": float(sol.residual)})


def cmd_crosscheck(doc, args):
    from .fanocone import dh_invariance_check, msy_minimize, quotient_soliton

    cone = sio.cone_from(doc)
    chi = _chi(doc, args)
    msy = msy_minimize(cone, tol=args.tol or 1e-10)
    q, sol, xi_hat = quotient_soliton(cone, chi)
    lift_err = float(np.max(np.abs(xi_hat - msy.xi_star)))
    monomials = doc.get("monomials") or [[0] * (cone.n + 1)]
    pairs = doc.get("reeb_pairs")
    if pairs is None:
        ray_sum = tuple(sum(int(r[k]) for r in cone.reeb_rays) for k in range(cone.n + 1))
        pairs = [(q.chi, ray_sum)]
    else:
        pairs = [(sio.parse_vector(a), sio.parse_vector(b)) for a, b in pairs]
    dh = []
    worst = 0.0
    for xi, ch in pairs:
        for m in monomials:
            r = dh_invariance_check(cone, xi, ch, m)
            diff = abs(float(r["lhs"]) - float(r["rhs"]))
            worst = max(worst, diff)
            dh.append({"xi": [_num(a) for a in xi], "chi": [_num(a) for a in ch], "monomial": list(m), "lhs": _num(r["lhs"]), "rhs": float(r["rhs"]), "diff": diff})
    passed = lift_err < 1e-8 and worst < 1e-10
    rep = {
        "msy_xi_star": msy.xi_star.tolist(),
        "quotient_lift": xi_hat.tolist(),
        "lift_error": lift_err,
        "dh_invariance": dh,
        "passed": passed,
    }
    return Outcome(rep, {"msy_iterations": msy.iterations, "quotient_iterations": sol.iterations}, 0 if passed else 1, "ok" if passed else "CrosscheckFailed")


def cmd_delta(doc, args):
    from . import nastab as na

    P = sio.polytope_from(doc)
    w = _weight(doc, P, args)
    sub = [sio.parse_vector(b) for b in doc["subspace"]] if "subspace" in doc else None
    est = na.delta_estimate(P, w, reduced=args.reduced, subspace=sub, seed=args.seed, grid=args.grid or 64)
    rep = {"estimate": est}
    if not args.reduced:
        r, ray = na.delta_exact_rays(P, w)
        rep["ray_minimum"] = {"delta": _num(r), "ray": [_num(a) for a in ray]}
    if "valuation" in doc:
        rep["valuation"] = {k: _num(v) for k, v in na.valuation_report(P, w, sio.parse_vector(doc["valuation"])).items()}
    rep["weight"] = w.to_json() if w is not None else {"family": "constant", "c": "1"}
    return Outcome(rep, {"seed": args.seed, "reduced": bool(args.reduced)})


def cmd_na(doc, args):
    from . import nastab as na

    P = sio.polytope_from(doc)
    w = _weight(doc, P, args)
    f = sio.filtration_from(doc, P)
    r = na.na_eval(P, w, f)
    rep = r.report()
    rep["dh_measure"] = r.dh.to_json()
    sub = [sio.parse_vector(b) for b in doc["subspace"]] if "subspace" in doc else None
    red = na.reduced_jna(P, w, f, sub)
    rep["reduced_J_NA"] = {"value": red["value"], "xi": red["xi"].tolist()}
    if args.csv:
        _write_rows(args.csv, r.dh.sample(args.grid or 201), ["lambda", "density"])
    if args.plot:
        _write_rows(args.plot, r.dh.sample(args.grid or 201), ["lambda", "density"])
    return Outcome(rep, {"cells": len(f.cells())})


def cmd_ode1d(doc, args):
    from . import toricfunc as tf

    P = sio.polytope_from(doc)
    if P.n != 1:
        raise InputError("ode1d needs a one-dimensional polytope or an interval")
    w = sio.weight_from(doc, P)
    kw = {}
    if args.grid:
        kw["N"] = args.grid
    if args.tol:
        kw["tol"] = args.tol
    pot = tf.solve_gsoliton_1d(P, w, **kw)
    mid = len(pot.x) // 2
    rep = {
        "interval": [_num(min(v[0] for v in P.vertices)), _num(max(v[0] for v in P.vertices))],
        "u_at_0": float(pot.u[mid]),
        "slopes_at_box_ends": [float(pot.du[0]), float(pot.du[-1])],
        "mass": pot.info["mass"],
        "V_g": pot.info["V_g"],
        "box": float(pot.x[-1]),
        "grid": len(pot.x),
    }
    if args.csv:
        _write_rows(args.csv, pot.to_rows(), ["x", "u"])
    if args.plot:
        _write_rows(args.plot, pot.legendre().to_rows(), ["y", "phi"])
    return Outcome(rep, {"iterations": pot.info["iterations"], "residual": pot.info["residual"], "mass_defect": pot.info["mass_defect"]})


def cmd_check(doc, args):
    from . import checks

    results, _ = checks.run_all(fail_fast=True)
    passed = all(r.passed for r in results)
    rep = {"checks": [r.report() for r in results], "passed": passed, "count": len(results)}
    # values that depend on timings are excluded from the report to keep it deterministic
    for c in rep["checks"]:
        if "runtime" in c["name"]:
            c["value"] = None
            c["detail"] = {k: v for k, v in c["detail"].items() if k != "seconds"}
    return Outcome(rep, {}, 0 if passed else 1, "ok" if passed else "CheckFailed")


HANDLERS = {
    "futaki": cmd_futaki,
    "soliton": cmd_soliton,
    "msy": cmd_msy,
    "quotient": cmd_quotient,
    "crosscheck": cmd_crosscheck,
    "delta": cmd_delta,
    "na": cmd_na,
    "ode1d": cmd_ode1d,
    "check": cmd_check,
}


# -- driver ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", metavar="FILE", help="input JSON file")
    common.add_argument("--out", metavar="FILE", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", metavar="FILE", help="CSV output for 1D measures and potentials")
    common.add_argument("--plot", metavar="FILE", help="two-column plot data (densities, potential profiles)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--family", choices=["constant", "kr", "mabuchi", "cone"], default=None)
    common.add_argument("--chi", metavar="V", help="Reeb vector, e.g. 3/4,3/4,3/4")
    common.add_argument("--xi", metavar="V", help="vector argument (futaki direction, msy start)")
    common.add_argument("--reduced", action="store_true", help="reduced delta (twisted by the torus)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="solitonlab", description="Toric weighted solitons and Fano cones.")
    p.add_argument("--version", action="version", version=f"solitonlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common], help=f"{c} command")
    return p


def _emit(payload, out):
    text = sio.dumps(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    """Parse, dispatch and emit; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    header = {
        "command": args.command,
        "version": __version__,
        "conventions": CONVENTIONS,
        "input": args.input,
        "options": {"seed": args.seed, "tol": args.tol, "grid": args.grid, "family": args.family, "chi": args.chi, "xi": args.xi, "reduced": args.reduced},
    }
    try:
        if args.command != "check" and not args.input:
            raise InputError(f"{args.command} needs --in FILE")
        doc = sio.load(args.input) if args.input else {}
        outcome = HANDLERS[args.command](doc, args)
    except SolitonLabError as exc:
        code = 2 if exc.infeasible else 1
        err = {"type": exc.code, "message": str(exc), "exit_code": code}
        if getattr(exc, "path", None):
            err["path"] = [str(p) for p in exc.path]
        _emit({**header, "status": exc.code, "error": err}, args.out)
        print(f"solitonlab: {exc.code}: {exc}", file=sys.stderr)
        return code
    _emit({**header, "status": outcome.status, "result": outcome.result, "diagnostics": outcome.diagnostics}, args.out)
    return outcome.exit_code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
