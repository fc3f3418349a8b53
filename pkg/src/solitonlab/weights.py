"""Weight functions g on a polytope and the Reeb-deformation transform.

A weight is attached to one polytope at construction; integrating it over a
different polytope raises ``WeightMismatch``.  Every family knows how to
present itself to the integrator as ``poly(x) * profile(x)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import sympy

from .errors import InputError, UnboundedSection, WeightMismatch, WeightNonpositive
from .polykernel import poly as P
from .polykernel.geometry import Polytope, cross_section
from .polykernel.profiles import CallableProfile, ExpProfile, FieldProfile, PowerProfile
from .polykernel.rational import as_fraction, as_vector, is_rational_input

FAMILIES = ("constant", "kr", "mabuchi", "cone", "composite", "reeb")


def vec(x):
    """Rational tuple for exact input, float tuple otherwise."""
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if is_rational_input(x):
        return as_vector(x)
    return tuple(float(a) for a in x)


def ell_range(polytope: Polytope, xi):
    vals = [sum((a * b for a, b in zip(v, xi)), 0) for v in polytope.vertices]
    return min(vals), max(vals)


def _num(x):
    return str(x) if isinstance(x, Fraction) else float(x)


class Weight:
    family = "weight"

    def __init__(self, polytope: Polytope):
        if not isinstance(polytope, Polytope):
            raise TypeError("weights must be attached to a Polytope")
        self.polytope = polytope

    # subclasses: integrand(), positivity_min(), _values(X), _value_exact(x), params()

    def validate(self, body):
        if body is not self.polytope and body != self.polytope:
            raise WeightMismatch("weight is attached to a different polytope")
        m = self.positivity_min()
        if m <= 0:
            raise WeightNonpositive(f"{self.family} weight is not positive on the polytope (min {float(m):.6g})")

    def evaluate(self, x, check_domain=True):
        if check_domain and not self.polytope.contains(x, tol=1e-9):
            raise InputError("point lies outside the attached polytope")
        if is_rational_input(x) and hasattr(self, "_value_exact"):
            val = self._value_exact(as_vector(x))
        else:
            pt = [float(as_fraction(a)) if isinstance(a, str) else float(a) for a in x]
            val = float(self._values(np.array([pt]))[0])
        if val <= 0:
            raise WeightNonpositive(f"{self.family} weight is nonpositive at {list(map(_num, as_vector(x)))}")
        return val

    def values(self, X):
        """Vectorized float evaluation (no positivity check)."""
        return self._values(np.atleast_2d(np.asarray(X, dtype=float)))

    def to_json(self):
        d = {"family": self.family}
        d.update(self.params())
        return d

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


class Constant(Weight):
    family = "constant"

    def __init__(self, polytope, c=1):
        super().__init__(polytope)
        self.c = as_fraction(c) if not isinstance(c, float) else c

    def integrand(self):
        return P.constant(self.c, self.polytope.n), None

    def positivity_min(self):
        return self.c

    def _value_exact(self, x):
        return self.c

    def _values(self, X):
        return np.full(X.shape[0], float(self.c))

    def params(self):
        return {"c": _num(self.c)}


class Exponential(Weight):
    """g = exp(<x, xi>)."""

    family = "kr"

    def __init__(self, polytope, xi):
        super().__init__(polytope)
        self.xi = vec(xi)

    def integrand(self):
        return P.constant(1, self.polytope.n), ExpProfile(1, 0, self.xi)

    def positivity_min(self):
        return math.exp(float(ell_range(self.polytope, self.xi)[0]))

    def _values(self, X):
        return np.exp(X @ np.array(self.xi, dtype=float))

    def params(self):
        return {"xi": [_num(a) for a in self.xi]}


class AffinePinned(Weight):
    """g = 1 + <x - xbar, xi>."""

    family = "mabuchi"

    def __init__(self, polytope, xi, xbar=None):
        super().__init__(polytope)
        self.xi = vec(xi)
        if xbar is None:
            from .polykernel.integrate import moments

            xbar = moments(polytope).barycenter
        self.xbar = vec(xbar)

    def affine(self):
        c = 1 - sum((a * b for a, b in zip(self.xbar, self.xi)), 0)
        return c, self.xi

    def integrand(self):
        c, w = self.affine()
        return P.linear(w, c), None

    def positivity_min(self):
        c, w = self.affine()
        return c + ell_range(self.polytope, w)[0]

    def _value_exact(self, x):
        c, w = self.affine()
        return c + sum((a * b for a, b in zip(x, w)), 0)

    def _values(self, X):
        c, w = self.affine()
        return float(c) + X @ np.array(w, dtype=float)

    def params(self):
        return {"xi": [_num(a) for a in self.xi], "xbar": [_num(a) for a in self.xbar]}


class ConePower(Weight):
    """g = (n + 1 + <x, xi>)^(-n-2)."""

    family = "cone"

    def __init__(self, polytope, xi, n=None):
        super().__init__(polytope)
        self.xi = vec(xi)
        self.n = polytope.n if n is None else int(n)

    def base_min(self):
        return self.n + 1 + ell_range(self.polytope, self.xi)[0]

    def admissible(self):
        return self.base_min() > 0

    def integrand(self):
        return P.constant(1, self.polytope.n), PowerProfile(1, self.n + 1, self.xi, self.n + 2)

    def positivity_min(self):
        # decreasing in the base, so the minimum sits where the base is largest;
        # an inadmissible xi reports the (nonpositive) minimum of the base instead
        lo, hi = ell_range(self.polytope, self.xi)
        if self.n + 1 + lo <= 0:
            return self.n + 1 + lo
        top = self.n + 1 + hi
        return top ** (-(self.n + 2)) if isinstance(top, Fraction) else float(top) ** (-(self.n + 2))

    def _value_exact(self, x):
        base = self.n + 1 + sum((a * b for a, b in zip(x, self.xi)), 0)
        if base <= 0:
            return base
        return base ** (-(self.n + 2)) if isinstance(base, Fraction) else float(base) ** (-(self.n + 2))

    def _values(self, X):
        base = self.n + 1 + X @ np.array(self.xi, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(base > 0, np.abs(base) ** (-(self.n + 2)), -np.inf)

    def params(self):
        return {"xi": [_num(a) for a in self.xi], "n": self.n}


# -- composite b(<x, xi>) ------------------------------------------------------

_S = sympy.Symbol("s", real=True)
_ALLOWED = (sympy.Add, sympy.Mul, sympy.Pow, sympy.exp, sympy.Symbol, sympy.Number, sympy.core.numbers.NumberSymbol)


class BExpr:
    """Smooth one-variable expression b(s) built from exp, +, *, and powers.

    First and second derivatives are kept symbolically.
    """

    def __init__(self, text: str):
        self.text = str(text)
        try:
            expr = sympy.parse_expr(self.text, local_dict={"s": _S, "exp": sympy.exp, "e": sympy.E}, evaluate=True)
        except Exception as exc:  # sympy raises a zoo of exception types
            raise InputError(f"cannot parse b-expression {self.text!r}: {exc}") from None
        for node in sympy.preorder_traversal(expr):
            if not isinstance(node, _ALLOWED):
                raise InputError(f"b-expression uses unsupported operation {type(node).__name__}")
            if isinstance(node, sympy.Symbol) and node != _S:
                raise InputError(f"b-expression has unknown symbol {node}")
            if isinstance(node, sympy.Pow) and not node.exp.is_number:
                raise InputError("exponents in b-expressions must be numeric")
        self.expr = expr
        self.d1 = sympy.diff(expr, _S)
        self.d2 = sympy.diff(self.d1, _S)
        self.f = self._lam(expr)
        self.f1 = self._lam(self.d1)
        self.f2 = self._lam(self.d2)
        self._denominators = [
            n.base for n in sympy.preorder_traversal(expr) if isinstance(n, sympy.Pow) and n.exp.is_negative
        ]

    @staticmethod
    def _lam(e):
        f = sympy.lambdify(_S, e, "numpy")
        return lambda z: np.broadcast_to(np.asarray(f(np.asarray(z, dtype=float)), dtype=float), np.shape(z)).copy()

    def lower_bound(self, lo, hi, npts=2049):
        """Lower bound for b on [lo, hi]: endpoint minimum when b is monotone there,
        otherwise a sampled Lipschitz bound."""
        lo, hi = float(lo), float(hi)
        if hi - lo < 1e-300:
            return float(self.f(np.array([lo]))[0])
        s = np.linspace(lo, hi, npts)
        vals = self.f(s)
        d1 = self.f1(s)
        if np.all(d1 >= 0) or np.all(d1 <= 0):
            return float(min(vals[0], vals[-1]))
        h = (hi - lo) / (npts - 1)
        lip = float(np.max(np.abs(d1)))
        return float(np.min(vals) - 0.5 * h * lip * 1.01)

    def check_denominators(self, lo, hi):
        for d in self._denominators:
            fd = self._lam(d)
            s = np.linspace(float(lo), float(hi), 2049)
            if np.any(fd(s) <= 0):
                raise InputError(f"b-expression divides by {d}, which is not positive on [{lo}, {hi}]")


class Composite(Weight):
    """g = b(<x, xi>) for a b-expression."""

    family = "composite"

    def __init__(self, polytope, b, xi):
        super().__init__(polytope)
        self.b = b if isinstance(b, BExpr) else BExpr(b)
        self.xi = vec(xi)
        lo, hi = ell_range(polytope, self.xi)
        self.b.check_denominators(lo, hi)

    def integrand(self):
        return P.constant(1, self.polytope.n), CallableProfile(1, 0, self.xi, self.b.f, self.b.text)

    def positivity_min(self):
        lo, hi = ell_range(self.polytope, self.xi)
        return self.b.lower_bound(lo, hi)

    def _values(self, X):
        return self.b.f(X @ np.array(self.xi, dtype=float))

    def params(self):
        return {"b": self.b.text, "xi": [_num(a) for a in self.xi]}


# -- Reeb deformation ------------------------------------------------------------


class ReebTransformed(Weight):
    """g0(y) = <y, xi>^(-n-2) g(y / <y, xi>) on the cross-section P_chi.

    ``inner`` is a weight attached to the cross-section P_xi.
    """

    family = "reeb"

    def __init__(self, polytope, inner: Weight, xi_hat, n):
        super().__init__(polytope)
        self.inner = inner
        self.xi_hat = vec(xi_hat)
        self.n = int(n)
        fr = polytope.frame
        self._c = sum((a * b for a, b in zip(fr.origin, self.xi_hat)), 0)
        self._w = tuple(sum((a * b for a, b in zip(bj, self.xi_hat)), 0) for bj in fr.basis)

    def _pairing(self, Z):
        return float(self._c) + Z @ np.array(self._w, dtype=float)

    def _values(self, Z):
        fr_src = self.inner.polytope.frame
        fr = self.polytope.frame
        Y = fr.to_ambient_float(Z)
        t = self._pairing(Z)
        Yp = Y / t[:, None]
        # chart coordinates of y / <y, xi> on P_xi
        B = np.array([[float(a) for a in b] for b in fr_src.basis])
        o = np.array([float(a) for a in fr_src.origin])
        Zp = np.linalg.lstsq(B.T, (Yp - o).T, rcond=None)[0].T
        return t ** (-(self.n + 2)) * self.inner.values(Zp)

    def integrand(self):
        one = P.constant(1, self.polytope.n)
        if isinstance(self.inner, Constant):
            return one, PowerProfile(self.inner.c, self._c, self._w, self.n + 2)
        return one, FieldProfile(1, self._values, "reeb")

    def positivity_min(self):
        lo, hi = ell_range(self.polytope, self._w)
        top = self._c + hi
        inner_min = self.inner.positivity_min()
        if inner_min <= 0:
            return inner_min
        return float(inner_min) * float(top) ** (-(self.n + 2))

    def params(self):
        return {"inner": self.inner.to_json(), "xi_hat": [_num(a) for a in self.xi_hat], "n": self.n}


def reeb_transform(g: Weight, xi_hat, chi_hat, n: int, cone=None) -> Weight:
    """Move a weight on the cross-section P_xi to the cross-section P_chi."""
    src = g.polytope
    fr = src.frame
    if fr is None:
        raise InputError("the weight must live on a cross-section (polytope with a recorded frame)")
    xi_hat = vec(xi_hat)
    if tuple(as_vector(fr.normal)) != tuple(as_vector(xi_hat)):
        raise InputError("the weight's cross-section does not match xi_hat")
    cone = cone if cone is not None else fr.cone
    if cone is None:
        raise InputError("cannot locate the parent cone of the cross-section")
    chi_hat = vec(chi_hat)
    for gen in cone.generators:
        if sum((a * b for a, b in zip(gen, xi_hat)), 0) <= 0:
            raise UnboundedSection("xi_hat is not in the interior of the dual cone")
    target = cross_section(cone, chi_hat)
    return ReebTransformed(target, g, xi_hat, n)


# -- module-level API -------------------------------------------------------------


def evaluate(weight: Weight, x):
    return weight.evaluate(x)


def positivity_min(weight: Weight, polytope: Polytope = None):
    if polytope is not None and polytope != weight.polytope:
        raise WeightMismatch("weight is attached to a different polytope")
    return weight.positivity_min()


def make_weight(polytope: Polytope, family: str, xi=None, xbar=None, n=None, b=None, c=1) -> Weight:
    """Construct a weight from its family tag (the JSON vocabulary)."""
    dim = polytope.n
    if xi is None:
        xi = (0,) * dim
    if len(xi) != dim:
        raise InputError("xi has the wrong dimension")
    if family == "constant":
        return Constant(polytope, c)
    if family == "kr":
        return Exponential(polytope, xi)
    if family == "mabuchi":
        return AffinePinned(polytope, xi, xbar)
    if family == "cone":
        return ConePower(polytope, xi, n)
    if family == "composite":
        if b is None:
            raise InputError("composite weights need a b-expression")
        return Composite(polytope, b, xi)
    raise InputError(f"unknown weight family {family!r}")
