"""Piecewise-polynomial measures on the real line (plus atoms)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, fsum

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss


def _is_exact(x):
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class Piece:
    """Density on [lo, hi]: exact monomial coefficients or a Chebyshev series."""

    lo: object
    hi: object
    coeffs: tuple = ()  # exact: sum_j coeffs[j] s^j
    cheb: object = None  # numpy Chebyshev with domain [lo, hi]

    @property
    def exact(self):
        return self.cheb is None

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.cheb is not None:
            return self.cheb(s)
        out = np.zeros_like(s)
        for c in reversed(self.coeffs):
            out = out * s + float(c)
        return out

    def moment(self, k: int):
        """int_lo^hi s^k density(s) ds."""
        if self.exact and all(_is_exact(c) for c in self.coeffs) and _is_exact(self.lo) and _is_exact(self.hi):
            lo, hi = Fraction(self.lo), Fraction(self.hi)
            return sum(
                (c * (hi ** (j + k + 1) - lo ** (j + k + 1)) / (j + k + 1) for j, c in enumerate(self.coeffs)),
                Fraction(0),
            )
        deg = (len(self.coeffs) if self.exact else len(self.cheb.coef)) + k + 2
        x, w = leggauss(max(deg // 2 + 2, 8))
        lo, hi = float(self.lo), float(self.hi)
        s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        return 0.5 * (hi - lo) * fsum(w * s**k * self(s))

    def shifted(self, b) -> "Piece":
        """Density of the pushforward under s -> s + b."""
        if self.cheb is not None:
            lo, hi = float(self.lo) + float(b), float(self.hi) + float(b)
            return Piece(lo, hi, cheb=C.Chebyshev(self.cheb.coef, domain=[lo, hi]))
        # rho(s - b) expanded in powers of s
        d = len(self.coeffs)
        out = [0] * d
        for j, c in enumerate(self.coeffs):
            for i in range(j + 1):
                out[i] += c * comb(j, i) * (-b) ** (j - i)
        return Piece(self.lo + b, self.hi + b, coeffs=tuple(out))

    def scaled(self, f) -> "Piece":
        if self.cheb is not None:
            return Piece(self.lo, self.hi, cheb=self.cheb * float(f))
        return Piece(self.lo, self.hi, coeffs=tuple(c * f for c in self.coeffs))


class PiecewiseMeasure:
    """Sum of interval densities and atoms.

    Pieces may overlap (sums of pushforwards); ``breakpoints`` is the sorted
    union of their endpoints.
    """

    def __init__(self, pieces=(), atoms=()):
        self.pieces = tuple(pieces)
        self.atoms = tuple(sorted(atoms, key=lambda a: float(a[0])))

    @property
    def breakpoints(self):
        pts = set()
        for p in self.pieces:
            pts.add(p.lo)
            pts.add(p.hi)
        for a, _ in self.atoms:
            pts.add(a)
        return tuple(sorted(pts, key=float))

    @property
    def exact(self):
        return all(p.exact for p in self.pieces)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for p in self.pieces:
            lo, hi = float(p.lo), float(p.hi)
            mask = (s >= lo) & (s <= hi)
            if np.any(mask):
                out[mask] += p(s[mask])
        return out

    def moment(self, k: int = 0):
        vals = [p.moment(k) for p in self.pieces] + [m * a**k for a, m in self.atoms]
        if all(isinstance(v, (int, Fraction)) for v in vals):
            return sum(vals, Fraction(0))
        return fsum(float(v) for v in vals)

    def mass(self):
        return self.moment(0)

    def mean(self):
        return self.moment(1) / self.mass()

    def support(self):
        bp = self.breakpoints
        return (bp[0], bp[-1]) if bp else None

    def shifted(self, b) -> "PiecewiseMeasure":
        return PiecewiseMeasure([p.shifted(b) for p in self.pieces], [(a + b, m) for a, m in self.atoms])

    def scaled(self, f) -> "PiecewiseMeasure":
        return PiecewiseMeasure([p.scaled(f) for p in self.pieces], [(a, m * f) for a, m in self.atoms])

    def __add__(self, other: "PiecewiseMeasure") -> "PiecewiseMeasure":
        return PiecewiseMeasure(self.pieces + other.pieces, self.atoms + other.atoms)

    def sample(self, npts: int = 201):
        """Two-column plot data (s, density) on a grid over the support."""
        sup = self.support()
        if sup is None:
            return np.zeros((0, 2))
        s = np.linspace(float(sup[0]), float(sup[1]), npts)
        return np.column_stack([s, self.density(s)])

    def to_json(self):
        def num(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        pieces = []
        for p in self.pieces:
            if p.exact:
                pieces.append({"lo": num(p.lo), "hi": num(p.hi), "coeffs": [num(c) for c in p.coeffs]})
            else:
                pieces.append({"lo": num(p.lo), "hi": num(p.hi), "chebyshev": [float(c) for c in p.cheb.coef]})
        return {
            "pieces": pieces,
            "atoms": [{"at": num(a), "mass": num(m)} for a, m in self.atoms],
            "mass": num(self.mass()),
        }
