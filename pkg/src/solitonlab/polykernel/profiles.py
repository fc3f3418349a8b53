"""One-variable profiles h composed with an affine function of x.

An integrand is ``poly(x) * kappa * h(c + <x, w>)``.  Closed-form profiles
(exp and negative integer powers) expose all antiderivatives and
derivatives, which is what the divided-difference integrator needs;
anything else falls back to quadrature through ``CallableProfile``.
"""

from math import factorial

import numpy as np

from ..errors import WeightDomain


def _pull(c, w, A, b):
    """c + <A y + b, w> = c' + <y, w'>."""
    c2 = c + sum((bk * wk for bk, wk in zip(b, w)), 0)
    m = len(A[0]) if A else 0
    w2 = tuple(sum((A[k][j] * w[k] for k in range(len(w))), 0) for j in range(m))
    return c2, w2


class Profile:
    closed_form = True

    def __init__(self, kappa, c, w):
        self.kappa = kappa
        self.c = c
        self.w = tuple(w)

    def nodes(self, points):
        """Affine argument c + <v, w> at each point, as floats."""
        return [float(self.c + sum((a * b for a, b in zip(v, self.w)), 0)) for v in points]

    def argument(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return float(self.c) + X @ np.array([float(a) for a in self.w]) if self.w else np.full(X.shape[0], float(self.c))

    def evaluate(self, X):
        return float(self.kappa) * self.h(self.argument(X))

    def pullback(self, A, b):
        c2, w2 = _pull(self.c, self.w, A, b)
        return self._with(c2, w2)

    def scaled(self, s):
        out = self._with(self.c, self.w)
        out.kappa = self.kappa * s
        return out


class ExpProfile(Profile):
    """kappa * exp(c + <x, w>)."""

    name = "exp"

    def _with(self, c, w):
        return ExpProfile(self.kappa, c, w)

    def h(self, z):
        return np.exp(z)

    def anti(self, j, z):
        return np.exp(z)

    def check_domain(self, t):
        return None

    def cluster_ok(self, zlo, zhi):
        return zhi - zlo <= 1.0


class PowerProfile(Profile):
    """kappa * (c + <x, w>)^(-p) for a positive integer p, argument kept > 0."""

    name = "power"

    def __init__(self, kappa, c, w, p):
        super().__init__(kappa, c, w)
        if int(p) != p or p < 1:
            raise ValueError("power profile needs a positive integer exponent")
        self.p = int(p)

    def _with(self, c, w):
        return PowerProfile(self.kappa, c, w, self.p)

    def h(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise WeightDomain("power profile evaluated at a nonpositive base")
        return z ** (-self.p)

    def check_domain(self, t):
        if min(t) <= 0:
            raise WeightDomain("power profile base is nonpositive on the integration domain")

    def anti(self, j, z):
        """j-fold antiderivative for j >= 0, (-j)-th derivative for j < 0."""
        p = self.p
        if j < 0:
            d = -j
            coef = 1.0
            for i in range(d):
                coef *= -p - i
            return coef * z ** (-p - d)
        if j < p:
            coef = 1.0
            for k in range(1, j + 1):
                coef *= k - p
            return z ** (j - p) / coef
        C = (-1) ** (p - 1) / factorial(p - 1)
        m = j - p + 1
        harm = sum(1.0 / i for i in range(1, m))
        return C * z ** (m - 1) * (np.log(z) - harm) / factorial(m - 1)

    def cluster_ok(self, zlo, zhi):
        return zhi - zlo <= 0.25 * zlo


class CallableProfile(Profile):
    """kappa * h(c + <x, w>) for a vectorized callable h; quadrature only."""

    closed_form = False
    name = "callable"

    def __init__(self, kappa, c, w, func, label="h"):
        super().__init__(kappa, c, w)
        self.func = func
        self.label = label

    def _with(self, c, w):
        return CallableProfile(self.kappa, c, w, self.func, self.label)

    def h(self, z):
        return self.func(np.asarray(z, dtype=float))

    def check_domain(self, t):
        return None


class FieldProfile(Profile):
    """kappa * F(x) for a vectorized callable F of the full point; quadrature only."""

    closed_form = False
    name = "field"

    def __init__(self, kappa, func, label="F"):
        super().__init__(kappa, 0, ())
        self.func = func
        self.label = label

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return float(self.kappa) * self.func(X)

    def pullback(self, A, b):
        Af = np.array([[float(a) for a in row] for row in A])
        bf = np.array([float(x) for x in b])
        f = self.func
        return FieldProfile(self.kappa, lambda Y: f(np.atleast_2d(Y) @ Af.T + bf), self.label)

    def scaled(self, s):
        return FieldProfile(self.kappa * s, self.func, self.label)

    def check_domain(self, t):
        return None


# -- divided differences ----------------------------------------------------


def _complete_homogeneous(deltas, R):
    """h_r(deltas) for r = 0..R-1."""
    h = np.zeros(R)
    h[0] = 1.0
    for d in deltas:
        for r in range(1, R):
            h[r] = h[r] + d * h[r - 1]
    return h


def divided_difference(profile, N, nodes):
    """Confluent divided difference of H_N (the N-th antiderivative of h) at ``nodes``.

    ``len(nodes)`` must be N + 1.  Exactly equal nodes use derivatives;
    clustered nodes use a Taylor expansion around their mean; well separated
    nodes use the usual recursion.
    """
    z = sorted(float(t) for t in nodes)
    if len(z) != N + 1:
        raise ValueError("need N + 1 nodes")
    memo = {}

    def taylor(i, j):
        k = j - i
        seg = z[i : j + 1]
        c = sum(seg) / len(seg)
        deltas = [t - c for t in seg]
        R = 40
        if isinstance(profile, ExpProfile):
            e = np.exp(c)
            hr = _complete_homogeneous(deltas, R)
            return float(sum(e * hr[r] / factorial(k + r) for r in range(R)))
        hr = _complete_homogeneous(deltas, 80)
        # stop on the bound from |deltas|; odd terms can vanish by symmetry
        hb = _complete_homogeneous([abs(t) for t in deltas], 80)
        total = 0.0
        for r in range(80):
            coef = profile.anti(N - k - r, c) / factorial(k + r)
            total += coef * hr[r]
            if r > 2 and abs(coef) * hb[r] <= 1e-18 * abs(total):
                break
        return float(total)

    def dd(i, j):
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == j:
            val = float(profile.anti(N, z[i]))
        elif profile.cluster_ok(z[i], z[j]):
            val = taylor(i, j)
        else:
            val = (dd(i + 1, j) - dd(i, j - 1)) / (z[j] - z[i])
        memo[key] = val
        return val

    return dd(0, N)
