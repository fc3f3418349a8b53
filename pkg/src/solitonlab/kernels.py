"""Float grid kernels for one-dimensional potentials.

Each kernel exists twice: a numba loop version and a vectorized numpy
version with identical semantics.  ``SOLITONLAB_DISABLE_JIT=1`` (or a
missing numba) routes every call to the numpy versions.

Potentials are node data (x, u, u', u'') with quintic Hermite interpolation
between nodes, so values are accurate to O(h^6) and derivatives one or two
orders less.
"""

import numpy as np

from ._jit import JIT_ENABLED, njit

try:
    from numba import prange
except ImportError:  # pragma: no cover
    prange = range

NEWTON_ITERS = 60

# quintic Hermite basis on [0, 1]: rows are (value0, d0, dd0, value1, d1, dd1),
# columns the monomial coefficients of t^0..t^5
_Q = np.array(
    [
        [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
        [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
        [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
        [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
        [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
        [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
    ]
)

# central first and second derivative stencils (orders 6, 4, 2)
_D1 = {
    3: np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60]),
    2: np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    1: np.array([-0.5, 0.0, 0.5]),
}
_D2 = {
    3: np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90]),
    2: np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
    1: np.array([1.0, -2.0, 1.0]),
}


def stencil_rows(N):
    """Yield (i, offset list, d1 weights, d2 weights) for every grid index.

    Interior points get 6th order central stencils, the first and last few
    drop to 4th and 2nd order, and the two end points use one-sided 2nd order.
    """
    for i in range(N):
        r = min(i, N - 1 - i, 3)
        if r == 0:
            s = 1 if i == 0 else -1
            offs = [0, s, 2 * s]
            d1 = np.array([-1.5, 2.0, -0.5]) * s
            d2 = np.array([1.0, -2.0, 1.0])
            yield i, offs, d1, d2
        else:
            offs = list(range(-r, r + 1))
            yield i, offs, _D1[r], _D2[r]


# -- finite differences ----------------------------------------------------------


def _fd6_np(u, h):
    N = len(u)
    du = np.empty(N)
    d2 = np.empty(N)
    for r in (1, 2, 3):
        idx = np.arange(r, N - r)
        if r < 3:
            idx = np.array([r, N - 1 - r])
        a1 = np.zeros(len(idx))
        a2 = np.zeros(len(idx))
        for k, off in enumerate(range(-r, r + 1)):
            a1 += _D1[r][k] * u[idx + off]
            a2 += _D2[r][k] * u[idx + off]
        du[idx] = a1 / h
        d2[idx] = a2 / (h * h)
    du[0] = (-1.5 * u[0] + 2 * u[1] - 0.5 * u[2]) / h
    du[-1] = (1.5 * u[-1] - 2 * u[-2] + 0.5 * u[-3]) / h
    d2[0] = (u[0] - 2 * u[1] + u[2]) / (h * h)
    d2[-1] = (u[-1] - 2 * u[-2] + u[-3]) / (h * h)
    return du, d2


@njit(cache=True)
def _fd6_jit(u, h):
    N = u.shape[0]
    du = np.empty(N)
    d2 = np.empty(N)
    c1 = (3 / 4, -3 / 20, 1 / 60)
    c2 = (3 / 2, -3 / 20, 1 / 90)
    for i in range(3, N - 3):
        a = 0.0
        b = -49 / 18 * u[i]
        for k in range(3):
            a += c1[k] * (u[i + k + 1] - u[i - k - 1])
            b += c2[k] * (u[i + k + 1] + u[i - k - 1])
        du[i] = a / h
        d2[i] = b / (h * h)
    for i in (2, N - 3):
        du[i] = (2 / 3 * (u[i + 1] - u[i - 1]) - 1 / 12 * (u[i + 2] - u[i - 2])) / h
        d2[i] = (4 / 3 * (u[i + 1] + u[i - 1]) - 1 / 12 * (u[i + 2] + u[i - 2]) - 2.5 * u[i]) / (h * h)
    for i in (1, N - 2):
        du[i] = 0.5 * (u[i + 1] - u[i - 1]) / h
        d2[i] = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h)
    du[0] = (-1.5 * u[0] + 2 * u[1] - 0.5 * u[2]) / h
    du[N - 1] = (1.5 * u[N - 1] - 2 * u[N - 2] + 0.5 * u[N - 3]) / h
    d2[0] = (u[0] - 2 * u[1] + u[2]) / (h * h)
    d2[N - 1] = (u[N - 1] - 2 * u[N - 2] + u[N - 3]) / (h * h)
    return du, d2


# -- quintic Hermite pieces -------------------------------------------------------------


def _cell_coeffs_np(x, u, du, d2, i):
    h = x[i + 1] - x[i]
    data = np.stack([u[i], h * du[i], h * h * d2[i], u[i + 1], h * du[i + 1], h * h * d2[i + 1]], axis=-1)
    return data @ _Q, h


def _polyval_np(c, t, der):
    out = np.zeros_like(t)
    for k in range(5, der - 1, -1):
        f = 1.0
        for j in range(der):
            f *= k - j
        out = out * t + f * c[..., k]
    return out


def _locate_np(x, q):
    i = np.searchsorted(x, q, side="right") - 1
    return np.clip(i, 0, len(x) - 2)


def _hermite_eval_np(x, u, du, d2, q):
    q = np.asarray(q, dtype=float)
    i = _locate_np(x, q)
    c, h = _cell_coeffs_np(x, u, du, d2, i)
    t = np.clip((q - x[i]) / h, 0.0, 1.0)
    v = _polyval_np(c, t, 0)
    d = _polyval_np(c, t, 1) / h
    dd = _polyval_np(c, t, 2) / (h * h)
    # linear continuation outside the node range
    lo, hi = q < x[0], q > x[-1]
    v = np.where(lo, u[0] + du[0] * (q - x[0]), v)
    v = np.where(hi, u[-1] + du[-1] * (q - x[-1]), v)
    d = np.where(lo, du[0], np.where(hi, du[-1], d))
    dd = np.where(lo | hi, 0.0, dd)
    return v, d, dd


def _legendre_np(x, u, du, d2, ys):
    """For each y: maximizer x*, phi(y) = x* y - u(x*), and u''(x*)."""
    ys = np.asarray(ys, dtype=float)
    j = np.searchsorted(du, ys, side="left") - 1
    j = np.clip(j, 0, len(x) - 2)
    c, h = _cell_coeffs_np(x, u, du, d2, j)
    lo = np.zeros_like(ys)
    hi = np.ones_like(ys)
    t = np.full_like(ys, 0.5)
    for _ in range(NEWTON_ITERS):
        f = _polyval_np(c, t, 1) / h - ys
        fp = _polyval_np(c, t, 2) / (h * h)
        lo = np.where(f < 0, t, lo)
        hi = np.where(f >= 0, t, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - f / (fp * h)
        bad = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
        tn = np.where(bad, 0.5 * (lo + hi), tn)
        if np.all(np.abs(tn - t) < 1e-16):
            t = tn
            break
        t = tn
    xs = x[j] + t * h
    val = _polyval_np(c, t, 0)
    dd = _polyval_np(c, t, 2) / (h * h)
    below, above = ys <= du[0], ys >= du[-1]
    xs = np.where(below, x[0], np.where(above, x[-1], xs))
    val = np.where(below, u[0], np.where(above, u[-1], val))
    dd = np.where(below, d2[0], np.where(above, d2[-1], dd))
    return xs, xs * ys - val, dd


@njit(cache=True)
def _cell_jit(x, u, du, d2, i, Q, c):
    h = x[i + 1] - x[i]
    data = (u[i], h * du[i], h * h * d2[i], u[i + 1], h * du[i + 1], h * h * d2[i + 1])
    for k in range(6):
        s = 0.0
        for r in range(6):
            s += data[r] * Q[r, k]
        c[k] = s
    return h


@njit(cache=True)
def _pv_jit(c, t, der):
    out = 0.0
    for k in range(5, der - 1, -1):
        f = 1.0
        for j in range(der):
            f *= k - j
        out = out * t + f * c[k]
    return out


@njit(cache=True)
def _bsearch(a, v):
    # largest i with a[i] < v, clipped to [0, len-2]
    lo, hi = 0, a.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[mid] < v:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True, parallel=True)
def _legendre_jit(x, u, du, d2, ys, Q):
    m = ys.shape[0]
    N = x.shape[0]
    xs = np.empty(m)
    phi = np.empty(m)
    dd = np.empty(m)
    for q in prange(m):
        y = ys[q]
        if y <= du[0]:
            xs[q] = x[0]
            phi[q] = x[0] * y - u[0]
            dd[q] = d2[0]
            continue
        if y >= du[N - 1]:
            xs[q] = x[N - 1]
            phi[q] = x[N - 1] * y - u[N - 1]
            dd[q] = d2[N - 1]
            continue
        j = _bsearch(du, y)
        c = np.empty(6)
        h = _cell_jit(x, u, du, d2, j, Q, c)
        lo, hi, t = 0.0, 1.0, 0.5
        for _ in range(NEWTON_ITERS):
            f = _pv_jit(c, t, 1) / h - y
            fp = _pv_jit(c, t, 2) / (h * h)
            if f < 0:
                lo = t
            else:
                hi = t
            tn = t - f / (fp * h) if fp != 0 else -1.0
            if not (lo < tn < hi):
                tn = 0.5 * (lo + hi)
            if abs(tn - t) < 1e-16:
                t = tn
                break
            t = tn
        xs[q] = x[j] + t * h
        phi[q] = xs[q] * y - _pv_jit(c, t, 0)
        dd[q] = _pv_jit(c, t, 2) / (h * h)
    return xs, phi, dd


@njit(cache=True, parallel=True)
def _hermite_eval_jit(x, u, du, d2, qs, Q):
    m = qs.shape[0]
    N = x.shape[0]
    v = np.empty(m)
    d = np.empty(m)
    dd = np.empty(m)
    for k in prange(m):
        q = qs[k]
        if q < x[0]:
            v[k] = u[0] + du[0] * (q - x[0])
            d[k] = du[0]
            dd[k] = 0.0
            continue
        if q > x[N - 1]:
            v[k] = u[N - 1] + du[N - 1] * (q - x[N - 1])
            d[k] = du[N - 1]
            dd[k] = 0.0
            continue
        # largest i with x[i] <= q
        lo, hi = 0, N - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if x[mid] <= q:
                lo = mid
            else:
                hi = mid
        c = np.empty(6)
        h = _cell_jit(x, u, du, d2, lo, Q, c)
        t = min(max((q - x[lo]) / h, 0.0), 1.0)
        v[k] = _pv_jit(c, t, 0)
        d[k] = _pv_jit(c, t, 1) / h
        dd[k] = _pv_jit(c, t, 2) / (h * h)
    return v, d, dd


# -- dispatch ----------------------------------------------------------------------------


def _f(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def fd6(u, h, use_jit=None):
    """First and second derivatives of uniform grid samples."""
    jit = JIT_ENABLED if use_jit is None else use_jit
    u = _f(u)
    if len(u) < 7:
        raise ValueError("fd6 needs at least 7 grid points")
    return _fd6_jit(u, float(h)) if jit else _fd6_np(u, float(h))


def legendre_points(x, u, du, d2, ys, use_jit=None):
    """Legendre transform of Hermite node data at the slopes ``ys``.

    Returns (x*, phi, u''(x*)); slopes outside the node slope range are
    clipped to the end nodes (the sup over the truncation box).
    """
    jit = JIT_ENABLED if use_jit is None else use_jit
    args = (_f(x), _f(u), _f(du), _f(d2), _f(np.atleast_1d(ys)))
    return _legendre_jit(*args, _Q) if jit else _legendre_np(*args)


def hermite_eval(x, u, du, d2, q, use_jit=None):
    """(value, first, second derivative) of the quintic Hermite interpolant."""
    jit = JIT_ENABLED if use_jit is None else use_jit
    args = (_f(x), _f(u), _f(du), _f(d2), _f(np.atleast_1d(q)))
    return _hermite_eval_jit(*args, _Q) if jit else _hermite_eval_np(*args)
