from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from solitonlab import toricfunc as tf
from solitonlab.errors import InputError, NotConvex, ObstructedFutaki, QuadratureDiverged
from solitonlab.solitons import solve_weight_vector
from solitonlab.weights import Exponential


def fs_dual(y):
    return (1 + y) * np.log1p(y) + (1 - y) * np.log1p(-y) - np.log(2)


@pytest.fixture(scope="module")
def u0():
    return tf.fs_potential()


# -- Legendre transform ---------------------------------------------------------------------


def test_quadratic_is_self_dual():
    u = tf.ToricPotential.from_function(lambda x: 0.5 * x * x, X=10, N=2001)
    ys = np.linspace(-9.5, 9.5, 77)
    assert u.phi(ys) == pytest.approx(0.5 * ys * ys, abs=1e-12)
    phi = tf.legendre(u)
    assert phi.phi == pytest.approx(0.5 * phi.y**2, abs=1e-12)


def test_fs_reference_closed_form(u0):
    assert u0.u == pytest.approx(tf.fs_closed_form(u0.x), abs=1e-12)
    ys = np.linspace(-0.999, 0.999, 101)
    assert u0.phi(ys) == pytest.approx(fs_dual(ys), abs=1e-6)


def test_shift_duality(u0):
    ys = np.linspace(-0.9, 0.9, 11)
    assert u0.shift(0.7).phi(ys) == pytest.approx(u0.phi(ys) - 0.7, abs=1e-13)
    phi = tf.legendre(u0)
    back = phi.shift(0.3).legendre(u0.x)
    assert back.u == pytest.approx(u0.u - 0.3, abs=1e-9)


def test_guillemin_normalization():
    # int exp(-u) dx = b - a for the reference potential
    # a slope of -1/2 decays slowly, so that case gets a wider box
    for P, X in (((-1, 1), 30), ((-1, 2), 30), ((-0.5, 3), 70)):
        u = tf.fs_potential(P, X=X, N=8193)
        assert u.integrate(np.exp(-u.u)) == pytest.approx(P[1] - P[0], rel=1e-9)


def test_reference_needs_interior_origin():
    with pytest.raises(InputError):
        tf.guillemin((0, 1))


def test_legendre_round_trip_on_nodes(u0):
    back = tf.legendre(u0).legendre(u0.x)
    assert back.u == pytest.approx(u0.u, abs=1e-10)
    assert back.du == pytest.approx(u0.du, abs=1e-10)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20)
def test_legendre_round_trip_off_grid(seed):
    rng = np.random.default_rng(seed)
    u = tf.random_potential(rng)
    phi = tf.legendre(u)
    xs = rng.uniform(-25, 25, 40)
    uu, du, _ = u.at(xs)
    # phi(u'(x)) + u(x) = x u'(x) at points that are not nodes
    assert phi.at(du)[0] + uu == pytest.approx(xs * du, abs=1e-8)
    assert u.phi(du) + uu == pytest.approx(xs * du, abs=1e-8)


def test_not_convex_grid():
    x = np.linspace(-5, 5, 201)
    bad = np.abs(x) - 0.5 * np.exp(-x * x)
    with pytest.raises(NotConvex):
        tf.ToricPotential.from_grid(x, np.sin(x))
    fixed = tf.ToricPotential.from_grid(x, bad, repair=True)
    assert np.all(np.diff(fixed.u, 2) >= -1e-12)


def test_potential_without_polytope():
    u = tf.ToricPotential.from_function(np.cosh, X=5, N=101)
    with pytest.raises(InputError):
        u.check_slopes()
    with pytest.raises(InputError):
        tf.functionals(u)


# -- functionals ----------------------------------------------------------------------------------


def test_functionals_at_reference(u0):
    f = tf.functionals(u0, None, u0)
    for k in ("E", "I", "J", "Lambda", "H", "M"):
        assert f[k] == pytest.approx(0.0, abs=1e-10)
    assert f["D"] == pytest.approx(f["L"], abs=1e-12)
    assert f["L"] == pytest.approx(0.0, abs=1e-9)  # int exp(-u0) = V


def test_functionals_constant_shift(u0):
    base = tf.functionals(u0, None, u0)
    for c in (-1.3, 0.4, 2.0):
        f = tf.functionals(u0.shift(c), None, u0)
        assert f["I"] == pytest.approx(0, abs=1e-10)
        assert f["J"] == pytest.approx(0, abs=1e-10)
        assert f["E"] == pytest.approx(c, abs=1e-10)
        assert f["D"] == pytest.approx(base["D"], abs=1e-10)


def test_ding_minimized_at_soliton(u0):
    rng = np.random.default_rng(7)
    d_star = tf.functionals(u0, None, u0)["D"]
    for _ in range(50):
        f = tf.functionals(tf.random_potential(rng), None, u0)
        assert d_star <= f["D"] + 1e-10


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25)
def test_functional_inequalities(seed):
    rng = np.random.default_rng(seed)
    u0 = tf.fs_potential()
    u = tf.random_potential(rng)
    f = tf.functionals(u, None, u0)
    assert f["I"] >= 0
    assert f["J"] >= 0
    # I/(n+1) <= J <= n I/(n+1) with n = 1 gives J = I/2 up to discretization
    assert f["J"] == pytest.approx(f["I"] / 2, rel=1e-6, abs=1e-9)
    assert f["M"] >= f["D"] - 1e-9
    assert f["H"] >= -1e-9


@given(st.integers(0, 2**31 - 1), st.floats(-1.5, 1.5))
@settings(max_examples=15)
def test_weighted_functional_inequalities(seed, t):
    rng = np.random.default_rng(seed)
    P = tf.interval(-1, 1)
    w = Exponential(P, (t,))
    u0 = tf.fs_potential()
    u = tf.random_potential(rng)
    f = tf.functionals(u, w, u0)
    assert f["I"] >= -1e-12
    assert f["M"] >= f["D"] - 1e-9


def test_quadrature_box_too_small():
    u = tf.fs_potential(X=5, N=401)
    with pytest.raises(QuadratureDiverged):
        tf.functionals(u, None, u)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=10)
def test_pushforward_of_monge_ampere_measure(seed):
    u = tf.random_potential(np.random.default_rng(seed), P=(-1, 2))
    P = tf.interval(-1, 2)
    w = Exponential(P, (0.3,))
    for num, exact in tf.pushforward_moments(u, w):
        assert num == pytest.approx(exact, rel=1e-8, abs=1e-10)


# -- geodesics -------------------------------------------------------------------------------------


def test_geodesic_endpoints(u0):
    u1 = tf.random_potential(np.random.default_rng(3))
    assert tf.geodesic(u0, u1, 0) is u0
    assert tf.geodesic(u0, u1, 1) is u1


def test_geodesic_midpoint_is_average_of_phi(u0):
    u1 = tf.random_potential(np.random.default_rng(4))
    g = tf.geodesic(u0, u1, 0.5)
    ys = np.linspace(-0.95, 0.95, 31)
    assert g.phi(ys) == pytest.approx(0.5 * (u0.phi(ys) + u1.phi(ys)), abs=1e-9)


def test_geodesic_properties(u0):
    rng = np.random.default_rng(11)
    a, b = tf.random_potential(rng), tf.random_potential(rng)
    ts = np.linspace(0, 1, 11)
    fs = [tf.functionals(tf.geodesic(a, b, t), None, u0) for t in ts]
    E = np.array([f["E"] for f in fs])
    assert np.max(np.abs(E - (E[0] + ts * (E[-1] - E[0])))) < 1e-8
    assert np.min(np.diff([f["D"] for f in fs], 2)) >= -1e-8
    assert np.min(np.diff([f["M"] for f in fs], 2)) >= -1e-8


def test_linear_blend_is_not_a_geodesic(u0):
    # E is affine along geodesics but not along the straight line in u
    u1 = tf.random_potential(np.random.default_rng(5), shift=False)
    ts = np.linspace(0, 1, 5)
    E = np.array([tf.functionals(tf.blend(u0, u1, t), None, u0)["E"] for t in ts])
    assert np.max(np.abs(E - (E[0] + ts * (E[-1] - E[0])))) > 1e-6


def test_geodesic_different_polytopes(u0):
    with pytest.raises(InputError):
        tf.geodesic(u0, tf.fs_potential((-1, 2)), 0.5)


# -- soliton ODE --------------------------------------------------------------------------------------


def test_ode_fubini_study():
    pot = tf.solve_gsoliton_1d((-1, 1))
    mask = np.abs(pot.x) <= 20
    assert np.max(np.abs(pot.u - tf.fs_closed_form(pot.x))[mask]) < 1e-6
    assert pot.info["residual"] < 1e-8
    assert pot.info["iterations"] > 0
    assert pot.info["mass_defect"] < 1e-8


def test_ode_obstructed():
    with pytest.raises(ObstructedFutaki):
        tf.solve_gsoliton_1d((-1, F(1, 2)))


def test_ode_trivial_exponential_weight():
    P = tf.interval(-1, 1)
    sol = solve_weight_vector(P, "kr")
    a = tf.solve_gsoliton_1d(P, sol.weight)
    b = tf.solve_gsoliton_1d((-1, 1))
    assert a.u == pytest.approx(b.u, abs=1e-12)


def first_integral_oracle(a, b, g, ys):
    """u on the curve x(y) from exp(-u) = F(u'), F(y) = -int_a^y s g(s) ds."""

    gs, gw = np.polynomial.legendre.leggauss(64)

    def Fy(y):
        s = 0.5 * (y - a) * gs + 0.5 * (y + a)
        return -0.5 * (y - a) * np.dot(gw, s * g(s))

    xs = np.array([quad(lambda s: g(s) / Fy(s), 0, y, epsabs=1e-13, epsrel=1e-12)[0] for y in ys])
    us = np.array([-np.log(Fy(y)) for y in ys])
    return xs, us


def test_ode_kr_against_first_integral():
    P = tf.interval(-1, 2)
    sol = solve_weight_vector(P, "kr")
    pot = tf.solve_gsoliton_1d(P, sol.weight)
    t = float(sol.xi_star[0])
    ys = np.linspace(-0.9, 1.9, 15)
    xs, us = first_integral_oracle(-1.0, 2.0, lambda s: np.exp(t * s), ys)
    uu, du, _ = pot.at(xs)
    assert du == pytest.approx(ys, abs=1e-7)
    assert uu == pytest.approx(us, abs=1e-7)
    assert pot.info["mass"] == pytest.approx(pot.info["V_g"], rel=1e-8)


def test_ode_kr_is_functional_critical_point():
    # the soliton minimizes the weighted Ding functional against random potentials
    P = tf.interval(-1, 2)
    sol = solve_weight_vector(P, "kr")
    pot = tf.solve_gsoliton_1d(P, sol.weight)
    u0 = tf.fs_potential((-1, 2))
    d_star = tf.functionals(pot, sol.weight, u0)["D"]
    rng = np.random.default_rng(2)
    for _ in range(10):
        u = tf.random_potential(rng, P=(-1, 2))
        assert d_star <= tf.functionals(u, sol.weight, u0)["D"] + 1e-8
