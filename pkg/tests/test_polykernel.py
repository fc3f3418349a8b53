from fractions import Fraction as F
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.errors import Empty, NotFullDim, NotPointed, Unbounded, UnboundedSection
from solitonlab.polykernel import (
    box,
    build_cone,
    build_polytope,
    cross_section,
    integrate,
    integrate_polys,
    moments,
    pushforward_1d,
    simplex_polytope,
    triangulate,
)
from solitonlab.polykernel import poly as Pl
from solitonlab.weights import AffinePinned, ConePower, Constant, Exponential

CONIFOLD = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]


def shoelace(pts):
    pts = np.array(pts, dtype=float)
    c = pts.mean(axis=0)
    pts = pts[np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))]
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


# -- construction ------------------------------------------------------------


def test_interval_from_facets():
    P = build_polytope(facets=[((1,), 1), ((-1,), 1)])
    assert P.vertices == ((F(-1),), (F(1),))
    assert P.volume == 2


def test_p2_from_facets():
    P = build_polytope(facets=[((1, 0), 1), ((0, 1), 1), ((-1, -1), 1)])
    assert set(P.vertices) == {(-1, -1), (2, -1), (-1, 2)}
    assert P == simplex_polytope(2)


def test_hrep_vrep_agree():
    P = build_polytope(vertices=[(-1, 0), (0, -1), (2, -1), (-1, 2), (0, 0)])
    Q = build_polytope(facets=P.facets)
    assert P.vertices == Q.vertices
    assert len(P.vertices) == 4  # (0,0) is interior


def test_unbounded():
    with pytest.raises(Unbounded):
        build_polytope(facets=[((1,), 0), ((1,), -1)])


def test_empty_and_flat():
    with pytest.raises(Empty):
        build_polytope(facets=[((1,), -1), ((-1,), -1)])  # x >= 1 and x <= -1
    with pytest.raises(NotFullDim):
        build_polytope(vertices=[(0, 0), (1, 1), (2, 2)])


def test_translate_moves_facets():
    P = simplex_polytope(2).translate((F(1, 2), -3))
    for v in P.vertices:
        assert P.contains(v)
    assert P.volume == F(9, 2)


# -- triangulation -------------------------------------------------------------


def test_square_triangulation():
    pieces = triangulate(box([0, 0], [1, 1]))
    assert len(pieces) == 2
    assert [s.volume for s in pieces] == [F(1, 2), F(1, 2)]


def test_simplex_is_one_piece():
    assert len(triangulate(simplex_polytope(3))) == 1


def test_conifold_cone_triangulation():
    pieces = triangulate(build_cone(generators=CONIFOLD))
    assert len(pieces) == 2
    assert sorted(abs(p.det) for p in pieces) == [1, 1]


def test_pivot_choice_changes_nothing():
    P = build_polytope(vertices=[(-1, 0), (0, -1), (2, -1), (-1, 2)])
    a = sum(s.volume for s in triangulate(P, pivot="first"))
    b = sum(s.volume for s in triangulate(P, pivot="last"))
    assert a == b == F(4)


# -- cones --------------------------------------------------------------------


def test_dual_cone_of_conifold():
    C = build_cone(generators=CONIFOLD)
    D = C.dual()
    assert {tuple(g) for g in D.generators} == {(1, 0, 0), (0, 1, 0), (-1, 0, 1), (0, -1, 1)}
    assert D.dual() == C


def test_half_plane_not_pointed():
    with pytest.raises(NotPointed):
        build_cone(generators=[(1, 0), (-1, 0), (0, 1)])


def test_cross_sections():
    seg = cross_section(build_cone(generators=[(1, 0), (0, 1)]), (1, 1))
    assert seg.n == 1 and seg.volume == 1
    sq = cross_section(build_cone(generators=CONIFOLD), (0, 0, 1))
    assert sq.volume == 1 and len(sq.vertices) == 4
    with pytest.raises(UnboundedSection):
        cross_section(build_cone(generators=CONIFOLD), (0, 0, -1))


# -- integration -------------------------------------------------------------------


def test_integrate_examples():
    I = box([-1], [1])
    assert integrate(I) == 2
    assert integrate(I, Exponential(I, (1,))) == pytest.approx(2 * np.sinh(1), abs=1e-14)
    assert integrate(simplex_polytope(2)) == 9


def test_integrate_area_matches_shoelace():
    verts = [(-1, 0), (0, -1), (2, -1), (-1, 2), (1, 1)]
    P = build_polytope(vertices=verts)
    assert float(integrate(P)) == pytest.approx(2 * shoelace(P.vertices_float()), abs=1e-14)


def test_barycenters():
    m = moments(box([-1], [1]))
    assert m.barycenter == (0,)
    assert m.covariance[0][0] == F(1, 3)
    B = build_polytope(vertices=[(-1, 0), (0, -1), (2, -1), (-1, 2)])
    assert moments(B).barycenter == (F(1, 12), F(1, 12))


def test_pushforward_examples():
    pf = pushforward_1d(box([0, 0], [1, 1]), None, (1, 0))
    assert pf.density([0.3, 0.7]) == pytest.approx([2, 2])
    B = build_polytope(vertices=[(-1, 0), (0, -1), (2, -1), (-1, 2)])
    pf = pushforward_1d(B, None, (1, 1))
    s = np.linspace(-0.9, 0.9, 7)
    assert pf.density(s) == pytest.approx(2 * (s + 2), abs=1e-12)
    assert pf.mass() == integrate(B)
    pf = pushforward_1d(box([-1], [1]), None, (1,))
    assert pf.density([0.0]) == pytest.approx([1.0])


def test_exponential_against_monte_carlo_free_oracle():
    # 1D closed form for int x^k e^{tx} over [a, b] via repeated integration by parts
    a, b, t = -1.0, 2.0, 0.7
    I = box([-1], [2])
    g = Exponential(I, (t,))
    x, w = np.polynomial.legendre.leggauss(40)
    xs = 0.5 * (b - a) * x + 0.5 * (b + a)
    for k in range(4):
        ref = 0.5 * (b - a) * np.dot(w, xs**k * np.exp(t * xs))
        assert float(integrate(I, g, (k,))) == pytest.approx(ref, rel=1e-13)


def test_cone_power_near_confluent_nodes():
    # tiny xi makes the divided-difference nodes nearly coincide
    P = simplex_polytope(2)
    xi = (1e-9, -2e-9)
    exact = F(9) * F(1, 81)
    assert float(integrate(P, ConePower(P, xi))) == pytest.approx(float(exact), rel=1e-7)


# -- properties ------------------------------------------------------------------------

small = st.integers(-3, 3)
points2 = st.lists(st.tuples(small, small), min_size=3, max_size=7)


def _poly_or_none(pts):
    try:
        return build_polytope(vertices=pts)
    except NotFullDim:
        return None


@given(points2)
def test_triangulation_volume_is_shoelace(pts):
    P = _poly_or_none(pts)
    if P is None:
        return
    tri = triangulate(P)
    assert sum(s.volume for s in tri) == P.volume
    assert float(P.volume) == pytest.approx(shoelace(P.vertices_float()), abs=1e-12)


@given(points2, st.integers(0, 3), st.integers(0, 3))
def test_integrals_do_not_depend_on_pivot(pts, i, j):
    P = _poly_or_none(pts)
    if P is None:
        return
    m = Pl.monomial((i, j))
    assert integrate(P, None, (i, j), pivot="first") == integrate(P, None, (i, j), pivot="last")
    assert integrate_polys(P, None, [m])[0] == integrate(P, None, (i, j))


@given(points2, st.tuples(st.fractions(-2, 2, max_denominator=5), st.fractions(-2, 2, max_denominator=5)))
def test_translation_shifts_barycenter(pts, t):
    P = _poly_or_none(pts)
    if P is None:
        return
    b0 = moments(P).barycenter
    b1 = moments(P.translate(t)).barycenter
    assert tuple(x + s for x, s in zip(b0, t)) == b1


@given(points2, st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
@settings(max_examples=40)
def test_exponential_weight_matches_quadrature(pts, xi):
    P = _poly_or_none(pts)
    if P is None:
        return
    # Gauss-Legendre on each simplex through the collapsed (Duffy) map,
    # whose Jacobian is 2 * area * xa
    x, w = np.polynomial.legendre.leggauss(30)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    xa, xb = np.meshgrid(x, x, indexing="ij")
    wa, wb = np.meshgrid(w, w, indexing="ij")
    total = 0.0
    for s in triangulate(P):
        A = np.array([[float(c) for c in v] for v in s.vertices])
        q = (1 - xa)[..., None] * A[0] + (xa * (1 - xb))[..., None] * A[1] + (xa * xb)[..., None] * A[2]
        total += 2 * float(s.volume) * np.sum(wa * wb * xa * np.exp(q @ np.array(xi)))
    got = float(integrate(P, Exponential(P, xi)))
    assert got == pytest.approx(factorial(2) * total, rel=1e-11)


@given(points2, st.tuples(st.fractions(-1, 1, max_denominator=4), st.fractions(-1, 1, max_denominator=4)))
def test_pushforward_moments_match_direct(pts, ell):
    P = _poly_or_none(pts)
    if P is None or ell == (0, 0):
        return
    pf = pushforward_1d(P, None, ell)
    lin = Pl.linear(ell)
    for k in range(3):
        direct = integrate_polys(P, None, [Pl.power(lin, k, 2)])[0]
        assert float(pf.moment(k)) == pytest.approx(float(direct), rel=1e-12, abs=1e-12)


@given(points2)
def test_affine_weight_integral_is_exact(pts):
    P = _poly_or_none(pts)
    if P is None:
        return
    g = AffinePinned(P, (F(1, 7), F(-1, 5)))
    # pinned at the barycenter: the linear part integrates to zero
    assert integrate(P, g) == integrate(P, Constant(P))
