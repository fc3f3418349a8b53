import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitonlab import fanocone as fc
from solitonlab.errors import (
    EmptySlice,
    InputError,
    IrregularQuotient,
    NonGorenstein,
    NotPointed,
    OutsideReebCone,
    UnboundedSection,
)


def conifold_vol(x, y, z):
    """Closed form of the normalized volume on the conifold Reeb cone."""
    return (x + y + 2 * z) / (z * (x + z) * (y + z) * (x + y + z))


def test_affine_space_cone():
    c = fc.affine_space(3)
    assert c.gamma == (1, 1, 1)
    assert {tuple(r) for r in c.reeb_rays} == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_conifold_rays_and_gamma():
    c = fc.conifold()
    assert {tuple(r) for r in c.reeb_rays} == {(1, 0, 0), (0, 1, 0), (-1, 0, 1), (0, -1, 1)}
    assert c.gamma == (1, 1, 2)


def test_build_errors():
    with pytest.raises(NotPointed):
        fc.build_fano_cone(moment_generators=[(1, 0), (-1, 0), (0, 1)])
    with pytest.raises(NonGorenstein):
        fc.build_fano_cone(reeb_rays=[(1, 0, 0), (0, 1, 0), (-1, 0, 2), (0, -1, 1)])
    with pytest.raises(InputError):
        fc.build_fano_cone(moment_generators=[(1, 0), (0, 1)], n=2)


def test_rational_gamma_is_allowed():
    c = fc.build_fano_cone(reeb_rays=[(1, 2), (2, 1)])
    assert c.gamma == (F(1, 3), F(1, 3))


# -- volume -------------------------------------------------------------------------


def test_volume_examples():
    assert fc.volume(fc.affine_space(3), (1, 1, 1))["vol"] == 1
    assert fc.volume(fc.conifold(), (0, 0, F(3, 2)))["vol"] == F(16, 27)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_affine_space_volume_is_inverse_product(m):
    xi = tuple(F(k + 1, k + 2) for k in range(m))
    expect = F(1)
    for a in xi:
        expect /= a
    assert fc.volume(fc.affine_space(m), xi, derivatives=False)["vol"] == expect


def test_volume_outside_reeb_cone():
    with pytest.raises(OutsideReebCone):
        fc.volume(fc.conifold(), (1, 1, -1))
    with pytest.raises(InputError):
        fc.volume(fc.conifold(), (1, 1))


reeb = st.tuples(
    st.fractions(F(-1, 2), F(1, 2), max_denominator=9),
    st.fractions(F(-1, 2), F(1, 2), max_denominator=9),
    st.fractions(F(1), F(3), max_denominator=9),
)


@given(reeb)
def test_volume_matches_closed_form(xi):
    c = fc.conifold()
    if not c.is_reeb(xi):
        return
    v = fc.volume(c, xi, derivatives=False)["vol"]
    assert v == conifold_vol(*xi)
    assert v == fc.volume(c, xi, pieces=c.triangulation_alt(), derivatives=False)["vol"]


@given(reeb, st.fractions(F(1, 5), F(5), max_denominator=7))
def test_volume_homogeneity(xi, lam):
    c = fc.conifold()
    if not c.is_reeb(xi):
        return
    v1 = fc.volume(c, xi, derivatives=False)["vol"]
    v2 = fc.volume(c, tuple(lam * a for a in xi), derivatives=False)["vol"]
    assert v2 == v1 * lam ** -3


@given(reeb)
def test_volume_gradient_exact_vs_float(xi):
    c = fc.conifold()
    if not c.is_reeb(xi):
        return
    ex = fc.volume(c, xi)
    fl = fc.volume(c, tuple(float(a) for a in xi))
    assert np.array(fl["gradient"]) == pytest.approx([float(g) for g in ex["gradient"]], rel=1e-12)
    h = 1e-6
    for k in range(3):
        e = np.eye(3)[k] * h
        x = np.array([float(a) for a in xi])
        fd = (conifold_vol(*(x + e)) - conifold_vol(*(x - e))) / (2 * h)
        assert float(ex["gradient"][k]) == pytest.approx(fd, rel=1e-6, abs=1e-8)


# -- MSY --------------------------------------------------------------------------


def test_conifold_msy():
    r = fc.msy_minimize(fc.conifold())
    assert r.vol_star == pytest.approx(16 / 27, abs=1e-12)
    assert r.xi_star == pytest.approx([0, 0, 1.5], abs=1e-10)
    assert np.all(r.reduced_hessian_eigs > 0)


@pytest.mark.parametrize("start", [(0.4, -0.3, 1.6), (0.9, 0.9, 1.2), (-0.4, 0.1, 2.0)])
def test_conifold_msy_from_other_starts(start):
    r = fc.msy_minimize(fc.conifold(), start=start)
    assert r.xi_star == pytest.approx([0, 0, 1.5], abs=1e-8)


def test_conifold_msy_one_parameter_reduction():
    # the slice direction (t, t, -t) keeps <gamma, xi> = 3
    ts = np.linspace(-0.7, 0.7, 1401)
    vals = [conifold_vol(t, t, 1.5 - t) for t in ts]
    assert ts[int(np.argmin(vals))] == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_affine_msy(m):
    r = fc.msy_minimize(fc.affine_space(m), start=np.linspace(0.5, 1.5, m))
    assert r.xi_star == pytest.approx(np.ones(m), abs=1e-10)
    assert r.vol_star == pytest.approx(1.0, abs=1e-12)


def test_affine_msy_brute_force_grid():
    # vol on the slice sum xi = 3 of C^3 is 1 / (x y z)
    c = fc.affine_space(3)
    best = (np.inf, None)
    for x, y in itertools.product(np.linspace(0.5, 1.5, 41), repeat=2):
        z = 3 - x - y
        if z <= 0:
            continue
        v = 1 / (x * y * z)
        best = min(best, (v, (x, y, z)))
    r = fc.msy_minimize(c)
    assert r.vol_star <= best[0] + 1e-12
    assert np.array(best[1]) == pytest.approx(r.xi_star, abs=0.03)


def test_msy_empty_slice():
    with pytest.raises(EmptySlice):
        fc.msy_minimize(fc.conifold(), normalization=(-1, -1, -1))
    with pytest.raises(EmptySlice):
        fc.msy_minimize(fc.conifold(), level=-1)


def test_msy_bad_start():
    with pytest.raises(OutsideReebCone):
        fc.msy_minimize(fc.conifold(), start=(1, 1, -1))


# -- quotients ----------------------------------------------------------------------


def test_quotient_of_c2_is_p1():
    q = fc.quotient(fc.affine_space(2), (1, 1))
    assert q.n == 1
    assert q.polytope.vertices == ((-1,), (1,))
    assert q.report()["gorenstein_index"] == "2"


def test_conifold_quotient_square():
    q = fc.quotient(fc.conifold(), (0, 0, F(3, 2)))
    assert q.polytope.n == 2 and len(q.polytope.vertices) == 4
    _, sol, lift = fc.quotient_soliton(fc.conifold(), (0, 0, F(3, 2)))
    assert sol.xi_star == pytest.approx((0, 0), abs=1e-14)
    assert lift == pytest.approx([0, 0, 1.5], abs=1e-14)


def test_quotient_lift_matches_msy():
    msy = fc.msy_minimize(fc.conifold())
    _, _, lift = fc.quotient_soliton(fc.conifold(), (F(3, 4),) * 3)
    assert lift == pytest.approx(msy.xi_star, abs=1e-8)


def test_quotient_volume_consistency():
    # the quotient's cone volume at the lifted vector equals the cone-side volume
    c = fc.conifold()
    q, sol, lift = fc.quotient_soliton(c, (F(3, 4),) * 3)
    assert float(q.cone_volume(sol.xi_star)) == pytest.approx(16 / 27, rel=1e-10)


def test_quotient_errors():
    c = fc.conifold()
    with pytest.raises(IrregularQuotient):
        fc.quotient(c, ("sqrt(2)", 1, 1))
    with pytest.raises(UnboundedSection):
        fc.quotient(c, (1, 1, 0))


# -- DH invariance ----------------------------------------------------------------------


def test_dh_invariance_trivial_pair():
    c = fc.conifold()
    chi = (F(3, 4),) * 3
    r = fc.dh_invariance_check(c, chi, chi, (1, 1, 0))
    assert float(r["lhs"]) == pytest.approx(float(r["rhs"]), rel=1e-14)


def test_dh_invariance_and_negative_control():
    c = fc.conifold()
    r = fc.dh_invariance_check(c, (0, 0, F(3, 2)), (F(3, 4),) * 3, (1, 0, 0))
    assert abs(float(r["lhs"]) - float(r["rhs"])) < 1e-10
    bad = fc.dh_invariance_check(c, (0, 0, F(3, 2)), (F(3, 4),) * 3, (1, 0, 0), drop_factor=True)
    assert abs(float(bad["lhs"]) - float(bad["rhs"])) > 1e-3


@given(reeb, st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)).filter(lambda m: sum(m) <= 2))
def test_dh_invariance_property(xi, m):
    c = fc.conifold()
    if not c.is_reeb(xi):
        return
    r = fc.dh_invariance_check(c, xi, (F(3, 4),) * 3, m)
    assert float(r["rhs"]) == pytest.approx(float(r["lhs"]), rel=1e-10, abs=1e-12)
