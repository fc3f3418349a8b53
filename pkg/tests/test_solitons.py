from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitonlab.checks import blp2, kr_diagonal_oracle, random_polytope
from solitonlab.errors import Infeasible, InputError
from solitonlab.polykernel import box, integrate, simplex_polytope
from solitonlab.solitons import fut_normalized, futaki, potential, require_feasible, solve_weight_vector
from solitonlab.weights import AffinePinned, ConePower, Constant, Exponential

I = box([-1], [1])


def test_futaki_sign_pinned():
    # futaki = -int <x, zeta> g: mass on the positive side gives a negative value
    P = box([0], [1])
    assert futaki(P, Constant(P), (1,)) == F(-1, 2)


def test_futaki_examples(blp2):
    assert futaki(I, Constant(I), (1,)) == 0
    assert futaki(blp2, Constant(blp2), (1, 1)) == F(-4, 3)
    assert float(futaki(I, Exponential(I, (1,)), (1,))) == pytest.approx(-2 / np.e, abs=1e-14)


def test_futaki_dimension_check(blp2):
    with pytest.raises(InputError):
        futaki(blp2, Constant(blp2), (1,))


def test_kr_examples(blp2):
    assert solve_weight_vector(I, "kr").xi_star == pytest.approx((0.0,))
    sol = solve_weight_vector(blp2, "kr")
    t = kr_diagonal_oracle()
    assert t == pytest.approx(-0.528, abs=5e-3)
    assert sol.xi_star == pytest.approx((t, t), abs=1e-10)
    assert sol.converged and sol.residual < 1e-10


def test_mabuchi_examples(blp2):
    sol = solve_weight_vector(I, "mabuchi")
    assert sol.xi_star == (0,) and sol.feasible
    sol = solve_weight_vector(blp2, "mabuchi")
    assert sol.xi_star == (F(-6, 11), F(-6, 11))
    assert sol.residual == 0


def test_mabuchi_infeasible_interval():
    P = box([-1], [3])
    sol = solve_weight_vector(P, "mabuchi")
    # 1D closed form: xi = -xbar / variance
    assert sol.xi_star == (F(-3, 4),)
    assert not sol.feasible
    with pytest.raises(Infeasible):
        require_feasible(sol)


def test_cone_family_symmetric():
    sol = solve_weight_vector(box([-1, -1], [1, 1]), "cone")
    assert sol.xi_star == pytest.approx((0, 0), abs=1e-14)
    assert sol.feasible


@pytest.mark.parametrize("family", ["kr", "cone"])
def test_soliton_vector_kills_futaki(family, blp2):
    sol = solve_weight_vector(blp2, family)
    for zeta in ((1, 0), (0, 1), (2, -3)):
        assert abs(float(futaki(blp2, sol.weight, zeta))) < 1e-10


def test_potential_gradient_is_futaki(blp2):
    xi = (0.2, -0.1)
    _, grad, _ = potential(blp2, "kr", xi)
    w = Exponential(blp2, xi)
    for k in range(2):
        zeta = tuple(int(i == k) for i in range(2))
        assert grad[k] == pytest.approx(-float(futaki(blp2, w, zeta)), rel=1e-12)


@given(st.integers(0, 10_000))
def test_mabuchi_vanishing_on_random_polytopes(seed):
    rng = np.random.default_rng(seed)
    P = random_polytope(rng, int(rng.integers(1, 4)))
    sol = solve_weight_vector(P, "mabuchi")
    assert sol.residual == 0
    w = AffinePinned(P, sol.xi_star)
    assert sol.feasible == (min(w._value_exact(v) for v in P.vertices) > 0)


@given(
    st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5)),
    st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5)),
    st.fractions(-4, 4, max_denominator=3),
)
def test_futaki_is_linear(z1, z2, c):
    P = simplex_polytope(2)
    g = AffinePinned(P, (F(1, 5), F(-1, 7)))
    lhs = futaki(P, g, tuple(a + c * b for a, b in zip(z1, z2)))
    assert lhs == futaki(P, g, z1) + c * futaki(P, g, z2)


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_kr_hessian_positive(a, b):
    _, _, H = potential(blp2(), "kr", (a, b))
    assert np.all(np.linalg.eigvalsh(H) > 0)


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_cone_potential_concave(a, b):
    _, _, H = potential(blp2(), "cone", (a, b))
    assert np.all(np.linalg.eigvalsh(H) < 0)


def test_fut_normalized_divides_by_volume(blp2):
    g = ConePower(blp2, (F(1, 10), 0))
    V = integrate(blp2, g)
    assert float(fut_normalized(blp2, g, (1, 0))) == pytest.approx(float(futaki(blp2, g, (1, 0))) / float(V), rel=1e-13)


@pytest.mark.parametrize("t", [(F(1, 2), -1), (-2, F(1, 3))])
def test_kr_translation_equivariance(blp2, t):
    # translating P by t shifts the exp-weighted barycenter by t at the same xi,
    # so the normalized futaki picks up -<t, zeta>; the soliton condition is not invariant
    xi = (F(-1, 2), F(1, 4))
    Q = blp2.translate(t)
    for zeta in [(1, 0), (0, 1), (2, -3)]:
        lhs = float(fut_normalized(Q, Exponential(Q, xi), zeta))
        rhs = float(fut_normalized(blp2, Exponential(blp2, xi), zeta)) - float(t[0] * zeta[0] + t[1] * zeta[1])
        assert lhs == pytest.approx(rhs, abs=1e-12)
