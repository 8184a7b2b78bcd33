from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pentamap.errors import PoleHit
from pentamap.metric import E_RAT, F_RAT, G_RAT, Q_RAT
from pentamap.polyrat import BiPoly, BiRat, poly_from_monomials

X, Y = BiPoly.x(), BiPoly.y()
small = st.integers(-6, 6)
rationals = st.fractions(min_value=-4, max_value=4, max_denominator=20)
coef_maps = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), small, max_size=6)


def test_radicand_at_origin():
    assert Q_RAT(0.0, 0.0) == 15.0


def test_metric_e_at_origin():
    assert E_RAT(0.0, 0.0) == pytest.approx(0.1, abs=1e-15)
    assert F_RAT(0.0, 0.0) == 0.0
    assert G_RAT(0.0, 0.0) == pytest.approx(0.1, abs=1e-15)


def test_complex_evaluation():
    f = X * X * Y
    assert f(1j, 2.0) == pytest.approx(-2.0)


def test_partial_matches_central_difference():
    dq = Q_RAT.partial("x")
    h = 1e-6
    fd = (Q_RAT(1 + h, 1.0) - Q_RAT(1 - h, 1.0)) / (2 * h)
    assert dq(1.0, 1.0) == pytest.approx(fd, rel=1e-9)


def test_partial_of_constant_is_zero():
    assert BiPoly.const(7).partial("x").is_zero()
    assert BiRat(BiPoly.const(3), X + 2).partial("y").num.is_zero()


def test_mixed_partials_commute_on_metric():
    rng = np.random.default_rng(1)
    exy = E_RAT.partial("x").partial("y")
    eyx = E_RAT.partial("y").partial("x")
    for x, y in rng.uniform(-2, 2, (20, 2)):
        a, b = exy(x, y), eyx(x, y)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-14)


def test_pole_raises():
    f = BiRat(BiPoly.const(1), X)
    with pytest.raises(PoleHit):
        f(0.0, 1.0)
    with pytest.raises(PoleHit):
        f.eval_exact(Fraction(0), Fraction(1))


def test_exact_and_float_agree_on_metric():
    rng = np.random.default_rng(2)
    for x, y in rng.uniform(-3, 3, (10, 2)):
        fx, fy = Fraction(x), Fraction(y)
        for f in (E_RAT, F_RAT, G_RAT):
            assert float(f.eval_exact(fx, fy)) == pytest.approx(f(x, y), rel=1e-12, abs=1e-15)


def test_monomial_builder():
    p = poly_from_monomials([(3, 2, 1), (-1, 0, 0)])
    assert p.eval_exact(Fraction(2), Fraction(5)) == 3 * 4 * 5 - 1


@given(coef_maps, coef_maps, rationals, rationals)
def test_product_evaluates_exactly(a, b, x, y):
    p, q = BiPoly.from_terms(a), BiPoly.from_terms(b)
    assert (p * q).eval_exact(x, y) == p.eval_exact(x, y) * q.eval_exact(x, y)
    assert (p + q).eval_exact(x, y) == p.eval_exact(x, y) + q.eval_exact(x, y)


@given(coef_maps, coef_maps, st.sampled_from("xy"))
def test_leibniz_rule(a, b, var):
    p, q = BiPoly.from_terms(a), BiPoly.from_terms(b)
    assert (p * q).partial(var) == p.partial(var) * q + p * q.partial(var)


@given(coef_maps, st.sampled_from("xy"), rationals, rationals)
def test_quotient_rule_exact(a, var, x, y):
    # d/dv (p / (1 + x^2 + y^2)) checked against the textbook quotient rule
    p = BiPoly.from_terms(a)
    d = 1 + X * X + Y * Y
    lhs = BiRat(p, d).partial(var).eval_exact(x, y)
    rhs = (p.partial(var).eval_exact(x, y) * d.eval_exact(x, y)
           - p.eval_exact(x, y) * d.partial(var).eval_exact(x, y)) / d.eval_exact(x, y) ** 2
    assert lhs == rhs


@given(st.floats(0.2, 5), st.floats(-3, 3))
def test_reciprocal_chart_agrees(x, y):
    r = E_RAT.reciprocal("x")
    assert r(1 / x, y) == pytest.approx(E_RAT(x, y), rel=1e-9, abs=1e-14)
