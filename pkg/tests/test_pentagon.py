import json

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pentamap.errors import NoPentagon, TangentPole
from pentamap.pentagon import (
    AngleCoords,
    Isometry,
    Pentagon,
    VertexKind,
    all_isometries,
    apply_isometry,
    classify,
    closure_residual,
    coords_of,
    fixed_residual,
    is_decomposable,
    pentagon_from_coords,
    radicand_Q,
    raw_phases,
    regular_pentagon,
    same_pentagon,
    trivariate_residuals,
    trivariate_residuals_many,
    vertex_angles,
    wrap_pi,
)

TWO_PI_3 = 2 * np.pi / 3
HOUSE = (0.0, 0.0, TWO_PI_3, np.pi, 2 * TWO_PI_3)
ISOS = list(all_isometries())
angle = st.floats(-np.pi + 1e-3, np.pi - 1e-3)


def chart_point(xi, eta, sheet=-1):
    """Pentagon at (xi, eta) or skip the example when it is off the moduli space."""
    x, y = np.tan(xi / 2), np.tan(eta / 2)
    assume(radicand_Q(x, y) > 1e-3 * (1 + x * x) ** 2 * (1 + y * y) ** 2)
    return pentagon_from_coords(AngleCoords(xi, eta, sheet))


@st.composite
def pentagons(draw):
    return chart_point(draw(angle), draw(angle), draw(st.sampled_from([-1, 1])))


def test_closure_residual_examples():
    assert closure_residual(regular_pentagon()) < 1e-15
    assert closure_residual(HOUSE) < 1e-15
    assert closure_residual((0, 0, 0, 0, 0)) == pytest.approx(5.0)


def test_vertex_angles_examples():
    assert np.allclose(vertex_angles(regular_pentagon()), 2 * np.pi / 5)
    assert np.allclose(vertex_angles(regular_pentagon(ccw=False)), -2 * np.pi / 5)
    assert np.allclose(vertex_angles(HOUSE), [0, TWO_PI_3, np.pi / 3, np.pi / 3, TWO_PI_3])


def test_radicand_examples():
    assert radicand_Q(0.0, 0.0) == 15.0
    q = radicand_Q(np.tan(np.radians(5)), np.tan(np.radians(85)))
    assert q == pytest.approx(-1.498833e5, rel=1e-6)


def test_regular_from_chart():
    p = pentagon_from_coords(AngleCoords.degrees(72, 72, "-"))
    assert same_pentagon(p, regular_pentagon())


def test_outside_moduli_space_raises():
    with pytest.raises(NoPentagon):
        pentagon_from_coords(AngleCoords.degrees(10, 170))


def test_sheets_meet_on_the_fold():
    from scipy.optimize import brentq

    # walk the diagonal out to where Q vanishes; both sheets give the same pentagon there
    t = brentq(lambda t: radicand_Q(np.tan(t / 2), np.tan(t / 2)), 2.0, 3.1, xtol=1e-15)
    a = raw_phases(t, t, -1, q_slack=1e-9)
    b = raw_phases(t, t, 1, q_slack=1e-9)
    assert np.max(np.abs(wrap_pi(a - b))) < 1e-6


def test_trivariate_relations():
    assert max(map(abs, trivariate_residuals(regular_pentagon()))) < 1e-12
    th = regular_pentagon().array.copy()
    th[1] += 0.1
    r3, r5 = trivariate_residuals_many(th)
    assert max(abs(r3), abs(r5)) > 1e-3


def test_tangent_pole_raises():
    # edges 1 and 2 fold back on each other: a vertex angle of pi
    p = Pentagon((0.0, np.pi, 0.0, TWO_PI_3, 2 * TWO_PI_3))
    with pytest.raises(TangentPole):
        trivariate_residuals(p)


def test_isometry_examples():
    reg = regular_pentagon()
    assert same_pentagon(apply_isometry(Isometry(), reg), reg)
    assert same_pentagon(apply_isometry(Isometry(reflect=True), reg), regular_pentagon(ccw=False))
    assert len(ISOS) == 240


def test_fixed_residual_examples():
    reg = regular_pentagon()
    assert fixed_residual(Isometry(perm=(2, 3, 4, 5, 1)), reg) < 1e-12
    assert fixed_residual(Isometry.swap((1, 2)), HOUSE) < 1e-12
    assert fixed_residual(Isometry.swap((1, 2)), reg) > 0.1
    assert fixed_residual(Isometry(reflect=True), reg) > 0.1


def test_classify_examples():
    assert classify(regular_pentagon()).kind is VertexKind.PI5
    corner = classify(pentagon_from_coords(AngleCoords(0, 0)))
    assert corner.kind is VertexKind.PI4
    assert classify(pentagon_from_coords(AngleCoords.degrees(0, 60))).kind is VertexKind.PI2
    assert classify(pentagon_from_coords(AngleCoords.degrees(30, 40))).kind is VertexKind.GENERIC


def test_decomposable_examples():
    house = Pentagon(HOUSE)
    digon, tri = is_decomposable(house)
    assert len(digon) == 2 and len(tri) == 3
    assert is_decomposable(regular_pentagon()) is None


def test_rejects_open_and_collinear():
    with pytest.raises(ValueError):
        Pentagon((0, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        Pentagon((0, 0, np.pi, np.pi, 0.3))


@given(pentagons())
def test_chart_coordinates_are_edge_turns(p):
    c = coords_of(p)
    tau = vertex_angles(p)
    assert abs(wrap_pi(c.xi - tau[0])) < 1e-9
    assert abs(wrap_pi(c.eta - tau[3])) < 1e-9


@given(angle, angle, st.sampled_from([-1, 1]))
def test_chart_round_trip(xi, eta, sheet):
    p = chart_point(xi, eta, sheet)
    back = pentagon_from_coords(coords_of(p))
    assert same_pentagon(back, p, tol=1e-7)


@given(pentagons(), st.sampled_from(ISOS), st.sampled_from(ISOS))
def test_group_action(p, g, h):
    lhs = apply_isometry(g @ h, p)
    rhs = apply_isometry(g, apply_isometry(h, p))
    assert same_pentagon(lhs, rhs)


@given(pentagons(), st.sampled_from(ISOS))
def test_inverse_undoes(p, g):
    assert same_pentagon(apply_isometry(g.inverse(), apply_isometry(g, p)), p)


@given(pentagons(), st.sampled_from(ISOS), st.sampled_from(ISOS))
def test_fixed_residual_is_conjugation_invariant(p, g, h):
    q = apply_isometry(g, p)
    assert fixed_residual(g @ h @ g.inverse(), q) == pytest.approx(fixed_residual(h, p), abs=1e-9)


@given(pentagons())
def test_isometries_preserve_closure(p):
    for g in ISOS[::17]:
        assert closure_residual(apply_isometry(g, p)) < 1e-12


@given(pentagons())
def test_json_round_trip(p):
    q = Pentagon.from_json(json.dumps(p.to_json()))
    assert q.phases == p.phases


@given(st.floats(-2.0, 2.0))
def test_short_swap_fixes_the_short_leg(eta):
    p = chart_point(0.0, eta, -1)
    assert fixed_residual(Isometry.swap((1, 2)), p) < 1e-9


@given(pentagons(), st.sampled_from([g for g in ISOS if g.is_involution()]))
def test_involution_residual_symmetric(p, g):
    q = apply_isometry(g, p)
    assert fixed_residual(g, q) == pytest.approx(fixed_residual(g, p), abs=1e-12)
