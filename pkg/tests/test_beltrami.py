import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pentamap.beltrami import (
    BranchState,
    ChartConfig,
    FixedLine,
    _select_root,
    chart_points,
    chart_tract,
    conformality_eccentricity,
    corner_angles,
    isothermal_many,
    isothermal_w,
    ode_rhs,
    rotated_fff,
    y_image,
)
from pentamap.errors import RadicandVanished
from pentamap.loops import long_leg_eta
from pentamap.metric import fff_angles
from pentamap.pentagon import radicand_Q

DIAG = ChartConfig()
AXIS = ChartConfig(FixedLine.XI_AXIS)
Y_STAR = 1.5421611453854445
angle = st.floats(-np.pi + 0.05, np.pi - 0.05)


def interior(xi, eta, margin=1e-2):
    x, y = np.tan(xi / 2), np.tan(eta / 2)
    assume(radicand_Q(x, y) > margin * (1 + x * x) ** 2 * (1 + y * y) ** 2)


@given(angle, angle, st.floats(0, np.pi), st.floats(-1, 1), st.floats(-1, 1))
def test_rotated_form_is_the_same_metric(xi, eta, rot, da, db):
    interior(xi, eta)
    E, F, G = (float(v) for v in fff_angles(xi, eta))
    c, s = np.cos(rot), np.sin(rot)
    a, b = c * xi + s * eta, -s * xi + c * eta
    E2, F2, G2 = (float(np.real(v)) for v in rotated_fff(rot)(a, b))
    dxi, deta = c * da - s * db, s * da + c * db
    assert E2 * da * da + 2 * F2 * da * db + G2 * db * db == pytest.approx(
        E * dxi * dxi + 2 * F * dxi * deta + G * deta * deta, rel=1e-9, abs=1e-14)
    assert E2 * G2 - F2 * F2 == pytest.approx(E * G - F * F, rel=1e-9)


def test_rhs_where_F_vanishes():
    E, F, G = (float(v) for v in fff_angles(0.0, 0.5))
    assert F == 0
    rhs = ode_rhs(0.0, 0.5, BranchState(1.0 + 0j))
    assert rhs == pytest.approx(-1j * np.sqrt(E * G) / E, rel=1e-14)


def test_rhs_at_the_singular_point_raises():
    with pytest.raises(RadicandVanished):
        ode_rhs(1j * Y_STAR, 0.0, BranchState(1.0 + 0j), np.pi / 4)


def test_branch_tracking_flips_sign_around_a_zero():
    # carrying sqrt once around a simple zero of the radicand changes its sign
    prev = 1.0 + 0j
    for phi in np.linspace(0, 2 * np.pi, 200):
        prev, ambiguous = _select_root(np.exp(1j * phi), prev)
        assert not ambiguous
    assert prev == pytest.approx(-1.0, abs=1e-12)


def test_fixed_line_is_kept():
    t = np.linspace(0.1, 1.2, 7)
    w = isothermal_many(t, t, DIAG)
    assert w.ok.all()
    assert np.max(np.abs(w.w - 2 * t)) < 1e-9
    w = isothermal_many(t, np.zeros_like(t), AXIS)
    assert np.max(np.abs(w.w - t)) < 1e-9


def test_tract_image():
    tract = chart_tract()
    assert tract.corners["pi4"] == pytest.approx(0, abs=1e-12)
    assert tract.corners["pi5"] == pytest.approx(4 * np.pi / 5, abs=1e-9)
    assert tract.M == pytest.approx(2 * np.pi / 5, abs=1e-9)
    assert np.max(np.abs(tract.images["hyp"].imag)) < 1e-9
    # the legs bulge to one side of the hypotenuse
    assert np.all(tract.images["long"].imag[1:-1] > 0)
    assert np.all(tract.images["short"].imag[1:] > 0)


def test_right_angle_corner_image():
    w = isothermal_w((0.0, np.pi / 3), ChartConfig(ode_rel_tol=1e-12))
    assert w == pytest.approx(1.0445257373711936 + 1.1173570597870082j, abs=1e-9)


def test_corner_angles():
    ang = {k: np.degrees(v) for k, v in corner_angles().items()}
    assert ang["pi4"] == pytest.approx(45, abs=1e-6)
    assert ang["pi2"] == pytest.approx(90, abs=1e-6)
    assert ang["pi5"] == pytest.approx(36, abs=1e-6)


def test_singular_point_image():
    y = y_image()
    assert y == pytest.approx(2.1809452071689233j, abs=1e-9)
    assert np.degrees(np.angle(y - 2 * np.pi / 5)) == pytest.approx(119.95, abs=0.01)


def test_chart_is_conformal_inside_the_tract():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        u, v = rng.uniform(0.05, 0.95, 2)
        xi = u * 2 * np.pi / 5
        eta = xi + v * (long_leg_eta(xi) - xi)
        worst = max(worst, conformality_eccentricity(xi, eta))
    assert worst < 1e-2


def test_chart_is_deterministic():
    pts = np.radians([[10.0, 30.0], [20.0, 50.0], [60.0, 65.0]])
    a = chart_points(pts, DIAG)
    b = chart_points(pts, DIAG)
    assert np.array_equal(a, b)


def test_tolerance_controls_accuracy():
    pts = np.radians([[15.0, 45.0], [50.0, 60.0]])
    loose = chart_points(pts, ChartConfig(ode_rel_tol=1e-8))
    tight = chart_points(pts, ChartConfig(ode_rel_tol=1e-12))
    assert np.max(np.abs(loose - tight)) < 1e-6
