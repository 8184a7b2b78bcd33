import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pentamap.errors import OutsideRegion
from pentamap.metric import (
    UNIT_R,
    GrassmannPoint,
    bag_length_sq,
    closed_tangent_basis,
    coord_pushforward,
    curvature_at,
    fff,
    gaussian_curvature,
    grassmann_length_sq,
)
from pentamap.pentagon import (
    AngleCoords,
    all_isometries,
    apply_isometry,
    coords_of,
    pentagon_from_coords,
    radicand_Q,
    regular_pentagon,
)

ISOS = list(all_isometries())
angle = st.floats(-np.pi + 0.05, np.pi - 0.05)
weights = st.lists(st.floats(0.05, 2.0), min_size=5, max_size=5)
velocities = st.lists(st.floats(-3, 3), min_size=5, max_size=5)


def interior(xi, eta, margin=1e-2):
    x, y = np.tan(xi / 2), np.tan(eta / 2)
    assume(radicand_Q(x, y) > margin * (1 + x * x) ** 2 * (1 + y * y) ** 2)
    return x, y


def test_bag_length_examples():
    assert bag_length_sq(UNIT_R, np.ones(5)) == pytest.approx(0.0, abs=1e-15)
    d = np.array([1.0, 0, 0, 0, 0])
    assert bag_length_sq(UNIT_R, d) == pytest.approx(4 * 0.2 * 0.2)


@given(weights, velocities)
def test_bag_length_forms_agree(r, d):
    a = bag_length_sq(r, d, "pairs")
    b = bag_length_sq(r, d, "expanded")
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


@given(weights, velocities, st.floats(-5, 5))
def test_bag_length_ignores_rigid_rotation(r, d, c):
    assert bag_length_sq(r, np.add(d, c)) == pytest.approx(bag_length_sq(r, d), rel=1e-9, abs=1e-10)


def test_fff_at_origin():
    g = fff(0.0, 0.0)
    assert (g.E, g.F, g.G) == pytest.approx((0.1, 0.0, 0.1), abs=1e-15)


def test_fff_outside_raises():
    with pytest.raises(OutsideRegion):
        fff(np.tan(np.radians(5)), np.tan(np.radians(85)))


@given(angle, angle)
def test_F_is_odd_in_each_coordinate(xi, eta):
    x, y = interior(xi, eta)
    g, gx = fff(x, y), fff(-x, y)
    assert gx.F == pytest.approx(-g.F, abs=1e-13)
    assert gx.E == pytest.approx(g.E, rel=1e-12)


@given(angle, angle, st.sampled_from([-1, 1]), st.floats(0, 2 * np.pi))
def test_metric_matches_pushed_forward_bag_length(xi, eta, sheet, phi):
    # closed-form E, F, G against the bag length of a finite-difference velocity
    x, y = interior(xi, eta)
    c = AngleCoords(xi, eta, sheet)
    a, b = np.cos(phi), np.sin(phi)
    tv = coord_pushforward(c, a, b)
    assert fff(x, y).quad(a, b) == pytest.approx(bag_length_sq(UNIT_R, tv), rel=1e-6)


def test_pushforward_moves_tau1_at_unit_rate():
    c = AngleCoords.degrees(40, 50)
    tv = coord_pushforward(c, 1.0, 0.0)
    # xi is the turn theta_2 - theta_1, so it moves at unit rate and eta does not
    assert tv.dtheta[1] - tv.dtheta[0] == pytest.approx(1.0, abs=1e-7)
    assert tv.dtheta[4] - tv.dtheta[3] == pytest.approx(0.0, abs=1e-7)


@given(angle, angle, st.floats(-2, 2), st.floats(-2, 2))
def test_pushforward_keeps_closure(xi, eta, a, b):
    interior(xi, eta)
    c = AngleCoords(xi, eta, -1)
    tv = coord_pushforward(c, a, b)
    assert tv.closure_defect(pentagon_from_coords(c)) < 1e-7 * (1 + abs(a) + abs(b))


def test_curvature_examples():
    assert curvature_at(*np.radians([72, 72])) == pytest.approx(-1.0, abs=1e-10)
    assert curvature_at(*np.radians([150, 150])) == pytest.approx(-50 / 21, abs=1e-8)
    # pi/4 tract vertex at the chart origin
    assert curvature_at(0.0, 0.0) == pytest.approx(-11 / 3, abs=1e-10)


def test_curvature_bounds_on_grid():
    g = np.radians(np.arange(-178, 180, 2.0))
    xi, eta = np.meshgrid(g, g)
    x, y = np.tan(xi / 2), np.tan(eta / 2)
    ok = radicand_Q(x, y) > 1e-3
    K = gaussian_curvature(x[ok], y[ok])
    assert K.min() >= -11 / 3 - 1e-6
    assert K.max() <= -1 + 1e-6


@given(angle, angle, st.sampled_from([-1, 1]), st.sampled_from(ISOS))
def test_curvature_is_isometry_invariant(xi, eta, sheet, g):
    interior(xi, eta, 5e-2)
    p = pentagon_from_coords(AngleCoords(xi, eta, sheet))
    q = coords_of(apply_isometry(g, p))
    interior(q.xi, q.eta, 5e-2)
    assert curvature_at(q.xi, q.eta) == pytest.approx(curvature_at(xi, eta), rel=1e-8)


def test_grassmann_rigid_rotation_is_null():
    assert grassmann_length_sq(regular_pentagon(), np.ones(5)) == pytest.approx(0.0, abs=1e-15)


def test_grassmann_point_is_orthonormal():
    w = GrassmannPoint.cover(regular_pentagon().array)
    m = np.vstack([w.u, w.v])
    assert np.allclose(m @ m.T, np.eye(2), atol=1e-14)


@given(angle, angle, st.lists(st.sampled_from([-1.0, 1.0]), min_size=4, max_size=4))
def test_grassmann_is_eight_times_bag_length(xi, eta, signs):
    interior(xi, eta)
    p = pentagon_from_coords(AngleCoords(xi, eta, -1))
    sigma = np.array([1.0] + signs)
    for d in closed_tangent_basis(p):
        gl = grassmann_length_sq(p, d, sigma)
        bl = bag_length_sq(np.full(5, 0.4), d)
        assert bl == pytest.approx(8 * gl, rel=1e-12, abs=1e-15)
