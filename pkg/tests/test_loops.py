import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pentamap.errors import SeedNotFixed
from pentamap.loops import (
    HYPOT_LONG_REP,
    HYPOTENUSE_SWAP,
    PI2_CORNER,
    PI5_CORNER,
    SHORT_REP,
    ChartRegion,
    DitriLoop,
    all_ditri_loops,
    boundary_isometries,
    ditri_pentagon,
    ditri_phases,
    fundamental_sides,
    in_fundamental_tract,
    long_leg_eta,
    loop_kind,
    trace_fixed_loop,
    traced_boundary,
    tract_boundaries,
)
from pentamap.pentagon import (
    AngleCoords,
    Isometry,
    closure_residual,
    coords_of_many,
    fixed_residual,
    is_decomposable,
    pentagon_from_coords,
)

LOOPS = all_ditri_loops()


def test_ditri_example():
    loop = DitriLoop({4, 5})
    th = ditri_phases(loop, 0.0)
    assert th[3] == 0.0 and th[4] == pytest.approx(np.pi)
    assert closure_residual(th) < 1e-15
    assert loop.triangle == (1, 2, 3)


def test_twenty_ditri_loops():
    assert len(LOOPS) == 20
    assert len(set(LOOPS)) == 20


@given(st.sampled_from(LOOPS), st.floats(0, 2 * np.pi))
def test_ditri_pentagons_decompose(loop, t):
    p = ditri_pentagon(loop, t)
    digon, tri = is_decomposable(p)
    assert closure_residual(p) < 1e-14
    assert len(digon) == 2


def test_ditri_loops_are_straight_in_the_chart():
    # the chart coordinates are edge turns, so each ditri loop is affine in t
    t = np.linspace(0.01, 2 * np.pi - 0.01, 400)
    straight = 0
    for loop in LOOPS:
        xi, eta, _ = coords_of_many(ditri_phases(loop, t))
        for v in (np.unwrap(xi), np.unwrap(eta)):
            assert np.max(np.abs(np.diff(v, 2))) < 1e-9
        straight += np.ptp(np.unwrap(xi)) + np.ptp(np.unwrap(eta)) > 1
    # four loops collapse to a single chart point
    assert straight == 16


def test_boundary_isometries():
    isos = boundary_isometries()
    kinds = [loop_kind(g) for g in isos]
    assert len(isos) == 25
    assert kinds.count("short") == 10 and kinds.count("hypot-long") == 15
    assert all(g.is_involution() and g.reverses_orientation() for g in isos)


def test_short_loop_traces_closed():
    loop = trace_fixed_loop(SHORT_REP, AngleCoords(0.0, 2 * np.pi / 5, -1))
    assert loop.closed
    xy = loop.xy(-1)
    assert np.any(np.abs(xy[:, 0]) < 1e-9)


def test_hypotenuse_loop_contains_the_diagonal():
    loop = trace_fixed_loop(HYPOTENUSE_SWAP, AngleCoords(2 * np.pi / 5 + 0.1, 2 * np.pi / 5 + 0.1, -1))
    assert loop.closed
    xy = loop.xy()
    assert np.sum(np.abs(xy[:, 0] - xy[:, 1]) < 1e-9) > 10


def test_unfixed_seed_raises():
    with pytest.raises(SeedNotFixed):
        trace_fixed_loop(SHORT_REP, AngleCoords.degrees(30, 40))


def test_non_involution_is_rejected():
    with pytest.raises(ValueError):
        trace_fixed_loop(Isometry(perm=(2, 3, 1, 4, 5), reflect=True), AngleCoords(0, 1))


@pytest.mark.parametrize("iso", [SHORT_REP, HYPOT_LONG_REP, HYPOTENUSE_SWAP, Isometry.swap((3, 4))])
def test_traced_samples_are_fixed(iso):
    loop = traced_boundary(iso)
    res = [fixed_residual(iso, th) for th in loop.phases[::7]]
    assert max(res) < 1e-8


def test_boundaries_in_first_quadrant():
    loops = tract_boundaries(ChartRegion(0, 180, 0, 180, sheet=-1))
    assert loops
    pts = np.vstack([lp.xy() for lp in loops])
    assert pts.min() >= 0
    # the short leg (xi = 0) and the diagonal both show up
    assert np.any(np.abs(pts[:, 0]) < 1e-9)
    assert np.any(np.abs(pts[:, 0] - pts[:, 1]) < 1e-9)


def test_long_leg_endpoints():
    assert long_leg_eta(0.0) == pytest.approx(PI2_CORNER[1], abs=1e-12)
    assert long_leg_eta(PI5_CORNER[0]) == pytest.approx(PI5_CORNER[1], abs=1e-12)


def test_long_leg_matches_traced_locus():
    loop = traced_boundary(HYPOT_LONG_REP)
    xy = loop.xy(-1)
    sel = (xy[:, 0] > 0.05) & (xy[:, 0] < PI5_CORNER[0] - 0.05) & (np.abs(xy[:, 1] - 1.15) < 0.3)
    assert sel.sum() > 5
    for xi, eta in xy[sel]:
        assert long_leg_eta(xi) == pytest.approx(eta, abs=1e-9)


def test_fundamental_sides_are_fixed():
    sides = fundamental_sides(17)
    isos = {"short": SHORT_REP, "long": HYPOT_LONG_REP, "hyp": HYPOTENUSE_SWAP}
    for name, pts in sides.items():
        for xi, eta in pts[1:-1]:
            p = pentagon_from_coords(AngleCoords(xi, eta, -1))
            assert fixed_residual(isos[name], p) < 1e-8


def test_fundamental_tract_membership():
    assert in_fundamental_tract(np.radians(20), np.radians(40))
    assert in_fundamental_tract(*PI5_CORNER)
    assert not in_fundamental_tract(np.radians(40), np.radians(20))
    assert not in_fundamental_tract(np.radians(20), np.radians(40), sheet=1)
    assert not in_fundamental_tract(np.radians(10), np.radians(80))
