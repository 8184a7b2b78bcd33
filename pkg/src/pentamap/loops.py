"""Ditri-pentagon loops and the fixed loci of the symmetry involutions.

Fixed loci are traced by pseudo-arclength continuation in phase space, where
the pentagon surface is smooth, and only then projected to the (xi, eta)
chart.  That keeps the tracer away from the chart's folds (Q = 0) and its
collapse points.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import LostLock, NoPentagon, SeedNotFixed
from .pentagon import (
    AngleCoords,
    Isometry,
    Pentagon,
    all_isometries,
    coords_of_many,
    fixed_residual,
    raw_phases,
    wrap_pi,
)

TWO_PI = 2 * np.pi
DEFAULT_STEP = np.radians(0.25)
CORRECTOR_TOL = 1e-13
SEED_TOL = 1e-6


# ---------------------------------------------------------------- ditri

@dataclass(frozen=True)
class DitriLoop:
    """Pentagons made of a digon (two opposite edges) plus a rigid triangle.

    The digon turns with the loop parameter t while the equilateral triangle
    on the other three edges (in increasing edge order) stays put.
    """

    digon_pair: frozenset
    triangle_orientation: int = 1
    base_phase: float = 0.0

    def __init__(self, digon_pair: Iterable[int], triangle_orientation: int = 1, base_phase: float = 0.0):
        pair = frozenset(int(k) for k in digon_pair)
        if len(pair) != 2 or not pair <= {1, 2, 3, 4, 5}:
            raise ValueError(f"bad digon pair {digon_pair!r}")
        object.__setattr__(self, "digon_pair", pair)
        object.__setattr__(self, "triangle_orientation", 1 if triangle_orientation >= 0 else -1)
        object.__setattr__(self, "base_phase", float(base_phase))

    @property
    def triangle(self) -> tuple[int, int, int]:
        return tuple(k for k in range(1, 6) if k not in self.digon_pair)


def ditri_phases(loop: DitriLoop, t) -> np.ndarray:
    """Raw phases (no canonical rotation) of the ditri pentagon at parameter t.

    Vectorised over t: returns shape t.shape + (5,).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (5,))
    a, b = sorted(loop.digon_pair)
    out[..., a - 1] = t
    out[..., b - 1] = t + np.pi
    for n, k in enumerate(loop.triangle):
        out[..., k - 1] = loop.base_phase + loop.triangle_orientation * n * TWO_PI / 3
    return out


def ditri_pentagon(loop: DitriLoop, t: float) -> Pentagon:
    return Pentagon(ditri_phases(loop, t))


def all_ditri_loops() -> list[DitriLoop]:
    return [
        DitriLoop((a, b), s)
        for a in range(1, 6)
        for b in range(a + 1, 6)
        for s in (1, -1)
    ]


# ---------------------------------------------------------------- tracing

@dataclass
class TracedLoop:
    """Samples along the fixed locus of iso.

    phases holds the traced pentagons (theta_3 = 0 frame); points holds their
    chart images as (xi, eta, sheet) in radians.
    """

    iso: Isometry
    points: list[tuple[float, float, int]]
    closed: bool
    phases: np.ndarray = field(repr=False, default=None)
    reason: str = ""

    @property
    def kind(self) -> str:
        return loop_kind(self.iso)

    def xy(self, sheet: Optional[int] = None) -> np.ndarray:
        pts = np.array([(p[0], p[1]) for p in self.points if sheet is None or p[2] == sheet])
        return pts.reshape(-1, 2)

    def to_json(self) -> dict:
        return {
            "iso": self.iso.to_json(),
            "kind": self.kind,
            "points": [[round(float(np.degrees(x)), 10), round(float(np.degrees(y)), 10), int(s)]
                       for x, y, s in self.points],
            "closed": self.closed,
        }


def loop_kind(iso: Isometry) -> str:
    """'short' for edge swaps, 'hypot-long' for double swaps with reflection."""
    moved = sum(1 for k, p in enumerate(iso.perm, start=1) if k != p)
    if moved == 2 and not iso.reflect:
        return "short"
    if moved == 4 and iso.reflect:
        return "hypot-long"
    return "other"


def boundary_isometries() -> list[Isometry]:
    """The 25 orientation-reversing involutions that fix tract boundaries."""
    return [
        g for g in all_isometries()
        if g.is_involution() and g.reverses_orientation() and not g.perm == (1, 2, 3, 4, 5)
    ]


class _FixedSystem:
    """Equations e^{i(theta'_k + rho)} = e^{i theta_k} plus closure.

    Unknowns z = (theta_1, theta_2, theta_4, theta_5, rho), theta_3 = 0.
    """

    FREE = np.array([0, 1, 3, 4])

    def __init__(self, iso: Isometry):
        self.idx = np.array(iso.perm) - 1
        self.sgn = -1.0 if iso.reflect else 1.0
        self._perm = np.eye(5)[self.idx]
        self._cols = np.r_[self.FREE, 5]

    def theta(self, z):
        th = np.zeros(5)
        th[self.FREE] = z[:4]
        return th

    def residual(self, z):
        th = self.theta(z)
        img = self.sgn * th[self.idx] + z[4]
        r = np.exp(1j * img) - np.exp(1j * th)
        c = np.exp(1j * th).sum()
        return np.concatenate([r.real, r.imag, [c.real, c.imag]])

    def jacobian(self, z):
        th = self.theta(z)
        img = self.sgn * th[self.idx] + z[4]
        a = 1j * np.exp(1j * img)
        b = 1j * np.exp(1j * th)
        J = np.empty((6, 6), dtype=complex)
        J[:5, :5] = self.sgn * a[:, None] * self._perm - np.diag(b)
        J[:5, 5] = a
        J[5, :5] = b
        J[5, 5] = 0
        J = J[:, self._cols]
        return np.concatenate([J[:5].real, J[:5].imag, J[5:].real, J[5:].imag])

    def correct(self, z, tangent=None, anchor=None, tol=CORRECTOR_TOL, iters=15):
        """Gauss-Newton onto the locus; optionally held on a hyperplane."""
        z = z.copy()
        for _ in range(iters):
            r = self.residual(z)
            J = self.jacobian(z)
            if tangent is not None:
                r = np.r_[r, tangent @ (z - anchor)]
                J = np.vstack([J, tangent])
            if np.max(np.abs(r)) < tol:
                return z, True
            dz = np.linalg.solve(J.T @ J, -(J.T @ r))
            z = z + dz
            if np.max(np.abs(dz)) < 1e-15:
                break
        r = self.residual(z)
        ok = np.max(np.abs(r)) < 10 * tol
        if tangent is not None:
            ok = ok and abs(tangent @ (z - anchor)) < 1e-10
        return z, ok

    def tangent(self, z, previous=None):
        """Unit null vector of the Jacobian, oriented along previous if given."""
        J = self.jacobian(z)
        if previous is None:
            return np.linalg.svd(J)[2][-1]
        A = np.vstack([J, previous])
        t = np.linalg.solve(A.T @ A, A[-1])
        return t / np.linalg.norm(t)


def _gauge(th) -> np.ndarray:
    th = np.asarray(th, dtype=float)
    return wrap_pi(th - th[2])


def _phase_distance(z1, z2) -> float:
    return float(np.max(np.abs(wrap_pi(z1[:4] - z2[:4]))))


def trace_fixed_phases(iso: Isometry, seed_phases, step: float = DEFAULT_STEP, max_points: int = 100000):
    """Trace the fixed locus of iso from a seed pentagon (phases).

    Returns (phases array, closed flag, reason).
    """
    th0 = _gauge(seed_phases)
    if fixed_residual(iso, th0) > SEED_TOL:
        raise SeedNotFixed(f"seed is not fixed by {iso} (residual {fixed_residual(iso, th0):.3g})")
    sys = _FixedSystem(iso)
    img = sys.sgn * th0[sys.idx]
    rho = float(np.angle(np.sum(np.exp(1j * (th0 - img)))))
    z, ok = sys.correct(np.r_[th0[_FixedSystem.FREE], rho])
    if not ok:
        raise SeedNotFixed(f"could not settle the seed onto the locus of {iso}")
    t = sys.tangent(z)
    t = t if t[np.argmax(np.abs(t))] > 0 else -t
    start = z.copy()
    pts = [z.copy()]
    h = step
    travelled = 0.0
    while len(pts) < max_points:
        anchor = z + h * t
        znew, ok = sys.correct(anchor, t, anchor)
        if not ok or np.linalg.norm(znew - z) > 2 * h:
            h /= 2
            if h < step * 1e-4:
                return np.array([sys.theta(p) for p in pts]), False, f"lost lock after {len(pts)} points"
            continue
        tnew = sys.tangent(znew, t)
        travelled += float(np.linalg.norm(znew - z))
        z, t = znew, tnew
        if travelled > 3 * step and _phase_distance(z, start) < 0.75 * step:
            pts.append(start.copy())
            return np.array([sys.theta(p) for p in pts]), True, ""
        pts.append(z.copy())
        h = min(step, h * 1.5)
    return np.array([sys.theta(p) for p in pts]), False, "point budget exhausted"


def _chart_points(phases: np.ndarray) -> list[tuple[float, float, int]]:
    c = coords_of_many(phases)
    return [(float(x), float(y), int(s)) for x, y, s in zip(*c)]


def trace_fixed_loop(iso: Isometry, seed: AngleCoords, step: float = DEFAULT_STEP) -> TracedLoop:
    """Trace the whole fixed locus of iso through the chart point seed."""
    if not iso.is_involution() or not iso.reverses_orientation():
        raise ValueError(f"{iso} is not an orientation-reversing involution")
    try:
        th = raw_phases(seed.xi, seed.eta, seed.sheet)
    except NoPentagon as exc:
        raise SeedNotFixed(str(exc)) from exc
    phases, closed, reason = trace_fixed_phases(iso, th, step)
    if not closed and reason.startswith("lost lock"):
        raise LostLock(reason)
    return TracedLoop(iso, _chart_points(phases), closed, phases, reason)


def locus_seed(iso: Isometry) -> np.ndarray:
    """A pentagon fixed by iso, from the explicit form of its fixed locus.

    Short swap (i j): theta_i = theta_j = 0 and the other three unit edges
    sum to -2.  Double swap (a b)(c d) with reflection, e unmoved:
    theta_e = 0, theta_b = -theta_a, theta_d = -theta_c and
    1 + 2 cos theta_a + 2 cos theta_c = 0.
    """
    kind = loop_kind(iso)
    th = np.zeros(5)
    if kind == "short":
        i, j = [k for k in range(5) if iso.perm[k] != k + 1]
        rest = [k for k in range(5) if k not in (i, j)]
        alpha = 2 * np.pi / 3
        a = np.exp(1j * alpha)
        bc = -2 - a
        L = abs(bc)
        beta = np.arccos(L / 2)
        th[rest[0]] = alpha
        th[rest[1]] = np.angle(bc) + beta
        th[rest[2]] = np.angle(bc) - beta
        return th
    if kind == "hypot-long":
        seen = set()
        pairs = []
        for k in range(5):
            p = iso.perm[k] - 1
            if p != k and k not in seen:
                pairs.append((k, p))
                seen |= {k, p}
        (a, b), (c, d) = pairs
        th[a], th[b] = np.pi / 2, -np.pi / 2
        th[c], th[d] = 2 * np.pi / 3, -2 * np.pi / 3
        return th
    raise ValueError(f"{iso} does not fix a tract boundary")


def _conjugator(target: Isometry, reps: Sequence[Isometry]) -> tuple[Isometry, Isometry]:
    for rep in reps:
        for g in all_isometries():
            if g @ rep @ g.inverse() == target:
                return rep, g
    raise ValueError(f"{target} is not conjugate to a representative")


@lru_cache(maxsize=None)
def _traced_representative(iso: Isometry, step: float) -> TracedLoop:
    phases, closed, reason = trace_fixed_phases(iso, locus_seed(iso), step)
    return TracedLoop(iso, _chart_points(phases), closed, phases, reason)


SHORT_REP = Isometry.swap((1, 2))
HYPOT_LONG_REP = Isometry.swap((1, 2), (3, 5), reflect=True)


@lru_cache(maxsize=None)
def traced_boundary(iso: Isometry, step: float = DEFAULT_STEP) -> TracedLoop:
    """Full fixed loop of a boundary isometry (cached).

    Only one short swap and one double swap are traced; every other locus is
    the image of one of those under a conjugating isometry g, since
    Fix(g h g^-1) = g Fix(h).
    """
    rep, g = _conjugator(iso, [SHORT_REP, HYPOT_LONG_REP])
    base = _traced_representative(rep, step)
    if g.is_identity():
        return base
    phases = np.array([_gauge(g.act(th)) for th in base.phases])
    return TracedLoop(iso, _chart_points(phases), base.closed, phases, base.reason)


@dataclass(frozen=True)
class ChartRegion:
    """Rectangle of the chart in degrees, optionally restricted to one sheet."""

    xi_min: float = -180.0
    xi_max: float = 180.0
    eta_min: float = -180.0
    eta_max: float = 180.0
    sheet: Optional[int] = None

    def contains(self, xi: float, eta: float, sheet: int) -> bool:
        x, y = np.degrees(xi), np.degrees(eta)
        return (
            self.xi_min <= x <= self.xi_max
            and self.eta_min <= y <= self.eta_max
            and (self.sheet is None or sheet == self.sheet)
        )


def _split_runs(loop: TracedLoop, region: ChartRegion) -> list[TracedLoop]:
    inside = [region.contains(*p) for p in loop.points]
    if all(inside):
        return [loop]
    runs: list[list[int]] = []
    cur: list[int] = []
    for k, ok in enumerate(inside):
        if ok:
            cur.append(k)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        # a closed loop wraps, so a run at the end joins one at the start
        if loop.closed and runs and runs[0][0] == 0:
            runs[0] = cur + runs[0][1:]
        else:
            runs.append(cur)
    out = []
    for run in runs:
        if len(run) < 2:
            continue
        out.append(TracedLoop(loop.iso, [loop.points[k] for k in run], False,
                              loop.phases[run], "clipped"))
    return out


def tract_boundaries(region: ChartRegion = ChartRegion(), step: float = DEFAULT_STEP) -> list[TracedLoop]:
    """Traced short-leg and hypot-long-leg loci crossing a chart region."""
    out = []
    for iso in boundary_isometries():
        out.extend(_split_runs(traced_boundary(iso, step), region))
    return out


def loops_to_json(loops: Sequence[TracedLoop]) -> str:
    return json.dumps({"schema": "pentamap/1", "loops": [lp.to_json() for lp in loops]}, indent=1)


# ---------------------------------------------------------------- fundamental tract

PI2_CORNER = (0.0, np.pi / 3)
PI4_CORNER = (0.0, 0.0)
PI5_CORNER = (2 * np.pi / 5, 2 * np.pi / 5)
LONG_LEG_SWAP = HYPOT_LONG_REP
HYPOTENUSE_SWAP = Isometry.swap((1, 5), (2, 4), reflect=True)


def _long_leg_mirror(xi: float, eta: float) -> float:
    """eta of the mirror image under the long-leg swap, which keeps xi."""
    th = LONG_LEG_SWAP.act(raw_phases(xi, eta, -1))
    _, eta2, _ = coords_of_many(th[None, :])
    return float(eta2[0])


def long_leg_eta(xi: float, tol: float = 1e-15) -> float:
    """eta of the long leg of the fundamental tract above xi in [0, 2 pi/5]."""
    from scipy.optimize import brentq

    if not -1e-12 <= xi <= PI5_CORNER[0] + 1e-12:
        raise ValueError(f"xi={xi} outside the long leg's span")
    return brentq(lambda e: _long_leg_mirror(xi, e) - e, np.radians(45), np.radians(85), xtol=tol, rtol=1e-15)


def fundamental_sides(n: int = 64) -> dict[str, np.ndarray]:
    """Exact chart points (xi, eta) along the three sides of the fundamental tract.

    Each side runs from its first-named corner: short leg pi/4 -> pi/2,
    long leg pi/2 -> pi/5, hypotenuse pi/4 -> pi/5.
    """
    t = np.linspace(0.0, 1.0, n)
    short = np.stack([np.zeros(n), t * PI2_CORNER[1]], axis=1)
    xs = t * PI5_CORNER[0]
    long_ = np.stack([xs, [long_leg_eta(x) for x in xs]], axis=1)
    long_[0] = PI2_CORNER
    long_[-1] = PI5_CORNER
    hyp = np.stack([t * PI5_CORNER[0], t * PI5_CORNER[1]], axis=1)
    return {"short": short, "long": long_, "hyp": hyp}


def in_fundamental_tract(xi: float, eta: float, sheet: int = -1, tol: float = 1e-8) -> bool:
    """Closed-tract membership on the convex sheet, with a tolerance band."""
    if sheet != -1:
        return False
    if xi < -tol or xi > eta + tol or xi > PI5_CORNER[0] + tol:
        return False
    return eta <= long_leg_eta(min(max(xi, 0.0), PI5_CORNER[0])) + tol
