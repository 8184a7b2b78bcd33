"""Isothermal coordinates by integrating Gauss's complex ODE.

A point (a, b) of a rotated angle chart is carried along the solution curve
of dq/dr = (-F - i sqrt(EG - F^2))/E, with q complex and r real, from r = b
down to r = 0; the end value q(0) is its isothermal coordinate.  Points of
the fixed line b = 0 keep their coordinate.  The square root is continued
along each path, choosing the root nearer the previous one.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import LeftDomain, RadicandVanished
from .metric import E_RAT, F_RAT, G_RAT, fff_angles

RADICAND_FLOOR = 1e-14
AMBIGUITY = 0.75
MAX_TRIES = 20000
MIN_STEP = 1e-13
STALL_RADICAND = 1e-8

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class FixedLine(str, Enum):
    XI_AXIS = "xi_axis"
    MAIN_DIAGONAL = "main_diagonal"


@dataclass(frozen=True)
class ChartConfig:
    """Which line stays fixed, and integrator tolerances.

    With the main diagonal fixed, output coordinates use the axes
    (eta + xi, eta - xi), so a diagonal point (t, t) maps to 2t.
    """

    fixed_line: FixedLine = FixedLine.MAIN_DIAGONAL
    ode_rel_tol: float = 1e-10
    max_step: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "fixed_line", FixedLine(self.fixed_line))
        if not (self.ode_rel_tol > 0 and self.max_step > 0):
            raise ValueError("tolerances must be positive")

    @property
    def angle(self) -> float:
        return 0.0 if self.fixed_line is FixedLine.XI_AXIS else np.pi / 4

    @property
    def scale(self) -> float:
        return 1.0 if self.fixed_line is FixedLine.XI_AXIS else np.sqrt(2.0)


@dataclass
class BranchState:
    previous_sqrt: complex


# ---------------------------------------------------------------- metric

def to_rotated(xi, eta, angle: float):
    """Chart angles to rotated coordinates (a, b); the fixed line is b = 0."""
    c, s = np.cos(angle), np.sin(angle)
    return c * xi + s * eta, -s * xi + c * eta


def from_rotated(a, b, angle: float):
    c, s = np.cos(angle), np.sin(angle)
    return c * a - s * b, s * a + c * b


def rotated_fff(angle: float) -> Callable:
    """Evaluator of (E', F', G') in rotated coordinates (a, b).

    Accepts complex a, continuing E, F, G analytically through the
    half-angle tangents.
    """
    c, s = np.cos(angle), np.sin(angle)

    def evaluate(a, b):
        xi, eta = from_rotated(a, b, angle)
        x = np.tan(np.asarray(xi) / 2)
        y = np.tan(np.asarray(eta) / 2)
        E, F, G = E_RAT(x, y), F_RAT(x, y), G_RAT(x, y)
        # pull back through xi = c a - s b, eta = s a + c b
        E2 = c * c * E + 2 * c * s * F + s * s * G
        F2 = -c * s * E + (c * c - s * s) * F + c * s * G
        G2 = s * s * E - 2 * c * s * F + c * c * G
        return E2, F2, G2

    return evaluate


def _select_root(d, previous):
    """Square root of d nearer previous, plus an ambiguity flag."""
    r = np.sqrt(d)
    near = np.abs(r - previous) <= np.abs(r + previous)
    root = np.where(near, r, -r)
    d_near = np.abs(root - previous)
    d_far = np.abs(root + previous)
    ambiguous = d_near > AMBIGUITY * d_far
    return root, ambiguous


def ode_rhs(q: complex, r: float, state: BranchState, angle: float = 0.0) -> complex:
    """(-F - i sqrt(EG - F^2))/E at (q, r); updates the branch state."""
    E, F, G = rotated_fff(angle)(q, r)
    d = complex(E * G - F * F)
    if abs(d) < RADICAND_FLOOR:
        raise RadicandVanished(f"EG - F^2 = {d:.3e} at q={q}, r={r}")
    root, _ = _select_root(d, state.previous_sqrt)
    state.previous_sqrt = complex(root)
    return complex((-F - 1j * root) / E)


# ---------------------------------------------------------------- integration

@dataclass
class PathResult:
    w: np.ndarray
    ok: np.ndarray
    reason: list = field(default_factory=list)
    steps: int = 0


def integrate_paths(a, b, config: ChartConfig = ChartConfig()) -> PathResult:
    """Integrate every path from s = 1 to s = 0, where r = s b, with DOPRI5.

    Each path keeps its own step size; the stages of all live paths are
    evaluated together.  Returns q(0) in normalised rotated units; failed
    paths hold NaN and a reason string.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float)).ravel()
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    n = a.size
    ev = rotated_fff(config.angle)
    q = a.astype(complex)
    ok = np.ones(n, dtype=bool)
    reason = [""] * n

    E, F, G = ev(q, b)
    d0 = E * G - F * F
    prev = np.sqrt(np.real(d0).clip(min=0)).astype(complex)
    bad = ~(np.real(d0) > RADICAND_FLOOR) & (b != 0)
    for i in np.nonzero(bad)[0]:
        ok[i] = False
        reason[i] = "radicand vanished"
    active = ok & (b != 0)

    s = np.ones(n)
    h = np.full(n, -min(config.max_step, 0.01))
    rtol = config.ode_rel_tol
    atol = rtol * 1e-2
    steps = 0
    for _ in range(MAX_TRIES):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        hi = np.maximum(h[idx], -s[idx])
        si = s[idx]
        q0 = q[idx]
        p0 = prev[idx]
        bi = b[idx]
        k = []
        amb_any = np.zeros(idx.size, dtype=bool)
        small = np.full(idx.size, np.inf)
        root = p0
        with np.errstate(all="ignore"):
            for st in range(7):
                qs = q0 + hi * sum(_A[st][j] * k[j] for j in range(st)) if st else q0
                E, F, G = ev(qs, bi * (si + _C[st] * hi))
                d = E * G - F * F
                root, amb = _select_root(d, p0)
                k.append(bi * (-F - 1j * root) / E)
                amb_any |= amb
                small = np.minimum(small, np.abs(d))
            q5 = q0 + hi * sum(_B5[j] * k[j] for j in range(7))
            q4 = q0 + hi * sum(_B4[j] * k[j] for j in range(7))
            err = np.abs(q5 - q4) / (atol + rtol * np.maximum(np.abs(q0), np.abs(q5)))
        finite = np.isfinite(q5) & np.isfinite(err)
        vanished = small < RADICAND_FLOOR
        trouble = ~finite | vanished | amb_any
        accept = ~trouble & (err <= 1.0)
        # step size update
        with np.errstate(all="ignore"):
            fac = np.where(err > 0, 0.9 * err ** -0.2, 5.0)
        fac = np.clip(np.nan_to_num(fac, nan=0.5), 0.2, 5.0)
        fac = np.where(trouble, 0.5, fac)
        newh = -np.minimum(np.abs(hi) * fac, config.max_step)
        acc = idx[accept]
        q[acc] = q5[accept]
        prev[acc] = root[accept]
        s[acc] = np.where(hi[accept] == -si[accept], 0.0, si[accept] + hi[accept])
        steps += int(accept.sum())
        h[idx] = newh
        under = ~accept & (np.abs(newh) < MIN_STEP)
        for j in np.nonzero(under)[0]:
            i = idx[j]
            ok[i] = False
            if not finite[j]:
                reason[i] = "left domain"
            elif vanished[j] or small[j] < STALL_RADICAND:
                reason[i] = "radicand vanished"
            else:
                reason[i] = "step size underflow"
            active[i] = False
        done = idx[accept][s[acc] <= 0]
        active[done] = False
    for i in np.nonzero(active)[0]:
        ok[i] = False
        reason[i] = "step budget exhausted"
    w = np.where(ok, q, np.nan + 0j)
    return PathResult(w, ok, reason, steps)


def isothermal_many(xi, eta, config: ChartConfig = ChartConfig()) -> PathResult:
    """Isothermal coordinates of many chart points (radians), output frame."""
    a, b = to_rotated(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float), config.angle)
    res = integrate_paths(a, b, config)
    res.w = res.w * config.scale
    return res


def isothermal_w(c, config: ChartConfig = ChartConfig()) -> complex:
    """Isothermal coordinate of one chart point (AngleCoords or (xi, eta))."""
    xi, eta = (c.xi, c.eta) if hasattr(c, "xi") else c
    res = isothermal_many([xi], [eta], config)
    if not res.ok[0]:
        why = res.reason[0]
        if "radicand" in why:
            raise RadicandVanished(f"{why} on the path from xi={np.degrees(xi):.6g}, eta={np.degrees(eta):.6g} deg")
        raise LeftDomain(f"{why} on the path from xi={np.degrees(xi):.6g}, eta={np.degrees(eta):.6g} deg")
    return complex(res.w[0])


# ---------------------------------------------------------------- the tract chart

@dataclass
class TractChart:
    """Image of the fundamental tract: chart points and their w per side."""

    sides: dict
    images: dict
    corners: dict
    M: complex

    def to_rows(self):
        for name in ("short", "long", "hyp"):
            for (xi, eta), w in zip(self.sides[name], self.images[name]):
                yield name, np.degrees(xi), np.degrees(eta), w.real, w.imag


def _require(res: PathResult, what: str):
    if not res.ok.all():
        bad = [r for r in res.reason if r]
        if any("radicand" in r for r in bad):
            raise RadicandVanished(f"{what}: {bad[0]}")
        raise LeftDomain(f"{what}: {bad[0] if bad else 'failed'}")


def chart_points(pts: np.ndarray, config: ChartConfig) -> np.ndarray:
    """w at an (n, 2) array of chart points; raises if any path fails."""
    pts = np.asarray(pts, dtype=float)
    res = isothermal_many(pts[:, 0], pts[:, 1], config)
    _require(res, "chart")
    return res.w


def chart_tract(config: ChartConfig = ChartConfig(), n: int = 65) -> TractChart:
    """Map the three sides of the fundamental tract; main diagonal fixed."""
    from .loops import fundamental_sides

    if config.fixed_line is not FixedLine.MAIN_DIAGONAL:
        raise ValueError("chart_tract needs the main diagonal fixed")
    sides = fundamental_sides(n)
    images = {name: chart_points(p, config) for name, p in sides.items()}
    corners = {
        "pi4": complex(images["short"][0]),
        "pi2": complex(images["short"][-1]),
        "pi5": complex(images["hyp"][-1]),
    }
    # the diagonal maps to the real axis, so M is exactly half the pi/5 corner
    M = 0.5 * (corners["pi4"] + corners["pi5"])
    return TractChart(sides, images, corners, M)


def _tangent(points: np.ndarray, config: ChartConfig, corner) -> complex:
    """Image tangent direction leaving a corner, from a small polynomial fit."""
    w = chart_points(points, config)
    w0 = chart_points(np.array([corner]), config)[0]
    dist = np.hypot(points[:, 0] - corner[0], points[:, 1] - corner[1])
    V = np.vander(dist, 4, increasing=True)[:, 1:]
    coef, *_ = np.linalg.lstsq(V, w - w0, rcond=None)
    return complex(coef[0])


def corner_angles(config: ChartConfig = ChartConfig(ode_rel_tol=1e-12), eps: float = 1e-3) -> dict:
    """Angles of the mapped tract at its three corners, in radians."""
    from .loops import PI2_CORNER, PI4_CORNER, PI5_CORNER, long_leg_eta

    t = eps * np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    along = {}
    # pi/4 corner: short leg (up the eta axis) and hypotenuse (diagonal)
    along["pi4"] = (
        np.stack([np.zeros_like(t), t], axis=1),
        np.stack([t, t], axis=1),
        PI4_CORNER,
    )
    # pi/2 corner: back down the short leg, and along the long leg
    along["pi2"] = (
        np.stack([np.zeros_like(t), PI2_CORNER[1] - t], axis=1),
        np.array([[x, long_leg_eta(x)] for x in t]),
        PI2_CORNER,
    )
    # pi/5 corner: down the hypotenuse, and back along the long leg
    along["pi5"] = (
        np.stack([PI5_CORNER[0] - t, PI5_CORNER[1] - t], axis=1),
        np.array([[PI5_CORNER[0] - x, long_leg_eta(PI5_CORNER[0] - x)] for x in t]),
        PI5_CORNER,
    )
    out = {}
    for name, (p1, p2, c) in along.items():
        d1 = _tangent(p1, config, c)
        d2 = _tangent(p2, config, c)
        out[name] = float(abs(np.angle(d2 / d1)))
    return out


# ---------------------------------------------------------------- the singular point Y

def y_image(config: ChartConfig = ChartConfig()) -> complex:
    """Image of Y: where EG - F^2 vanishes on the imaginary continuation of the fixed line.

    On the line b = 0 with a = i y, F' vanishes by the symmetry across the
    antidiagonal and the radicand reduces to E' G'; its zero is found by
    bracketing in y.
    """
    from scipy.optimize import brentq

    ev = rotated_fff(config.angle)

    def radicand(y):
        E, F, G = ev(1j * y, 0.0)
        return float(np.real(E * G - F * F))

    ys = np.linspace(0.05, 3.0, 60)
    vals = [radicand(y) for y in ys]
    for k in range(len(ys) - 1):
        if vals[k] > 0 >= vals[k + 1]:
            y0 = brentq(radicand, ys[k], ys[k + 1], xtol=1e-15)
            return complex(0.0, y0 * config.scale)
    raise LeftDomain("no radicand zero on the imaginary axis")


def y_preimage(config: ChartConfig = ChartConfig(ode_rel_tol=1e-12), lo: float = 60.0, hi: float = 89.0) -> float:
    """Chart angle t (radians) with Y = (-t, t): the last antidiagonal point whose path survives."""
    lo, hi = np.radians(lo), np.radians(hi)
    ok_lo = isothermal_many([-lo], [lo], config).ok[0]
    if not ok_lo or isothermal_many([-hi], [hi], config).ok[0]:
        raise LeftDomain("antidiagonal bracket does not straddle Y")
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if isothermal_many([-mid], [mid], config).ok[0]:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class YProbe:
    t: float
    w: complex
    exponent_circle: float
    exponent_radial: float
    phase_from_M_deg: float

    def to_json(self) -> dict:
        return {"schema": "pentamap/1", "xi_deg": -np.degrees(self.t), "eta_deg": np.degrees(self.t),
                "w": [self.w.real, self.w.imag], "exponent_circle": self.exponent_circle,
                "exponent_radial": self.exponent_radial, "phase_Y_minus_M_deg": self.phase_from_M_deg}


def probe_y(config: ChartConfig = ChartConfig(ode_rel_tol=1e-12), radius_deg: float = 0.1, n: int = 721) -> YProbe:
    """Locate Y and measure how much the chart expands angles there.

    The circle estimate maps a small circle around Y, cut where it crosses
    the antidiagonal beyond Y (the paths there die), and divides the total
    image angle by the parameter angle swept.  The radial estimate is the
    log-slope of |w - w(Y)| against distance along the antidiagonal.
    """
    t = y_preimage(config)
    wY = y_image(config)
    cut = np.arctan2(1.0, -1.0)
    gap = 1e-3
    ph = cut + gap + np.linspace(0.0, 2 * np.pi - 2 * gap, n)
    r = np.radians(radius_deg)
    res = isothermal_many(-t + r * np.cos(ph), t + r * np.sin(ph), config)
    _require(res, "Y circle")
    arg = np.unwrap(np.angle(res.w - wY))
    circle = float((arg[-1] - arg[0]) / (ph[-1] - ph[0]))
    ds = np.radians(np.array([2e-3, 1e-3]))
    rad = isothermal_many(-(t - ds), t - ds, config)
    _require(rad, "Y radial")
    g = np.abs(rad.w - wY)
    radial = float(np.log(g[0] / g[1]) / np.log(2.0))
    M = 0.5 * chart_points(np.array([[2 * np.pi / 5, 2 * np.pi / 5]]), config)[0]
    phase = float(np.degrees(np.angle(wY - M)))
    return YProbe(t, wY, circle, radial, phase)


# ---------------------------------------------------------------- audits and export

def conformality_eccentricity(xi: float, eta: float, config: ChartConfig = ChartConfig(ode_rel_tol=1e-12),
                              radius: float = 1e-3, n: int = 16) -> float:
    """1 - minor/major of the image of a small metric circle.

    The circle is drawn in the chart so that it has constant e5 radius,
    using the local form E, F, G; a conformal chart sends it to a circle.
    """
    E, F, G = (float(np.real(v)) for v in fff_angles(xi, eta))
    # columns of L map the unit circle onto the e5 circle: L^T g L = I
    g = np.array([[E, F], [F, G]])
    vals, vecs = np.linalg.eigh(g)
    L = vecs @ np.diag(vals ** -0.5)
    ph = np.linspace(0, 2 * np.pi, n, endpoint=False)
    circ = radius * (L @ np.stack([np.cos(ph), np.sin(ph)]))
    pts = np.stack([xi + circ[0], eta + circ[1]], axis=1)
    w = chart_points(pts, config)
    w0 = chart_points(np.array([[xi, eta]]), config)[0]
    # best-fit linear map from the parameter circle to the image
    A = np.stack([np.cos(ph), np.sin(ph)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.stack([(w - w0).real, (w - w0).imag], axis=1), rcond=None)
    sv = np.linalg.svd(coef, compute_uv=False)
    return float(1 - sv[-1] / sv[0])


def chart_grid_csv(step_deg: float = 5.0, config: ChartConfig = ChartConfig()) -> str:
    """Dot grid over the chart region eta >= |xi| with its isothermal images."""
    vals = np.arange(-180.0, 180.0 + 1e-9, step_deg)
    X, Y = np.meshgrid(vals, vals, indexing="ij")
    keep = (Y >= np.abs(X)) & (Y < 180.0)
    xi, eta = X[keep], Y[keep]
    res = isothermal_many(np.radians(xi), np.radians(eta), config)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["xi_deg", "eta_deg", "u", "v"])
    for a, b, ok, w in zip(xi, eta, res.ok, res.w):
        if ok:
            wr.writerow([f"{a:.6f}", f"{b:.6f}", f"{w.real:.12g}", f"{w.imag:.12g}"])
    return buf.getvalue()
