"""Bag-of-edges metric: intrinsic form, chart form (E, F, G), curvature, Grassmann check."""
from __future__ import annotations

import csv
import io
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NoPentagon, OutsideRegion
from .pentagon import Q_POLY, AngleCoords, Pentagon, raw_phases, wrap_pi
from .polyrat import BiPoly, BiRat, poly_from_monomials

PUSHFORWARD_STEP = 1e-4
UNIT_R = np.full(5, 0.2)

_E_NUM = poly_from_monomials([
    (75, 0, 0), (225, 2, 0), (110, 0, 2), (-15, 4, 0), (490, 2, 2), (-45, 0, 4),
    (27, 6, 0), (-22, 4, 2), (153, 2, 4), (-18, 6, 2), (9, 4, 4), (3, 6, 4),
])
_F_NUM = poly_from_monomials([
    (-55, 1, 1), (-50, 3, 1), (-50, 1, 3), (-27, 5, 1), (20, 3, 3), (-27, 1, 5),
    (6, 5, 3), (6, 3, 5), (1, 5, 5),
])
_G_NUM = poly_from_monomials([
    (75, 0, 0), (110, 2, 0), (225, 0, 2), (-45, 4, 0), (490, 2, 2), (-15, 0, 4),
    (153, 4, 2), (-22, 2, 4), (27, 0, 6), (9, 4, 4), (-18, 2, 6), (3, 4, 6),
])

# chart form in (xi, eta), as rational functions of x = tan(xi/2), y = tan(eta/2)
E_RAT = BiRat(_E_NUM, 50 * Q_POLY)
F_RAT = BiRat(_F_NUM, 25 * Q_POLY)
G_RAT = BiRat(_G_NUM, 50 * Q_POLY)
Q_RAT = BiRat(Q_POLY)


@dataclass(frozen=True)
class FirstFundamentalForm:
    E: float
    F: float
    G: float

    @property
    def det(self) -> float:
        return self.E * self.G - self.F * self.F

    def quad(self, a: float, b: float) -> float:
        return self.E * a * a + 2 * self.F * a * b + self.G * b * b


@dataclass(frozen=True)
class TangentVector:
    dtheta: np.ndarray

    def closure_defect(self, p: Pentagon | Sequence[float], r: Sequence[float] = UNIT_R) -> float:
        th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
        r = np.asarray(r, dtype=float)
        return float(abs(np.sum(r * np.exp(1j * th) * self.dtheta)))


def bag_length_sq(r: Sequence[float], dtheta, form: str = "pairs") -> float:
    """Squared bag-of-edges length of a phase velocity.

    form="pairs" uses the double sum over edge pairs; form="expanded" uses
    (sum r)(sum r dtheta^2) - (sum r dtheta)^2.
    """
    r = np.asarray(r, dtype=float)
    d = np.asarray(dtheta.dtheta if isinstance(dtheta, TangentVector) else dtheta, dtype=float)
    if form == "pairs":
        diff = d[None, :] - d[:, None]
        w = np.triu(np.outer(r, r), 1)
        return float(np.sum(w * diff * diff))
    if form == "expanded":
        return float(r.sum() * np.sum(r * d * d) - np.sum(r * d) ** 2)
    raise ValueError(f"unknown form {form!r}")


def _check_region(x, y):
    q = Q_POLY(x, y)
    if np.any(np.asarray(q) <= 0):
        raise OutsideRegion("metric requested where Q <= 0")


def fff(x: float, y: float) -> FirstFundamentalForm:
    """E, F, G per radian^2 of (xi, eta), at x = tan(xi/2), y = tan(eta/2)."""
    _check_region(x, y)
    return FirstFundamentalForm(float(E_RAT(x, y)), float(F_RAT(x, y)), float(G_RAT(x, y)))


def fff_angles(xi, eta):
    """Vectorised (E, F, G) at chart angles; no region check."""
    x = np.tan(np.asarray(xi) / 2.0)
    y = np.tan(np.asarray(eta) / 2.0)
    return E_RAT(x, y), F_RAT(x, y), G_RAT(x, y)


def coord_pushforward(c: AngleCoords, dxi: float, deta: float, h: float = PUSHFORWARD_STEP) -> TangentVector:
    """Phase velocity of the chart pentagon moving along (dxi, deta)."""
    x, y = np.tan(c.xi / 2), np.tan(c.eta / 2)
    if Q_POLY(x, y) <= 0:
        raise OutsideRegion("pushforward requested where Q <= 0")
    norm = float(np.hypot(dxi, deta))
    if norm == 0:
        return TangentVector(np.zeros(5))
    ux, uy = dxi / norm, deta / norm

    def central(step):
        try:
            plus = raw_phases(c.xi + step * ux, c.eta + step * uy, c.sheet)
            minus = raw_phases(c.xi - step * ux, c.eta - step * uy, c.sheet)
        except NoPentagon as exc:
            raise OutsideRegion("pushforward stencil leaves the region Q > 0") from exc
        return wrap_pi(plus - minus) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    return TangentVector(norm * (4 * d2 - d1) / 3)


# ------------------------------------------------------------ curvature

@lru_cache(maxsize=4)
def _xy_metric(flip_x: bool = False, flip_y: bool = False):
    """Metric coefficients in half-angle coordinates with exact partials.

    Coordinates are u = tan(xi/2) (or its reciprocal when flip_x) and
    likewise v for eta, so everything stays rational: d xi = 2 du/(1 + u^2)
    up to sign.  Curvature is chart independent, and the reciprocal charts
    keep the coordinates bounded near vertex angles of pi.
    """
    e, f, g = E_RAT, F_RAT, G_RAT
    if flip_x:
        e, f, g = e.reciprocal("x"), f.reciprocal("x"), g.reciprocal("x")
    if flip_y:
        e, f, g = e.reciprocal("y"), f.reciprocal("y"), g.reciprocal("y")
    X, Y = BiPoly.x(), BiPoly.y()
    px = 1 + X * X
    py = 1 + Y * Y
    e = e * BiRat(4, factors=((px, 2),))
    f = f * BiRat(4 * (-1) ** (flip_x + flip_y), factors=((px, 1), (py, 1)))
    g = g * BiRat(4, factors=((py, 2),))
    return {
        "E": e, "F": f, "G": g,
        "Ex": e.partial("x"), "Ey": e.partial("y"),
        "Fx": f.partial("x"), "Fy": f.partial("y"),
        "Gx": g.partial("x"), "Gy": g.partial("y"),
        "Eyy": e.partial("y").partial("y"),
        "Fxy": f.partial("x").partial("y"),
        "Gxx": g.partial("x").partial("x"),
    }


def _brioschi_values(v):
    return brioschi(v["E"], v["F"], v["G"], v["Ex"], v["Ey"], v["Fx"], v["Fy"],
                    v["Gx"], v["Gy"], v["Eyy"], v["Fxy"], v["Gxx"])


def brioschi(E, F, G, Eu, Ev, Fu, Fv, Gu, Gv, Evv, Fuv, Guu):
    """Gaussian curvature from E, F, G and their partials.

    Broadcasts over arrays and stays exact on Fraction inputs.
    """
    a = -Evv / 2 + Fuv - Guu / 2
    m1 = (
        a * (E * G - F * F)
        - Eu / 2 * ((Fv - Gu / 2) * G - F * Gv / 2)
        + (Fu - Ev / 2) * ((Fv - Gu / 2) * F - E * Gv / 2)
    )
    m2 = (
        -Ev / 2 * (Ev / 2 * G - F * Gu / 2)
        + Gu / 2 * (Ev / 2 * F - E * Gu / 2)
    )
    return (m1 - m2) / (E * G - F * F) ** 2


EXACT_BELOW = 1e-2


def gaussian_curvature(x, y, exact: bool | None = None):
    """Curvature of the bag-of-edges metric at half-angle tangents (x, y).

    Each point is evaluated in whichever of the four charts (x or 1/x,
    y or 1/y) keeps both coordinates within [-1, 1].  exact=True evaluates
    in rational arithmetic at the given floats and rounds once at the end;
    the default (None) does so only for a scalar point close to Q = 0, where
    the float path loses digits.
    """
    _check_region(x, y)
    if exact is None:
        exact = np.ndim(x) == 0 and np.ndim(y) == 0 and _normalized_q(x, y) < EXACT_BELOW
    if exact:
        if np.ndim(x) or np.ndim(y):
            return np.vectorize(lambda a, b: gaussian_curvature(a, b, True))(x, y)
        x, y = float(x), float(y)
        fx, fy = abs(x) > 1, abs(y) > 1
        u, w = Fraction(x), Fraction(y)
        u = 1 / u if fx else u
        w = 1 / w if fy else w
        v = {k: f.eval_exact(u, w) for k, f in _xy_metric(fx, fy).items()}
        return float(_brioschi_values(v))
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.empty(x.shape)
    fx_all, fy_all = np.abs(x) > 1, np.abs(y) > 1
    for fx in (False, True):
        for fy in (False, True):
            sel = (fx_all == fx) & (fy_all == fy)
            if not np.any(sel):
                continue
            u = 1 / x[sel] if fx else x[sel]
            w = 1 / y[sel] if fy else y[sel]
            v = {k: f(u, w) for k, f in _xy_metric(fx, fy).items()}
            out[sel] = _brioschi_values(v)
    return float(out) if out.ndim == 0 else out


def _normalized_q(x, y):
    # Q / ((1 + x^2)^2 (1 + y^2)^2) is bounded and vanishes on the boundary
    return Q_POLY(x, y) / ((1 + x * x) ** 2 * (1 + y * y) ** 2)


def curvature_at(xi: float, eta: float, exact: bool | None = None) -> float:
    return gaussian_curvature(np.tan(xi / 2), np.tan(eta / 2), exact)


# ------------------------------------------------------------ Grassmann

@dataclass(frozen=True)
class GrassmannPoint:
    u: np.ndarray
    v: np.ndarray
    sigma: np.ndarray

    @classmethod
    def cover(cls, th, sigma=None, r: float = 0.4) -> "GrassmannPoint":
        th = np.asarray(th, dtype=float)
        sigma = np.ones(5) if sigma is None else np.asarray(sigma, dtype=float)
        s = sigma * np.sqrt(r)
        return cls(s * np.cos(th / 2), s * np.sin(th / 2), sigma)


def grassmann_length_sq(p: Pentagon | Sequence[float], dtheta, sigma=None) -> float:
    """Squared Frobenius norm of the tangent map W -> W-perp (perimeter 2)."""
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    d = np.asarray(dtheta.dtheta if isinstance(dtheta, TangentVector) else dtheta, dtype=float)
    w = GrassmannPoint.cover(th, sigma)
    du = -0.5 * w.v * d
    dv = 0.5 * w.u * d
    basis = np.vstack([w.u, w.v])
    proj = np.eye(5) - basis.T @ basis
    return float(np.sum((proj @ du) ** 2) + np.sum((proj @ dv) ** 2))


def closed_tangent_basis(p: Pentagon | Sequence[float]) -> np.ndarray:
    """Orthonormal basis (rows) of phase velocities preserving closure, rotation included."""
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    A = np.vstack([np.cos(th), np.sin(th)])
    _, _, vt = np.linalg.svd(A)
    return vt[2:]


def curvature_grid_csv(step_deg: float = 5.0, lo: float = 0.0, hi: float = 180.0, min_q: float = 1e-3) -> str:
    """CSV rows xi_deg, eta_deg, K over a square grid, skipping Q <= min_q."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi_deg", "eta_deg", "K"])
    n = int(round((hi - lo) / step_deg))
    for i in range(n + 1):
        xi = lo + i * step_deg
        for j in range(n + 1):
            eta = lo + j * step_deg
            if abs(xi) >= 180 or abs(eta) >= 180:
                continue
            x, y = np.tan(np.radians(xi) / 2), np.tan(np.radians(eta) / 2)
            if Q_POLY(x, y) <= min_q:
                continue
            w.writerow([f"{xi:.6g}", f"{eta:.6g}", f"{gaussian_curvature(x, y):.12g}"])
    return buf.getvalue()


def metric_ellipses(step_deg: float = 15.0, lo: float = -165.0, hi: float = 165.0, min_q: float = 1e-2):
    """Chart ellipses of e5 unit vectors: rows (xi, eta, a, b, tilt), degrees and radians.

    a and b are the semi-axes in radians of chart angle, tilt the direction
    of the a axis from the xi axis.
    """
    rows = []
    n = int(round((hi - lo) / step_deg))
    for i in range(n + 1):
        xi = lo + i * step_deg
        for j in range(n + 1):
            eta = lo + j * step_deg
            x, y = np.tan(np.radians(xi) / 2), np.tan(np.radians(eta) / 2)
            if Q_POLY(x, y) <= min_q:
                continue
            f = fff(x, y)
            vals, vecs = np.linalg.eigh(np.array([[f.E, f.F], [f.F, f.G]]))
            tilt = float(np.arctan2(vecs[1, 0], vecs[0, 0]))
            rows.append((xi, eta, 1 / np.sqrt(vals[0]), 1 / np.sqrt(vals[1]), tilt))
    return rows


def metric_grid_csv(step_deg: float = 15.0) -> str:
    """CSV of chart form and e5 unit ellipses on a grid."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi_deg", "eta_deg", "E", "F", "G", "semi_major", "semi_minor", "tilt_deg"])
    for xi, eta, a, b, tilt in metric_ellipses(step_deg):
        f = fff(np.tan(np.radians(xi) / 2), np.tan(np.radians(eta) / 2))
        w.writerow([f"{xi:.6g}", f"{eta:.6g}", f"{f.E:.12g}", f"{f.F:.12g}", f"{f.G:.12g}",
                    f"{a:.12g}", f"{b:.12g}", f"{np.degrees(tilt):.6f}"])
    return buf.getvalue()
