"""Polynomial refinement of the isothermal chart onto the hyperbolic tract.

H_in is the image of the fundamental tract under the isothermal chart that
fixes the main diagonal, shifted so its hypotenuse midpoint M sits at 0.
A polynomial C with real coefficients keeps the real axis (the hypotenuse)
in place and is fitted so C(H_in) has its two legs on the circular arcs of
the target tract H_out.  The full map from a pentagon to the disk is
shift, chart, C, and, outside the fundamental tract, a tiling isometry.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import least_squares

from .beltrami import ChartConfig, chart_points
from .errors import DidNotConverge, OutsideModuli
from .hyperbolic import (
    HYPOTENUSE,
    DiskPoint,
    Geodesic,
    MobiusTransform,
    TractH,
    build_tract,
    h_distance,
    poincare_density,
    tile_fundamental_icosagon,
)
from .loops import PI2_CORNER, PI5_CORNER, in_fundamental_tract, long_leg_eta
from .pentagon import (
    AngleCoords,
    Isometry,
    all_isometries,
    coords_of_many,
    radicand_Q,
    raw_phases,
)

SAMPLE_TOL = 1e-13
MAX_DEGREE = 60


@dataclass(frozen=True)
class RealPolynomial:
    """Real coefficients, constant term first."""

    coefficients: tuple

    def __init__(self, coefficients: Sequence[float]):
        if np.iscomplexobj(np.asarray(coefficients)):
            raise ValueError("coefficients must be real")
        c = np.asarray(coefficients, dtype=float)
        object.__setattr__(self, "coefficients", tuple(float(v) for v in c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients)

    def __call__(self, z):
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=complex) if np.iscomplexobj(z) else np.zeros_like(z, dtype=float)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def derivative(self) -> "RealPolynomial":
        c = self.array
        if c.size == 1:
            return RealPolynomial([0.0])
        return RealPolynomial(c[1:] * np.arange(1, c.size))

    def padded(self, degree: int) -> "RealPolynomial":
        c = list(self.coefficients[: degree + 1])
        return RealPolynomial(c + [0.0] * (degree + 1 - len(c)))

    @classmethod
    def linear(cls, slope: float) -> "RealPolynomial":
        return cls([0.0, slope])


SEED = RealPolynomial.linear(1 / 6)


# ---------------------------------------------------------------- target

@dataclass(frozen=True)
class Arc:
    """Circular arc of a geodesic between two disk points."""

    p: complex
    q: complex
    center: complex
    radius: float

    @classmethod
    def between(cls, p: complex, q: complex) -> "Arc":
        g = Geodesic.through(p, q)
        if g.center is None:
            raise ValueError("straight sides are not arcs")
        return cls(complex(p), complex(q), complex(g.center), float(g.radius))

    def signed_distance(self, z):
        """|z - c| - R: distance from the full circle, signed outward."""
        return np.abs(np.asarray(z) - self.center) - self.radius

    def distance(self, z):
        """Orthogonal distance to the arc, or to the nearer end beyond it."""
        z = np.asarray(z, dtype=complex)
        span = np.angle((self.q - self.center) / (self.p - self.center))
        rel = np.angle((z - self.center) / (self.p - self.center))
        on = (rel * np.sign(span) >= 0) & (np.abs(rel) <= abs(span))
        ends = np.minimum(np.abs(z - self.p), np.abs(z - self.q))
        return np.where(on, np.abs(self.signed_distance(z)), ends)


def target_Hout() -> TractH:
    """The L tract with hypotenuse on the real axis, centred at 0, pi/5 corner right."""
    return build_tract("L")


def target_arcs() -> dict[str, Arc]:
    t = target_Hout()
    return {"short": Arc.between(t.pi2, t.pi4), "long": Arc.between(t.pi2, t.pi5)}


# ---------------------------------------------------------------- samples

def chebyshev_unit(n: int) -> np.ndarray:
    """n Chebyshev extreme points on [0, 1], both ends included, ascending."""
    if n == 1:
        return np.array([0.5])
    return 0.5 - 0.5 * np.cos(np.pi * np.arange(n) / (n - 1))


def _leg_points(leg: str, t: np.ndarray) -> np.ndarray:
    """Chart points along a leg at parameters t in [0, 1], from the pi/2 corner."""
    if leg == "short":
        eta = PI2_CORNER[1] * (1 - t)
        return np.stack([np.zeros_like(t), eta], axis=1)
    xs = PI5_CORNER[0] * t
    eta = np.array([long_leg_eta(x) for x in xs])
    eta[0], eta[-1] = (PI2_CORNER[1] if t[0] == 0 else eta[0]), (PI5_CORNER[1] if t[-1] == 1 else eta[-1])
    return np.stack([xs, eta], axis=1)


def _config(tol: float) -> ChartConfig:
    return ChartConfig(ode_rel_tol=tol)


@lru_cache(maxsize=4)
def _midpoint(tol: float = SAMPLE_TOL) -> complex:
    return complex(0.5 * chart_points(np.array([PI5_CORNER]), _config(tol))[0])


@lru_cache(maxsize=8)
def _arclength_table(leg: str, tol: float = SAMPLE_TOL, n: int = 257):
    """Spline of the H_in arclength along a leg as a function of its parameter."""
    t = chebyshev_unit(n)
    w = chart_points(_leg_points(leg, t), _config(tol))
    spline = CubicSpline(t, w)
    fine = np.linspace(0.0, 1.0, 20001)
    speed = np.abs(spline(fine, 1))
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(fine))])
    return fine, arc / arc[-1]


@dataclass
class SampleSet:
    """Points of H_in on its two legs, from the pi/2 corner outward."""

    short_leg: np.ndarray
    long_leg: np.ndarray
    arcs: dict = field(default_factory=target_arcs)
    short_chart: Optional[np.ndarray] = None
    long_chart: Optional[np.ndarray] = None

    def legs(self):
        yield "short", self.short_leg
        yield "long", self.long_leg

    def merged(self, other: "SampleSet") -> "SampleSet":
        return SampleSet(np.concatenate([self.short_leg, other.short_leg]),
                         np.concatenate([self.long_leg, other.long_leg]), self.arcs)


@lru_cache(maxsize=64)
def boundary_samples(d: int, tol: float = SAMPLE_TOL) -> SampleSet:
    """d + 1 points per leg, Chebyshev distributed in normalised H_in arclength."""
    if d < 1:
        raise ValueError("degree must be at least 1")
    s = chebyshev_unit(d + 1)
    out = {}
    charts = {}
    for leg in ("short", "long"):
        fine, arc = _arclength_table(leg, tol)
        t = np.interp(s, arc, fine)
        t[0], t[-1] = 0.0, 1.0
        pts = _leg_points(leg, t)
        charts[leg] = pts
        out[leg] = chart_points(pts, _config(tol)) - _midpoint(tol)
    return SampleSet(out["short"], out["long"], target_arcs(), charts["short"], charts["long"])


def dense_samples(n: int = 201, tol: float = SAMPLE_TOL) -> SampleSet:
    """A fine sample set for measuring dev independently of the fitting nodes."""
    return boundary_samples(n - 1, tol)


# ---------------------------------------------------------------- deviation and fit

def dev(C: RealPolynomial, s: SampleSet) -> float:
    """Largest Euclidean distance of a mapped leg sample from its target arc."""
    worst = 0.0
    for leg, z in s.legs():
        worst = max(worst, float(np.max(s.arcs[leg].distance(C(z)))))
    return worst


@dataclass
class FitReport:
    degree: int
    dev: float
    coefficients: RealPolynomial
    residual_history: list
    converged: bool = True
    fit_dev: float = float("nan")

    def to_json(self) -> dict:
        return {
            "schema": "pentamap/1",
            "degree": self.degree,
            "dev": self.dev,
            "fit_dev": self.fit_dev,
            "converged": self.converged,
            "coefficients": [repr(c) for c in self.coefficients.coefficients],
            "residual_history": self.residual_history,
        }


def _residuals_and_jac(a: np.ndarray, U: dict, rho: float, arcs: dict):
    """Signed circle distances and their derivatives in the scaled coefficients."""
    res, jac = [], []
    for leg, V in U.items():
        w = V @ a
        arc = arcs[leg]
        diff = w - arc.center
        r = np.abs(diff)
        res.append(r - arc.radius)
        unit = diff / r
        jac.append((np.conj(unit)[:, None] * V).real)
    return np.concatenate(res), np.vstack(jac)


def fit(d: int, init: Optional[RealPolynomial] = None, samples: Optional[SampleSet] = None,
        check: Optional[SampleSet] = None, max_iter: int = 200, raise_on_failure: bool = False) -> FitReport:
    """Levenberg-Marquardt fit of a degree-d real polynomial to the target arcs.

    Minimises the sum of squared signed distances from the circles of the two
    target legs, over 2d + 2 Chebyshev samples.  Coefficients are solved in
    the scaled variable z / rho, rho = max |z|, for conditioning.
    """
    if not 1 <= d <= MAX_DEGREE:
        raise ValueError(f"degree must be in 1..{MAX_DEGREE}")
    s = samples or boundary_samples(d)
    init = (init or SEED).padded(d)
    rho = float(max(np.abs(s.short_leg).max(), np.abs(s.long_leg).max()))
    powers = rho ** np.arange(d + 1)
    U = {leg: np.vander(z / rho, d + 1, increasing=True) for leg, z in s.legs()}
    history: list = []

    def fun(a):
        r, _ = _residuals_and_jac(a, U, rho, s.arcs)
        history.append(float(np.dot(r, r)))
        return r

    def jac(a):
        return _residuals_and_jac(a, U, rho, s.arcs)[1]

    a0 = init.array * powers
    sol = least_squares(fun, a0, jac=jac, method="lm", ftol=1e-14, xtol=1e-15, gtol=1e-15,
                        max_nfev=max_iter * (d + 2))
    coef = RealPolynomial(sol.x / powers)
    converged = sol.status > 0
    if not converged and raise_on_failure:
        raise DidNotConverge(f"fit of degree {d}: {sol.message}")
    chk = check if check is not None else dense_samples()
    return FitReport(d, dev(coef, chk), coef, history, converged, dev(coef, s))


def fit_sweep(degrees: Sequence[int], check: Optional[SampleSet] = None) -> list[FitReport]:
    """Fits of increasing degree, each seeded from the one before."""
    chk = check if check is not None else dense_samples()
    prev = SEED
    out = []
    for d in degrees:
        rep = fit(d, prev, check=chk)
        out.append(rep)
        prev = rep.coefficients
    return out


def convergence_ratios(reports: Sequence[FitReport]) -> np.ndarray:
    devs = np.array([r.dev for r in reports])
    return devs[:-1] / devs[1:]


def period3_share(C: RealPolynomial, radius: float, start: int = 6) -> float:
    """Fraction of the energy of the rescaled tail c_k r^k lying at period 3.

    A tail driven by a conjugate singularity pair at angle near 2 pi / 3 from
    the expansion centre oscillates with period 3; pure period 3 gives 1.
    """
    c = C.array
    k = np.arange(start, c.size - 1)
    if k.size < 6:
        raise ValueError("degree too low for a period test")
    x = c[k] * radius ** k.astype(float)
    x = x / np.abs(x).max()
    proj = np.abs(np.sum(x * np.exp(-2j * np.pi * k / 3))) ** 2 * 2 / k.size
    return float(proj / np.sum(x * x))


def sign_period(C: RealPolynomial, start: int = 8) -> Optional[int]:
    """Smallest p <= 6 with sign(c_k) = sign(c_{k+p}) over the tail, if any."""
    sg = np.sign(C.array[start:-1])
    for p in range(1, 7):
        if sg.size > p and np.all(sg[p:] == sg[:-p]):
            return p
    return None


# ---------------------------------------------------------------- the final map

@lru_cache(maxsize=8)
def default_fit(d: int = 20) -> RealPolynomial:
    return fit_sweep(list(range(1, d + 1)))[-1].coefficients


@lru_cache(maxsize=1)
def _tiling_isometries():
    """Disk isometry, in the H_out frame, carrying the fundamental tract to the tract labelled g."""
    tiling = tile_fundamental_icosagon()
    h = float(np.tanh(HYPOTENUSE / 4))
    to_seed = MobiusTransform.rotation(np.pi) @ MobiusTransform(np.array([[1, -h], [-h, 1]]))
    back = to_seed.inverse()
    seed = tiling.tracts[0]
    out = {}
    for tract, g in zip(tiling.tracts, tiling.labels):
        anti = tract.chirality != seed.chirality
        T = MobiusTransform.from_triples(seed.vertices, tract.vertices, anti=anti)
        out[g] = back @ T @ to_seed
    return out


def _sort_key(g: Isometry):
    return (tuple(g.perm), g.reflect)


def reduce_to_tract(c: AngleCoords, tol: float = 1e-8) -> tuple[Isometry, AngleCoords]:
    """An isometry g and a point c0 of the fundamental tract with g(c0) = c.

    Among several candidates (points on tract sides) the smallest g in
    lexicographic order wins.
    """
    if float(radicand_Q(np.tan(c.xi / 2), np.tan(c.eta / 2))) < 0:
        raise OutsideModuli(f"outside moduli space (Q<0) at xi={np.degrees(c.xi):.6g}, eta={np.degrees(c.eta):.6g} deg")
    th = raw_phases(c.xi, c.eta, c.sheet, q_slack=1e-12)
    best = None
    for g in sorted(all_isometries(), key=_sort_key):
        th0 = g.inverse().act(th)
        xi, eta, sheet = coords_of_many(th0[None, :])
        if sheet[0] == -1 and in_fundamental_tract(float(xi[0]), float(eta[0]), -1, tol):
            best = (g, AngleCoords(float(xi[0]), float(eta[0]), -1))
            break
    if best is None:
        raise OutsideModuli(f"no tract contains xi={np.degrees(c.xi):.6g}, eta={np.degrees(c.eta):.6g} deg")
    return best


def map_tract_points(pts: np.ndarray, C: Optional[RealPolynomial] = None, tol: float = 1e-12) -> np.ndarray:
    """Final map on an (n, 2) array of chart points inside the fundamental tract."""
    C = C or default_fit()
    w = chart_points(np.asarray(pts, dtype=float), _config(tol)) - _midpoint(SAMPLE_TOL)
    return C(w)


def map_to_disk(c: AngleCoords, C: Optional[RealPolynomial] = None) -> DiskPoint:
    """Disk position (H_out frame) of the pentagon at chart point c."""
    g, c0 = reduce_to_tract(c)
    z = complex(map_tract_points(np.array([[c0.xi, c0.eta]]), C)[0])
    if not g.is_identity():
        z = complex(_tiling_isometries()[g](z))
    return DiskPoint(z)


def map_batch_csv(points: Sequence[tuple[float, float, int]], C: Optional[RealPolynomial] = None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["xi_deg", "eta_deg", "sheet", "disk_re", "disk_im"])
    for xi, eta, sheet in points:
        z = map_to_disk(AngleCoords.degrees(xi, eta, sheet), C).z
        wr.writerow([f"{xi:.6f}", f"{eta:.6f}", int(sheet), f"{z.real:.15g}", f"{z.imag:.15g}"])
    return buf.getvalue()


# ---------------------------------------------------------------- scale factor

def _metric_unit_vectors(xi: float, eta: float) -> np.ndarray:
    """Chart directions (1, 0) and (0, 1) rescaled to unit e5 length."""
    from .metric import fff_angles

    E, F, G = (float(np.real(v)) for v in fff_angles(xi, eta))
    return np.array([[1 / np.sqrt(E), 0.0], [0.0, 1 / np.sqrt(G)]])


def scale_factors(pts: np.ndarray, C: Optional[RealPolynomial] = None, h: float = 1e-4) -> np.ndarray:
    """Scale factor s along both chart axes at each point, shape (n, 2).

    s is the Poincare length of the image of a unit e5 vector, by central
    differences with one Richardson step.
    """
    pts = np.asarray(pts, dtype=float)
    out = np.empty((len(pts), 2))
    z0 = map_tract_points(pts, C)
    offsets = []
    for i, (xi, eta) in enumerate(pts):
        for j, v in enumerate(_metric_unit_vectors(xi, eta)):
            for step in (h, h / 2):
                offsets.append((i, j, step, +1, (xi, eta) + step * v))
                offsets.append((i, j, step, -1, (xi, eta) - step * v))
    zz = map_tract_points(np.array([o[4] for o in offsets]), C)
    diffs = {}
    for (i, j, step, sign, _), z in zip(offsets, zz):
        diffs.setdefault((i, j, step), {})[sign] = z
    for i in range(len(pts)):
        for j in range(2):
            d1 = (diffs[(i, j, h)][1] - diffs[(i, j, h)][-1]) / (2 * h)
            d2 = (diffs[(i, j, h / 2)][1] - diffs[(i, j, h / 2)][-1]) / h
            deriv = (4 * d2 - d1) / 3
            out[i, j] = abs(deriv) * poincare_density(z0[i])
    return out


def scale_factor(c: AngleCoords, C: Optional[RealPolynomial] = None) -> float:
    if not in_fundamental_tract(c.xi, c.eta, c.sheet):
        raise OutsideModuli("scale_factor needs a point of the fundamental tract")
    return float(scale_factors(np.array([[c.xi, c.eta]]), C).mean())


def tract_grid(n: int = 200, margin: float = 0.02) -> np.ndarray:
    """n chart points strictly inside the fundamental tract.

    Rows run across the tract at fixed xi, from the hypotenuse up to the
    long leg; each row carries a share of points proportional to its width.
    """
    rows = int(np.ceil(np.sqrt(2 * n)))
    xs = PI5_CORNER[0] * (margin + (1 - 2 * margin) * (np.arange(rows) + 0.5) / rows)
    tops = np.array([long_leg_eta(x) for x in xs])
    widths = tops - xs
    counts = np.maximum(1, np.round(n * widths / widths.sum()).astype(int))
    while counts.sum() > n:
        counts[np.argmax(counts)] -= 1
    while counts.sum() < n:
        counts[np.argmax(widths / counts)] += 1
    pts = []
    for x, top, k in zip(xs, tops, counts):
        v = margin + (1 - 2 * margin) * (np.arange(k) + 0.5) / k
        pts.extend((x, x + (top - x) * vv) for vv in v)
    return np.array(pts)


def scale_grid_csv(n: int = 200, C: Optional[RealPolynomial] = None) -> str:
    pts = tract_grid(n)
    s = scale_factors(pts, C)
    z = map_tract_points(pts, C)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["xi_deg", "eta_deg", "disk_re", "disk_im", "s"])
    for (xi, eta), zz, ss in zip(pts, z, s.mean(axis=1)):
        wr.writerow([f"{np.degrees(xi):.6f}", f"{np.degrees(eta):.6f}", f"{zz.real:.12g}", f"{zz.imag:.12g}", f"{ss:.10g}"])
    return buf.getvalue()


def map_eccentricity(xi: float, eta: float, C: Optional[RealPolynomial] = None,
                     radius: float = 1e-4, n: int = 16) -> float:
    """1 - minor/major axis of the image of a small e5 circle under the map."""
    from .metric import fff_angles

    E, F, G = (float(np.real(v)) for v in fff_angles(xi, eta))
    # columns of L map a unit circle to an e5 unit circle in the chart
    L = np.linalg.inv(np.linalg.cholesky(np.array([[E, F], [F, G]])).T)
    phi = 2 * np.pi * np.arange(n) / n
    circ = radius * (L @ np.stack([np.cos(phi), np.sin(phi)]))
    z = map_tract_points(np.array([xi, eta]) + circ.T, C)
    z0 = complex(map_tract_points(np.array([[xi, eta]]), C)[0])
    A, *_ = np.linalg.lstsq(np.stack([np.cos(phi), np.sin(phi)], axis=1),
                            np.stack([(z - z0).real, (z - z0).imag], axis=1), rcond=None)
    sv = np.linalg.svd(A, compute_uv=False)
    return float(1 - sv[1] / sv[0])


def metric_consistency(xi: float, eta: float, direction: float, C: Optional[RealPolynomial] = None,
                       h: float = 1e-5) -> float:
    """Relative gap between s^2 e5(v, v) and the pulled-back Poincare form on v."""
    from .metric import fff_angles

    E, F, G = (float(np.real(q)) for q in fff_angles(xi, eta))
    v = np.array([np.cos(direction), np.sin(direction)])
    e5 = E * v[0] ** 2 + 2 * F * v[0] * v[1] + G * v[1] ** 2
    p = np.array([xi, eta])
    zp, zm, z0 = map_tract_points(np.array([p + h * v, p - h * v, p]), C)
    pulled = (abs(zp - zm) / (2 * h) * poincare_density(z0)) ** 2
    s = scale_factor(AngleCoords(xi, eta, -1), C)
    return float(abs(s * s * e5 - pulled) / pulled)


# ---------------------------------------------------------------- child's house and crossings

CHILDS_HOUSE = (np.pi / 6, np.pi / 6)


def altitude_foot(p: complex) -> float:
    """Foot on the real axis of the perpendicular geodesic through p."""
    if abs(p.real) < 1e-15:
        return 0.0
    c = (abs(p) ** 2 + 1) / (2 * p.real)
    return float(c - np.sign(c) * np.sqrt(c * c - 1))


def childs_house_offset(C: Optional[RealPolynomial] = None) -> dict:
    """Where the child's house lands relative to the altitude through the pi/2 corner.

    Returns the hyperbolic distance along the hypotenuse between the house
    and the altitude foot, also as a fraction of the hypotenuse; positive
    means the house lies on the pi/4 side of the altitude.
    """
    z_house = complex(map_tract_points(np.array([CHILDS_HOUSE]), C)[0])
    pi2 = complex(map_tract_points(np.array([PI2_CORNER]), C)[0])
    foot = altitude_foot(pi2)
    dist = float(h_distance(z_house.real, foot))
    sign = 1.0 if z_house.real < foot else -1.0
    return {"house": [z_house.real, z_house.imag], "foot": foot, "distance": sign * dist,
            "fraction_of_hypotenuse": sign * dist / HYPOTENUSE}


def _curve_direction(points: np.ndarray, C) -> complex:
    """Image direction at the first point of a short chart polyline."""
    z = map_tract_points(points, C)
    s = np.hypot(*(points - points[0]).T)
    V = np.vander(s[1:], 3, increasing=True)[:, 1:]
    coef, *_ = np.linalg.lstsq(V, z[1:] - z[0], rcond=None)
    return complex(coef[0])


def crossing_angles(C: Optional[RealPolynomial] = None, eps: float = 2e-3) -> dict:
    """Angles at the pi/2 corner from the short leg to the ditri loop and to the altitude.

    Ditri loops are straight chart lines; the one through the corner and the
    child's house is xi + eta = 60 deg.  The altitude is the geodesic through
    the mapped corner perpendicular to the real axis.
    """
    corner = np.array(PI2_CORNER)
    t = eps * np.arange(0, 7)
    d_short = _curve_direction(corner + np.outer(t, [0.0, -1.0]), C)
    d_ditri = _curve_direction(corner + np.outer(t, [1.0, -1.0]) / np.sqrt(2), C)
    pi2 = complex(map_tract_points(corner[None, :], C)[0])
    foot = altitude_foot(pi2)
    g = Geodesic.through(pi2, complex(foot))
    if g.center is None:
        d_alt = complex(foot) - pi2
    else:
        tan = 1j * (pi2 - g.center)
        d_alt = tan if np.real(np.conj(tan) * (foot - pi2)) > 0 else -tan
    angle = lambda a, b: float(np.degrees(abs(np.angle(b / a))))
    return {"ditri_deg": angle(d_short, d_ditri), "altitude_deg": angle(d_short, d_alt)}
