"""Equilateral pentagons: closure, the (xi, eta) chart, isometries, special shapes.

A pentagon is stored as its five edge phases.  Edge lengths are implicit
(unit perimeter, so each edge is 1/5); they cancel out of every formula here.
Edges are numbered 1..5 in the public API (red, orange, green, blue, purple)
and 0..4 internally.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import NoPentagon, TangentPole
from .polyrat import MPoly, poly_from_monomials

TWO_PI = 2.0 * np.pi
CLOSURE_TOL = 1e-10
EDGE_LENGTH = 0.2

# radicand of the two-sheeted reconstruction, in x = tan(xi/2), y = tan(eta/2)
Q_POLY = poly_from_monomials([
    (15, 0, 0), (22, 2, 0), (22, 0, 2), (-9, 4, 0), (60, 2, 2), (-9, 0, 4),
    (6, 4, 2), (6, 2, 4), (-1, 4, 4),
])
# t2 is a root of A t^2 - 2 B t + C = 0 (and t3 likewise with x, y swapped)
_A_POLY = poly_from_monomials([(-3, 0, 0), (1, 0, 2), (-3, 2, 0), (1, 2, 2)])
_B_POLY = poly_from_monomials([(4, 1, 0), (4, 1, 2)])
_C_POLY = poly_from_monomials([(5, 0, 0), (-3, 2, 0), (9, 0, 2), (1, 2, 2)])

# relation among three adjacent half-angle tangents (t1, t2, t3)
THREE_ADJ = MPoly({
    (0, 0, 0): 15, (2, 0, 0): 3, (0, 2, 0): -1, (0, 0, 2): 3,
    (1, 1, 0): -16, (1, 0, 1): -8, (0, 1, 1): -16,
    (2, 2, 0): 3, (2, 0, 2): -1, (0, 2, 2): 3, (1, 2, 1): 8, (2, 2, 2): -1,
})
# relation between t1 and its two non-neighbours (t1, t3, t4)
THREE_NONADJ = MPoly({
    (0, 0, 0): 5, (2, 0, 0): 9, (0, 2, 0): -3, (0, 1, 1): -8, (0, 0, 2): -3,
    (2, 2, 0): 1, (2, 1, 1): -8, (2, 0, 2): 1, (0, 2, 2): -3, (2, 2, 2): 1,
})


def wrap_pi(a):
    """Reduce angles to (-pi, pi]."""
    r = np.mod(np.asarray(a, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(r == -np.pi, np.pi, r)


def wrap_2pi(a):
    """Reduce angles to [0, 2 pi)."""
    r = np.mod(np.asarray(a, dtype=float), TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


def radicand_Q(x, y):
    """Radicand of the reconstruction formulas at half-angle tangents (x, y)."""
    return Q_POLY(x, y)


class Convention(str, Enum):
    THETA3_ZERO = "theta3zero"
    PHASE_SUM = "phasesum"


@dataclass(frozen=True)
class Pentagon:
    """Closed equilateral pentagon given by its edge phases (radians)."""

    phases: tuple[float, float, float, float, float]
    convention: Convention = Convention.THETA3_ZERO

    def __init__(
        self,
        phases: Sequence[float],
        convention: Convention | str = Convention.THETA3_ZERO,
        closure_tol: float = CLOSURE_TOL,
        phase_sum: float = 0.0,
    ):
        th = np.asarray(phases, dtype=float).reshape(-1)
        if th.shape != (5,) or not np.all(np.isfinite(th)):
            raise ValueError("a pentagon needs five finite phases")
        res = abs(np.exp(1j * th).sum())
        if res > closure_tol:
            raise ValueError(f"phases do not close up (residual {res:.3g})")
        if _is_collinear(th):
            raise ValueError("equilateral pentagons are never collinear")
        convention = Convention(convention)
        th = canonicalize(th, convention, phase_sum)
        object.__setattr__(self, "phases", tuple(float(t) for t in th))
        object.__setattr__(self, "convention", convention)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.phases)

    def edges(self) -> np.ndarray:
        return EDGE_LENGTH * np.exp(1j * self.array)

    def vertices(self) -> np.ndarray:
        """Vertex positions V1..V5 with V1 at the origin."""
        return np.concatenate([[0.0], np.cumsum(self.edges())[:-1]])

    def signed_area(self) -> float:
        v = self.vertices()
        w = np.roll(v, -1)
        return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))

    def to_json(self) -> dict:
        return {"phases": list(self.phases), "convention": self.convention.value}

    @classmethod
    def from_json(cls, obj: dict | str) -> "Pentagon":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["phases"], obj.get("convention", "theta3zero"))


def _is_collinear(th: np.ndarray, tol: float = 1e-12) -> bool:
    # all phases in {a, a + pi}  <=>  all e^{2 i theta} equal
    z = np.exp(2j * th)
    return bool(np.all(np.abs(z - z[0]) < tol))


def canonicalize(th, convention: Convention | str = Convention.THETA3_ZERO, phase_sum: float = 0.0) -> np.ndarray:
    """Rotate phases to the canonical frame and reduce them to [0, 2 pi)."""
    th = np.asarray(th, dtype=float)
    if Convention(convention) is Convention.THETA3_ZERO:
        return wrap_2pi(th - th[2])
    # rotations by multiples of 2 pi/5 keep the sum fixed; pick the one
    # that puts the smallest reduced phase first for determinism
    shift = (phase_sum - th.sum()) / 5.0
    base = wrap_2pi(th + shift)
    best = None
    for k in range(5):
        cand = wrap_2pi(base + k * TWO_PI / 5)
        key = tuple(np.round(cand, 12))
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def closure_residual(p: Pentagon | Sequence[float]) -> float:
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    return float(abs(np.exp(1j * th).sum()))


def vertex_angles(p: Pentagon | Sequence[float]) -> np.ndarray:
    """Exterior angles tau_k = theta_{k+1} - theta_k, reduced to (-pi, pi]."""
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    return wrap_pi(np.roll(th, -1) - th)


@dataclass(frozen=True)
class AngleCoords:
    """Point of the naive chart: xi = tau_1, eta = tau_4, plus the sheet sign.

    sheet = -1 picks the minus sign in the reconstruction formulas, which holds
    the convex counterclockwise pentagons near xi = eta = 2 pi/5.
    """

    xi: float
    eta: float
    sheet: int = -1

    def __post_init__(self):
        if self.sheet not in (-1, 1):
            raise ValueError("sheet must be +1 or -1")

    @classmethod
    def degrees(cls, xi: float, eta: float, sheet: int | str = -1) -> "AngleCoords":
        return cls(np.radians(xi), np.radians(eta), parse_sheet(sheet))


def parse_sheet(sheet: int | str) -> int:
    if isinstance(sheet, str):
        s = sheet.strip()
        if s in ("-", "-1", "minus"):
            return -1
        if s in ("+", "1", "+1", "plus"):
            return 1
        raise ValueError(f"bad sheet {sheet!r}")
    return -1 if sheet < 0 else 1


def _stable_root(A, B, C, sqrtQ, sign):
    """Root (B + sign sqrt Q)/A of A t^2 - 2 B t + C, without cancellation.

    Where sign*B < 0 the product-of-roots form C/(B - sign sqrt Q) is used;
    A vanishes at vertex angles of +-2 pi/3 and the quotient form never
    divides by it there.  Vectorised.
    """
    A, B, C, sqrtQ = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (A, B, C, sqrtQ)))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct_num = B + sign * sqrtQ
        direct = np.where(A != 0, direct_num / np.where(A != 0, A, 1.0), np.copysign(np.inf, direct_num))
        quot = C / (B - sign * sqrtQ)
    return np.where(sign * B >= 0, direct, quot)


def raw_phases_many(xi, eta, sheet=-1, q_slack=0.0):
    """Vectorised raw_phases: shape broadcast(xi, eta) + (5,); NaN where Q < 0."""
    xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
    x = np.tan(xi / 2.0)
    y = np.tan(eta / 2.0)
    q = Q_POLY(x, y)
    q = np.where((q < 0) & (q >= -np.asarray(q_slack)), 0.0, q)
    with np.errstate(invalid="ignore"):
        sq = np.sqrt(q)
    t2 = _stable_root(_A_POLY(x, y), _B_POLY(x, y), _C_POLY(x, y), sq, sheet)
    t3 = _stable_root(_A_POLY(y, x), _B_POLY(y, x), _C_POLY(y, x), sq, sheet)
    th4 = 2.0 * np.arctan(t3)
    th2 = -2.0 * np.arctan(t2)
    return np.stack([th2 - xi, th2, np.zeros_like(xi), th4, th4 + eta], axis=-1)


def raw_phases(xi: float, eta: float, sheet: int = -1, q_slack: float = 0.0) -> np.ndarray:
    """Unreduced phases of the chart pentagon, rotated so theta_3 = 0.

    Continuous in (xi, eta) on each sheet, which finite differencing needs.
    A radicand in [-q_slack, 0) is treated as zero (points on the fold).
    """
    x = np.tan(xi / 2.0)
    y = np.tan(eta / 2.0)
    q = float(Q_POLY(x, y))
    if q < -q_slack:
        raise NoPentagon(f"outside moduli space (Q<0) at xi={np.degrees(xi):.6g} deg, eta={np.degrees(eta):.6g} deg")
    return raw_phases_many(xi, eta, sheet, q_slack)


def pentagon_from_coords(c: AngleCoords, closure_tol: float = CLOSURE_TOL) -> Pentagon:
    """The pentagon at chart point c (raises NoPentagon where Q < 0)."""
    return Pentagon(raw_phases(c.xi, c.eta, c.sheet), closure_tol=closure_tol)


def coords_of_many(phases) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart points (xi, eta, sheet) of an (n, 5) array of pentagons.

    The sheet is whichever reconstruction reproduces all five vertex angles;
    sheet 0 marks pentagons that neither sheet reproduces.
    """
    th = np.atleast_2d(np.asarray(phases, dtype=float))
    tau = wrap_pi(np.roll(th, -1, axis=1) - th)
    xi, eta = tau[:, 0], tau[:, 3]
    x, y = np.tan(xi / 2), np.tan(eta / 2)
    # roundoff can push a point of the fold Q = 0 just outside
    slack = 1e-12 * (1 + x * x) ** 2 * (1 + y * y) ** 2
    errs = []
    for sheet in (-1, 1):
        cand = raw_phases_many(xi, eta, sheet, slack)
        ctau = wrap_pi(np.roll(cand, -1, axis=1) - cand)
        e = np.max(np.abs(wrap_pi(ctau - tau)), axis=1)
        errs.append(np.where(np.isnan(e), np.inf, e))
    errs = np.array(errs)
    sheet = np.where(errs[0] <= errs[1], -1, 1)
    sheet = np.where(np.isinf(errs.min(axis=0)), 0, sheet)
    return xi, eta, sheet


def coords_of(p: Pentagon | Sequence[float]) -> AngleCoords:
    """Chart point of a pentagon; the sheet is the one that reproduces it."""
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    xi, eta, sheet = coords_of_many(th[None, :])
    if sheet[0] == 0:
        raise NoPentagon("pentagon does not project into the chart")
    return AngleCoords(float(xi[0]), float(eta[0]), int(sheet[0]))


def trivariate_residuals(p: Pentagon) -> tuple[float, float]:
    """Both tangent relations at t_k = tan(tau_k/2); zero on true pentagons."""
    tau = vertex_angles(p)
    if np.any(np.isclose(np.abs(tau), np.pi, rtol=0, atol=1e-15)):
        raise TangentPole("a vertex angle equals pi")
    t = np.tan(tau / 2.0)
    return float(THREE_ADJ(t[0], t[1], t[2])), float(THREE_NONADJ(t[0], t[2], t[3]))


def _homogeneous(poly: MPoly, half_angles: Sequence[np.ndarray]) -> np.ndarray:
    """poly(tan a_1, tan a_2, ...) times cos^2 a_i for each variable.

    The relations have degree at most 2 in each variable, so this stays
    bounded when a vertex angle approaches pi.
    """
    s = [np.sin(a) for a in half_angles]
    c = [np.cos(a) for a in half_angles]
    out = 0.0
    for exps, coef in poly.terms.items():
        term = float(coef)
        for si, ci, e in zip(s, c, exps):
            term = term * si ** e * ci ** (2 - e)
        out = out + term
    return out


def trivariate_residuals_many(phases) -> tuple[np.ndarray, np.ndarray]:
    """Both tangent relations in half-angle homogeneous form over (n, 5) phases."""
    th = np.atleast_2d(np.asarray(phases, dtype=float))
    half = wrap_pi(np.roll(th, -1, axis=1) - th) / 2
    adj = _homogeneous(THREE_ADJ, [half[:, 0], half[:, 1], half[:, 2]])
    nonadj = _homogeneous(THREE_NONADJ, [half[:, 0], half[:, 2], half[:, 3]])
    return np.asarray(adj), np.asarray(nonadj)


@dataclass(frozen=True)
class Isometry:
    """Relabel edges by perm, then optionally reflect (negate every phase).

    perm is a tuple of 1-based edge numbers: edge k of the image is edge
    perm[k-1] of the source.
    """

    perm: tuple[int, int, int, int, int] = (1, 2, 3, 4, 5)
    reflect: bool = False

    def __post_init__(self):
        if sorted(self.perm) != [1, 2, 3, 4, 5]:
            raise ValueError(f"not a permutation of 1..5: {self.perm}")
        object.__setattr__(self, "perm", tuple(int(k) for k in self.perm))

    @classmethod
    def swap(cls, *pairs: tuple[int, int], reflect: bool = False) -> "Isometry":
        perm = [1, 2, 3, 4, 5]
        for a, b in pairs:
            perm[a - 1], perm[b - 1] = perm[b - 1], perm[a - 1]
        return cls(tuple(perm), reflect)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """self @ other acts as: first other, then self."""
        perm = tuple(other.perm[k - 1] for k in self.perm)
        return Isometry(perm, self.reflect ^ other.reflect)

    def inverse(self) -> "Isometry":
        inv = [0] * 5
        for k, pk in enumerate(self.perm, start=1):
            inv[pk - 1] = k
        return Isometry(tuple(inv), self.reflect)

    def is_identity(self) -> bool:
        return self.perm == (1, 2, 3, 4, 5) and not self.reflect

    def is_involution(self) -> bool:
        return (self @ self).is_identity()

    @property
    def parity(self) -> int:
        """+1 for even permutations, -1 for odd."""
        sign = 1
        perm = list(self.perm)
        for i in range(5):
            while perm[i] != i + 1:
                j = perm[i] - 1
                perm[i], perm[j] = perm[j], perm[i]
                sign = -sign
        return sign

    def reverses_orientation(self) -> bool:
        """Whether the induced map of the pentagon surface flips orientation.

        Odd relabellings and the mirror image each flip it.
        """
        return (self.parity < 0) != self.reflect

    def act(self, th: np.ndarray) -> np.ndarray:
        out = np.asarray(th, dtype=float)[np.array(self.perm) - 1]
        return -out if self.reflect else out

    def to_json(self) -> dict:
        return {"perm": list(self.perm), "reflect": self.reflect}

    def __str__(self) -> str:
        cycles = []
        seen = set()
        for k in range(1, 6):
            if k in seen:
                continue
            cyc = [k]
            seen.add(k)
            j = self.perm[k - 1]
            while j != k:
                cyc.append(j)
                seen.add(j)
                j = self.perm[j - 1]
            if len(cyc) > 1:
                cycles.append("(" + ",".join(COLORS[i - 1] for i in cyc) + ")")
        return ("".join(cycles) or "id") + ("~" if self.reflect else "")


COLORS = "ROGBP"
IDENTITY = Isometry()
REFLECTION = Isometry(reflect=True)


def all_isometries() -> Iterator[Isometry]:
    """The 240 elements of S5 x C2 in a fixed order."""
    for reflect in (False, True):
        for perm in itertools.permutations(range(1, 6)):
            yield Isometry(perm, reflect)


def apply_isometry(iso: Isometry, p: Pentagon) -> Pentagon:
    return Pentagon(iso.act(p.array), p.convention)


def _best_rotation(a: np.ndarray, b: np.ndarray) -> float:
    """Rotation rho minimising sum |e^{i(a+rho)} - e^{i b}|^2."""
    s = np.sum(np.exp(1j * (b - a)))
    return float(np.angle(s)) if abs(s) > 0 else 0.0


def fixed_residual(iso: Isometry, p: Pentagon | Sequence[float]) -> float:
    """Distance from p to its image under iso, minimised over rigid rotation.

    Uses the chord metric on each phase, so it is smooth and vanishes exactly
    on the fixed locus.
    """
    th = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    img = iso.act(th)
    rho = _best_rotation(img, th)
    return float(np.sqrt(np.sum(np.abs(np.exp(1j * (img + rho)) - np.exp(1j * th)) ** 2)))


def same_pentagon(p: Pentagon | Sequence[float], q: Pentagon | Sequence[float], tol: float = 1e-9) -> bool:
    a = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    b = q.array if isinstance(q, Pentagon) else np.asarray(q, dtype=float)
    return fixed_residual(IDENTITY, a) <= tol and _rot_distance(a, b) <= tol


def _rot_distance(a: np.ndarray, b: np.ndarray) -> float:
    rho = _best_rotation(a, b)
    return float(np.sqrt(np.sum(np.abs(np.exp(1j * (a + rho)) - np.exp(1j * b)) ** 2)))


def rotation_distance(p: Pentagon | Sequence[float], q: Pentagon | Sequence[float]) -> float:
    """Phase-vector distance between p and q after the best rigid rotation."""
    a = p.array if isinstance(p, Pentagon) else np.asarray(p, dtype=float)
    b = q.array if isinstance(q, Pentagon) else np.asarray(q, dtype=float)
    return _rot_distance(a, b)


# ---------------------------------------------------------------- shapes

class VertexKind(str, Enum):
    PI5 = "Pi5"
    PI4 = "Pi4"
    PI2 = "Pi2"
    GENERIC = "Generic"


@dataclass(frozen=True)
class VertexClass:
    kind: VertexKind
    shape: Optional[str] = None
    handedness: Optional[str] = None


def _coincident_groups(th: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for k in range(5):
        for g in groups:
            if abs(np.exp(1j * th[k]) - np.exp(1j * th[g[0]])) < tol:
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def _phase_close(a: float, b: float, tol: float) -> bool:
    return abs(np.exp(1j * a) - np.exp(1j * b)) < tol


def classify(p: Pentagon, tol: float = 1e-6) -> VertexClass:
    """Tract-vertex type of p from its phase pattern, plus its named shape."""
    th = p.array
    z5 = np.exp(5j * th)
    groups = _coincident_groups(th, tol)
    sizes = sorted(len(g) for g in groups)
    if sizes == [1, 1, 1, 1, 1] and np.max(np.abs(z5 - z5[0])) < 5 * tol:
        kind = VertexKind.PI5
    elif sizes == [1, 2, 2]:
        kind = VertexKind.PI4
    elif sizes == [1, 1, 1, 2]:
        pair = next(g for g in groups if len(g) == 2)
        a = th[pair[0]]
        rest = [th[k] for k in range(5) if k not in pair]
        targets = [a + np.pi, a + TWO_PI / 3, a - TWO_PI / 3]
        ok = all(any(_phase_close(r, t, tol) for r in rest) for t in targets)
        kind = VertexKind.PI2 if ok else VertexKind.GENERIC
    else:
        kind = VertexKind.GENERIC
    if kind is VertexKind.GENERIC:
        return VertexClass(kind)
    shape = match_shape(p, tol)
    return VertexClass(kind, shape, _handedness(p, shape))


def _handedness(p: Pentagon, shape: Optional[str]) -> Optional[str]:
    if shape is None:
        return None
    if shape == "pinwheel":
        tau = vertex_angles(p)
        k = int(np.argmin(np.abs(tau)))
        before, after = tau[(k - 1) % 5], tau[(k + 1) % 5]
        return ("L" if before > 0 else "R") + "S" + ("L" if after > 0 else "R")
    return "CCW" if p.signed_area() > 0 else "CW"


def _pi5_phases(order: Sequence[int]) -> np.ndarray:
    return TWO_PI * np.asarray(order, dtype=float) / 5.0


_ROOT3 = TWO_PI / 3
_DELTA = float(np.arccos(-7.0 / 8.0))
# phase of the single edge closing two doubled edges at 0 and _DELTA
_SINGLE = float(np.angle(-(2.0 + 2.0 * np.exp(1j * _DELTA))))

# one labelled representative per named tract-vertex shape
SHAPE_REPRESENTATIVES: dict[str, tuple[str, np.ndarray]] = {
    "regular pentagon": ("Pi5", _pi5_phases([0, 1, 2, 3, 4])),
    "regular pentagram": ("Pi5", _pi5_phases([0, 2, 4, 1, 3])),
    # rockets share the even cyclic phase order of the regular pentagon,
    # crowns the odd order of the pentagram
    "rocket": ("Pi5", _pi5_phases([0, 1, 3, 4, 2])),
    "crown": ("Pi5", _pi5_phases([0, 1, 3, 2, 4])),
    "V-bar": ("Pi4", np.array([0.0, 0.0, _DELTA, _DELTA, _SINGLE])),
    "W-bar": ("Pi4", np.array([0.0, _DELTA, 0.0, _DELTA, _SINGLE])),
    "pinwheel": ("Pi4", np.array([0.0, _DELTA, _DELTA, 0.0, _SINGLE])),
    "trapezoid": ("Pi2", np.array([0.0, 0.0, _ROOT3, np.pi, 2 * _ROOT3])),
    "tripled edge": ("Pi2", np.array([0.0, np.pi, 0.0, _ROOT3, 2 * _ROOT3])),
    "falling flag": ("Pi2", np.array([0.0, 0.0, np.pi, _ROOT3, 2 * _ROOT3])),
    "rising flag": ("Pi2", np.array([0.0, 0.0, _ROOT3, 2 * _ROOT3, np.pi])),
    "falling axe": ("Pi2", np.array([0.0, _ROOT3, 0.0, np.pi, 2 * _ROOT3])),
    "rising axe": ("Pi2", np.array([0.0, _ROOT3, 0.0, 2 * _ROOT3, np.pi])),
}


def _cyclic_variants(tau: np.ndarray) -> Iterator[np.ndarray]:
    for sgn in (1.0, -1.0):
        for k in range(5):
            yield sgn * np.roll(tau, k)


SHAPE_TEMPLATES: dict[str, np.ndarray] = {
    name: vertex_angles(th) for name, (_, th) in SHAPE_REPRESENTATIVES.items()
}


def match_shape(p: Pentagon, tol: float = 1e-6) -> Optional[str]:
    """Name of the tract-vertex template matching p up to relabelling and reflection."""
    tau = vertex_angles(p)
    for name, tmpl in SHAPE_TEMPLATES.items():
        for v in _cyclic_variants(tmpl):
            if np.max(np.abs(wrap_pi(v - tau))) < tol:
                return name
    return None


def decomposition_residual(p: Pentagon) -> tuple[float, tuple[int, int]]:
    """Smallest |theta_i - theta_j - pi| over edge pairs, with the minimising pair (1-based)."""
    th = p.array
    best = (np.inf, (0, 0))
    for i, j in itertools.combinations(range(5), 2):
        r = abs(float(wrap_pi(th[j] - th[i] - np.pi)))
        if r < best[0]:
            best = (r, (i + 1, j + 1))
    return best


def is_decomposable(p: Pentagon, tol: float = 1e-9) -> Optional[tuple[frozenset, frozenset]]:
    """Digon pair and triangle triple when two edges are antiparallel, else None."""
    r, (i, j) = decomposition_residual(p)
    if r > tol:
        return None
    digon = frozenset((i, j))
    return digon, frozenset(set(range(1, 6)) - digon)


def regular_pentagon(ccw: bool = True) -> Pentagon:
    th = _pi5_phases([0, 1, 2, 3, 4])
    return Pentagon(th if ccw else -th)
