"""Poincare-disk geometry, the (2,4,5) tract, and the 240-tract icosagon.

Points are complex numbers in the unit disk (curvature -1).  Each tract of
the icosagon carries the isometry of the pentagon space that moves the
fundamental tract onto it, so reflections across tract sides mirror the
short, long and hypotenuse swaps of the pentagons themselves.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .pentagon import Isometry, Pentagon, apply_isometry, canonicalize, raw_phases

HYPOTENUSE = float(np.arccosh(1 / np.tan(np.pi / 5)))
LONG_LEG = float(np.arccosh(np.cos(np.pi / 4) / np.sin(np.pi / 5)))
SHORT_LEG = float(np.arccosh(np.cos(np.pi / 5) / np.sin(np.pi / 4)))
ANGLES = {"pi2": np.pi / 2, "pi4": np.pi / 4, "pi5": np.pi / 5}
DISK_MARGIN = 1e-12


@dataclass(frozen=True)
class DiskPoint:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not abs(z) < 1 - DISK_MARGIN:
            raise ValueError(f"{z} is not inside the unit disk")
        object.__setattr__(self, "z", z)


def _z(p) -> complex | np.ndarray:
    return p.z if isinstance(p, DiskPoint) else p


def h_distance(p, q):
    """Hyperbolic distance in the Poincare disk (broadcasts over arrays)."""
    p, q = np.asarray(_z(p)), np.asarray(_z(q))
    num = 2 * np.abs(p - q) ** 2
    den = (1 - np.abs(p) ** 2) * (1 - np.abs(q) ** 2)
    return np.arccosh(1 + num / den)


def poincare_density(z):
    """Length scale factor 2/(1 - |z|^2) of the disk metric."""
    return 2 / (1 - np.abs(z) ** 2)


def to_klein(z):
    return 2 * z / (1 + np.abs(z) ** 2)


def from_klein(k):
    return k / (1 + np.sqrt(1 - np.abs(k) ** 2))


# ---------------------------------------------------------------- isometries

@dataclass(frozen=True)
class MobiusTransform:
    """z -> (a w + b)/(c w + d) with w = z, or w = conj(z) when anti."""

    mat: np.ndarray
    anti: bool = False

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        m = m / np.sqrt(det)
        object.__setattr__(self, "mat", m)

    def __call__(self, z):
        z = _z(z)
        w = np.conj(z) if self.anti else z
        (a, b), (c, d) = self.mat
        return (a * w + b) / (c * w + d)

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        """self @ other applies other first."""
        m2 = np.conj(other.mat) if self.anti else other.mat
        return MobiusTransform(self.mat @ m2, self.anti != other.anti)

    def inverse(self) -> "MobiusTransform":
        (a, b), (c, d) = self.mat
        inv = np.array([[d, -b], [-c, a]])
        if self.anti:
            inv = np.conj(inv)
        return MobiusTransform(inv, self.anti)

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(np.eye(2))

    @classmethod
    def rotation(cls, phi: float) -> "MobiusTransform":
        return cls(np.array([[np.exp(0.5j * phi), 0], [0, np.exp(-0.5j * phi)]]))

    @classmethod
    def translation(cls, a: complex) -> "MobiusTransform":
        """The hyperbolic translation carrying 0 to a along a diameter."""
        return cls(np.array([[1, a], [np.conj(a), 1]]))

    @classmethod
    def conjugation(cls) -> "MobiusTransform":
        return cls(np.eye(2), anti=True)

    @classmethod
    def from_triples(cls, src, dst, anti: bool = False) -> "MobiusTransform":
        """The (anti-)Mobius map sending three points src to dst."""
        def to_standard(p):
            z1, z2, z3 = p
            return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]])
        s = [np.conj(z) for z in src] if anti else list(src)
        m = np.linalg.inv(to_standard(dst)) @ to_standard(s)
        return cls(m, anti)

    def trace_abs(self) -> float:
        return float(abs(self.mat[0, 0] + self.mat[1, 1]))

    def kind(self) -> str:
        if self.anti:
            return "reflection"
        t = self.trace_abs()
        if t > 2 + 1e-9:
            return "translation"
        if t < 2 - 1e-9:
            return "rotation"
        return "parabolic"

    def translation_length(self) -> float:
        """Displacement along the axis of a hyperbolic translation."""
        return float(2 * np.arccosh(self.trace_abs() / 2))

    def preserves_disk(self, tol: float = 1e-9) -> bool:
        (a, b), (c, d) = self.mat
        # disk automorphisms are multiples of [[u, v], [conj v, conj u]]
        scale = a / np.conj(d) if abs(d) > 0 else 1
        return abs(abs(scale) - 1) < tol and abs(b - scale * np.conj(c)) < tol * (1 + abs(b))

    def to_json(self) -> dict:
        return {
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.mat],
            "anti": self.anti,
        }


@dataclass(frozen=True)
class Geodesic:
    """Geodesic through two disk points: an orthogonal circle or a diameter."""

    p: complex
    q: complex
    center: Optional[complex]
    radius: float

    @classmethod
    def through(cls, p, q) -> "Geodesic":
        p, q = complex(_z(p)), complex(_z(q))
        # centre c satisfies 2 Re(c conj(z)) = |z|^2 + 1 for z = p, q
        A = np.array([[p.real, p.imag], [q.real, q.imag]]) * 2
        rhs = np.array([abs(p) ** 2 + 1, abs(q) ** 2 + 1])
        det = np.linalg.det(A)
        if abs(det) < 1e-12 * (1 + abs(p) + abs(q)):
            return cls(p, q, None, np.inf)
        cx, cy = np.linalg.solve(A, rhs)
        c = complex(cx, cy)
        return cls(p, q, c, float(np.sqrt(abs(c) ** 2 - 1)))

    def reflection(self) -> MobiusTransform:
        if self.center is None:
            d = self.q - self.p if abs(self.q) > abs(self.p) else self.p - self.q
            u = d / abs(d) if abs(d) > 0 else 1.0
            # z -> u^2 conj(z)
            return MobiusTransform(np.array([[u, 0], [0, np.conj(u)]]), anti=True)
        c = self.center
        return MobiusTransform(np.array([[c, -1], [1, -np.conj(c)]]), anti=True)

    def reflect(self, z):
        return self.reflection()(z)

    def distance_to(self, z):
        """Hyperbolic distance from z to the full geodesic."""
        z = complex(_z(z))
        # move p to the origin so the geodesic becomes a diameter
        T = MobiusTransform(np.array([[1, -self.p], [-np.conj(self.p), 1]]))
        qq, zz = T(self.q), T(z)
        u = qq / abs(qq)
        w = zz / u
        return float(np.arcsinh(2 * abs(w.imag) / (1 - abs(w) ** 2)))

    def svg_path_to(self, scale: float, origin: float) -> str:
        def pt(z):
            return f"{origin + scale * z.real:.6f} {origin - scale * z.imag:.6f}"
        if self.center is None:
            return f"L {pt(self.q)}"
        a = self.p - self.center
        b = self.q - self.center
        ccw = (a.real * b.imag - a.imag * b.real) > 0
        r = scale * self.radius
        return f"A {r:.6f} {r:.6f} 0 0 {1 if ccw else 0} {pt(self.q)}"


def reflect_across(g: Geodesic, p):
    """Mirror image of p in the geodesic g."""
    out = g.reflect(_z(p))
    return DiskPoint(out) if isinstance(p, DiskPoint) else out


def angle_at(v, a, b) -> float:
    """Angle at v between the geodesics toward a and toward b."""
    T = MobiusTransform(np.array([[1, -v], [-np.conj(v), 1]]))
    da, db = T(a), T(b)
    ang = abs(np.angle(db / da))
    return float(ang)


# ---------------------------------------------------------------- tracts

SIDES = {"short": ("pi2", "pi4"), "long": ("pi2", "pi5"), "hyp": ("pi4", "pi5")}


@dataclass(frozen=True)
class TractH:
    """A (2,4,5) triangle given by its pi/2, pi/4 and pi/5 corners."""

    pi2: complex
    pi4: complex
    pi5: complex

    @property
    def vertices(self) -> tuple[complex, complex, complex]:
        return self.pi2, self.pi4, self.pi5

    def corner(self, name: str) -> complex:
        return getattr(self, name)

    @property
    def chirality(self) -> str:
        """L when the turn from the long leg onto the short leg is to the left."""
        d1 = self.pi2 - self.pi5
        d2 = self.pi4 - self.pi2
        turn = d1.real * d2.imag - d1.imag * d2.real
        return "L" if turn > 0 else "R"

    def side(self, name: str) -> Geodesic:
        a, b = SIDES[name]
        return Geodesic.through(self.corner(a), self.corner(b))

    def angles(self) -> dict[str, float]:
        return {
            "pi2": angle_at(self.pi2, self.pi4, self.pi5),
            "pi4": angle_at(self.pi4, self.pi2, self.pi5),
            "pi5": angle_at(self.pi5, self.pi2, self.pi4),
        }

    def side_lengths(self) -> dict[str, float]:
        return {name: float(h_distance(self.corner(a), self.corner(b))) for name, (a, b) in SIDES.items()}

    def transform(self, T: MobiusTransform) -> "TractH":
        return TractH(complex(T(self.pi2)), complex(T(self.pi4)), complex(T(self.pi5)))

    def reflect(self, side: str) -> "TractH":
        return self.transform(self.side(side).reflection())

    def klein_centroid(self) -> complex:
        return complex(np.mean([to_klein(v) for v in self.vertices]))

    def contains(self, z, tol: float = 1e-12) -> bool:
        """Point-in-triangle test, done with straight sides in the Klein model."""
        k = to_klein(complex(_z(z)))
        vs = [to_klein(v) for v in self.vertices]
        signs = []
        for i in range(3):
            a, b = vs[i], vs[(i + 1) % 3]
            d, e = b - a, k - a
            signs.append(d.real * e.imag - d.imag * e.real)
        return all(s >= -tol for s in signs) or all(s <= tol for s in signs)


def hypotenuse_half_chord() -> float:
    """Euclidean distance from the origin to each end of a centred hypotenuse."""
    return float(np.tanh(HYPOTENUSE / 4))


def build_tract(chirality: str = "L", placement: Optional[MobiusTransform] = None) -> TractH:
    """Canonical tract: hypotenuse on the real axis centred at 0, pi/5 corner at +h.

    The L tract has its right-angle corner in the upper half plane; the R
    tract is its mirror image in the real axis.
    """
    h = hypotenuse_half_chord()
    # move the pi/5 corner to 0, where its long leg leaves at angle pi - pi/5
    to_origin = MobiusTransform(np.array([[1, -h], [-h, 1]]))
    back = to_origin.inverse()
    r = np.tanh(LONG_LEG / 2)
    pi2 = complex(back(r * np.exp(1j * (np.pi - np.pi / 5))))
    t = TractH(pi2, complex(-h), complex(h))
    if chirality.upper() == "R":
        t = t.transform(MobiusTransform.conjugation())
    elif chirality.upper() != "L":
        raise ValueError(f"chirality must be L or R, got {chirality!r}")
    return t.transform(placement) if placement is not None else t


# ---------------------------------------------------------------- loop lengths

def altitude_length() -> float:
    """Distance from the right-angle corner to the hypotenuse line."""
    t = build_tract()
    return t.side("hyp").distance_to(t.pi2)


def saccheri_summit() -> float:
    """Distance between right-angle corners two apart around a decatract.

    Around a pi/5 corner at the origin those corners sit at hyperbolic
    distance LONG_LEG, spaced 2 pi/5 apart in angle.
    """
    r = np.tanh(LONG_LEG / 2)
    return float(h_distance(r, r * np.exp(4j * np.pi / 5)))


def loop_lengths() -> dict[str, float]:
    return {
        "short_leg_loop": 12 * SHORT_LEG,
        "altitude_loop": 12 * altitude_length(),
        "saccheri_summit_loop": 4 * saccheri_summit(),
        "hypot_long_leg_loop": 8 * (HYPOTENUSE + LONG_LEG),
    }


# ---------------------------------------------------------------- tiling

# which swap of the pentagons fixes each side of the fundamental tract
SIDE_ISOMETRY = {
    "short": Isometry.swap((1, 2)),
    "long": Isometry.swap((1, 2), (3, 5), reflect=True),
    "hyp": Isometry.swap((1, 5), (2, 4), reflect=True),
}

PRECINCT_SIDE = 2 * (HYPOTENUSE + LONG_LEG)
PRECINCT_DIAGONAL = float(2 * np.arccosh(1 / np.tan(np.pi / 10)))


def icosagon_vertices() -> np.ndarray:
    """The 20 corners, alternating side corners (angle k pi/5) and far corners."""
    out = []
    for k in range(10):
        out.append(np.tanh(PRECINCT_SIDE / 2) * np.exp(1j * k * np.pi / 5))
        out.append(np.tanh(PRECINCT_DIAGONAL / 2) * np.exp(1j * (2 * k + 1) * np.pi / 10))
    return np.array(out)


def _in_klein_polygon(k: complex, poly: np.ndarray, tol: float = 1e-12) -> bool:
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        d, e = b - a, k - a
        if d.real * e.imag - d.imag * e.real < -tol:
            return False
    return True


def seed_tract() -> TractH:
    """Fundamental tract with its pi/5 corner at the icosagon centre.

    Hypotenuse along angle 0 and long leg along angle -pi/5.
    """
    h = hypotenuse_half_chord()
    T = MobiusTransform.rotation(np.pi) @ MobiusTransform(np.array([[1, -h], [-h, 1]]))
    return build_tract("L").transform(T)


@dataclass
class EdgePairing:
    source: int
    target: int
    transform: MobiusTransform

    def to_json(self) -> dict:
        return {"edge": self.source, "paired_with": self.target, **self.transform.to_json(),
                "translation_length": self.transform.translation_length()}


@dataclass
class Tiling:
    tracts: list[TractH]
    labels: list[Isometry]
    adjacency: list[tuple[int, int, str]]
    precincts: list[list[int]]
    edge_pairings: list[EdgePairing]
    euler: dict = field(default_factory=dict)

    def tract_index(self, z) -> Optional[int]:
        for i, t in enumerate(self.tracts):
            if t.contains(z):
                return i
        return None

    def vertex_pentagons(self) -> dict[str, list[Pentagon]]:
        """Pentagons at the three corners of every tract."""
        base = fundamental_vertex_pentagons()
        return {name: [apply_isometry(g, base[name]) for g in self.labels] for name in base}

    def to_json(self) -> dict:
        def c(z):
            return [float(z.real), float(z.imag)]
        return {
            "schema": "pentamap/1",
            "tracts": [
                {"pi2": c(t.pi2), "pi4": c(t.pi4), "pi5": c(t.pi5), "chirality": t.chirality,
                 "label": g.to_json()}
                for t, g in zip(self.tracts, self.labels)
            ],
            "precincts": self.precincts,
            "pairings": [p.to_json() for p in self.edge_pairings],
            "euler": self.euler,
        }

    def to_svg(self, size: int = 1000) -> str:
        half = size / 2
        scale = half * 0.98
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
            f'<circle cx="{half}" cy="{half}" r="{scale}" fill="none" stroke="black" stroke-width="1"/>',
        ]
        shades = ["#f4d6d6", "#d6e8f4", "#e3f4d6", "#f4ecd6", "#e6d6f4"]
        for i, t in enumerate(self.tracts):
            fill = shades[self._precinct_of(i) % len(shades)] if t.chirality == "R" else "#ffffff"
            d = [f"M {half + scale * t.pi2.real:.6f} {half - scale * t.pi2.imag:.6f}"]
            for a, b in ((t.pi2, t.pi4), (t.pi4, t.pi5), (t.pi5, t.pi2)):
                d.append(Geodesic.through(a, b).svg_path_to(scale, half))
            parts.append(f'<path d="{" ".join(d)} Z" fill="{fill}" stroke="#555" stroke-width="0.5"/>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def _precinct_of(self, i: int) -> int:
        for k, members in enumerate(self.precincts):
            if i in members:
                return k
        return -1


def fundamental_vertex_pentagons() -> dict[str, Pentagon]:
    """Corner pentagons of the fundamental tract, read off the angle chart."""
    corners = {"pi2": (0.0, np.pi / 3), "pi4": (0.0, 0.0), "pi5": (2 * np.pi / 5, 2 * np.pi / 5)}
    return {name: Pentagon(raw_phases(xi, eta, -1)) for name, (xi, eta) in corners.items()}


def pentagon_key(p: Pentagon, digits: int = 7) -> tuple:
    """Hashable key that identifies pentagons equal up to rotation."""
    th = canonicalize(p.array)
    return tuple(np.round(np.concatenate([np.cos(th), np.sin(th)]), digits) + 0.0)


def vertex_census(tiling: Tiling) -> dict[str, dict[str, int]]:
    """Distinct corner pentagons of the tiling, by corner kind and shape name."""
    from .pentagon import match_shape

    out = {}
    for name, pents in tiling.vertex_pentagons().items():
        seen = {}
        for p in pents:
            seen.setdefault(pentagon_key(p), p)
        counts: dict[str, int] = {}
        for p in seen.values():
            shape = match_shape(p) or "unmatched"
            counts[shape] = counts.get(shape, 0) + 1
        out[name] = dict(sorted(counts.items()))
    return out


def tile_fundamental_icosagon() -> Tiling:
    """Reflect the seed tract across its sides until the icosagon is filled."""
    poly = np.array([to_klein(v) for v in icosagon_vertices()])
    seed = seed_tract()
    tracts = [seed]
    labels = [Isometry()]
    keys = {_position_key(seed): 0}
    adjacency = []
    outside: list[tuple[int, str, TractH, Isometry]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        t, g = tracts[i], labels[i]
        for side in ("short", "long", "hyp"):
            nb = t.reflect(side)
            lab = g @ SIDE_ISOMETRY[side]
            key = _position_key(nb)
            if key in keys:
                j = keys[key]
                if i < j:
                    adjacency.append((i, j, side))
                continue
            if not _in_klein_polygon(nb.klein_centroid(), poly):
                outside.append((i, side, nb, lab))
                continue
            keys[key] = len(tracts)
            tracts.append(nb)
            labels.append(lab)
            adjacency.append((i, len(tracts) - 1, side))
            queue.append(len(tracts) - 1)
    precincts = _precincts(tracts)
    pairings = _edge_pairings(tracts, labels, outside)
    tiling = Tiling(tracts, labels, adjacency, precincts, pairings)
    tiling.euler = euler_characteristics(tiling)
    return tiling


def _position_key(t: TractH) -> tuple:
    k = t.klein_centroid()
    return (round(k.real, 8), round(k.imag, 8))


def _precincts(tracts: list[TractH]) -> list[list[int]]:
    """Group tracts by the precinct quadrilateral holding their centroid."""
    verts = icosagon_vertices()
    out = []
    for k in range(10):
        quad = np.array([0, verts[2 * k], verts[2 * k + 1], verts[(2 * k + 2) % 20]])
        kq = to_klein(quad)
        out.append([i for i, t in enumerate(tracts) if _in_klein_polygon(t.klein_centroid(), kq)])
    return out


def _edge_of(z1: complex, z2: complex, verts: np.ndarray, tol: float = 1e-6) -> Optional[int]:
    """Index e of the icosagon edge (verts[e], verts[e+1]) containing both points."""
    kv = to_klein(verts)
    k1, k2 = to_klein(z1), to_klein(z2)
    for e in range(len(verts)):
        a, b = kv[e], kv[(e + 1) % len(verts)]
        d = b - a
        ok = True
        for k in (k1, k2):
            u = k - a
            cross = d.real * u.imag - d.imag * u.real
            t = (u * np.conj(d)).real / abs(d) ** 2
            if abs(cross) > tol or t < -tol or t > 1 + tol:
                ok = False
        if ok:
            return e
    return None


def _edge_pairings(tracts, labels, outside) -> list[EdgePairing]:
    """Pairings from tracts across the boundary that repeat inner labels.

    The tract just outside edge e carries some label that also occurs on an
    inner tract; the isometry moving that inner tract onto the outer one
    glues the icosagon edge it sits on to e.
    """
    verts = icosagon_vertices()
    by_label = {g: i for i, g in enumerate(labels)}
    found: dict[int, EdgePairing] = {}
    for i, side, nb, lab in outside:
        a, b = SIDES[side]
        e = _edge_of(tracts[i].corner(a), tracts[i].corner(b), verts)
        if e is None or e in found:
            continue
        j = by_label.get(lab)
        if j is None:
            continue
        inner = tracts[j]
        T = MobiusTransform.from_triples(inner.vertices, nb.vertices)
        # the inner copy sits on some edge e2, which T carries onto e
        Ti = T.inverse()
        src = _edge_of(complex(Ti(tracts[i].corner(a))), complex(Ti(tracts[i].corner(b))), verts)
        found[e] = EdgePairing(-1 if src is None else src, e, T)
    return [found[e] for e in sorted(found)]


def euler_characteristics(tiling: Tiling) -> dict:
    """V - E + F of the glued icosagon, by precincts and by tracts."""
    verts = icosagon_vertices()
    # precinct level: merge icosagon corners through the pairings
    parent = list(range(20))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def nearest(z):
        d = np.abs(verts - z)
        k = int(np.argmin(d))
        return k if d[k] < 1e-6 else None

    edge_classes = set()
    for p in tiling.edge_pairings:
        for k in (p.source, (p.source + 1) % 20):
            m = nearest(complex(p.transform(verts[k])))
            if m is not None:
                parent[find(k)] = find(m)
        edge_classes.add(frozenset((p.source, p.target)))
    roots = [find(k) for k in range(20)]
    boundary_vertex_classes = len(set(roots))
    orbits = sorted((sorted(k for k in range(20) if roots[k] == r) for r in set(roots)), key=lambda o: (len(o), o))
    V = boundary_vertex_classes + 1  # plus the centre
    E = len(edge_classes) + 10  # glued boundary edges plus the ten spokes
    F = len(tiling.precincts)
    # tract level, combinatorially on the pentagon labels
    pents = tiling.vertex_pentagons()
    tv = sum(len({pentagon_key(p) for p in ps}) for ps in pents.values())
    tract_edges = set()
    for g in tiling.labels:
        for side, r in SIDE_ISOMETRY.items():
            tract_edges.add(frozenset((g, g @ r)))
    te = len(tract_edges)
    tf = len(set(tiling.labels))
    return {
        "precinct": {"V": V, "E": E, "F": F, "chi": V - E + F,
                     "boundary_vertex_classes": boundary_vertex_classes, "orbits": orbits},
        "tract": {"V": tv, "E": te, "F": tf, "chi": tv - te + tf},
    }


def tiling_to_json(tiling: Tiling) -> str:
    return json.dumps(tiling.to_json(), indent=1)
