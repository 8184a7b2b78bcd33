"""Exact bivariate polynomials and rational functions with integer coefficients.

Coefficients are Python ints, so arithmetic and differentiation never round.
Evaluation is the only lossy step: it converts the coefficients to floats once
(cached) and runs a Horner scheme that broadcasts over numpy arrays, real or
complex.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PoleHit

MAX_DEGREE = 64
POLE_FLOOR = 1e-300


def _trim(rows: list[list[int]]) -> tuple[tuple[int, ...], ...]:
    while rows and not any(rows[-1]):
        rows.pop()
    if not rows:
        return ((0,),)
    width = max((max((j for j, c in enumerate(r) if c), default=-1) for r in rows)) + 1
    width = max(width, 1)
    return tuple(tuple(r[:width]) + (0,) * (width - len(r[:width])) for r in rows)


class BiPoly:
    """Dense polynomial sum c[i][j] x**i y**j with integer coefficients."""

    __slots__ = ("coeffs", "__dict__")

    def __init__(self, coeffs: Sequence[Sequence[int]]):
        rows = [[int(c) for c in row] for row in coeffs]
        self.coeffs = _trim(rows)
        dx, dy = self.degree
        if dx > MAX_DEGREE or dy > MAX_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds bound {MAX_DEGREE}")

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], int]) -> "BiPoly":
        if not terms:
            return cls([[0]])
        nx = max(i for i, _ in terms) + 1
        ny = max(j for _, j in terms) + 1
        rows = [[0] * ny for _ in range(nx)]
        for (i, j), c in terms.items():
            rows[i][j] += int(c)
        return cls(rows)

    @classmethod
    def const(cls, c: int) -> "BiPoly":
        return cls([[c]])

    @classmethod
    def x(cls) -> "BiPoly":
        return cls([[0], [1]])

    @classmethod
    def y(cls) -> "BiPoly":
        return cls([[0, 1]])

    @property
    def degree(self) -> tuple[int, int]:
        return len(self.coeffs) - 1, len(self.coeffs[0]) - 1

    def terms(self) -> dict[tuple[int, int], int]:
        return {
            (i, j): c
            for i, row in enumerate(self.coeffs)
            for j, c in enumerate(row)
            if c
        }

    def is_zero(self) -> bool:
        return self.coeffs == ((0,),)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"BiPoly({self.terms()})"

    def __add__(self, other: "BiPoly | int") -> "BiPoly":
        other = _as_poly(other)
        t = self.terms()
        for k, c in other.terms().items():
            t[k] = t.get(k, 0) + c
        return BiPoly.from_terms(t)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly([[-c for c in row] for row in self.coeffs])

    def __sub__(self, other: "BiPoly | int") -> "BiPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: int) -> "BiPoly":
        return _as_poly(other) - self

    def __mul__(self, other: "BiPoly | int") -> "BiPoly":
        other = _as_poly(other)
        out: dict[tuple[int, int], int] = {}
        b = other.terms()
        for (i, j), c in self.terms().items():
            for (k, m), d in b.items():
                key = (i + k, j + m)
                out[key] = out.get(key, 0) + c * d
        return BiPoly.from_terms(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BiPoly":
        out = BiPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, var: str) -> "BiPoly":
        if var == "x":
            return BiPoly.from_terms({(i - 1, j): i * c for (i, j), c in self.terms().items() if i})
        if var == "y":
            return BiPoly.from_terms({(i, j - 1): j * c for (i, j), c in self.terms().items() if j})
        raise ValueError(f"unknown variable {var!r}")

    def reciprocal(self, var: str) -> "BiPoly":
        """Coefficients reversed in var: p~ with p(x, 1/s) = s**(-deg) p~(x, s)."""
        if var == "x":
            return BiPoly(self.coeffs[::-1])
        if var == "y":
            return BiPoly([row[::-1] for row in self.coeffs])
        raise ValueError(f"unknown variable {var!r}")

    @cached_property
    def _float_coeffs(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.coeffs])

    def __call__(self, x, y):
        """Horner evaluation; broadcasts over array arguments."""
        a = self._float_coeffs
        x = np.asarray(x)
        y = np.asarray(y)
        acc = None
        for row in a[::-1]:
            inner = row[-1] + 0 * y
            for c in row[-2::-1]:
                inner = inner * y + c
            acc = inner if acc is None else acc * x + inner
        return acc


    def eval_exact(self, x, y) -> Fraction:
        """Exact value at rational (or float, taken exactly) arguments."""
        x = Fraction(x)
        y = Fraction(y)
        acc = Fraction(0)
        for row in self.coeffs[::-1]:
            inner = Fraction(0)
            for c in row[::-1]:
                inner = inner * y + c
            acc = acc * x + inner
        return acc


def _as_poly(p: "BiPoly | int") -> BiPoly:
    return p if isinstance(p, BiPoly) else BiPoly.const(int(p))


class BiRat:
    """Quotient num/den of two BiPoly values; never reduced to lowest terms.

    The denominator is kept as a product of factor powers.  Differentiation
    raises each power by one instead of squaring the whole denominator, and
    evaluation multiplies factor values, which avoids the cancellation an
    expanded high power suffers in floating point.
    """

    __slots__ = ("num", "factors", "__dict__")

    def __init__(self, num: BiPoly | int, den: BiPoly | int = 1, factors=None):
        self.num = _as_poly(num)
        if factors is None:
            den = _as_poly(den)
            factors = () if den == BiPoly.const(1) else ((den, 1),)
        merged: dict[BiPoly, int] = {}
        for f, k in factors:
            if k:
                merged[f] = merged.get(f, 0) + k
        self.factors = tuple(merged.items())
        if any(f.is_zero() for f, _ in self.factors):
            raise ZeroDivisionError("BiRat denominator is identically zero")

    @cached_property
    def den(self) -> BiPoly:
        out = BiPoly.const(1)
        for f, k in self.factors:
            out = out * f**k
        return out

    def __repr__(self) -> str:
        return f"BiRat({self.num!r}, {self.den!r})"

    def __add__(self, other: "BiRat | BiPoly | int") -> "BiRat":
        other = _as_rat(other)
        if self.factors == other.factors:
            return BiRat(self.num + other.num, factors=self.factors)
        return BiRat(self.num * other.den + other.num * self.den,
                     factors=self.factors + other.factors)

    __radd__ = __add__

    def __neg__(self) -> "BiRat":
        return BiRat(-self.num, factors=self.factors)

    def __sub__(self, other: "BiRat | BiPoly | int") -> "BiRat":
        return self + (-_as_rat(other))

    def __mul__(self, other: "BiRat | BiPoly | int") -> "BiRat":
        other = _as_rat(other)
        return BiRat(self.num * other.num, factors=self.factors + other.factors)

    __rmul__ = __mul__

    def partial(self, var: str) -> "BiRat":
        return birat_partial(self, var)

    def reciprocal(self, var: str) -> "BiRat":
        """The same function written in s = 1/var, still with integer coefficients."""
        k = 0 if var == "x" else 1
        shift = sum(p * f.degree[k] for f, p in self.factors) - self.num.degree[k]
        mono = BiPoly.from_terms({(abs(shift), 0) if k == 0 else (0, abs(shift)): 1})
        num = self.num.reciprocal(var)
        factors = tuple((f.reciprocal(var), p) for f, p in self.factors)
        if shift >= 0:
            num = num * mono
        else:
            factors = factors + ((mono, 1),)
        return BiRat(num, factors=factors)

    def den_value(self, x, y):
        out = 1.0
        for f, k in self.factors:
            out = out * f(x, y) ** k
        return out

    def __call__(self, x, y):
        return birat_eval(self, x, y)

    def eval_exact(self, x, y) -> Fraction:
        den = Fraction(1)
        for f, k in self.factors:
            den *= f.eval_exact(x, y) ** k
        if den == 0:
            raise PoleHit(f"denominator vanishes at ({x!r}, {y!r})")
        return self.num.eval_exact(x, y) / den


def _as_rat(f: "BiRat | BiPoly | int") -> BiRat:
    return f if isinstance(f, BiRat) else BiRat(f)


def birat_eval(f: BiRat, x, y):
    """Evaluate num/den; raises PoleHit where |den| falls below 1e-300."""
    den = f.den_value(x, y)
    if np.any(np.abs(den) < POLE_FLOOR):
        raise PoleHit(f"denominator vanishes at ({x!r}, {y!r})")
    return f.num(x, y) / den


def birat_partial(f: BiRat, var: str) -> BiRat:
    """Exact quotient rule.

    With den = prod f_i**p_i and P = prod f_i, the derivative is
    (num' P - num sum_i p_i f_i' P/f_i) / prod f_i**(p_i + 1).
    Factors with zero derivative keep their power.
    """
    dn = f.num.partial(var)
    moving = [(g, p, g.partial(var)) for g, p in f.factors]
    moving = [(g, p, dg) for g, p, dg in moving if not dg.is_zero()]
    if not moving:
        return BiRat(dn, factors=f.factors)
    P = BiPoly.const(1)
    for g, _, _ in moving:
        P = P * g
    total = BiPoly.const(0)
    for i, (g, p, dg) in enumerate(moving):
        rest = BiPoly.const(1)
        for j, (h, _, _) in enumerate(moving):
            if j != i:
                rest = rest * h
        total = total + p * dg * rest
    num = dn * P - f.num * total
    bumped = {g: 1 for g, _, _ in moving}
    factors = tuple((g, p + bumped.get(g, 0)) for g, p in f.factors)
    return BiRat(num, factors=factors)


class MPoly:
    """Sparse integer polynomial in any number of variables.

    Used for the trivariate pentagon relations, which BiPoly cannot hold.
    """

    def __init__(self, terms: Mapping[tuple[int, ...], int]):
        self.terms = {tuple(k): int(c) for k, c in terms.items() if c}
        arities = {len(k) for k in self.terms}
        if len(arities) > 1:
            raise ValueError("mixed monomial arities")
        self.nvars = arities.pop() if arities else 0

    def __call__(self, *args):
        vals = [np.asarray(a) for a in args]
        out = 0.0
        for exps, c in self.terms.items():
            term = float(c)
            for v, e in zip(vals, exps):
                if e:
                    term = term * v**e
            out = out + term
        return out


def poly_from_monomials(monomials: Iterable[tuple[int, int, int]]) -> BiPoly:
    """Build a BiPoly from (coefficient, x-degree, y-degree) triples."""
    terms: dict[tuple[int, int], int] = {}
    for c, i, j in monomials:
        terms[(i, j)] = terms.get((i, j), 0) + c
    return BiPoly.from_terms(terms)
