"""Upper half-plane geometry standing in for the Teichmueller space of the punctured torus.

Everything is computed in curvature -1 units.  The Teichmueller metric of the
once-punctured torus is half of this one; use :func:`convert` at the edges.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .group import GroupElement, require_hyperbolic

Real = Union[int, float, Fraction]


class Units(enum.Enum):
    HYPERBOLIC = "hyp"
    TEICHMULLER = "teich"

    @classmethod
    def parse(cls, text: str | Units) -> Units:
        if isinstance(text, Units):
            return text
        key = text.strip().lower()
        for u in cls:
            if key in (u.value, u.name.lower()):
                return u
        raise ValueError(f"unknown units {text!r}; expected 'hyp' or 'teich'")


# d_teich = d_hyp / TEICH_FACTOR for the once-punctured torus.
TEICH_FACTOR = 2.0
# Teichmueller dimension 6g + 2n - 6 for (g, n) = (1, 1).
H_TEICH = 2.0


def convert(value: float, src: Units | str, dst: Units | str) -> float:
    src, dst = Units.parse(src), Units.parse(dst)
    if src is dst:
        return value
    if src is Units.HYPERBOLIC:
        return value / TEICH_FACTOR
    return value * TEICH_FACTOR


@dataclass(frozen=True)
class Point:
    """A point x + iy with y > 0.  Coordinates may be exact fractions."""

    x: Real
    y: Real

    def __post_init__(self) -> None:
        if isinstance(self.x, int):
            object.__setattr__(self, "x", Fraction(self.x))
        if isinstance(self.y, int):
            object.__setattr__(self, "y", Fraction(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point coordinates must be finite")
        if not self.y > 0:
            raise ValueError(f"point {self} is not in the upper half-plane")

    @property
    def exact(self) -> bool:
        return isinstance(self.x, Fraction) and isinstance(self.y, Fraction)

    @property
    def complex(self) -> complex:
        return complex(float(self.x), float(self.y))

    @classmethod
    def from_complex(cls, z: complex) -> Point:
        return cls(z.real, z.imag)

    def __str__(self) -> str:
        return f"{self.x}+{self.y}i" if self.exact else f"{float(self.x):.12g}+{float(self.y):.12g}i"


I = Point(0, 1)


@dataclass(frozen=True)
class Vertical:
    """Geodesic with boundary endpoints x0 and infinity."""

    x0: float

    @property
    def endpoints(self) -> tuple[float, float]:
        return (self.x0, math.inf)

    @property
    def coefficients(self) -> tuple[float, float, float]:
        # A|z|^2 + Bx + C = 0
        return (0.0, 1.0, -self.x0)


@dataclass(frozen=True)
class Semicircle:
    center: float
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("semicircle radius must be positive")

    @property
    def endpoints(self) -> tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (1.0, -2.0 * self.center, self.center**2 - self.radius**2)


Geodesic = Union[Vertical, Semicircle]


def geodesic_through(p: float, q: float) -> Geodesic:
    """Canonical geodesic with boundary endpoints p and q (either may be inf)."""
    if p == q:
        raise ValueError("geodesic endpoints must differ")
    if math.isinf(p):
        return Vertical(float(q))
    if math.isinf(q):
        return Vertical(float(p))
    lo, hi = min(p, q), max(p, q)
    return Semicircle((lo + hi) / 2.0, (hi - lo) / 2.0)


def on_geodesic_residual(z: Point, L: Geodesic) -> float:
    """Residual of the canonical-form equation; zero exactly on L."""
    x, y = float(z.x), float(z.y)
    if isinstance(L, Vertical):
        return abs(x - L.x0)
    return abs(math.hypot(x - L.center, y) - L.radius)


def mobius_apply(g: GroupElement, z: Point) -> Point:
    """(az + b)/(cz + d), exact when z has fractional coordinates."""
    a, b, c, d = g.entries
    if z.exact:
        u, v = z.x, z.y
        den = (c * u + d) ** 2 + (c * v) ** 2
        re = ((a * u + b) * (c * u + d) + a * c * v * v) / den
        return Point(re, v / den)
    w = (a * z.complex + b) / (c * z.complex + d)
    return Point(w.real, w.imag)


def distance(z: Point, w: Point) -> float:
    """Hyperbolic distance, via 2 asinh(|z - w| / (2 sqrt(Im z Im w)))."""
    if z.exact and w.exact:
        gap = float((z.x - w.x) ** 2 + (z.y - w.y) ** 2)
        return 2.0 * math.asinh(math.sqrt(gap / float(4 * z.y * w.y)))
    zx, zy, wx, wy = float(z.x), float(z.y), float(w.x), float(w.y)
    return 2.0 * math.asinh(math.hypot(zx - wx, zy - wy) / (2.0 * math.sqrt(zy * wy)))


def axis_coefficients(g: GroupElement) -> tuple[int, int, int]:
    """Unreduced fixed-point quadratic c x^2 + (d - a) x - b."""
    return (g.c, g.d - g.a, -g.b)


def axis_of(phi: GroupElement) -> Semicircle:
    require_hyperbolic(phi)
    a, b, c, d = phi.entries
    # c == 0 would force trace +-2, so the axis is never vertical here.
    t = a + d
    return Semicircle((a - d) / (2.0 * c), math.sqrt(t * t - 4) / (2.0 * abs(c)))


def fixed_points(phi: GroupElement) -> tuple[float, float]:
    """(repelling, attracting) boundary fixed points of a hyperbolic element."""
    require_hyperbolic(phi)
    a, b, c, d = phi.entries
    t = a + d
    root = math.sqrt(t * t - 4)
    p1 = (a - d + root) / (2.0 * c)
    p2 = (a - d - root) / (2.0 * c)
    # derivative of the Mobius map at p is 1/(cp + d)^2; attracting iff < 1
    if abs(c * p1 + d) > 1:
        return (p2, p1)
    return (p1, p2)


def translation_length(phi: GroupElement, units: Units | str = Units.HYPERBOLIC) -> float:
    require_hyperbolic(phi)
    lam = 2.0 * math.acosh(abs(phi.a + phi.d) / 2.0)
    return convert(lam, Units.HYPERBOLIC, units)


def dist_to_geodesic(z: Point, L: Geodesic) -> float:
    A, B, C = L.coefficients
    x, y = float(z.x), float(z.y)
    disc = B * B - 4.0 * A * C
    return math.asinh(abs(A * (x * x + y * y) + B * x + C) / (y * math.sqrt(disc)))


def dist_to_axis(z: Point, phi: GroupElement) -> float:
    """Distance from z to axis(phi), using the integer fixed-point quadratic."""
    require_hyperbolic(phi)
    A, B, C = axis_coefficients(phi)
    t = phi.a + phi.d
    if z.exact:
        num = abs(A * (z.x * z.x + z.y * z.y) + B * z.x + C)
        return math.asinh(float(num / z.y) / math.sqrt(t * t - 4))
    x, y = float(z.x), float(z.y)
    return math.asinh(abs(A * (x * x + y * y) + B * x + C) / (y * math.sqrt(t * t - 4)))


class _RealMobius:
    """Real 2x2 matrix with positive determinant acting on the half-plane."""

    def __init__(self, a: float, b: float, c: float, d: float) -> None:
        det = a * d - b * c
        if det <= 0:
            raise ValueError("real Mobius map must have positive determinant")
        s = math.sqrt(det)
        self.a, self.b, self.c, self.d = a / s, b / s, c / s, d / s

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> _RealMobius:
        return _RealMobius(self.d, -self.b, -self.c, self.a)


def _to_imaginary_axis(L: Semicircle) -> _RealMobius:
    lo, hi = L.endpoints
    # z -> (z - hi)/(z - lo) sends hi -> 0, lo -> inf; det = hi - lo > 0
    return _RealMobius(1.0, -hi, 1.0, -lo)


def project_to_geodesic(z: Point, L: Geodesic) -> Point:
    """Closest point of L to z."""
    if isinstance(L, Vertical):
        x, y = float(z.x), float(z.y)
        return Point(L.x0, math.hypot(x - L.x0, y))
    m = _to_imaginary_axis(L)
    w = m(z.complex)
    p = m.inverse()(complex(0.0, abs(w)))
    return Point(p.real, p.imag)


def projection_span(points: Sequence[Point], L: Geodesic) -> float:
    """Diameter of the projections of ``points`` onto L."""
    if not points:
        raise ValueError("projection_span needs at least one point")
    proj = [project_to_geodesic(p, L) for p in points]
    best = 0.0
    for i in range(len(proj)):
        for j in range(i + 1, len(proj)):
            best = max(best, distance(proj[i], proj[j]))
    return best


def shadow_diameter(center_dist: float, radius: float) -> float:
    """Length of the projection onto a geodesic of a ball disjoint from it.

    A ball of radius ``radius`` whose center sits at distance ``center_dist``
    from the geodesic projects to a segment of half-length s with
    sinh(s) = sinh(radius) / cosh(center_dist).
    """
    if radius < 0:
        return 0.0
    if radius > center_dist:
        raise ValueError("ball meets the geodesic")
    return 2.0 * math.asinh(math.sinh(radius) / math.cosh(center_dist))


def point_at_distance(L: Geodesic, base: Point, along: float, off: float) -> Point:
    """Move ``along`` units along L from ``base`` (on L), then ``off`` units perpendicular.

    Sign of ``off`` picks the side of L.  Used to build test configurations.
    """
    if isinstance(L, Vertical):
        m = _RealMobius(1.0, -L.x0, 0.0, 1.0)
    else:
        m = _to_imaginary_axis(L)
    w = m(base.complex)
    h = abs(w) * math.exp(along)
    # point at distance |off| from the imaginary axis on the circle |z| = h
    theta = math.atan(math.sinh(off))  # angle from vertical
    target = complex(h * math.sin(theta), h * math.cos(theta))
    p = m.inverse()(target)
    return Point(p.real, p.imag)


# ---------------------------------------------------------------------------
# vectorized helpers for element arrays of shape (n, 4)


def cosh_displacement(arr: np.ndarray, z: Point) -> np.ndarray:
    """cosh d(z, g z) for every row g of ``arr``."""
    x, y = float(z.x), float(z.y)
    a, b, c, d = (arr[:, k].astype(np.float64) for k in range(4))
    den = (c * x + d) ** 2 + (c * y) ** 2
    wx = ((a * x + b) * (c * x + d) + a * c * y * y) / den
    wy = y / den
    return 1.0 + ((wx - x) ** 2 + (wy - y) ** 2) / (2.0 * y * wy)


def cosh_distance_images(arr: np.ndarray, z: Point, w: Point) -> np.ndarray:
    """cosh d(z, g w) for every row g of ``arr``."""
    x, y = float(w.x), float(w.y)
    a, b, c, d = (arr[:, k].astype(np.float64) for k in range(4))
    den = (c * x + d) ** 2 + (c * y) ** 2
    wx = ((a * x + b) * (c * x + d) + a * c * y * y) / den
    wy = y / den
    zx, zy = float(z.x), float(z.y)
    return 1.0 + ((wx - zx) ** 2 + (wy - zy) ** 2) / (2.0 * zy * wy)


def sinh_dist_to_axes(arr: np.ndarray, z: Point) -> np.ndarray:
    """sinh of the distance from z to the axis of every (hyperbolic) row."""
    x, y = float(z.x), float(z.y)
    a, b, c, d = (arr[:, k].astype(np.float64) for k in range(4))
    t = a + d
    return np.abs(c * (x * x + y * y) + (d - a) * x - b) / (y * np.sqrt(t * t - 4.0))
