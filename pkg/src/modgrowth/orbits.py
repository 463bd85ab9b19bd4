"""Lattice points of the full group: Omega_r(X), orbit counts, stabilizers, census."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import I, Point, distance, Units, convert
from .group import (
    ArithmeticOverflow,
    GroupElement,
    elements_from_array,
    norm_ball_array,
    norm_sq_array,
)

BOUNDARY_TOL = 1e-9
DEDUP_EPS = 1e-9


class IrrationalPointError(ValueError):
    """Exact orbit deduplication needs rational coordinates."""


@dataclass(frozen=True)
class BallSpec:
    center: Point
    radius: float
    units: Units = Units.HYPERBOLIC

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def radius_hyp(self) -> float:
        return convert(self.radius, self.units, Units.HYPERBOLIC)


@dataclass(frozen=True)
class OmegaResult:
    """Elements moving the center at most ``radius``, with their displacements."""

    center: Point
    radius: float
    elements: np.ndarray
    displacement: np.ndarray
    boundary: int

    def __len__(self) -> int:
        return self.elements.shape[0]

    def within(self, r: float) -> np.ndarray:
        return self.displacement <= r + BOUNDARY_TOL


def _norm_bound(r: float) -> int:
    # +1 guards float rounding; the exact filter below trims the excess.
    try:
        return int(math.floor(2.0 * math.cosh(r))) + 1
    except OverflowError as exc:
        raise ArithmeticOverflow(f"radius {r} needs a norm bound beyond float range") from exc


def displacement_array(arr: np.ndarray, z: Point) -> np.ndarray:
    """d(z, g z) for every row; exact-integer shortcut at z = i."""
    if arr.shape[0] == 0:
        return np.zeros(0)
    if z == I:
        n = norm_sq_array(arr).astype(np.float64)
        return 2.0 * np.arcsinh(np.sqrt(np.maximum(n - 2.0, 0.0) / 4.0))
    return image_distance_array(arr, z, z)


def image_distance_array(arr: np.ndarray, x: Point, y: Point) -> np.ndarray:
    """d(x, g y) for every row g, by the arcsinh form."""
    if arr.shape[0] == 0:
        return np.zeros(0)
    yx, yy = float(y.x), float(y.y)
    a, b, c, d = (arr[:, k].astype(np.float64) for k in range(4))
    den = (c * yx + d) ** 2 + (c * yy) ** 2
    wx = ((a * yx + b) * (c * yx + d) + a * c * yy * yy) / den
    wy = yy / den
    xx, xy = float(x.x), float(x.y)
    gap = np.hypot(wx - xx, wy - xy)
    return 2.0 * np.arcsinh(gap / (2.0 * np.sqrt(xy * wy)))


def omega_array(X: Point, r: float, workers: int = 1, ball: np.ndarray | None = None) -> OmegaResult:
    """Omega_r(X) as an element array, sorted canonically.

    ``ball`` may supply a precomputed norm ball large enough to contain the
    result (norm^2 <= 2 cosh(r + 2 d(i, X))).
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    reach = r + 2.0 * distance(I, X) + BOUNDARY_TOL
    M = _norm_bound(reach)
    if ball is None:
        ball = norm_ball_array(M, workers=workers)
    else:
        ball = ball[norm_sq_array(ball) <= M]
    disp = displacement_array(ball, X)
    keep = disp <= r + BOUNDARY_TOL
    boundary = int(np.count_nonzero(np.abs(disp[keep] - r) <= BOUNDARY_TOL))
    return OmegaResult(X, r, ball[keep], disp[keep], boundary)


def omega_ball(X: Point, r: float, workers: int = 1) -> list[GroupElement]:
    """All g with d(X, gX) <= r (1e-9 boundary tolerance), in canonical order."""
    return elements_from_array(omega_array(X, r, workers=workers).elements)


def omega_counts(X: Point, radii: Sequence[float], workers: int = 1) -> list[int]:
    """|Omega_r(X)| for each radius, from a single enumeration at the largest."""
    if not len(radii):
        return []
    res = omega_array(X, max(radii), workers=workers)
    disp = np.sort(res.displacement)
    return [int(np.searchsorted(disp, r + BOUNDARY_TOL, side="right")) for r in radii]


# ---------------------------------------------------------------------------
# stabilizers and orbit deduplication


def stabilizer_of(X: Point) -> list[GroupElement]:
    return omega_ball(X, 0.0)


def stabilizer_array(X: Point) -> np.ndarray:
    return omega_array(X, 0.0).elements


ORBIFOLD_POINTS = (I, Point(0.5, math.sqrt(3.0) / 2.0))


def max_stabilizer_order() -> int:
    """Largest point stabilizer, scanned at the orbifold points of the modular surface."""
    return max(len(stabilizer_of(p)) for p in ORBIFOLD_POINTS)


def _rational_parts(Y: Point) -> tuple[int, int, int]:
    """(U, V, Den) with Y = U/Den + i V/Den."""
    x, y = Fraction(Y.x), Fraction(Y.y)
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return int(x * den), int(y * den), den


def _exact_image_keys(arr: np.ndarray, Y: Point) -> np.ndarray:
    """Integer keys (Nr, W) identifying g Y exactly; equal keys iff equal points."""
    U, V, Den = _rational_parts(Y)
    # magnitude guard: every intermediate is bounded by entry^2 * (|U| + Den + V)^2
    ent = float(np.abs(arr).max()) if arr.size else 0.0
    scale = (abs(U) + Den + abs(V)) ** 2
    if ent * ent * scale * 4 >= 2.0**62:
        obj = arr.astype(object)
        a, b, c, d = obj[:, 0], obj[:, 1], obj[:, 2], obj[:, 3]
    else:
        a, b, c, d = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    cu = c * U + d * Den
    W = cu * cu + (c * V) * (c * V)
    Nr = (a * U + b * Den) * cu + a * c * V * V
    return np.stack([Nr, W], axis=1)


def _coset_keys(arr: np.ndarray, stab: np.ndarray) -> np.ndarray:
    """Canonical representative of g * Stab for each row g (lexicographic min)."""
    best = None
    for s in stab:
        p, q, r, t = (int(v) for v in s)
        a = arr[:, 0] * p + arr[:, 1] * r
        b = arr[:, 0] * q + arr[:, 1] * t
        c = arr[:, 2] * p + arr[:, 3] * r
        d = arr[:, 2] * q + arr[:, 3] * t
        flip = (c < 0) | ((c == 0) & (a < 0))
        sign = np.where(flip, -1, 1)
        cand = np.stack([a * sign, b * sign, c * sign, d * sign], axis=1)
        if best is None:
            best = cand
        else:
            # keep the lexicographically smaller row
            diff = cand != best
            first = np.argmax(diff, axis=1)
            rows = np.arange(cand.shape[0])
            smaller = diff.any(axis=1) & (cand[rows, first] < best[rows, first])
            best = np.where(smaller[:, None], cand, best)
    return best


def distinct_image_mask(arr: np.ndarray, Y: Point, eps: float | None = None) -> np.ndarray:
    """Mask selecting one row per distinct image point g Y.

    Rational Y is deduplicated by exact rational keys.  Irrational Y requires
    ``eps``; points are then identified through the left cosets of the
    stabilizer of Y, which is detected with tolerance ``eps``.
    """
    n = arr.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    if Y.exact:
        keys = _exact_image_keys(arr, Y)
    elif eps is None:
        raise IrrationalPointError(f"point {Y} is not rational; pass an explicit dedup tolerance")
    else:
        stab = omega_array(Y, 0.0).elements
        stab = stab[image_distance_array(stab, Y, Y) <= eps]
        keys = _coset_keys(arr, stab)
    if keys.dtype == object:
        seen: dict = {}
        mask = np.zeros(n, dtype=bool)
        for idx, key in enumerate(map(tuple, keys.tolist())):
            if key not in seen:
                seen[key] = idx
                mask[idx] = True
        return mask
    _, first = np.unique(keys, axis=0, return_index=True)
    mask = np.zeros(n, dtype=bool)
    mask[first] = True
    return mask


def orbit_point_count(X: Point, Y: Point, r: float, eps: float | None = None) -> int:
    """Number of distinct points g Y with d(X, g Y) <= r."""
    return orbit_point_counts(X, Y, [r], eps=eps)[0]


def orbit_point_counts(X: Point, Y: Point, radii: Sequence[float], eps: float | None = None,
                       workers: int = 1) -> list[int]:
    if not len(radii):
        return []
    if not Y.exact and eps is None:
        raise IrrationalPointError(f"point {Y} is not rational; pass an explicit dedup tolerance")
    rmax = max(radii)
    M = _norm_bound(rmax + distance(I, X) + distance(I, Y) + BOUNDARY_TOL)
    ball = norm_ball_array(M, workers=workers)
    dist = image_distance_array(ball, X, Y)
    keep = dist <= rmax + BOUNDARY_TOL
    ball, dist = ball[keep], dist[keep]
    mask = distinct_image_mask(ball, Y, eps=eps)
    dist = np.sort(dist[mask])
    return [int(np.searchsorted(dist, r + BOUNDARY_TOL, side="right")) for r in radii]


# ---------------------------------------------------------------------------
# census


@dataclass(frozen=True)
class CountRecord:
    radius: float
    omega_count: int
    orbit_count: int
    frac_hyp: float
    frac_par: float
    frac_ell: float
    boundary: int = 0


def class_counts(arr: np.ndarray) -> tuple[int, int, int]:
    """(hyperbolic, parabolic, elliptic) counts of an element array."""
    t = np.abs(arr[:, 0] + arr[:, 3])
    return (int(np.count_nonzero(t > 2)), int(np.count_nonzero(t == 2)), int(np.count_nonzero(t < 2)))


def census(X: Point, radii: Sequence[float], eps: float | None = None, workers: int = 1) -> list[CountRecord]:
    """Per-radius sizes of Omega_r(X), orbit counts, and class fractions."""
    radii = list(radii)
    if not radii:
        return []
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be ascending")
    res = omega_array(X, radii[-1], workers=workers)
    orbit = orbit_point_counts(X, X, radii, eps=eps, workers=workers)
    out = []
    for r, oc in zip(radii, orbit):
        inside = res.within(r)
        sub = res.elements[inside]
        n = sub.shape[0]
        hyp, par, ell = class_counts(sub)
        boundary = int(np.count_nonzero(np.abs(res.displacement[inside] - r) <= BOUNDARY_TOL))
        out.append(CountRecord(r, n, oc, hyp / n, par / n, ell / n, boundary))
    return out


__all__ = [
    "ArithmeticOverflow",
    "BallSpec",
    "CountRecord",
    "IrrationalPointError",
    "OmegaResult",
    "census",
    "class_counts",
    "distinct_image_mask",
    "max_stabilizer_order",
    "omega_array",
    "omega_ball",
    "omega_counts",
    "orbit_point_count",
    "orbit_point_counts",
    "stabilizer_of",
]
