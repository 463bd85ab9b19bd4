"""Conjugacy-class lattice points and the set machinery behind their growth bounds.

Notation follows the counting argument for a hyperbolic (pseudo-Anosov) class
[phi] with a basepoint X on axis(phi):

* ``Gamma_R(X, Y, phi)`` -- distinct points psi Y, psi in [phi], within R of X;
* ``P+_R`` / ``P-_R`` -- class members whose axis passes within
  (R + A - lam)/2, resp. (R - 2A - lam)/2, of X;
* ``H(Theta)`` -- conjugators f in Omega((R - 2A)/2) with axis(f phi f^-1) = Theta.

All radii here are hyperbolic (curvature -1) unless a ``units`` field says
otherwise.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .geometry import (
    I,
    Point,
    Semicircle,
    Units,
    axis_of,
    convert,
    dist_to_axis,
    distance,
    fixed_points,
    mobius_apply,
    project_to_geodesic,
    sinh_dist_to_axes,
    translation_length,
)
from .group import (
    ArithmeticOverflow,
    GroupElement,
    compose,
    conjugate,
    elements_from_array,
    frobenius_norm_sq,
    inverse,
    iter_norm_ball_blocks,
    norm_ball_array,
    power,
    require_hyperbolic,
    trace,
)
from .orbits import (
    BOUNDARY_TOL,
    _norm_bound,
    displacement_array,
    distinct_image_mask,
    image_distance_array,
    omega_array,
    omega_ball,
)

ON_AXIS_TOL = 1e-9


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class PseudoAnosov:
    element: GroupElement
    axis: Semicircle
    lambda_hyp: float
    primitive: GroupElement

    @classmethod
    def of(cls, phi: GroupElement) -> PseudoAnosov:
        require_hyperbolic(phi)
        return cls(phi, axis_of(phi), translation_length(phi), primitive_root(phi))

    def translation(self, units: Units | str = Units.HYPERBOLIC) -> float:
        return convert(self.lambda_hyp, Units.HYPERBOLIC, units)


@dataclass(frozen=True)
class ConjugacyQuery:
    """Parameters of a Gamma_R(X, Y, phi) count.  R, A, L are in ``units``."""

    phi: PseudoAnosov
    X: Point
    Y: Point
    R: float
    units: Units = Units.HYPERBOLIC
    A: float = 1.75
    L: float | None = None
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.R < 0:
            raise ValueError("R must be nonnegative")
        if not self.A > 0:
            raise ValueError("A must be positive")
        if self.L is not None and not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def R_hyp(self) -> float:
        return convert(self.R, self.units, Units.HYPERBOLIC)

    @property
    def A_hyp(self) -> float:
        return convert(self.A, self.units, Units.HYPERBOLIC)

    @property
    def center(self) -> Point:
        """Projection of X to the axis; X itself when it already lies there."""
        return axis_center(self.phi.element, self.X)

    @property
    def D(self) -> float:
        """Basepoint shift, in hyperbolic units."""
        p = self.center
        return max(distance(self.X, p), distance(p, self.Y))

    def at_radius(self, R: float) -> ConjugacyQuery:
        return ConjugacyQuery(self.phi, self.X, self.Y, R, self.units, self.A, self.L, self.eps)


@dataclass(frozen=True)
class AxisKey:
    """Reduced fixed-point quadratic A0 x^2 + B0 x + C0 of a hyperbolic element."""

    A0: int
    B0: int
    C0: int

    @property
    def discriminant(self) -> int:
        return self.B0 * self.B0 - 4 * self.A0 * self.C0

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.A0, self.B0, self.C0)


@dataclass(frozen=True)
class InjectionResult:
    psi: GroupElement
    f: GroupElement
    k: int
    g: GroupElement
    dist_to_projection: float


@dataclass(frozen=True)
class ThicknessReport:
    preperiod: tuple[int, ...]
    period_quotients: tuple[int, ...]

    @property
    def period(self) -> int:
        return len(self.period_quotients)

    @property
    def max_quotient(self) -> int:
        return max(self.period_quotients)


class ClassBall(frozenset):
    """A set of class members; ``complete`` is False when the search was not certified."""

    def __new__(cls, items: Iterable[GroupElement] = (), complete: bool = True, boundary: int = 0):
        obj = super().__new__(cls, items)
        obj.complete = complete
        obj.boundary = boundary
        return obj


class OffAxisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# primitive root, axis keys, thickness


def _commutes(arr: np.ndarray, phi: GroupElement) -> np.ndarray:
    a, b, c, d = phi.entries
    p, q, r, s = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    # g phi vs phi g; equality up to sign in PSL
    left = np.stack([p * a + q * c, p * b + q * d, r * a + s * c, r * b + s * d], axis=1)
    right = np.stack([a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s], axis=1)
    return (left == right).all(axis=1) | (left == -right).all(axis=1)


def primitive_root(phi: GroupElement) -> GroupElement:
    """Generator of the maximal cyclic group containing phi, oriented so phi is a positive power."""
    require_hyperbolic(phi)
    ball = norm_ball_array(frobenius_norm_sq(phi))
    t = np.abs(ball[:, 0] + ball[:, 3])
    cand = ball[(t > 2) & _commutes(ball, phi)]
    tmin = np.abs(cand[:, 0] + cand[:, 3]).min()
    for row in cand[np.abs(cand[:, 0] + cand[:, 3]) == tmin]:
        rho = GroupElement(*(int(v) for v in row))
        g, k = rho, 1
        while abs(trace(g)) <= abs(trace(phi)):
            if g == phi:
                return rho
            g, k = compose(g, rho), k + 1
    raise AssertionError(f"no positive root found for {phi}")


def axis_key(psi: GroupElement) -> AxisKey:
    require_hyperbolic(psi)
    A0, B0, C0 = psi.c, psi.d - psi.a, -psi.b
    g = math.gcd(math.gcd(A0, B0), C0)
    A0, B0, C0 = A0 // g, B0 // g, C0 // g
    if A0 < 0:
        A0, B0, C0 = -A0, -B0, -C0
    return AxisKey(A0, B0, C0)


def axis_key_array(arr: np.ndarray) -> np.ndarray:
    """Row-wise reduced axis keys; rows must be normalized and hyperbolic (so c > 0)."""
    A0, B0, C0 = arr[:, 2], arr[:, 3] - arr[:, 0], -arr[:, 1]
    g = np.gcd(np.gcd(A0, B0), C0)
    return np.stack([A0 // g, B0 // g, C0 // g], axis=1)


def _cf_floor(P: int, Q: int, D: int, root: int) -> int:
    """floor((P + sqrt(D)) / Q) for non-square D, with root = isqrt(D)."""
    if Q > 0:
        return (P + root) // Q
    return (-P - root - 1) // (-Q)


def thickness_diagnostic(phi: GroupElement) -> ThicknessReport:
    """Periodic continued fraction of the attracting fixed point of phi."""
    require_hyperbolic(phi)
    a, b, c, d = phi.entries
    D = (a + d) ** 2 - 4
    root = math.isqrt(D)
    rep, att = fixed_points(phi)
    # roots are (a - d +- sqrt(D)) / (2c); write the attracting one as (P + sqrt(D)) / Q
    if att >= rep:
        P, Q = a - d, 2 * c
    else:
        P, Q = d - a, -2 * c
    seen: dict[tuple[int, int], int] = {}
    quotients: list[int] = []
    while (P, Q) not in seen:
        seen[(P, Q)] = len(quotients)
        q = _cf_floor(P, Q, D, root)
        quotients.append(q)
        P = q * Q - P
        Q = (D - P * P) // Q
    start = seen[(P, Q)]
    return ThicknessReport(tuple(quotients[:start]), tuple(quotients[start:]))


# ---------------------------------------------------------------------------
# vectorized conjugation


def conjugate_array(G: np.ndarray, phi: GroupElement) -> np.ndarray:
    """Normalized g phi g^-1 for every row g."""
    if G.shape[0] == 0:
        return np.zeros((0, 4), dtype=np.int64)
    big = float(np.abs(G).max())
    if 4.0 * big * big * max(abs(v) for v in phi.entries) >= 2.0**62:
        raise ArithmeticOverflow("conjugation would exceed the 64-bit range")
    a, b, c, d = phi.entries
    p, q, r, s = G[:, 0], G[:, 1], G[:, 2], G[:, 3]
    u, v = p * a + q * c, p * b + q * d
    w, x = r * a + s * c, r * b + s * d
    out = np.stack([u * s - v * r, v * p - u * q, w * s - x * r, x * p - w * q], axis=1)
    flip = (out[:, 2] < 0) | ((out[:, 2] == 0) & (out[:, 0] < 0))
    out[flip] *= -1
    return out


def _unique_rows(psi: np.ndarray, conj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct psi rows (canonical order), each with its lexicographically first conjugator."""
    if psi.shape[0] == 0:
        return psi, conj
    order = np.lexsort((conj[:, 3], conj[:, 2], conj[:, 1], conj[:, 0],
                        psi[:, 3], psi[:, 2], psi[:, 1], psi[:, 0]))
    psi, conj = psi[order], conj[order]
    new = np.ones(psi.shape[0], dtype=bool)
    new[1:] = (psi[1:] != psi[:-1]).any(axis=1)
    return psi[new], conj[new]


@dataclass
class ClassEnumeration:
    """Distinct class members found from conjugators in Omega_radius(center)."""

    phi: GroupElement
    center: Point
    radius: float
    psi: np.ndarray
    conjugators: np.ndarray
    scanned: int = 0

    def __len__(self) -> int:
        return self.psi.shape[0]

    def members(self) -> list[GroupElement]:
        return elements_from_array(self.psi)


def enumerate_class(phi: GroupElement, center: Point, radius: float,
                    keep: Callable[[np.ndarray], np.ndarray] | None = None,
                    parts: int | None = None) -> ClassEnumeration:
    """Scan conjugators g with d(center, g center) <= radius and collect g phi g^-1.

    ``keep`` filters class members block by block, bounding memory for large
    radii.  The result does not depend on ``parts``.
    """
    M = _norm_bound(radius + 2.0 * distance(I, center) + BOUNDARY_TOL)
    if parts is None:
        parts = max(1, int(M // 400_000) + 1)
    psis, conjs, scanned = [], [], 0
    for block in iter_norm_ball_blocks(M, parts):
        disp = displacement_array(block, center)
        G = block[disp <= radius + BOUNDARY_TOL]
        scanned += G.shape[0]
        psi = conjugate_array(G, phi)
        if keep is not None:
            mask = keep(psi)
            psi, G = psi[mask], G[mask]
        psi, G = _unique_rows(psi, G)
        psis.append(psi)
        conjs.append(G)
    psi = np.concatenate(psis) if psis else np.zeros((0, 4), dtype=np.int64)
    conj = np.concatenate(conjs) if conjs else np.zeros((0, 4), dtype=np.int64)
    psi, conj = _unique_rows(psi, conj)
    return ClassEnumeration(phi, center, radius, psi, conj, scanned)


# ---------------------------------------------------------------------------
# search radii


def axis_center(phi: GroupElement, X: Point) -> Point:
    """pi_phi(X), returning X unchanged (and exact) when it is already on the axis."""
    if dist_to_axis(X, phi) <= ON_AXIS_TOL:
        return X
    return project_to_geodesic(X, axis_of(phi))


def exact_conjugator_radius(R: float, lam: float) -> float:
    """Model-exact conjugator radius for class members displacing an axis point by <= R.

    In the half-plane sinh(d/2) = cosh(delta) sinh(lam/2), so d <= R bounds the
    axis distance delta; a conjugator then lies within delta + lam/2.
    """
    ratio = math.sinh(R / 2.0) / math.sinh(lam / 2.0) if R > 0 else 0.0
    return math.acosh(max(1.0, ratio)) + lam / 2.0


def certified_radius(q: ConjugacyQuery) -> float:
    """Conjugator radius around pi_phi(X) that provably catches every member."""
    lam, R2 = q.phi.lambda_hyp, q.R_hyp + 2.0 * q.D
    injection = (R2 + q.A_hyp) / 2.0 + lam
    return max(injection, exact_conjugator_radius(R2, lam))


def naive_certified_radius(q: ConjugacyQuery) -> float:
    """Same guarantee for conjugators measured from X itself."""
    return certified_radius(q) + 2.0 * distance(q.X, q.center)


# ---------------------------------------------------------------------------
# Gamma_R


def _image_filter(X: Point, Y: Point, R: float) -> Callable[[np.ndarray], np.ndarray]:
    def keep(psi: np.ndarray) -> np.ndarray:
        return image_distance_array(psi, X, Y) <= R + BOUNDARY_TOL
    return keep


def class_in_ball(q: ConjugacyQuery, parts: int | None = None) -> ClassEnumeration:
    """Class members psi with d(X, psi Y) <= R, via the certified conjugator scan."""
    return enumerate_class(q.phi.element, q.center, certified_radius(q),
                           keep=_image_filter(q.X, q.Y, q.R_hyp), parts=parts)


def conjugacy_ball(q: ConjugacyQuery) -> ClassBall:
    en = class_in_ball(q)
    d = image_distance_array(en.psi, q.X, q.Y)
    boundary = int(np.count_nonzero(np.abs(d - q.R_hyp) <= BOUNDARY_TOL))
    return ClassBall(en.members(), complete=True, boundary=boundary)


def conjugacy_ball_naive(q: ConjugacyQuery, search_radius: float) -> ClassBall:
    """Brute force: conjugate by every f in Omega_search(X) one element at a time."""
    phi = q.phi.element
    R = q.R_hyp
    found = set()
    boundary = 0
    for f in omega_ball(q.X, search_radius):
        psi = conjugate(f, phi)
        if psi in found:
            continue
        d = distance(q.X, mobius_apply(psi, q.Y))
        if d <= R + BOUNDARY_TOL:
            found.add(psi)
            boundary += abs(d - R) <= BOUNDARY_TOL
    complete = search_radius >= naive_certified_radius(q) - 1e-12
    return ClassBall(found, complete=complete, boundary=boundary)


def gamma_count(q: ConjugacyQuery) -> int:
    """Gamma_R(X, Y, phi): distinct points of [phi] Y in the closed R-ball about X."""
    return gamma_counts(q, [q.R])[0]


def gamma_counts(q: ConjugacyQuery, radii: Sequence[float]) -> list[int]:
    """Gamma for each radius (in q.units), from one enumeration at the largest."""
    return gamma_profile(q, radii)[0]


def gamma_profile(q: ConjugacyQuery, radii: Sequence[float]) -> tuple[list[int], list[int]]:
    """(counts, boundary hits) per radius; a hit is a point within 1e-9 of the sphere."""
    if not len(radii):
        return [], []
    top = q.at_radius(max(radii))
    en = class_in_ball(top)
    mask = distinct_image_mask(en.psi, q.Y, eps=q.eps)
    d = np.sort(image_distance_array(en.psi[mask], q.X, q.Y))
    counts, hits = [], []
    for r in radii:
        rh = convert(r, q.units, Units.HYPERBOLIC)
        counts.append(int(np.searchsorted(d, rh + BOUNDARY_TOL, side="right")))
        hits.append(int(np.count_nonzero(np.abs(d - rh) <= BOUNDARY_TOL)))
    return counts, hits


def class_omega_counts(phi: GroupElement, X: Point, radii: Sequence[float]) -> list[int]:
    """|[phi] cap Omega_R(X)| for each hyperbolic radius R."""
    if not len(radii):
        return []
    pa = PseudoAnosov.of(phi)
    q = ConjugacyQuery(pa, X, X, max(radii))
    en = class_in_ball(q)
    d = np.sort(displacement_array(en.psi, X))
    return [int(np.searchsorted(d, r + BOUNDARY_TOL, side="right")) for r in radii]


# ---------------------------------------------------------------------------
# P+ / P- and the injection


def _require_on_axis(phi: GroupElement, X: Point) -> None:
    if dist_to_axis(X, phi) > ON_AXIS_TOL:
        raise OffAxisError(f"{X} is not on axis({phi})")


def p_threshold_plus(R: float, A: float, lam: float) -> float:
    return (R + A - lam) / 2.0


def p_threshold_minus(R: float, A: float, lam: float) -> float:
    return (R - 2.0 * A - lam) / 2.0


def members_near_axis(phi: GroupElement, X: Point, t: float) -> ClassEnumeration:
    """Class members whose axis comes within t of X (X on axis(phi)).

    Complete: a witness conjugator lies within t + lam/2 of X.
    """
    lam = translation_length(phi)
    if t < -BOUNDARY_TOL:
        empty = np.zeros((0, 4), dtype=np.int64)
        return ClassEnumeration(phi, X, 0.0, empty, empty)
    bound = math.sinh(max(t, 0.0))

    def keep(psi: np.ndarray) -> np.ndarray:
        return sinh_dist_to_axes(psi, X) <= bound + BOUNDARY_TOL * math.cosh(max(t, 0.0))

    return enumerate_class(phi, X, max(t, 0.0) + lam / 2.0, keep=keep)


def p_set_arrays(phi: GroupElement, X: Point, R: float, A: float) -> tuple[np.ndarray, np.ndarray]:
    _require_on_axis(phi, X)
    lam = translation_length(phi)
    plus = members_near_axis(phi, X, p_threshold_plus(R, A, lam))
    sinh_d = sinh_dist_to_axes(plus.psi, X)
    tm = p_threshold_minus(R, A, lam)
    if tm < -BOUNDARY_TOL:
        minus = plus.psi[:0]
    else:
        minus = plus.psi[sinh_d <= math.sinh(max(tm, 0.0)) + BOUNDARY_TOL * math.cosh(max(tm, 0.0))]
    return plus.psi, minus


def p_sets(phi: GroupElement, X: Point, R: float, A: float) -> tuple[frozenset, frozenset]:
    """(P+_R, P-_R) for X on axis(phi); R and A hyperbolic."""
    plus, minus = p_set_arrays(phi, X, R, A)
    return frozenset(elements_from_array(plus)), frozenset(elements_from_array(minus))


def injection_witness(psi: GroupElement, f: GroupElement, phi: GroupElement, X: Point) -> InjectionResult:
    """psi^k f with f X moved along axis(psi) to within lam/2 of pi_psi(X)."""
    if conjugate(f, phi) != psi:
        raise ValueError(f"{f} does not conjugate {phi} to {psi}")
    _require_on_axis(phi, X)
    lam = translation_length(phi)
    target = project_to_geodesic(X, axis_of(psi))
    base = mobius_apply(f, X)
    span = int(math.ceil(distance(base, target) / lam)) + 1
    best = None
    for k in sorted(range(-span, span + 1), key=lambda k: (abs(k), k)):
        g = compose(power(psi, k), f)
        dk = distance(mobius_apply(g, X), target)
        if best is None or dk < best[0] - 1e-9:
            best = (dk, k, g)
    dk, k, g = best
    return InjectionResult(psi, f, k, g, dk)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.detail}


def inclusion_check(phi: GroupElement, X: Point, R: float, A: float) -> Check:
    """P-_R subset [phi] cap Omega(R) subset P+_R, as finite sets."""
    plus, minus = p_set_arrays(phi, X, R, A)
    pa = PseudoAnosov.of(phi)
    ball = class_in_ball(ConjugacyQuery(pa, X, X, R, A=A)).psi
    as_set = lambda arr: set(map(tuple, arr.tolist()))
    P, Mi, B = as_set(plus), as_set(minus), as_set(ball)
    low = sorted(Mi - B)
    high = sorted(B - P)
    witness = [list(w) for w in (low + high)[:5]]
    return Check("inclusions", not low and not high,
                 {"phi": str(phi), "R": R, "A": A, "p_minus": len(Mi), "class_in_ball": len(B),
                  "p_plus": len(P), "violations_low": len(low), "violations_high": len(high),
                  "witnesses": witness})


def injection_check(phi: GroupElement, X: Point, R: float, A: float, shift: int = 0) -> Check:
    """psi -> psi^k f is injective on P+_R with image in Omega((R + A)/2).

    ``shift`` replaces each canonical conjugator f by f phi^shift, which is
    still a conjugator but moves f X along the axis.
    """
    _require_on_axis(phi, X)
    lam = translation_length(phi)
    plus = members_near_axis(phi, X, p_threshold_plus(R, A, lam))
    limit = (R + A) / 2.0
    step = power(phi, shift)
    images: dict[GroupElement, GroupElement] = {}
    collisions, escapes, over_half = [], [], 0
    worst = 0.0
    for row_psi, row_f in zip(plus.psi.tolist(), plus.conjugators.tolist()):
        psi, f = GroupElement(*row_psi), compose(GroupElement(*row_f), step)
        w = injection_witness(psi, f, phi, X)
        if w.dist_to_projection > lam / 2.0 + 1e-9:
            over_half += 1
        dx = distance(X, mobius_apply(w.g, X))
        worst = max(worst, dx - limit)
        if dx > limit + 1e-9:
            escapes.append(str(psi))
        if w.g in images:
            collisions.append((str(images[w.g]), str(psi)))
        images[w.g] = psi
    ok = not collisions and not escapes and over_half == 0
    return Check("injection", ok, {"phi": str(phi), "R": R, "A": A, "p_plus": len(plus),
                                   "collisions": len(collisions), "escapes": len(escapes),
                                   "over_half_lambda": over_half, "max_excess": worst,
                                   "witnesses": (collisions + escapes)[:5]})


def class_sandwich_check(phi: GroupElement, X: Point, radii: Sequence[float], N: int,
                         eps: float | None = None) -> Check:
    """(1/N)|[phi] cap Omega_R(X)| <= Gamma_R(X, X, phi) <= |[phi] cap Omega_R(X)|."""
    pa = PseudoAnosov.of(phi)
    q = ConjugacyQuery(pa, X, X, max(radii), eps=eps)
    en = class_in_ball(q)
    disp = displacement_array(en.psi, X)
    mask = distinct_image_mask(en.psi, X, eps=eps)
    rows, bad = [], []
    for r in radii:
        inside = disp <= r + BOUNDARY_TOL
        n_class = int(np.count_nonzero(inside))
        gamma = int(np.count_nonzero(inside & mask))
        rows.append({"R": r, "class_omega": n_class, "gamma": gamma})
        if not (n_class <= N * gamma and gamma <= n_class):
            bad.append(r)
    return Check("sandwich", not bad, {"phi": str(phi), "N": N, "rows": rows, "violations": bad})


def d_shift_check(phi: GroupElement, X: Point, Y: Point, radii: Sequence[float], eps: float = 1e-9) -> Check:
    """Off-axis counts sit between on-axis counts at R -+ 2D around pi_phi(X)."""
    pa = PseudoAnosov.of(phi)
    q = ConjugacyQuery(pa, X, Y, max(radii), eps=eps)
    P, D = q.center, q.D
    off = gamma_counts(q, radii)
    on_q = ConjugacyQuery(pa, P, P, max(radii) + 2 * D, eps=eps)
    lows = gamma_counts(on_q, [max(r - 2 * D, 0.0) for r in radii])
    highs = gamma_counts(on_q, [r + 2 * D for r in radii])
    rows, bad = [], []
    for r, lo, mid, hi in zip(radii, lows, off, highs):
        rows.append({"R": r, "lower": lo if r - 2 * D >= 0 else 0, "gamma": mid, "upper": hi})
        if (r - 2 * D >= 0 and lo > mid) or mid > hi:
            bad.append(r)
    return Check("d_shift", not bad, {"phi": str(phi), "D": D, "rows": rows, "violations": bad})


# ---------------------------------------------------------------------------
# buckets


def axis_stabilizer_index(phi: GroupElement, X: Point) -> int:
    """[Stab(axis phi) : <phi>] for X on the axis.

    The axis stabilizer is <rho> (rho the primitive root), possibly extended by
    order-2 rotations about points of the axis that swap its endpoints.  Such a
    rotation can be shifted by powers of rho until its center is within
    lam(rho)/4 of X, so a search in Omega_{lam(rho)/2}(X) finds one if any exist.
    """
    _require_on_axis(phi, X)
    rho = primitive_root(phi)
    k = 1
    g = rho
    while g != phi:
        g, k = compose(g, rho), k + 1
    inv = inverse(phi)
    flips = any(conjugate(f, phi) == inv for f in omega_ball(X, translation_length(rho) / 2.0 + 1e-9))
    return k * (2 if flips else 1)


@dataclass
class BucketReport:
    phi: GroupElement
    R: float
    A: float
    L: float
    lam: float
    omega_inner: int           # |Omega((R - 2A - lam)/2)|
    omega_shrunk: int          # |Omega((R - 2A)/2 - L)|
    type_counts: dict          # per-f labels over Omega((R - 2A - lam)/2)
    axes_R: int                # |A_R|
    axes_RL: int               # |A_R^L|
    buckets: dict              # AxisKey tuple -> |H(Theta)| over A_R^L
    type_c_per_axis: dict
    axes_entering: int
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "phi": str(self.phi), "R": self.R, "A": self.A, "L": self.L, "lambda": self.lam,
            "omega_inner": self.omega_inner, "omega_shrunk": self.omega_shrunk,
            "type_counts": self.type_counts, "axes_R": self.axes_R, "axes_RL": self.axes_RL,
            "axes_entering": self.axes_entering,
            "buckets": [{"axis": list(k), "size": v} for k, v in sorted(self.buckets.items())],
            "checks": [c.as_dict() for c in self.checks],
            "passed": self.passed,
        }


def bucket_census(phi: GroupElement, X: Point, R: float, A: float, L: float) -> BucketReport:
    """Buckets H(Theta), the type (a)/(b)/(c) partition and the counting inequalities."""
    _require_on_axis(phi, X)
    lam = translation_length(phi)
    inner = (R - 2.0 * A - lam) / 2.0     # radius of Omega for the partition, also the P- threshold
    outer = (R - 2.0 * A) / 2.0           # radius of Omega for H(Theta)
    small = inner - L
    if not 0 < L < inner:
        raise ValueError(f"need 0 < L < (R - 2A - lam)/2 = {inner:.6g}, got L = {L}")

    om = omega_array(X, outer)
    G = om.elements
    psi = conjugate_array(G, phi)
    keys = axis_key_array(psi)
    sinh_axis = sinh_dist_to_axes(psi, X)
    tol = BOUNDARY_TOL
    key_list = list(map(tuple, keys.tolist()))

    # A_R: axes of P-_R members; witnesses live in Omega(outer) because outer = inner + lam/2
    in_AR = sinh_axis <= math.sinh(inner) + tol * math.cosh(inner)
    far = sinh_axis > math.sinh(small) + tol * math.cosh(small)
    axes_R = {k for k, m in zip(key_list, in_AR) if m}
    axes_RL = {k for k, m, fa in zip(key_list, in_AR, far) if m and fa}
    buckets = Counter(k for k in key_list if k in axes_RL)

    # type labels over Omega(inner)
    in_inner = om.displacement <= inner + tol
    enters = ~far
    near_f = om.displacement <= small + tol
    ta = in_inner & ~enters
    tb = in_inner & enters & near_f
    tc = in_inner & enters & ~near_f
    types = {"a": int(ta.sum()), "b": int(tb.sum()), "c": int(tc.sum())}
    n_inner = int(in_inner.sum())
    n_shrunk = int(np.count_nonzero(om.displacement <= outer - L + tol))
    type_c_axes = Counter(k for k, m in zip(key_list, tc) if m)
    axes_entering = len({k for k, m in zip(key_list, enters) if m})

    bound = 2.0 * (L + A) / lam + 2.0
    index = axis_stabilizer_index(phi, X)
    c_bound = 2.0 * (L + A) / lam
    total_H = sum(buckets.values())
    checks = [
        Check("partition", int(ta.sum() + tb.sum() + tc.sum()) == n_inner
              and not (ta & tb).any() and not (tb & tc).any() and not (ta & tc).any(),
              {"omega_inner": n_inner, **types}),
        Check("bucket_bound", all(v <= bound + 1e-9 for v in buckets.values()),
              {"bound": bound, "max_bucket": max(buckets.values(), default=0),
               "violations": [list(k) for k, v in buckets.items() if v > bound + 1e-9][:5]}),
        Check("bucket_bound_stabilizer", all(v <= index * bound + 1e-9 for v in buckets.values()),
              {"index": index, "bound": index * bound, "max_bucket": max(buckets.values(), default=0)}),
        Check("type_a_in_buckets", all(key_list[j] in axes_RL for j in np.flatnonzero(ta)),
              {"type_a": types["a"]}),
        Check("type_c_sharing", all(v <= c_bound + 1e-9 for v in type_c_axes.values()),
              {"bound": c_bound, "max_shared": max(type_c_axes.values(), default=0)}),
        # lam-spaced points on a segment of length 2(L + A) number at most floor(2(L + A)/lam) + 1,
        # once per coset of <phi> in the axis stabilizer
        Check("type_c_sharing_stabilizer",
              all(v <= index * (math.floor(c_bound + 1e-9) + 1) for v in type_c_axes.values()),
              {"index": index, "bound": index * (math.floor(c_bound + 1e-9) + 1),
               "max_shared": max(type_c_axes.values(), default=0)}),
        Check("entering_axes", axes_entering <= n_shrunk,
              {"axes_entering": axes_entering, "omega_shrunk": n_shrunk}),
        Check("axes_lower_bound", len(axes_RL) >= lam / (2.0 * (L + A + lam)) * total_H - 1e-9,
              {"axes_RL": len(axes_RL), "rhs": lam / (2.0 * (L + A + lam)) * total_H}),
        Check("bucket_sum_lower_bound", total_H >= n_inner - (1.0 + 2.0 * (L + A) / lam) * n_shrunk - 1e-9,
              {"sum_H": total_H, "rhs": n_inner - (1.0 + 2.0 * (L + A) / lam) * n_shrunk}),
    ]
    return BucketReport(phi, R, A, L, lam, n_inner, n_shrunk, types, len(axes_R), len(axes_RL),
                        dict(buckets), dict(type_c_axes), axes_entering, checks)
