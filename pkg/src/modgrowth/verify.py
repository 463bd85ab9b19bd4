"""Verification suites shared by the CLI ``verify`` command and the acceptance tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .conjugacy import (
    Check,
    ConjugacyQuery,
    PseudoAnosov,
    bucket_census,
    class_sandwich_check,
    d_shift_check,
    gamma_counts,
    inclusion_check,
    injection_check,
)
from .geometry import I, Point
from .group import GroupElement, enumerate_norm_ball, frobenius_norm_sq, is_hyperbolic, power
from .growth import GrowthSeries, calibrate_A, choose_L, coarse_sandwich_check, paper_constants
from .orbits import max_stabilizer_order

GOLDEN = GroupElement(2, 1, 1, 1)
TEST_CLASSES = (GroupElement(2, 1, 1, 1), GroupElement(5, 2, 2, 1), GroupElement(5, 3, 3, 2))
SUITES = ("inclusions", "injection", "buckets", "identities", "sandwich")
IDENTITY_TOL = 1e-9

_A_CACHE: dict[tuple[int, int], float] = {}


def default_A(samples: int = 10_000, seed: int = 0) -> float:
    """Calibrated contraction constant in hyperbolic units (memoized per sample/seed)."""
    key = (samples, seed)
    if key not in _A_CACHE:
        _A_CACHE[key] = calibrate_A(samples, seed).A_hyp
    return _A_CACHE[key]


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "params": self.params,
                "checks": [c.as_dict() for c in self.checks]}


# ---------------------------------------------------------------------------
# model identities


def _random_elements(rng: np.random.Generator, pool: list[GroupElement], n: int) -> list[GroupElement]:
    return [pool[j] for j in rng.integers(0, len(pool), size=n)]


def _random_point(rng: np.random.Generator) -> Point:
    return Point(float(rng.uniform(-3, 3)), float(math.exp(rng.uniform(-2, 2))))


def identity_checks(cases: int = 10_000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    ball = enumerate_norm_ball(10_000)
    hyper = [g for g in ball if is_hyperbolic(g)]
    small = [g for g in ball if frobenius_norm_sq(g) <= 200]
    checks = []

    worst = 0.0
    for g in ball:
        gi = geo.mobius_apply(g, I)
        worst = max(worst, abs(math.cosh(geo.distance(I, gi)) - frobenius_norm_sq(g) / 2.0))
    checks.append(Check("norm_identity", worst <= IDENTITY_TOL, {"cases": len(ball), "max_error": worst}))

    worst = 0.0
    for g in _random_elements(rng, small, cases):
        z, w = _random_point(rng), _random_point(rng)
        err = abs(geo.distance(geo.mobius_apply(g, z), geo.mobius_apply(g, w)) - geo.distance(z, w))
        worst = max(worst, err)
    checks.append(Check("isometry_invariance", worst <= IDENTITY_TOL, {"cases": cases, "max_error": worst}))

    # sinh(d(z, phi z)/2) = cosh(dist(z, axis)) sinh(lam/2); compared relative to the right side
    worst = 0.0
    for phi in _random_elements(rng, hyper, cases):
        L = geo.axis_of(phi)
        foot = geo.project_to_geodesic(I, L)
        z = geo.point_at_distance(L, foot, float(rng.uniform(-3, 3)), float(rng.uniform(-4, 4)))
        lhs = math.sinh(geo.distance(z, geo.mobius_apply(phi, z)) / 2.0)
        rhs = math.cosh(geo.dist_to_geodesic(z, L)) * math.sinh(geo.translation_length(phi) / 2.0)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    checks.append(Check("displacement_identity", worst <= IDENTITY_TOL, {"cases": cases, "max_rel_error": worst}))

    worst = 0.0
    for g, phi in zip(_random_elements(rng, small, cases), _random_elements(rng, hyper, cases)):
        z = _random_point(rng)
        L = geo.axis_of(phi)
        gL = geo.geodesic_through(*(_mobius_real(g, e) for e in L.endpoints))
        a = geo.project_to_geodesic(geo.mobius_apply(g, z), gL)
        b = geo.mobius_apply(g, geo.project_to_geodesic(z, L))
        worst = max(worst, geo.distance(a, b))
    checks.append(Check("projection_equivariance", worst <= IDENTITY_TOL, {"cases": cases, "max_error": worst}))

    worst = 0.0
    short = [g for g in hyper if frobenius_norm_sq(g) <= 60]
    count = 0
    for phi in _random_elements(rng, short, cases // 10):
        lam = geo.translation_length(phi)
        for k in range(1, 11):
            worst = max(worst, abs(geo.translation_length(power(phi, k)) - k * lam))
            count += 1
    checks.append(Check("power_law", worst <= IDENTITY_TOL, {"cases": count, "max_error": worst}))

    bad = 0
    for phi in _random_elements(rng, hyper, cases):
        z = _random_point(rng)
        lam = geo.translation_length(phi)
        d = geo.distance(z, geo.mobius_apply(phi, z))
        if d < lam - IDENTITY_TOL * max(1.0, lam):
            bad += 1
    checks.append(Check("minimal_displacement", bad == 0, {"cases": cases, "violations": bad}))
    return checks


def _mobius_real(g: GroupElement, x: float) -> float:
    if math.isinf(x):
        return g.a / g.c if g.c else math.inf
    den = g.c * x + g.d
    return (g.a * x + g.b) / den if den != 0 else math.inf


# ---------------------------------------------------------------------------
# suites


def run_suite(name: str, A: float | None = None, R: float | None = None) -> SuiteReport:
    """Run one verification suite with its default parameters.  A and R are hyperbolic."""
    if name not in SUITES:
        raise KeyError(name)
    A = default_A() if A is None else A
    if name == "identities":
        return SuiteReport(name, identity_checks(), {})
    if name == "inclusions":
        radii = (6.0, 8.0, 10.0, 12.0) if R is None else (R,)
        checks = [inclusion_check(phi, I, r, A) for phi in TEST_CLASSES for r in radii]
        return SuiteReport(name, checks, {"A": A, "radii": list(radii)})
    if name == "injection":
        radii = (4.0, 6.0, 8.0, 10.0) if R is None else (R,)
        checks = [injection_check(phi, I, r, A, shift) for phi in TEST_CLASSES for r in radii
                  for shift in (0, 2)]
        return SuiteReport(name, checks, {"A": A, "radii": list(radii)})
    if name == "buckets":
        R = 12.0 if R is None else R
        return bucket_suite(GOLDEN, R, A)
    return sandwich_suite(A)


def bucket_suite(phi: GroupElement, R: float, A: float) -> SuiteReport:
    lam = geo.translation_length(phi)
    N = max_stabilizer_order()
    L_teich = choose_L(lam / 2.0, A / 2.0, N, geo.H_TEICH)
    L = geo.convert(L_teich, "teich", "hyp")
    params = {"phi": str(phi), "R": R, "A": A, "L": L, "L_teich": L_teich, "lambda": lam}
    inner = (R - 2.0 * A - lam) / 2.0
    if not L < inner:
        return SuiteReport("buckets", [Check("precondition", False, {
            "reason": "L must satisfy L < (R - 2A - lam)/2", "L": L, "limit": inner,
            "smallest_feasible_R": 2.0 * L + 2.0 * A + lam})], params)
    rep = bucket_census(phi, I, R, A, L)
    return SuiteReport("buckets", rep.checks, {**params, "report": rep.as_dict()})


def sandwich_suite(A: float, radii: tuple[float, ...] = tuple(float(r) for r in range(12, 21))) -> SuiteReport:
    N = max_stabilizer_order()
    checks = []
    for phi in (GOLDEN, power(GOLDEN, 2)):
        checks.append(class_sandwich_check(phi, I, radii, N))
        pa = PseudoAnosov.of(phi)
        counts = gamma_counts(ConjugacyQuery(pa, I, I, max(radii), A=A), radii)
        series = GrowthSeries(radii, tuple(counts))
        lam_t = pa.translation("teich")
        A_t = A / 2.0
        L_t = choose_L(lam_t, A_t, N)
        consts = paper_constants(lam_t, A_t, L_t, N)
        rep = coarse_sandwich_check(series, consts.G, geo.H_TEICH, 1.5, geo.convert(max(radii) / 2.0, "hyp", "teich"))
        checks.append(Check("coarse_sandwich", rep.passed, {"phi": str(phi), "G": consts.G,
                                                            "first_violation": rep.first_violation,
                                                            "empirical_M": rep.empirical_M}))
    checks.append(d_shift_check(GOLDEN, Point(1, 2), Point(0, 3), (6.0, 8.0, 10.0)))
    return SuiteReport("sandwich", checks, {"A": A, "radii": list(radii), "N": N})
