"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a ``PASS``/``FAIL`` line; ``conftest.py`` prints them in
the terminal summary.  Run directly with ``python3 tests/test_acceptance.py``
to get the same lines without pytest.
"""
from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

from modgrowth import geometry as geo
from modgrowth.conjugacy import (
    ConjugacyQuery,
    PseudoAnosov,
    class_sandwich_check,
    conjugacy_ball,
    conjugacy_ball_naive,
    gamma_counts,
    inclusion_check,
    injection_check,
    naive_certified_radius,
)
from modgrowth.geometry import I, Point
from modgrowth.group import GroupElement, enumerate_norm_ball, power
from modgrowth.growth import (
    GrowthSeries,
    calibrate_A,
    choose_L,
    coarse_sandwich_check,
    fit_exponent,
    paper_constants,
    running_exponent,
    validate_A,
)
from modgrowth.orbits import census, max_stabilizer_order, omega_counts
from modgrowth.verify import TEST_CLASSES, bucket_suite, identity_checks

RESULTS: list[str] = []

GOLDEN = GroupElement(2, 1, 1, 1)
GAMMA_RADII = tuple(12.0 + 0.5 * k for k in range(17))      # 12 .. 20 hyp
_cache: dict = {}


def record(number: int, title: str, ok: bool, detail: str) -> bool:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")
    return ok


def calibrated_A() -> float:
    if "A" not in _cache:
        _cache["A"] = calibrate_A(10_000, 0)
    return _cache["A"].A_hyp


def gamma_series(phi: GroupElement) -> GrowthSeries:
    key = ("gamma", phi)
    if key not in _cache:
        q = ConjugacyQuery(PseudoAnosov.of(phi), I, I, max(GAMMA_RADII), A=calibrated_A())
        _cache[key] = GrowthSeries(GAMMA_RADII, tuple(gamma_counts(q, GAMMA_RADII)))
    return _cache[key]


# ---------------------------------------------------------------------------


def test_criterion_01_orbit_exponent():
    radii = tuple(8.0 + 0.5 * k for k in range(13))
    t0 = time.perf_counter()
    counts = omega_counts(I, radii)
    fit = fit_exponent(GrowthSeries(radii, tuple(counts)))
    ok = 0.95 <= fit.slope <= 1.05
    assert record(1, "orbit growth exponent in [0.95, 1.05] hyp", ok,
                  f"slope {fit.slope:.4f} hyp ({2 * fit.slope:.4f} teich), |Omega_14| = {counts[-1]}, "
                  f"{time.perf_counter() - t0:.1f}s")


def test_criterion_02_conjugacy_exponent():
    parts, ok = [], True
    for label, phi in (("phi", GOLDEN), ("phi^2", power(GOLDEN, 2))):
        s = gamma_series(phi)
        slope = fit_exponent(s).slope
        run20 = dict(running_exponent(s))[20.0]
        good = 0.40 <= slope <= 0.60 and 0.40 <= run20 <= 0.60
        ok &= good
        parts.append(f"{label}: slope {slope:.4f}, running@20 {run20:.4f}")
    assert record(2, "conjugacy exponent and running exponent in [0.40, 0.60] hyp", ok, "; ".join(parts))


def test_criterion_03_exact_sandwich():
    N = max_stabilizer_order()
    checks = [class_sandwich_check(phi, I, GAMMA_RADII, N) for phi in (GOLDEN, power(GOLDEN, 2))]
    violations = sum(len(c.detail["violations"]) for c in checks)
    ok = violations == 0
    assert record(3, "(1/N)|[phi] cap Omega_R| <= Gamma_R <= |[phi] cap Omega_R|", ok,
                  f"N = {N}, {2 * len(GAMMA_RADII)} radii, {violations} violations")


def test_criterion_04_inclusions():
    A = calibrated_A()
    checks = [inclusion_check(phi, I, R, A) for phi in TEST_CLASSES for R in (6.0, 8.0, 10.0, 12.0)]
    bad = [c for c in checks if not c.passed]
    assert record(4, "P-_R subset [phi] cap Omega(R) subset P+_R", not bad,
                  f"A = {A} hyp, {len(checks)} cases, {len(bad)} violating")


def test_criterion_05_injection():
    A = calibrated_A()
    checks = [injection_check(phi, I, R, A, shift) for phi in TEST_CLASSES
              for R in (2.0, 4.0, 6.0, 8.0, 10.0) for shift in (0, 2)]
    collisions = sum(c.detail["collisions"] for c in checks)
    escapes = sum(c.detail["escapes"] for c in checks)
    ok = all(c.passed for c in checks) and collisions == 0 and escapes == 0
    assert record(5, "psi -> psi^k f injective into Omega((R+A)/2), R <= 10", ok,
                  f"{len(checks)} cases, {collisions} collisions, {escapes} escapes")


def test_criterion_06_buckets():
    # Faithful parameters: R = 12 hyp, calibrated A, L from choose_L (Teichmueller, converted).
    # The precondition L < (R - 2A - lam)/2 fails here, so the suite reports failure;
    # see the decisions ledger for the analysis at feasible radii.
    rep = bucket_suite(GOLDEN, 12.0, calibrated_A())
    failed = [c for c in rep.checks if not c.passed]
    if failed and failed[0].name == "precondition":
        d = failed[0].detail
        detail = (f"L = {d['L']:.2f} hyp not < (R-2A-lam)/2 = {d['limit']:.3f}; "
                  f"smallest feasible R = {d['smallest_feasible_R']:.2f}")
    else:
        detail = ", ".join(f"{c.name}={'ok' if c.passed else 'FAIL'}" for c in rep.checks)
    assert record(6, "|H(Theta)| <= 2(L+A)/lam + 2 and (3.4) at R = 12 hyp", not failed, detail)


def test_criterion_07_identities():
    checks = identity_checks(cases=10_000, seed=0)
    wanted = ("norm_identity", "displacement_identity", "projection_equivariance", "power_law")
    picked = [c for c in checks if c.name in wanted]
    errs = {c.name: c.detail.get("max_error", c.detail.get("max_rel_error")) for c in picked}
    ok = len(picked) == 4 and all(c.passed for c in picked)
    assert record(7, "model identities at 1e-9", ok,
                  ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))


def _brute_norm_ball(M: int) -> list[tuple[int, int, int, int]]:
    m = math.isqrt(M) + (0 if math.isqrt(M) ** 2 == M else 1)
    rng = range(-m, m + 1)
    out = {GroupElement(a, b, c, d).entries for a, b, c, d in itertools.product(rng, rng, rng, rng)
           if a * d - b * c == 1 and a * a + b * b + c * c + d * d <= M}
    return sorted(out)


def test_criterion_08_oracles():
    A = calibrated_A()
    queries = 0
    mismatched = []
    points = ((I, I), (Point(0, 2), Point(0, 2)), (Point(Fraction(1, 3), 1), I))
    for phi in TEST_CLASSES:
        for (X, Y), R in itertools.product(points, (2.0, 4.0, 6.0)):
            q = ConjugacyQuery(PseudoAnosov.of(phi), X, Y, R, A=A)
            naive = conjugacy_ball_naive(q, naive_certified_radius(q))
            queries += 1
            if not naive.complete or set(naive) != set(conjugacy_ball(q)):
                mismatched.append((str(phi), str(X), R))
    ball_bad = [M for M in range(1, 101)
                if [g.entries for g in enumerate_norm_ball(M)] != _brute_norm_ball(M)]
    ok = not mismatched and not ball_bad
    assert record(8, "fast == naive (conjugacy R <= 6, norm ball M <= 100)", ok,
                  f"{queries} conjugacy queries, {len(mismatched)} mismatched; "
                  f"100 norm balls, {len(ball_bad)} mismatched")


def test_criterion_09_calibration_and_coarse_sandwich():
    res = _cache.get("A") or calibrate_A(10_000, 0)
    _cache["A"] = res
    val = validate_A(res.A_hyp, 10_000, seed=1)
    N = max_stabilizer_order()
    s = gamma_series(GOLDEN)
    lam_t = geo.translation_length(GOLDEN, "teich")
    L_t = choose_L(lam_t, res.A_teich, N)
    consts = paper_constants(lam_t, res.A_teich, L_t, N)
    R_min = geo.convert(max(s.radii) / 2.0, "hyp", "teich")
    sw = coarse_sandwich_check(s, consts.G, geo.H_TEICH, 1.5, R_min)
    ok = res.A_hyp <= 3.0 and val["passed"] and sw.passed
    assert record(9, "A <= 3 hyp, validated; coarse sandwich with G from G_L/G_U", ok,
                  f"A = {res.A_hyp} hyp, validation failures {val['contraction_failures']}+"
                  f"{val['distance_failures']}, G = {consts.G:.4g}, sandwich {'ok' if sw.passed else 'violated'}")


def test_criterion_10_genericity():
    t0 = time.perf_counter()
    r4, r10 = census(I, [4.0, 10.0])
    elapsed = time.perf_counter() - t0
    ok = r10.frac_hyp > 0.95 and r10.frac_hyp > r4.frac_hyp and elapsed < 10
    assert record(10, "hyperbolic fraction > 0.95 at r = 10 and above r = 4", ok,
                  f"frac(4) = {r4.frac_hyp:.4f}, frac(10) = {r10.frac_hyp:.4f}, {elapsed:.1f}s")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS))
