"""Growth exponents, the explicit constants of the conjugacy bound, and calibration of A."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import H_TEICH, Units, convert, shadow_diameter
from .group import norm_ball_array

L_GRID = 0.01
A_GRID = 0.05


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class GrowthSeries:
    radii: tuple[float, ...]
    counts: tuple[int, ...]
    units: Units = Units.HYPERBOLIC
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.radii) != len(self.counts):
            raise ValueError("radii and counts differ in length")
        if any(b < a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be ascending")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.counts, self.counts[1:]))

    def in_units(self, units: Units | str) -> GrowthSeries:
        units = Units.parse(units)
        radii = tuple(convert(r, self.units, units) for r in self.radii)
        return GrowthSeries(radii, self.counts, units, self.label)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    window: tuple[float, float]
    residual_rms: float
    points: int
    units: Units = Units.HYPERBOLIC

    def as_dict(self) -> dict:
        d = asdict(self)
        d["units"] = self.units.value
        d["window"] = list(self.window)
        return d


def fit_exponent(s: GrowthSeries, window: tuple[float, float] | None = None) -> FitResult:
    """Least-squares line through (R, ln count) inside ``window``."""
    lo, hi = window if window is not None else (min(s.radii), max(s.radii))
    pts = [(r, c) for r, c in zip(s.radii, s.counts) if lo - 1e-12 <= r <= hi + 1e-12 and c > 0]
    if len(pts) < 3:
        raise InsufficientData(f"need at least 3 positive counts in [{lo}, {hi}], got {len(pts)}")
    R = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.log(np.array([p[1] for p in pts], dtype=np.float64))
    design = np.stack([R, np.ones_like(R)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    rms = float(np.sqrt(np.mean((design @ np.array([slope, intercept]) - y) ** 2)))
    return FitResult(float(slope), float(intercept), (float(R[0]), float(R[-1])), rms, len(pts), s.units)


def running_exponent(s: GrowthSeries) -> list[tuple[float, float]]:
    """(R, ln(count)/R) for every R > 0 with a positive count; zero counts are skipped."""
    return [(r, math.log(c) / r) for r, c in zip(s.radii, s.counts) if c > 0 and r > 0]


def skipped_points(s: GrowthSeries) -> list[float]:
    return [r for r, c in zip(s.radii, s.counts) if c <= 0 or r <= 0]


# ---------------------------------------------------------------------------
# constants


def l_inequality(L: float, lam: float, A: float, N: int, h: float) -> bool:
    """e^{hL} > 2 e^{h lam/2} N (1 + 2(L + A)/lam)."""
    return h * L > math.log(2.0 * N * (1.0 + 2.0 * (L + A) / lam)) + h * lam / 2.0


def choose_L(lam: float, A: float, N: int, h: float = H_TEICH, step: float = L_GRID) -> float:
    """Smallest L on the ``step`` grid satisfying the bucket-width inequality strictly."""
    if min(lam, A, N, h) <= 0:
        raise ValueError("choose_L needs positive inputs")
    k = 1
    while not l_inequality(k * step, lam, A, N, h):
        k += 1
    L = round(k * step, 10)
    assert l_inequality(L, lam, A, N, h)
    return L


@dataclass(frozen=True)
class PaperConstants:
    """Constants of the coarse bound, all in one unit system (Teichmueller by default)."""

    h: float
    N: int
    A: float
    lam: float
    L: float
    G_L: float
    G_U: float
    delta: float = 1.5
    M_delta: float | None = None
    units: Units = Units.TEICHMULLER

    @property
    def G(self) -> float:
        return max(1.0 / self.G_L, self.G_U)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["units"] = self.units.value
        d["G"] = self.G
        return d


def g_upper(N: int, h: float, A: float) -> float:
    return N * math.exp(h * A / 2.0)


def g_lower(lam: float, A: float, L: float, N: int, h: float) -> float:
    return lam / (2.0 * N * (L + A + lam) * math.exp(h * A)) / (2.0 * math.exp(h * (lam / 2.0 + A)))


def paper_constants(lam: float, A: float, L: float, N: int, h: float = H_TEICH,
                    delta: float = 1.5, units: Units = Units.TEICHMULLER) -> PaperConstants:
    if min(lam, A, L, N, h) <= 0:
        raise ValueError("constants need positive inputs")
    return PaperConstants(h, N, A, lam, L, g_lower(lam, A, L, N, h), g_upper(N, h, A), delta, None, units)


@dataclass
class SandwichReport:
    passed: bool
    G: float
    delta: float
    h: float
    R_min: float
    first_violation: float | None
    empirical_M: float | None
    rows: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def coarse_sandwich_check(s: GrowthSeries, G: float, h: float = H_TEICH, delta: float = 1.5,
                          R_min: float = 0.0) -> SandwichReport:
    """(1/(delta G)) e^{(h/2)R} <= count <= delta G e^{(h/2)R} for R >= R_min.

    ``h`` and ``R_min`` are in Teichmueller units; the series is converted.
    ``empirical_M`` is the smallest measured radius from which the sandwich
    holds at every later radius (None if it fails at the last one).
    """
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    t = s.in_units(Units.TEICHMULLER)
    rows, first = [], None
    ok_flags = []
    for R, c in zip(t.radii, t.counts):
        ref = math.exp(h / 2.0 * R)
        lo, hi = ref / (delta * G), delta * G * ref
        ok = lo <= c <= hi
        ok_flags.append(ok)
        rows.append({"R": R, "count": c, "lower": lo, "upper": hi, "ok": ok})
        if R >= R_min - 1e-12 and not ok and first is None:
            first = R
    empirical = None
    for j in range(len(ok_flags) - 1, -1, -1):
        if not ok_flags[j]:
            break
        empirical = t.radii[j]
    return SandwichReport(first is None, G, delta, h, R_min, first, empirical, rows)


# ---------------------------------------------------------------------------
# calibration of the contraction constant


@dataclass
class CalibrationResult:
    A_hyp: float
    A_teich: float
    samples: int
    seed: int
    need_contraction: float     # smallest A on the grid for the projection-diameter statement
    need_distance: float        # smallest A on the grid for the two-sided distance bound
    worst_gap: float            # sup of 2 dist + lam - d over the sample

    def as_dict(self) -> dict:
        return asdict(self)


_SAMPLE_POOL: dict[int, np.ndarray] = {}


def _hyperbolic_pool(max_norm: int) -> np.ndarray:
    if max_norm not in _SAMPLE_POOL:
        ball = norm_ball_array(max_norm)
        t = np.abs(ball[:, 0] + ball[:, 3])
        _SAMPLE_POOL[max_norm] = ball[t > 2]
    return _SAMPLE_POOL[max_norm]


@dataclass
class _Sample:
    lam: np.ndarray
    dist: np.ndarray        # d(X, axis)
    disp: np.ndarray        # d(X, phi X), measured in the half-plane


def draw_configurations(samples: int, seed: int, max_norm: int = 10_000,
                        max_dist: float = 10.0) -> _Sample:
    """Random hyperbolic phi (norm^2 <= max_norm) and points X at distance <= max_dist from its axis.

    d(X, phi X) is measured by applying phi to X, not from a formula.
    """
    rng = np.random.default_rng(seed)
    pool = _hyperbolic_pool(max_norm)
    rows = pool[rng.integers(0, pool.shape[0], size=samples)]
    a, b, c, d = (rows[:, k].astype(np.float64) for k in range(4))
    tr = a + d
    lam = 2.0 * np.arccosh(np.abs(tr) / 2.0)
    center = (a - d) / (2.0 * c)
    radius = np.sqrt(tr * tr - 4.0) / (2.0 * c)
    theta = rng.uniform(0.05, math.pi - 0.05, size=samples)      # foot point on the axis
    dist = rng.uniform(0.0, max_dist, size=samples)
    side = np.where(rng.random(samples) < 0.5, -1.0, 1.0)
    # foot point, then move perpendicular: conjugate to the imaginary axis, where
    # the point at distance dist from the axis at height h is h (sin t + i cos t), tan t = sinh dist
    foot = center + radius * np.exp(1j * theta)
    lo, hi = center - radius, center + radius
    w = (foot - hi) / (foot - lo)
    h = np.abs(w)
    tt = side * np.arctan(np.sinh(dist))
    w2 = h * (np.sin(tt) + 1j * np.cos(tt))
    X = (hi - lo * w2) / (1.0 - w2)
    Xi = (a * X + b) / (c * X + d)
    gap = np.abs(Xi - X)
    disp = 2.0 * np.arcsinh(gap / (2.0 * np.sqrt(X.imag * Xi.imag)))
    return _Sample(lam, dist, disp)


def _contraction_ok(A: float, dist: np.ndarray) -> np.ndarray:
    far = dist > A
    ok = np.ones(dist.shape, dtype=bool)
    rad = dist[far] - A
    diam = 2.0 * np.arcsinh(np.sinh(rad) / np.cosh(dist[far]))
    ok[far] = diam <= A
    return ok


def _distance_ok(A: float, s: _Sample) -> np.ndarray:
    base = 2.0 * s.dist + s.lam
    return (base - A <= s.disp + 1e-12) & (s.disp <= base + 2.0 * A + 1e-12)


def statements_hold(A: float, s: _Sample) -> bool:
    return bool(_contraction_ok(A, s.dist).all() and _distance_ok(A, s).all())


def _min_grid(pred, grid: float) -> float:
    k = 1
    while not pred(k * grid):
        k += 1
    return round(k * grid, 10)


def calibrate_A(samples: int = 10_000, seed: int = 0, grid: float = A_GRID) -> CalibrationResult:
    """Smallest A on the grid for which both contraction statements hold on a random sample."""
    if samples < 1000:
        raise ValueError("calibration needs at least 1000 samples")
    s = draw_configurations(samples, seed)
    need_c = _min_grid(lambda A: bool(_contraction_ok(A, s.dist).all()), grid)
    need_d = _min_grid(lambda A: bool(_distance_ok(A, s).all()), grid)
    A = max(need_c, need_d)
    assert statements_hold(A, s)
    worst = float(np.max(2.0 * s.dist + s.lam - s.disp))
    return CalibrationResult(A, convert(A, Units.HYPERBOLIC, Units.TEICHMULLER), samples, seed,
                             need_c, need_d, worst)


def validate_A(A: float, samples: int, seed: int) -> dict:
    s = draw_configurations(samples, seed)
    c_ok = _contraction_ok(A, s.dist)
    d_ok = _distance_ok(A, s)
    return {"A": A, "samples": samples, "seed": seed,
            "contraction_failures": int((~c_ok).sum()), "distance_failures": int((~d_ok).sum()),
            "passed": bool(c_ok.all() and d_ok.all())}


def shadow_check(A: float, dist: float) -> bool:
    """Single-configuration form of the contraction statement."""
    if dist <= A:
        return True
    return shadow_diameter(dist, dist - A) <= A
