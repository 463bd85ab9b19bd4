"""Exact PSL(2,Z) arithmetic and norm-ball enumeration.

Elements are stored as sign-normalized integer matrices ``(a b; c d)`` with
``c > 0`` or ``c == 0 and a > 0``.  Python integers never wrap, but the
library contract is fixed-width: any entry outside the signed 64-bit range
raises :class:`ArithmeticOverflow` instead of being carried along silently.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

INT64_MAX = 2**63 - 1
# Norm bound for the vectorized enumerator: keeps a*a + b*b + c*c + d*d in int64.
MAX_NORM_BALL = 2**62

CACHE_VERSION = 1


class ArithmeticOverflow(OverflowError):
    """An exact result does not fit the 64-bit representation."""


class NotHyperbolicError(ValueError):
    pass


class ElementClass(enum.Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def _check(*values: int) -> None:
    for v in values:
        if v > INT64_MAX or v < -INT64_MAX:
            raise ArithmeticOverflow(f"integer {v} exceeds the 64-bit bound")


@dataclass(frozen=True, slots=True, order=False)
class GroupElement:
    """A mapping class of the once-punctured torus, as a PSL(2,Z) matrix.

    The constructor applies the sign rule, so ``GroupElement(-1, -1, 0, -1)``
    equals ``GroupElement(1, 1, 0, 1)``.  ``word`` records how the element was
    produced and takes no part in equality.
    """

    a: int
    b: int
    c: int
    d: int
    word: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        a, b, c, d = int(self.a), int(self.b), int(self.c), int(self.d)
        _check(a, b, c, d)
        if a * d - b * c != 1:
            raise ValueError(f"determinant of ({a} {b}; {c} {d}) is {a * d - b * c}, not 1")
        if c < 0 or (c == 0 and a < 0):
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __iter__(self):
        return iter(self.entries)

    def __lt__(self, other: GroupElement) -> bool:
        return self.entries < other.entries

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return compose(self, other)

    def __str__(self) -> str:
        return f"({self.a} {self.b};{self.c} {self.d})"

    def __pow__(self, k: int) -> GroupElement:
        return power(self, k)


IDENTITY = GroupElement(1, 0, 0, 1)
S = GroupElement(0, -1, 1, 0)
T = GroupElement(1, 1, 0, 1)


def normalize(a: int, b: int, c: int, d: int) -> GroupElement:
    """Return the sign-normalized representative; rejects determinant != 1."""
    return GroupElement(a, b, c, d)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    a = g.a * h.a + g.b * h.c
    b = g.a * h.b + g.b * h.d
    c = g.c * h.a + g.d * h.c
    d = g.c * h.b + g.d * h.d
    return GroupElement(a, b, c, d, word=g.word + h.word)


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.d, -g.b, -g.c, g.a)


def conjugate(f: GroupElement, phi: GroupElement) -> GroupElement:
    """Return f phi f^-1."""
    return compose(compose(f, phi), inverse(f))


def power(g: GroupElement, k: int) -> GroupElement:
    if k < 0:
        g, k = inverse(g), -k
    result = IDENTITY
    base = g
    while k:
        if k & 1:
            result = compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def trace(g: GroupElement) -> int:
    """Trace of the normalized representative (sign is fixed by normalization)."""
    return g.a + g.d


def classify(g: GroupElement) -> ElementClass:
    t = abs(trace(g))
    if t < 2:
        return ElementClass.ELLIPTIC
    if t == 2:
        return ElementClass.PARABOLIC
    return ElementClass.HYPERBOLIC


def is_hyperbolic(g: GroupElement) -> bool:
    return abs(trace(g)) > 2


def require_hyperbolic(g: GroupElement) -> None:
    if not is_hyperbolic(g):
        raise NotHyperbolicError(f"{g} is {classify(g).value}, expected hyperbolic")


def frobenius_norm_sq(g: GroupElement) -> int:
    n = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d
    _check(n)
    return n


# ---------------------------------------------------------------------------
# norm-ball enumeration


def _modinv_vec(d: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized inverse of d modulo c for coprime pairs with c >= 1."""
    r0, r1 = c.copy(), np.mod(d, c)
    s0, s1 = np.zeros_like(c), np.ones_like(c)
    active = r1 != 0
    while active.any():
        q = np.zeros_like(c)
        q[active] = r0[active] // r1[active]
        r0, r1 = np.where(active, r1, r0), np.where(active, r0 - q * r1, r1)
        s0, s1 = np.where(active, s1, s0), np.where(active, s0 - q * s1, s1)
        active = r1 != 0
    # r0 == 1 and s0 * d = 1 (mod c); c == 1 gives s0 == 0 which is correct.
    return np.mod(s0, c)


def _bottom_rows(M: int, c_lo: int, c_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Coprime (c, d) with c_lo <= c < c_hi, c >= 1 and c^2 + d^2 <= M - 1."""
    cs = np.arange(max(c_lo, 1), c_hi, dtype=np.int64)
    if cs.size == 0:
        return cs, cs
    cs = cs[cs * cs <= M - 1]
    span = np.array([math.isqrt(M - 1 - c * c) for c in cs.tolist()], dtype=np.int64)
    counts = 2 * span + 1
    c = np.repeat(cs, counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    d = np.arange(c.size, dtype=np.int64) - starts - np.repeat(span, counts)
    coprime = np.gcd(c, d) == 1
    return c[coprime], d[coprime]


def _norm_ball_block(M: int, c_lo: int, c_hi: int) -> np.ndarray:
    """All normalized elements with norm^2 <= M and c in [c_lo, c_hi), unsorted."""
    blocks = []
    if c_lo <= 0 < c_hi and M >= 2:
        bmax = math.isqrt(M - 2)
        b = np.arange(-bmax, bmax + 1, dtype=np.int64)
        one = np.ones_like(b)
        blocks.append(np.stack([one, b, 0 * b, one], axis=1))
    c, d = _bottom_rows(M, c_lo, c_hi)
    if c.size:
        a0 = _modinv_vec(d, c)
        b0 = (a0 * d - 1) // c
        n = c * c + d * d
        q = M - n
        p = (a0 * c + b0 * d).astype(np.float64)
        root = np.sqrt(np.maximum(n.astype(np.float64) * q.astype(np.float64) - 1.0, 0.0))
        nf = n.astype(np.float64)
        k_lo = np.floor((-p - root) / nf).astype(np.int64) - 1
        k_hi = np.ceil((-p + root) / nf).astype(np.int64) + 1
        counts = k_hi - k_lo + 1
        idx = np.repeat(np.arange(c.size), counts)
        k = np.arange(idx.size, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts) + k_lo[idx]
        cc, dd = c[idx], d[idx]
        aa = a0[idx] + k * cc
        bb = b0[idx] + k * dd
        inside = aa * aa + bb * bb + cc * cc + dd * dd <= M
        blocks.append(np.stack([aa[inside], bb[inside], cc[inside], dd[inside]], axis=1))
    if not blocks:
        return np.zeros((0, 4), dtype=np.int64)
    return np.concatenate(blocks, axis=0)


def canonical_sort(arr: np.ndarray) -> np.ndarray:
    """Sort rows of an (n, 4) element array lexicographically by (a, b, c, d)."""
    if arr.shape[0] == 0:
        return arr
    order = np.lexsort((arr[:, 3], arr[:, 2], arr[:, 1], arr[:, 0]))
    return arr[order]


def _partition_c(M: int, parts: int) -> list[tuple[int, int]]:
    cmax = math.isqrt(max(M - 1, 0)) + 1
    if parts <= 1:
        return [(0, cmax)]
    # Pair counts per c shrink like sqrt(M - c^2); split on cumulative weight.
    weights = np.sqrt(np.maximum(M - np.arange(cmax, dtype=np.float64) ** 2, 0.0)) + 1.0
    cum = np.cumsum(weights)
    cuts = [0]
    for j in range(1, parts):
        cuts.append(int(np.searchsorted(cum, cum[-1] * j / parts)))
    cuts.append(cmax)
    cuts = sorted(set(cuts))
    return list(zip(cuts[:-1], cuts[1:]))


def _block_task(args: tuple[int, int, int]) -> np.ndarray:
    return _norm_ball_block(*args)


def norm_ball_array(M: int, workers: int = 1, chunks: int | None = None) -> np.ndarray:
    """Canonically sorted (n, 4) int64 array of all elements with norm^2 <= M.

    The c-range is split into blocks that may run on separate processes; the
    merged output is identical for any ``workers``/``chunks`` choice.
    """
    M = int(M)
    if M > MAX_NORM_BALL:
        raise ArithmeticOverflow(f"norm bound {M} exceeds the 64-bit enumeration limit")
    if M < 2:
        return np.zeros((0, 4), dtype=np.int64)
    parts = chunks if chunks is not None else max(workers, 1)
    ranges = _partition_c(M, parts)
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_block_task, [(M, lo, hi) for lo, hi in ranges]))
    else:
        blocks = [_norm_ball_block(M, lo, hi) for lo, hi in ranges]
    return canonical_sort(np.concatenate(blocks, axis=0))


def iter_norm_ball_blocks(M: int, parts: int) -> Iterable[np.ndarray]:
    """Yield unsorted blocks covering the norm ball; for memory-bounded scans."""
    M = int(M)
    if M > MAX_NORM_BALL:
        raise ArithmeticOverflow(f"norm bound {M} exceeds the 64-bit enumeration limit")
    if M < 2:
        return
    for lo, hi in _partition_c(M, parts):
        yield _norm_ball_block(M, lo, hi)


def elements_from_array(arr: np.ndarray) -> list[GroupElement]:
    return [GroupElement(int(a), int(b), int(c), int(d)) for a, b, c, d in arr.tolist()]


def enumerate_norm_ball(M: int, workers: int = 1) -> list[GroupElement]:
    """All normalized elements with a^2+b^2+c^2+d^2 <= M in (a, b, c, d) order."""
    return elements_from_array(norm_ball_array(M, workers=workers))


def count_norm_ball(M: int, parts: int = 8) -> int:
    return sum(block.shape[0] for block in iter_norm_ball_blocks(M, parts))


def norm_sq_array(arr: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", arr, arr)


# ---------------------------------------------------------------------------
# cache files


def write_norm_ball_cache(path: str | os.PathLike, M: int, elements: np.ndarray | Sequence[GroupElement]) -> None:
    if not isinstance(elements, np.ndarray):
        elements = np.array([g.entries for g in elements], dtype=np.int64).reshape(-1, 4)
    lines = [f"# norm_ball M={M} version={CACHE_VERSION}"]
    lines.extend(f"{a} {b} {c} {d}" for a, b, c, d in elements.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def read_norm_ball_cache(path: str | os.PathLike) -> tuple[int, np.ndarray]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# norm_ball "):
        raise ValueError(f"{path}: missing norm_ball header")
    fields = dict(item.split("=", 1) for item in text[0][len("# norm_ball "):].split())
    if int(fields.get("version", -1)) != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {fields.get('version')}")
    M = int(fields["M"])
    rows = [tuple(int(v) for v in line.split()) for line in text[1:] if line.strip()]
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return M, arr


def cached_norm_ball(M: int, cache_dir: str | os.PathLike | None, workers: int = 1) -> np.ndarray:
    """Norm ball array, read from / written to ``cache_dir`` when given."""
    if cache_dir is None:
        return norm_ball_array(M, workers=workers)
    path = Path(cache_dir) / f"norm_ball_{int(M)}.txt"
    if path.exists():
        cached_M, arr = read_norm_ball_cache(path)
        if cached_M == int(M):
            return arr
    arr = norm_ball_array(M, workers=workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_norm_ball_cache(path, M, arr)
    return arr
