import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modgrowth.group import (
    IDENTITY,
    S,
    T,
    ArithmeticOverflow,
    ElementClass,
    GroupElement,
    canonical_sort,
    cached_norm_ball,
    classify,
    compose,
    conjugate,
    enumerate_norm_ball,
    frobenius_norm_sq,
    inverse,
    norm_ball_array,
    normalize,
    power,
    read_norm_ball_cache,
    trace,
    write_norm_ball_cache,
)

PHI = GroupElement(2, 1, 1, 1)


def brute_force_ball(M: int) -> list[tuple[int, int, int, int]]:
    """Entry scan over [-ceil(sqrt M), ceil(sqrt M)]^4, normalized and deduplicated."""
    m = math.isqrt(M) + (0 if math.isqrt(M) ** 2 == M else 1)
    out = set()
    rng = range(-m, m + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if a * d - b * c == 1 and a * a + b * b + c * c + d * d <= M:
            out.add(GroupElement(a, b, c, d).entries)
    return sorted(out)


# --- examples -------------------------------------------------------------

def test_compose_examples():
    assert compose(T, S) == GroupElement(1, -1, 1, 0)
    assert compose(PHI, IDENTITY) == PHI
    assert compose(PHI, PHI) == GroupElement(5, 3, 3, 2)


def test_inverse_examples():
    # (1 -1;-1 2) has c < 0, so its normalized form is (-1 1;1 -2)
    assert inverse(PHI) == GroupElement(-1, 1, 1, -2)
    assert inverse(PHI).entries == (-1, 1, 1, -2)
    assert inverse(IDENTITY) == IDENTITY
    assert inverse(T) == GroupElement(1, -1, 0, 1)


def test_conjugate_examples():
    assert conjugate(IDENTITY, PHI) == PHI
    assert conjugate(T, PHI) == GroupElement(3, -1, 1, 0)
    assert conjugate(S, PHI) == inverse(PHI)


def test_classify_examples():
    assert classify(T) is ElementClass.PARABOLIC
    assert classify(S) is ElementClass.ELLIPTIC
    assert classify(PHI) is ElementClass.HYPERBOLIC
    assert trace(PHI) == 3


def test_normalize_examples():
    assert normalize(-1, -1, 0, -1) == GroupElement(1, 1, 0, 1)
    assert normalize(1, 0, -1, 1).entries == (-1, 0, 1, -1)
    with pytest.raises(ValueError):
        normalize(1, 1, 1, 1)


def test_norm_examples():
    assert frobenius_norm_sq(IDENTITY) == 2
    assert frobenius_norm_sq(T) == 3
    assert frobenius_norm_sq(PHI) == 7


def test_norm_ball_examples():
    assert enumerate_norm_ball(2) == [S, IDENTITY]
    assert len(enumerate_norm_ball(3)) == 10
    assert enumerate_norm_ball(1) == []


def test_overflow_is_detected():
    big = 2**62
    g = GroupElement(1, big, 0, 1)
    with pytest.raises(ArithmeticOverflow):
        compose(g, g)
    with pytest.raises(ArithmeticOverflow):
        GroupElement(1, 2**64, 0, 1)
    with pytest.raises(ArithmeticOverflow):
        power(PHI, 200)


# --- properties -------------------------------------------------------------

def test_normalize_idempotent_random():
    rng = np.random.default_rng(1)
    ball = norm_ball_array(400)
    for a, b, c, d in ball[rng.integers(0, len(ball), size=100_000)].tolist():
        s = -1 if rng.random() < 0.5 else 1
        g = normalize(s * a, s * b, s * c, s * d)
        assert g.a * g.d - g.b * g.c == 1
        assert g.c > 0 or (g.c == 0 and g.a > 0)
        assert normalize(*g.entries) == g


def test_associativity_random():
    rng = np.random.default_rng(2)
    pool = enumerate_norm_ball(200)
    idx = rng.integers(0, len(pool), size=(10_000, 3))
    for i, j, k in idx.tolist():
        f, g, h = pool[i], pool[j], pool[k]
        assert compose(compose(f, g), h) == compose(f, compose(g, h))


elements = st.sampled_from(enumerate_norm_ball(60))


@settings(max_examples=300, deadline=None)
@given(elements, elements)
def test_conjugation_preserves_trace_up_to_sign(f, phi):
    psi = conjugate(f, phi)
    # PSL representatives: the sign rule may flip the trace sign
    assert abs(trace(psi)) == abs(trace(phi))
    assert classify(psi) is classify(phi)


@settings(max_examples=200, deadline=None)
@given(elements)
def test_inverse_property(g):
    assert compose(g, inverse(g)) == IDENTITY
    assert compose(inverse(g), g) == IDENTITY


@settings(max_examples=100, deadline=None)
@given(elements, st.integers(-6, 6), st.integers(-6, 6))
def test_power_law(g, j, k):
    assert compose(power(g, j), power(g, k)) == power(g, j + k)


def test_norm_ball_matches_brute_force():
    for M in range(1, 101):
        fast = [g.entries for g in enumerate_norm_ball(M)]
        assert fast == brute_force_ball(M), M


def test_norm_ball_worker_invariance():
    M = 20_000
    serial = norm_ball_array(M)
    for workers in (2, 3):
        assert np.array_equal(norm_ball_array(M, workers=workers), serial)
    assert np.array_equal(norm_ball_array(M, chunks=7), serial)
    assert np.array_equal(canonical_sort(serial[::-1].copy()), serial)


def test_cache_round_trip(tmp_path):
    arr = norm_ball_array(500)
    path = tmp_path / "ball.txt"
    write_norm_ball_cache(path, 500, arr)
    first = path.read_text().splitlines()[0]
    assert first == "# norm_ball M=500 version=1"
    M, back = read_norm_ball_cache(path)
    assert M == 500 and np.array_equal(back, arr)
    assert np.array_equal(cached_norm_ball(500, tmp_path), arr)
    assert np.array_equal(cached_norm_ball(500, tmp_path), arr)


def test_word_is_informational():
    g = GroupElement(1, 1, 0, 1, word=("T",))
    assert g == T and hash(g) == hash(T)
    assert compose(g, GroupElement(0, -1, 1, 0, word=("S",))).word == ("T", "S")
