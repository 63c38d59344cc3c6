"""Stable accumulator vs extended-precision and naive oracles."""

import mpmath
import numpy as np
import pytest

from wsplat.accum import StableAccumulator

mpmath.mp.dps = 80


def mp_quotient(terms, background_rgb=(0.0, 0.0, 0.0), background_w=0.0):
    """Extended-precision reference for the weighted quotient."""
    num = [mpmath.mpf(0)] * 3
    den = mpmath.mpf(0)
    for d, rgb, alpha in terms:
        w = mpmath.e ** mpmath.mpf(-d)
        for c in range(3):
            num[c] += mpmath.mpf(alpha) * mpmath.mpf(rgb[c]) * w
        den += mpmath.mpf(alpha) * w
    total = den + mpmath.mpf(background_w)
    if total == 0:
        return np.array(background_rgb, dtype=np.float64)
    return np.array(
        [float((num[c] + mpmath.mpf(background_rgb[c]) * background_w) / total) for c in range(3)]
    )


def accumulate(terms):
    acc = StableAccumulator()
    for d, rgb, alpha in terms:
        acc.add(d, np.asarray(rgb, dtype=np.float64), alpha)
    return acc


def random_terms(rng, n, lo, hi):
    return [
        (float(rng.uniform(lo, hi)), rng.uniform(0.0, 1.0, size=3), float(rng.uniform(0.05, 2.0)))
        for _ in range(n)
    ]


def test_single_term():
    acc = StableAccumulator().add(5.0, np.array([1.0, 0.0, 0.0]), 2.0)
    assert acc.mu == 5.0
    np.testing.assert_array_equal(acc.num, [2.0, 0.0, 0.0])
    assert acc.den == 2.0
    assert acc.count == 1


def test_equal_exponents_plain_sums():
    acc = accumulate([(3.0, [1.0, 0.0, 1.0], 0.5), (3.0, [0.0, 1.0, 1.0], 0.25)])
    assert acc.mu == 3.0
    np.testing.assert_allclose(acc.num, [0.5, 0.25, 0.75], atol=1e-15)
    assert acc.den == pytest.approx(0.75, abs=1e-15)


def test_extreme_gap_matches_extended_precision():
    terms = [(800.0, [1.0, 0.2, 0.1], 1.0), (0.0, [0.3, 0.6, 0.9], 1.0)]
    got = accumulate(terms).quotient(np.zeros(3), 0.0)
    want = mp_quotient(terms)
    np.testing.assert_allclose(got, want, rtol=1e-6)
    # The naive route underflows: both raw sums are exactly zero.
    naive_den = sum(a * np.exp(-d) for d, _, a in [(t[0], t[1], t[2]) for t in terms][:1])
    assert np.exp(-800.0) == 0.0
    assert naive_den == 0.0


def test_mu_tracks_minimum(rng):
    terms = random_terms(rng, 50, -40.0, 40.0)
    acc = accumulate(terms)
    assert acc.mu == min(t[0] for t in terms)
    assert acc.count == len(terms)


def test_permutation_invariance(rng):
    terms = random_terms(rng, 5000, -200.0, 200.0)
    a = accumulate(terms).quotient(np.array([0.1, 0.2, 0.3]), 0.5)
    shuffled = [terms[i] for i in rng.permutation(len(terms))]
    b = accumulate(shuffled).quotient(np.array([0.1, 0.2, 0.3]), 0.5)
    np.testing.assert_allclose(a, b, rtol=1e-11)


@pytest.mark.parametrize("shift", [-100.0, 0.0, 250.0])
def test_exponent_shift_invariance(shift, rng):
    terms = random_terms(rng, 300, -50.0, 50.0)
    base = accumulate(terms).quotient(np.zeros(3), 0.0)
    shifted = accumulate([(d + shift, rgb, a) for d, rgb, a in terms]).quotient(np.zeros(3), 0.0)
    np.testing.assert_allclose(shifted, base, rtol=1e-10)


def test_matches_naive_for_tame_exponents(rng):
    for trial in range(20):
        terms = random_terms(rng, 64, -30.0, 30.0)
        num = sum(a * np.asarray(rgb) * np.exp(-d) for d, rgb, a in terms)
        den = sum(a * np.exp(-d) for d, _, a in terms)
        got = accumulate(terms).quotient(np.zeros(3), 0.0)
        np.testing.assert_allclose(got, num / den, rtol=1e-6)


def test_quotient_background_only():
    acc = StableAccumulator()
    np.testing.assert_array_equal(acc.quotient(np.array([0.0, 0.0, 0.0]), 1.0), np.zeros(3))
    np.testing.assert_array_equal(acc.quotient(np.array([0.2, 0.4, 0.6]), 1.0), [0.2, 0.4, 0.6])


def test_quotient_dominance_limit():
    acc = StableAccumulator().add(0.0, np.array([1.0, 1.0, 1.0]), 1e12)
    got = acc.quotient(np.array([0.0, 0.0, 0.0]), 1.0)
    np.testing.assert_allclose(got, np.ones(3), atol=1e-10)


def test_background_with_large_positive_mu():
    # All contributions almost vanish; the quotient must fall back toward
    # the background without overflowing the normalization.
    acc = StableAccumulator().add(600.0, np.array([1.0, 0.0, 0.0]), 1.0)
    got = acc.quotient(np.array([0.25, 0.5, 0.75]), 1.0)
    np.testing.assert_allclose(got, [0.25, 0.5, 0.75], atol=1e-12)


def test_background_with_large_negative_mu():
    acc = StableAccumulator().add(-600.0, np.array([1.0, 0.0, 0.0]), 1.0)
    got = acc.quotient(np.array([0.25, 0.5, 0.75]), 1.0)
    np.testing.assert_allclose(got, [1.0, 0.0, 0.0], atol=1e-12)


def test_non_finite_exponent_rejected():
    acc = StableAccumulator()
    with pytest.raises(ValueError):
        acc.add(np.inf, np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        acc.add(np.nan, np.zeros(3), 1.0)
