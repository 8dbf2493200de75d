"""Factorization enumeration, objectives, and the optimizer vs. the greedy baseline."""

from fractions import Fraction
from math import prod

import pytest
from hypothesis import given, settings, strategies as st

from procmap.errors import ShapeMismatch
from procmap.factorize import (
    AnisotropicHalo,
    Isotropic,
    WithTranspose,
    amgm_lower_bound,
    balanced_workload_exists,
    count_factorizations,
    enumerate_factorizations,
    greedy_grid,
    prime_factorize,
    score,
    search_optimal,
    workload_vector,
)


def brute_count(d: int, k: int) -> int:
    # naive nested loop over candidate leading factors
    if k == 1:
        return 1
    return sum(brute_count(d // f, k - 1) for f in range(1, d + 1) if d % f == 0)


def test_prime_factorize():
    assert prime_factorize(48) == ((2, 4), (3, 1))
    assert prime_factorize(1) == ()
    assert prime_factorize(72) == ((2, 3), (3, 2))
    assert prime_factorize(97) == ((97, 1),)


def test_enumerate_basic():
    assert enumerate_factorizations(6, 2) == [(1, 6), (2, 3), (3, 2), (6, 1)]
    assert enumerate_factorizations(1, 3) == [(1, 1, 1)]
    assert len(enumerate_factorizations(16, 3)) == 15


def test_count_closed_form():
    assert count_factorizations(16, 3) == 15
    assert count_factorizations(1, 4) == 1
    # C(6,2) * C(3,2) = 15 * 3
    assert count_factorizations(48, 3) == 45


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 400), st.integers(1, 4))
def test_enumeration_matches_count_and_brute_force(d, k):
    fs = enumerate_factorizations(d, k)
    assert len(fs) == count_factorizations(d, k) == brute_count(d, k)
    assert len(set(fs)) == len(fs)
    assert fs == sorted(fs)
    assert all(prod(f) == d for f in fs)


def test_isotropic_score_examples():
    assert score((2, 3), (12, 18)) == Fraction(1, 3)
    assert score((1, 1, 1), (4, 5, 6)) == Fraction(1, 4) + Fraction(1, 5) + Fraction(1, 6)
    assert score((8, 9), (8, 9)) == 2
    assert workload_vector((8, 9), (8, 9)) == (1, 1)


def test_score_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        score((2, 3), (12, 18, 4))
    with pytest.raises(ShapeMismatch):
        score((2, 3), (12, 18), AnisotropicHalo((1,)))
    with pytest.raises(ShapeMismatch):
        score((2, 3), (12, 18), WithTranspose((1, 1), frozenset({5})))


def test_search_optimal_examples():
    best, s = search_optimal(6, (12, 18))
    assert best == (2, 3) and s == Fraction(1, 3)

    best, s = search_optimal(72, (8, 9))
    assert best == (8, 9)
    assert workload_vector(best, (8, 9)) == (1, 1)

    best, s = search_optimal(16, (4, 8, 4))
    assert best == (2, 4, 2)
    assert workload_vector(best, (4, 8, 4)) == (2, 2, 2)


def test_greedy_examples():
    # primes 2, 3: [1,1] -> [2,1] -> [2,3], sorted descending
    assert greedy_grid(6, 2) == (3, 2)
    assert greedy_grid(1, 3) == (1, 1, 1)
    # primes 2,2,2,2 round-robin: [2,1,1] -> [2,2,1] -> [2,2,2] -> [4,2,2]
    assert greedy_grid(16, 3) == (4, 2, 2)


def test_amgm_examples():
    assert amgm_lower_bound(6, (12, 18)) == pytest.approx(1 / 3)
    assert amgm_lower_bound(16, (4, 8, 4)) == pytest.approx(3 / 2)
    # d = 1 leaves a single processor: score is sum of 1/l, above the bound
    _, s = search_optimal(1, (3, 5))
    assert float(s) >= amgm_lower_bound(1, (3, 5)) - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 256), st.lists(st.integers(1, 128), min_size=1, max_size=3))
def test_optimal_at_least_amgm_and_at_most_greedy(d, extents):
    extents = tuple(extents)
    k = len(extents)
    _, s_opt = search_optimal(d, extents)
    assert float(s_opt) >= amgm_lower_bound(d, extents) - 1e-12
    s_greedy = score(greedy_grid(d, k), extents)
    assert s_opt <= s_greedy
    if balanced_workload_exists(d, extents):
        # all-equal workload w: score is exactly k / w, which is the bound
        ws = workload_vector(search_optimal(d, extents)[0], extents)
        assert all(w == ws[0] for w in ws)
        assert s_opt == len(extents) / ws[0]


def test_halo_identity_on_divisible_grid():
    factors, extents, h = (3, 2), (12, 18), (2, 1)
    ws = workload_vector(factors, extents)
    expected = sum(Fraction(h_n) / w for h_n, w in zip(h, ws)) * prod(extents)
    assert score(factors, extents, AnisotropicHalo(h)) == expected


def test_transpose_identity():
    factors, extents = (2, 4, 2), (4, 8, 4)
    ws = workload_vector(factors, extents)
    d_total = prod(factors)
    obj = WithTranspose((0, 0, 0), frozenset({1}))
    v_n = Fraction(factors[1] - 1, factors[1]) * prod(ws)
    assert score(factors, extents, obj) == v_n * d_total == 96


@pytest.mark.filterwarnings("ignore::UserWarning")  # oversized halos warn by design
def test_unit_halo_orders_like_isotropic():
    import random

    rng = random.Random(5)
    cases = [(6, (12, 18)), (48, (30, 20, 12))]
    cases += [
        (rng.randint(2, 96), tuple(rng.randint(2, 64) for _ in range(rng.randint(2, 3))))
        for _ in range(20)
    ]
    for d, extents in cases:
        k = len(extents)
        candidates = enumerate_factorizations(d, k)
        by_iso = sorted(candidates, key=lambda f: (score(f, extents), f))
        by_halo = sorted(
            candidates, key=lambda f: (score(f, extents, AnisotropicHalo((1,) * k)), f)
        )
        assert by_iso == by_halo


def test_halo_width_warning():
    # width 7 exceeds the block workload 12/3 = 4
    with pytest.warns(UserWarning):
        score((3, 2), (12, 18), AnisotropicHalo((7, 1)))


def test_strict_mode_filters_to_divisible():
    best, _ = search_optimal(8, (12, 18), strict=True)
    assert best == (4, 2)
    with pytest.raises(ValueError):
        search_optimal(7, (12, 18), strict=True)


def test_tie_breaking_is_lexicographic():
    # extents (4, 4): factorizations (1, 2) and (2, 1) of 2 tie at 3/4
    best, s = search_optimal(2, (4, 4))
    assert best == (1, 2) and s == Fraction(3, 4)
