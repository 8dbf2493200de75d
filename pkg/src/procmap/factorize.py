"""Grid factorization search for the decompose primitive.

Splitting a processor count d across the k dimensions of an iteration space
of extents (l_1, ..., l_k) means choosing positive factors (d_1, ..., d_k)
with product d.  Candidates are scored by a communication objective and the
search enumerates every factorization exactly once, via stars-and-bars over
the prime factorization of d.

All objective values are exact rationals: published comparisons hinge on
fractions like 1/3 vs 13/36, and floating point could mis-order near-ties.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod


def prime_factorize(d: int) -> tuple[tuple[int, int], ...]:
    """Prime powers of d as ((p, exponent), ...) with primes increasing; 1 -> ()."""
    if d < 1:
        raise ValueError(f"expected a positive integer, got {d}")
    out = []
    n = d
    p = 2
    while p * p <= n:
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append((p, a))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def _compositions(total: int, parts: int):
    # all tuples of `parts` non-negative ints summing to `total`
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_factorizations(d: int, k: int) -> list[tuple[int, ...]]:
    """All k-tuples of positive integers with product d, in lexicographic order.

    Exponents of each prime are distributed over the k positions independently
    (stars and bars) and combined by Cartesian product, so every factorization
    appears exactly once.
    """
    if k < 1:
        raise ValueError(f"expected k >= 1, got {k}")
    powers = prime_factorize(d)
    per_prime = [list(_compositions(a, k)) for _, a in powers]
    out = []
    for combo in itertools.product(*per_prime):
        factors = tuple(
            prod(p ** exps[m] for (p, _), exps in zip(powers, combo))
            for m in range(k)
        )
        out.append(factors)
    out.sort()
    return out


def count_factorizations(d: int, k: int) -> int:
    """Closed-form count of factorizations: prod_j C(a_j + k - 1, k - 1)."""
    if k < 1:
        raise ValueError(f"expected k >= 1, got {k}")
    return prod(comb(a + k - 1, k - 1) for _, a in prime_factorize(d))


# -- objectives ----------------------------------------------------------------


@dataclass(frozen=True)
class Isotropic:
    """Minimize sum_m d_m / l_m, the inverse-workload sum."""


@dataclass(frozen=True)
class AnisotropicHalo:
    """Halo-exchange volume with per-dimension widths h_n.

    V = sum_n d_n * h_n * prod_{m != n} l_m
    """

    widths: tuple[int, ...]


@dataclass(frozen=True)
class WithTranspose:
    """Halo volume plus all-to-all transpose volume along chosen dimensions.

    Adds sum_{n in dims} (1 - 1/d_n) * (prod_m w_m) * d for every dimension
    that requires a transpose.
    """

    widths: tuple[int, ...]
    dims: frozenset[int]


Objective = Isotropic | AnisotropicHalo | WithTranspose


def _check_lengths(factors, extents, widths=None):
    from .errors import ShapeMismatch

    if len(factors) != len(extents):
        raise ShapeMismatch(
            f"factorization rank {len(factors)} != extents rank {len(extents)}"
        )
    if widths is not None and len(widths) != len(extents):
        raise ShapeMismatch(
            f"halo rank {len(widths)} != extents rank {len(extents)}"
        )


def _halo_score(factors, extents, widths) -> Fraction:
    total = Fraction(0)
    for n, (d_n, h_n) in enumerate(zip(factors, widths)):
        total += d_n * h_n * prod(l for m, l in enumerate(extents) if m != n)
    return total


def score(
    factors: tuple[int, ...],
    extents: tuple[int, ...],
    objective: Objective = Isotropic(),
) -> Fraction:
    """Exact objective value of one factorization against the given extents."""
    if isinstance(objective, Isotropic):
        _check_lengths(factors, extents)
        return sum(Fraction(d_m, l_m) for d_m, l_m in zip(factors, extents))

    widths = objective.widths
    _check_lengths(factors, extents, widths)
    workloads = [Fraction(l, d) for l, d in zip(extents, factors)]
    if any(h > w for h, w in zip(widths, workloads)):
        warnings.warn(
            f"halo widths {tuple(widths)} exceed block workloads "
            f"{tuple(workloads)}; the score is still well defined",
            stacklevel=2,
        )
    total = _halo_score(factors, extents, widths)
    if isinstance(objective, WithTranspose):
        from .errors import ShapeMismatch

        if any(not 0 <= n < len(extents) for n in objective.dims):
            raise ShapeMismatch(f"transpose dims {set(objective.dims)} out of range")
        d_total = prod(factors)
        w_prod = prod(workloads)
        for n in objective.dims:
            total += (1 - Fraction(1, factors[n])) * w_prod * d_total
    return total


def search_optimal(
    d: int,
    extents: tuple[int, ...],
    objective: Objective = Isotropic(),
    strict: bool = False,
) -> tuple[tuple[int, ...], Fraction]:
    """Best factorization of d over the extents, with its exact score.

    Ties break toward the lexicographically smallest factor tuple.  With
    `strict`, only factorizations whose factors divide the extents are
    considered (the divisible-workload restriction); by default every
    factorization is scored so arbitrary extents can be compared.
    """
    extents = tuple(extents)
    candidates = enumerate_factorizations(d, len(extents))
    if strict:
        candidates = [
            f for f in candidates if all(l % d_m == 0 for l, d_m in zip(extents, f))
        ]
        if not candidates:
            raise ValueError(f"no factorization of {d} divides extents {extents}")
    best = min(candidates, key=lambda f: (score(f, extents, objective), f))
    return best, score(best, extents, objective)


def greedy_grid(d: int, k: int) -> tuple[int, ...]:
    """Shape-oblivious baseline grid for d processors in k dimensions.

    Assigns each prime factor of d, in ascending order, to the position with
    the smallest running product (lowest index on ties), then sorts the
    result descending.
    """
    if k < 1:
        raise ValueError(f"expected k >= 1, got {k}")
    factors = [1] * k
    for p, a in prime_factorize(d):
        for _ in range(a):
            j = min(range(k), key=factors.__getitem__)
            factors[j] *= p
    factors.sort(reverse=True)
    return tuple(factors)


def amgm_lower_bound(d: int, extents: tuple[int, ...]) -> float:
    """AM-GM bound on the inverse-workload sum: k * (d / prod(l))^(1/k).

    The isotropic score of any factorization is at least this value, with
    equality exactly when all workloads l_m / d_m are equal.
    """
    k = len(extents)
    return k * (d / prod(extents)) ** (1 / k)


def workload_vector(
    factors: tuple[int, ...], extents: tuple[int, ...]
) -> tuple[Fraction, ...]:
    """Per-processor extents w_m = l_m / d_m as exact rationals."""
    _check_lengths(factors, extents)
    return tuple(Fraction(l, d) for l, d in zip(extents, factors))


def balanced_workload_exists(d: int, extents: tuple[int, ...]) -> bool:
    """Whether some factorization of d gives all-equal workloads l_m / d_m.

    Used to decide when the AM-GM bound must be attained exactly.
    """
    k = len(extents)
    # all-equal workloads w force d_m = l_m / w; w^k = prod(l) / d
    for f in enumerate_factorizations(d, k):
        ws = workload_vector(f, extents)
        if all(w == ws[0] for w in ws):
            return True
    return False
