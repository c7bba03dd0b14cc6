"""Multi-index bookkeeping for the exterior algebra on a complex coframe.

Generators carry ids 0..2n-1: id i is the (1,0) coframe element e^{i+1},
id n+i its conjugate.  A monomial is a strictly increasing tuple of ids,
so the unbarred factors always precede the barred ones (Koszul convention).
Bases are ordered lexicographically in the multi-index pair (I, J).
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb


def dim_bidegree(n: int, p: int, q: int) -> int:
    if not (0 <= p <= n and 0 <= q <= n):
        return 0
    return comb(n, p) * comb(n, q)


@lru_cache(maxsize=None)
def bidegree_monomials(n: int, p: int, q: int) -> tuple[tuple[int, ...], ...]:
    """Ordered basis monomials of the (p, q) component."""
    if not (0 <= p <= n and 0 <= q <= n):
        return ()
    out = []
    for i_part in combinations(range(n), p):
        for j_part in combinations(range(n), q):
            out.append(i_part + tuple(n + j for j in j_part))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, p: int, q: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(bidegree_monomials(n, p, q))}


@lru_cache(maxsize=None)
def degree_bidegrees(n: int, k: int) -> tuple[tuple[int, int], ...]:
    """Bidegrees (p, q) with p+q = k, ascending in p."""
    return tuple((p, k - p) for p in range(max(0, k - n), min(n, k) + 1))


def bidegree_of(n: int, monomial: tuple[int, ...]) -> tuple[int, int]:
    p = sum(1 for g in monomial if g < n)
    return p, len(monomial) - p


def wedge_monomials(m1: tuple[int, ...], m2: tuple[int, ...]):
    """Merge two monomials; returns (sign, monomial) or None if they collide."""
    if set(m1) & set(m2):
        return None
    merged = []
    sign = 1
    i = j = 0
    while i < len(m1) and j < len(m2):
        if m1[i] < m2[j]:
            merged.append(m1[i])
            i += 1
        else:
            # m2[j] jumps over the remaining len(m1)-i factors of m1
            if (len(m1) - i) % 2:
                sign = -sign
            merged.append(m2[j])
            j += 1
    merged.extend(m1[i:])
    merged.extend(m2[j:])
    return sign, tuple(merged)


def conjugate_monomial(n: int, monomial: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Image of a monomial under conjugation: (sign, monomial) with bars swapped."""
    p, q = bidegree_of(n, monomial)
    mapped = tuple(sorted((g + n) if g < n else (g - n) for g in monomial))
    sign = -1 if (p * q) % 2 else 1
    return sign, mapped


def complement(n: int, indices: tuple[int, ...], barred: bool) -> tuple[int, ...]:
    base = range(n, 2 * n) if barred else range(n)
    return tuple(g for g in base if g not in indices)
