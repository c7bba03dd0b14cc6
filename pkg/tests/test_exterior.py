from itertools import combinations
from math import comb

import pytest

from frolicher.exterior import (
    bidegree_monomials,
    conjugate_monomial,
    degree_bidegrees,
    dim_bidegree,
    wedge_monomials,
)


def test_basis_dimensions():
    # n=1 degree-1 basis is {e1, conj(e1)}
    assert bidegree_monomials(1, 1, 0) == ((0,),)
    assert bidegree_monomials(1, 0, 1) == ((1,),)
    assert dim_bidegree(3, 1, 1) == 9
    total = sum(dim_bidegree(3, p, q) for (p, q) in degree_bidegrees(3, 3))
    assert total == comb(6, 3) == 20


def test_basis_is_lexicographic():
    monos = bidegree_monomials(3, 2, 1)
    pairs = [(m[:2], m[2:]) for m in monos]
    assert pairs == sorted(pairs)


@pytest.mark.parametrize("n", [2, 3])
def test_wedge_anticommutes(n):
    gens = list(range(2 * n))
    for a in combinations(gens, 2):
        for b in combinations(gens, 1):
            w1 = wedge_monomials(a, b)
            w2 = wedge_monomials(b, a)
            if w1 is None:
                assert w2 is None
                continue
            sign = (-1) ** (len(a) * len(b))
            assert w1[1] == w2[1]
            assert w1[0] == sign * w2[0]


def test_wedge_associates():
    gens = list(range(6))
    singles = [(g,) for g in gens]
    for a in singles:
        for b in singles:
            for c in singles:
                left_inner = wedge_monomials(a, b)
                right_inner = wedge_monomials(b, c)
                left = None if left_inner is None else wedge_monomials(left_inner[1], c)
                right = None if right_inner is None else wedge_monomials(a, right_inner[1])
                if left_inner is None or right_inner is None or left is None or right is None:
                    continue
                assert left[1] == right[1]
                assert left_inner[0] * left[0] == right_inner[0] * right[0]


def test_conjugation_is_an_involution():
    n = 3
    for p in range(n + 1):
        for q in range(n + 1):
            for m in bidegree_monomials(n, p, q):
                s1, m1 = conjugate_monomial(n, m)
                s2, m2 = conjugate_monomial(n, m1)
                assert m2 == m
                assert s1 * s2 == 1


def test_conjugation_sign_convention():
    # conj(e1 ^ conj(e2)) = conj(e1) ^ e2 = -(e2 ^ conj(e1))
    sign, mono = conjugate_monomial(2, (0, 3))
    assert mono == (1, 2)
    assert sign == -1
