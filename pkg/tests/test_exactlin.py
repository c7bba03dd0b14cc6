from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from frolicher import exactlin as xl

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=9)
gaussians = st.builds(xl.QQi, fractions, fractions)


@given(gaussians, gaussians, gaussians)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * (b * c) == (a * b) * c
    assert a + b == b + a
    if b:
        assert (a / b) * b == a


@given(gaussians)
def test_conjugation_and_norm(a):
    assert a.conjugate().conjugate() == a
    assert (a * a.conjugate()) == xl.QQi(a.abs2())


def test_parsing():
    assert xl.qq("3/4") == xl.QQi(Fraction(3, 4))
    assert xl.qq(("1/2", -2)) == xl.QQi(Fraction(1, 2), -2)
    assert complex(xl.qq((0, "1/4"))) == 0.25j
    with pytest.raises(ValueError):
        xl.qq(0.3)  # non-integral floats are not exact
    assert xl.qq(2.0) == xl.QQi(2)


def _random_int_matrix(rng, rows, cols, rank=None):
    if rank is None:
        m = rng.integers(-4, 5, size=(rows, cols))
    else:
        a = rng.integers(-3, 4, size=(rows, rank))
        b = rng.integers(-3, 4, size=(rank, cols))
        m = a @ b
    return m


@pytest.mark.parametrize("seed", range(6))
def test_rank_and_nullspace_match_numpy(seed):
    rng = np.random.default_rng(seed)
    m = _random_int_matrix(rng, 7, 5, rank=seed % 4 + 1)
    exact = xl.qmat(m.tolist())
    r = xl.rank(exact)
    assert r == np.linalg.matrix_rank(m)
    null = xl.nullspace(exact)
    assert xl.shape(null)[1] == 5 - r
    prod = xl.matmul(exact, null)
    assert all(e.is_zero() for row in prod for e in row)


@pytest.mark.parametrize("seed", range(4))
def test_solve_and_inverse(seed):
    rng = np.random.default_rng(100 + seed)
    while True:
        a = _random_int_matrix(rng, 4, 4)
        if np.linalg.matrix_rank(a) == 4:
            break
    exact = xl.qmat(a.tolist())
    inv = xl.inv(exact)
    assert xl.matmul(exact, inv) == xl.eye(4)
    b = xl.qmat(rng.integers(-4, 5, size=(4, 2)).tolist())
    x = xl.solve(exact, b)
    assert xl.matmul(exact, x) == b


def test_solve_detects_inconsistency():
    a = xl.qmat([[1, 0], [1, 0]])
    b = xl.qmat([[1], [2]])
    assert xl.solve(a, b) is None
    consistent = xl.qmat([[1], [1]])
    assert xl.solve(a, consistent) is not None


def test_extend_to_complement():
    sub = xl.qmat([[1], [0], [0]])
    space = xl.qmat([[1, 2, 0], [0, 0, 1], [0, 0, 0]])
    comp = xl.extend_to_complement(sub, space)
    assert xl.shape(comp)[1] == 1
    joined = xl.hstack([sub, comp])
    assert xl.rank(joined) == 2


def test_empty_matmul_is_tolerated():
    assert xl.matmul([], xl.zeros(3, 0)) == []
    assert xl.matmul(xl.zeros(2, 0), []) == xl.zeros(2, 0)
