"""Exact linear algebra over the Gaussian rationals Q(i).

Matrices are plain lists of lists of :class:`QQi`.  This is the arithmetic
backend for everything that must produce exact integers (ranks, kernels,
page dimensions); spectra go through the float path instead.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class QQi:
    """Gaussian rational ``re + im*i`` with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def of(cls, value) -> "QQi":
        if isinstance(value, QQi):
            return value
        if isinstance(value, complex):
            raise TypeError("complex floats are not exact; build QQi from Fractions")
        return cls(value)

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __add__(self, other) -> "QQi":
        other = QQi.of(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "QQi":
        return QQi(-self.re, -self.im)

    def __sub__(self, other) -> "QQi":
        other = QQi.of(other)
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "QQi":
        return QQi.of(other) - self

    def __mul__(self, other) -> "QQi":
        other = QQi.of(other)
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QQi":
        other = QQi.of(other)
        d = other.abs2()
        if not d:
            raise ZeroDivisionError("division by zero in Q(i)")
        return QQi((self.re * other.re + self.im * other.im) / d,
                   (self.im * other.re - self.re * other.im) / d)

    def __eq__(self, other) -> bool:
        if isinstance(other, (QQi, int, Fraction)):
            other = QQi.of(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        if not self.im:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


ZERO = QQi(0)
ONE = QQi(1)
I = QQi(0, 1)


def qq(value) -> QQi:
    """Coerce ints, Fractions, 'p/q' strings or (re, im) pairs to QQi."""
    if isinstance(value, QQi):
        return value
    if isinstance(value, (tuple, list)):
        re, im = value
        return QQi(_frac(re), _frac(im))
    return QQi(_frac(value))


def _frac(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"{value!r} is not exactly representable; pass a 'p/q' string")
        return Fraction(int(value))
    return Fraction(value)


Matrix = list  # list[list[QQi]]


def qmat(rows: Iterable[Iterable]) -> Matrix:
    return [[qq(x) for x in row] for row in rows]


def zeros(r: int, c: int) -> Matrix:
    return [[ZERO] * c for _ in range(r)]


def eye(m: int) -> Matrix:
    out = zeros(m, m)
    for i in range(m):
        out[i][i] = ONE
    return out


def shape(m: Matrix) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ra == 0 or cb == 0 or (ca == 0 and rb == 0):
        # zero-extent operands: list-of-lists cannot carry the inner extent
        return zeros(ra, cb)
    if ca != rb:
        raise ValueError(f"shape mismatch {ra}x{ca} @ {rb}x{cb}")
    out = zeros(ra, cb)
    for i in range(ra):
        arow = a[i]
        orow = out[i]
        for k in range(ca):
            x = arow[k]
            if x.is_zero():
                continue
            brow = b[k]
            for j in range(cb):
                if brow[j]:
                    orow[j] = orow[j] + x * brow[j]
    return out


def hconj(a: Matrix) -> Matrix:
    r, c = shape(a)
    return [[a[i][j].conjugate() for i in range(r)] for j in range(c)]


def madd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(s, a: Matrix) -> Matrix:
    s = qq(s)
    return [[s * x for x in row] for row in a]


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    blocks = [b for b in blocks if shape(b)[1] > 0]
    if not blocks:
        return []
    rows = len(blocks[0])
    return [sum((b[i] for b in blocks), []) for i in range(rows)]


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    out: Matrix = []
    for b in blocks:
        out.extend([row[:] for row in b])
    return out


def _rref_in_place(m: Matrix) -> list[int]:
    """Reduce m to row echelon form; return pivot column indices."""
    rows, cols = shape(m)
    pivots: list[int] = []
    pr = 0
    for pc in range(cols):
        pivot_row = None
        for i in range(pr, rows):
            if m[i][pc]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[pr], m[pivot_row] = m[pivot_row], m[pr]
        inv = ONE / m[pr][pc]
        m[pr] = [inv * x for x in m[pr]]
        for i in range(rows):
            if i != pr and m[i][pc]:
                f = m[i][pc]
                m[i] = [x - f * y for x, y in zip(m[i], m[pr])]
        pivots.append(pc)
        pr += 1
        if pr == rows:
            break
    return pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    work = [row[:] for row in m]
    pivots = _rref_in_place(work)
    return work, pivots


def rank(m: Matrix) -> int:
    if not m or not m[0]:
        return 0
    return len(rref(m)[1])


def nullspace(m: Matrix) -> Matrix:
    """Columns spanning ker(m), as a (cols x nullity) matrix."""
    rows, cols = shape(m)
    if cols == 0:
        return []
    if rows == 0:
        return eye(cols)
    red, pivots = rref(m)
    free = [j for j in range(cols) if j not in pivots]
    basis = zeros(cols, len(free))
    for bi, j in enumerate(free):
        basis[j][bi] = ONE
        for pr, pc in enumerate(pivots):
            basis[pc][bi] = -red[pr][j]
    return basis


def solve(a: Matrix, b: Matrix) -> Matrix | None:
    """A particular solution X of a @ X = b (free variables zero), or None."""
    rows, cols = shape(a)
    rb, cb = shape(b)
    if rb != rows:
        raise ValueError("rhs row count mismatch")
    aug = [a[i][:] + b[i][:] for i in range(rows)]
    red, pivots = rref(aug)
    pivots_in_a = [p for p in pivots if p < cols]
    if len(pivots_in_a) != len(pivots):
        return None  # pivot in rhs block: inconsistent
    x = zeros(cols, cb)
    for pr, pc in enumerate(pivots_in_a):
        for j in range(cb):
            x[pc][j] = red[pr][cols + j]
    return x


def inv(a: Matrix) -> Matrix:
    m, n = shape(a)
    if m != n:
        raise ValueError("inverse of a non-square matrix")
    x = solve(a, eye(m))
    if x is None or rank(a) != m:
        raise ValueError("singular matrix")
    return x


def column_span_rank(cols_mats: Sequence[Matrix]) -> int:
    """Rank of the span of the concatenated column blocks."""
    joined = hstack(list(cols_mats))
    if not joined:
        return 0
    return rank(joined)


def extend_to_complement(sub: Matrix, space: Matrix) -> Matrix:
    """Columns of `space` extending span(sub) to span(sub)+span(space).

    Row-echelon complement: greedily keep columns that raise the rank.
    """
    rows = len(space) if space else (len(sub) if sub else 0)
    kept: list[int] = []
    current = [row[:] for row in sub] if sub else zeros(rows, 0)
    r = rank(current) if current and current[0] else 0
    ncols = shape(space)[1]
    for j in range(ncols):
        cand = hstack([current, [[space[i][j]] for i in range(rows)]])
        r2 = rank(cand)
        if r2 > r:
            kept.append(j)
            current = cand
            r = r2
    return [[space[i][j] for j in kept] for i in range(rows)]


def to_complex(m: Matrix):
    import numpy as np

    r, c = shape(m)
    out = np.zeros((r, c), dtype=complex)
    for i in range(r):
        for j in range(c):
            out[i, j] = complex(m[i][j])
    return out
