"""Invariant complex structures and their bigraded double complex.

A structure is given by the coefficients of the (2,0) and (1,1) parts of
the differential of a (1,0)-coframe; the (0,2) part is forced to vanish
by the data format, which encodes integrability.  The two anti-derivations
del / dbar are extended to every bidegree with Koszul signs, in exact
Gaussian-rational arithmetic whenever the inputs allow it, with a float
mirror alongside.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import exactlin as xl
from .errors import ConfigurationError, ModelInvalidError
from .exterior import bidegree_monomials, dim_bidegree, degree_bidegrees, monomial_index, wedge_monomials
from .graded import GradedOperator, degree_offsets

MAX_DIM = 4

Coeffs = dict[tuple[int, int, int], xl.QQi]


@dataclass(frozen=True)
class InvariantComplexStructure:
    """Structure constants of del/dbar on an invariant (1,0)-coframe.

    partial_coeffs[(i, j, k)] with j < k is the e^j ^ e^k coefficient of
    del e^i; dbar_coeffs[(i, j, k)] the e^j ^ conj(e^k) coefficient of
    dbar e^i.  Indices are 1-based.
    """

    n: int
    partial_coeffs: Coeffs = field(default_factory=dict)
    dbar_coeffs: Coeffs = field(default_factory=dict)
    name: str = "unnamed"

    def __post_init__(self):
        if not (1 <= self.n <= MAX_DIM):
            raise ConfigurationError(f"complex dimension n={self.n} outside 1..{MAX_DIM}")
        for (i, j, k) in self.partial_coeffs:
            if not (1 <= i <= self.n and 1 <= j < k <= self.n):
                raise ConfigurationError(f"partial coefficient index ({i},{j},{k}) out of range")
        for (i, j, k) in self.dbar_coeffs:
            if not (1 <= i <= self.n and 1 <= j <= self.n and 1 <= k <= self.n):
                raise ConfigurationError(f"dbar coefficient index ({i},{j},{k}) out of range")

    @property
    def exact(self) -> bool:
        return all(isinstance(c, xl.QQi)
                   for c in (*self.partial_coeffs.values(), *self.dbar_coeffs.values()))

    def generator_differentials(self):
        """del/dbar on each generator as {monomial: coefficient} dicts.

        Generator ids: 0..n-1 unbarred, n..2n-1 barred; conjugate structure
        equations come from conjugating the given ones.
        """
        n = self.n
        dd = {g: {} for g in range(2 * n)}
        db = {g: {} for g in range(2 * n)}
        for (i, j, k), c in self.partial_coeffs.items():
            dd[i - 1][(j - 1, k - 1)] = c
            db[n + i - 1][(n + j - 1, n + k - 1)] = _conj(c)
        for (i, j, k), c in self.dbar_coeffs.items():
            db[i - 1][(j - 1, n + k - 1)] = c
            # conj(e^j ^ eb^k) = eb^j ^ e^k = - e^k ^ eb^j
            dd[n + i - 1][(k - 1, n + j - 1)] = -_conj(c)
        return dd, db


def _conj(c):
    return c.conjugate() if isinstance(c, xl.QQi) else np.conj(c)


def _as_complex(c) -> complex:
    return complex(c)


@dataclass
class BigradedComplex:
    """del/dbar blocks over the lexicographic (I, J) monomial bases."""

    n: int
    name: str
    exact: bool
    del_op: GradedOperator
    dbar_op: GradedOperator
    del_exact: dict[tuple[int, int], xl.Matrix] | None
    dbar_exact: dict[tuple[int, int], xl.Matrix] | None

    def dim(self, p: int, q: int) -> int:
        return dim_bidegree(self.n, p, q)

    def total_dim(self, k: int) -> int:
        return comb(2 * self.n, k)

    @property
    def d_op(self) -> GradedOperator:
        return self.del_op + self.dbar_op

    def d_exact_block(self, pq, which: str) -> xl.Matrix:
        blocks = self.del_exact if which == "del" else self.dbar_exact
        if blocks is None:
            raise ConfigurationError("exact path unavailable: structure not exact")
        p, q = pq
        tgt = (p + 1, q) if which == "del" else (p, q + 1)
        if pq in blocks:
            return blocks[pq]
        return xl.zeros(self.dim(*tgt), self.dim(p, q))


def build_basis(n: int):
    """Bidegree bases for 1 <= n <= 4, lexicographic in (I, J)."""
    if not (1 <= n <= MAX_DIM):
        raise ConfigurationError(f"n={n} outside catalog scale 1..{MAX_DIM}")
    return {(p, q): bidegree_monomials(n, p, q)
            for p in range(n + 1) for q in range(n + 1)}


def _derivation_blocks(n: int, gen_diff: dict, target_shift: tuple[int, int], exact: bool):
    """Extend the generator 2-form values to all bidegrees as an anti-derivation."""
    float_blocks: dict[tuple[int, int], np.ndarray] = {}
    exact_blocks: dict[tuple[int, int], xl.Matrix] | None = {} if exact else None
    for p in range(n + 1):
        for q in range(n + 1):
            tp, tq = p + target_shift[0], q + target_shift[1]
            if tp > n or tq > n:
                continue
            src = bidegree_monomials(n, p, q)
            tgt_index = monomial_index(n, tp, tq)
            rows, cols = dim_bidegree(n, tp, tq), len(src)
            fm = np.zeros((rows, cols), dtype=complex)
            xm = xl.zeros(rows, cols) if exact else None
            for j, mono in enumerate(src):
                for pos, g in enumerate(mono):
                    sign0 = -1 if pos % 2 else 1
                    prefix, suffix = mono[:pos], mono[pos + 1:]
                    for two_mono, coeff in gen_diff[g].items():
                        w1 = wedge_monomials(prefix, two_mono)
                        if w1 is None:
                            continue
                        s1, m1 = w1
                        w2 = wedge_monomials(m1, suffix)
                        if w2 is None:
                            continue
                        s2, m2 = w2
                        r = tgt_index[m2]
                        total_sign = sign0 * s1 * s2
                        fm[r, j] += total_sign * _as_complex(coeff)
                        if exact:
                            xm[r][j] = xm[r][j] + total_sign * coeff
            float_blocks[(p, q)] = fm
            if exact:
                exact_blocks[(p, q)] = xm
    return float_blocks, exact_blocks


def exterior_derivatives(structure: InvariantComplexStructure) -> BigradedComplex:
    """Assemble the del/dbar blocks of the invariant-form double complex."""
    n = structure.n
    dd, db = structure.generator_differentials()
    exact = structure.exact
    del_f, del_x = _derivation_blocks(n, dd, (1, 0), exact)
    dbar_f, dbar_x = _derivation_blocks(n, db, (0, 1), exact)
    return BigradedComplex(
        n=n,
        name=structure.name,
        exact=exact,
        del_op=GradedOperator.pure(n, (1, 0), del_f),
        dbar_op=GradedOperator.pure(n, (0, 1), dbar_f),
        del_exact=del_x,
        dbar_exact=dbar_x,
    )


@dataclass
class ComplexIdentityReport:
    max_del2: float
    max_dbar2: float
    max_anticommute: float
    exact_zero: bool

    @property
    def max_residual(self) -> float:
        return max(self.max_del2, self.max_dbar2, self.max_anticommute)


_IDENTITY_SCANS = (
    ("dbar o dbar", "dbar", "dbar", (0, 2)),
    ("del o del", "del", "del", (2, 0)),
    ("del o dbar + dbar o del", None, None, (1, 1)),
)


def verify_complex_identities(cx: BigradedComplex, tol: float = 1e-12) -> ComplexIdentityReport:
    """Check del^2 = dbar^2 = del dbar + dbar del = 0 blockwise.

    Raises ModelInvalidError naming the first offending block.
    """
    n = cx.n
    worst = {"dbar o dbar": 0.0, "del o del": 0.0, "del o dbar + dbar o del": 0.0}
    exact_zero = cx.exact
    for label, *_rest, shift in _IDENTITY_SCANS:
        for q in range(n + 1):
            for p in range(n + 1):
                tp, tq = p + shift[0], q + shift[1]
                if tp > n or tq > n:
                    continue
                if cx.exact:
                    block = _exact_identity_block(cx, label, (p, q))
                    bad = any(e for row in block for e in row)
                    if bad:
                        exact_zero = False
                        res = float(max(abs(complex(e)) for row in block for e in row))
                    else:
                        res = 0.0
                else:
                    block = _float_identity_block(cx, label, (p, q))
                    res = float(np.max(np.abs(block))) if block.size else 0.0
                worst[label] = max(worst[label], res)
                if res > tol:
                    raise ModelInvalidError(
                        f"{label} nonzero on block ({p},{q})->({tp},{tq}): residual {res:.3e}")
    return ComplexIdentityReport(
        max_del2=worst["del o del"],
        max_dbar2=worst["dbar o dbar"],
        max_anticommute=worst["del o dbar + dbar o del"],
        exact_zero=exact_zero,
    )


def _exact_identity_block(cx: BigradedComplex, label: str, pq):
    p, q = pq
    if label == "dbar o dbar":
        return xl.matmul(cx.d_exact_block((p, q + 1), "dbar"), cx.d_exact_block(pq, "dbar"))
    if label == "del o del":
        return xl.matmul(cx.d_exact_block((p + 1, q), "del"), cx.d_exact_block(pq, "del"))
    a = xl.matmul(cx.d_exact_block((p, q + 1), "del"), cx.d_exact_block(pq, "dbar"))
    b = xl.matmul(cx.d_exact_block((p + 1, q), "dbar"), cx.d_exact_block(pq, "del"))
    return xl.madd(a, b)


def _float_identity_block(cx: BigradedComplex, label: str, pq):
    p, q = pq
    if label == "dbar o dbar":
        return cx.dbar_op.block((p, q + 1)) @ cx.dbar_op.block(pq)
    if label == "del o del":
        return cx.del_op.block((p + 1, q)) @ cx.del_op.block(pq)
    return (cx.del_op.block((p, q + 1)) @ cx.dbar_op.block(pq)
            + cx.dbar_op.block((p + 1, q)) @ cx.del_op.block(pq))


def assemble_total(cx: BigradedComplex, k: int, h: float = 1.0) -> np.ndarray:
    """Matrix of d_h = h*del + dbar on degree k (blocks ordered by ascending p)."""
    if not (0 <= k <= 2 * cx.n):
        raise ConfigurationError(f"degree k={k} outside 0..{2 * cx.n}")
    op = float(h) * cx.del_op + cx.dbar_op
    return op.total_matrix(k)


def assemble_total_exact(cx: BigradedComplex, k: int, h=1) -> xl.Matrix:
    """Exact counterpart of assemble_total; h must be exactly representable."""
    if not (0 <= k <= 2 * cx.n):
        raise ConfigurationError(f"degree k={k} outside 0..{2 * cx.n}")
    n = cx.n
    h = xl.qq(h)
    src_off = degree_offsets(n, k)
    tgt_off = degree_offsets(n, k + 1)
    rows = comb(2 * n, k + 1) if k + 1 <= 2 * n else 0
    cols = comb(2 * n, k)
    out = xl.zeros(rows, cols)
    for (p, q), c0 in src_off.items():
        for which, tgt, scale in (("del", (p + 1, q), h), ("dbar", (p, q + 1), xl.ONE)):
            if tgt not in tgt_off:
                continue
            block = cx.d_exact_block((p, q), which)
            r0 = tgt_off[tgt]
            for i, row in enumerate(block):
                orow = out[r0 + i]
                for j, val in enumerate(row):
                    if val:
                        orow[c0 + j] = orow[c0 + j] + scale * val
    return out


def betti_numbers(cx: BigradedComplex) -> list[int]:
    """de Rham Betti numbers of the invariant complex (exact ranks when available)."""
    n = cx.n
    ranks = []
    for k in range(2 * n + 1):
        if cx.exact:
            ranks.append(xl.rank(assemble_total_exact(cx, k)))
        else:
            from .numerics import svd_rank
            ranks.append(svd_rank(assemble_total(cx, k)))
    bettis = []
    for k in range(2 * n + 1):
        dim_k = comb(2 * n, k)
        ker = dim_k - ranks[k]
        img = ranks[k - 1] if k > 0 else 0
        bettis.append(ker - img)
    return bettis
