"""Block operators on the bigraded algebra of invariant forms.

A GradedOperator is a family of matrices indexed by source bidegree,
grouped into parts of pure type shift (a, b); mixed operators (d, the
Laplacians on total degree) are sums of pure parts.  Graded commutators
use the total degree a+b, which must be uniform across parts.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exterior import (
    bidegree_monomials,
    conjugate_monomial,
    degree_bidegrees,
    dim_bidegree,
    monomial_index,
    wedge_monomials,
)

Shift = tuple[int, int]
Bidegree = tuple[int, int]


@lru_cache(maxsize=None)
def conj_matrix(n: int, p: int, q: int) -> np.ndarray:
    """Signed permutation K: coefficients of conj(u) are K @ conj(coeffs(u))."""
    src = bidegree_monomials(n, p, q)
    tgt_index = monomial_index(n, q, p)
    out = np.zeros((dim_bidegree(n, q, p), len(src)))
    for j, m in enumerate(src):
        sign, mc = conjugate_monomial(n, m)
        out[tgt_index[mc], j] = sign
    return out


def _valid(n: int, pq: Bidegree) -> bool:
    return 0 <= pq[0] <= n and 0 <= pq[1] <= n


class GradedOperator:
    def __init__(self, n: int, parts: dict[Shift, dict[Bidegree, np.ndarray]]):
        self.n = n
        clean: dict[Shift, dict[Bidegree, np.ndarray]] = {}
        for shift, blocks in parts.items():
            kept = {}
            for pq, m in blocks.items():
                tgt = (pq[0] + shift[0], pq[1] + shift[1])
                if not _valid(n, pq) or not _valid(n, tgt):
                    continue
                m = np.asarray(m, dtype=complex)
                if m.shape != (dim_bidegree(n, *tgt), dim_bidegree(n, *pq)):
                    raise ValueError(f"block {pq}->{tgt} has shape {m.shape}")
                kept[pq] = m
            if kept:
                clean[shift] = kept
        self.parts = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def pure(cls, n: int, shift: Shift, blocks: dict[Bidegree, np.ndarray]) -> "GradedOperator":
        return cls(n, {shift: blocks})

    @classmethod
    def zero(cls, n: int) -> "GradedOperator":
        return cls(n, {})

    @classmethod
    def identity(cls, n: int) -> "GradedOperator":
        blocks = {}
        for p in range(n + 1):
            for q in range(n + 1):
                blocks[(p, q)] = np.eye(dim_bidegree(n, p, q), dtype=complex)
        return cls(n, {(0, 0): blocks})

    @classmethod
    def scalar_by_bidegree(cls, n: int, factor) -> "GradedOperator":
        """Diagonal operator u |-> factor(p, q) * u on each (p, q)."""
        blocks = {}
        for p in range(n + 1):
            for q in range(n + 1):
                blocks[(p, q)] = factor(p, q) * np.eye(dim_bidegree(n, p, q), dtype=complex)
        return cls(n, {(0, 0): blocks})

    # -- structure ----------------------------------------------------

    @property
    def shifts(self) -> tuple[Shift, ...]:
        return tuple(sorted(self.parts))

    @property
    def total_degree(self) -> int:
        degs = {a + b for (a, b) in self.parts}
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"operator mixes total degrees {sorted(degs)}")
        return degs.pop()

    def block(self, pq: Bidegree, shift: Shift | None = None) -> np.ndarray:
        """The block leaving (p, q); the shift may be omitted when unique."""
        if shift is None:
            touching = [s for s, blocks in self.parts.items() if pq in blocks]
            if len(touching) > 1:
                raise ValueError(f"blocks of several shifts leave {pq}: specify one")
            shift = touching[0] if touching else next(iter(self.parts), (0, 0))
        tgt = (pq[0] + shift[0], pq[1] + shift[1])
        blocks = self.parts.get(shift, {})
        if pq in blocks:
            return blocks[pq]
        return np.zeros((dim_bidegree(self.n, *tgt), dim_bidegree(self.n, *pq)), dtype=complex)

    def apply(self, pq: Bidegree, vec: np.ndarray) -> dict[Bidegree, np.ndarray]:
        """Image of a (p, q)-coefficient vector, split by target bidegree."""
        out: dict[Bidegree, np.ndarray] = {}
        for shift, blocks in self.parts.items():
            if pq in blocks:
                tgt = (pq[0] + shift[0], pq[1] + shift[1])
                out[tgt] = out.get(tgt, 0) + blocks[pq] @ vec
        return out

    # -- algebra ------------------------------------------------------

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        parts: dict[Shift, dict[Bidegree, np.ndarray]] = {}
        for op in (self, other):
            for shift, blocks in op.parts.items():
                dst = parts.setdefault(shift, {})
                for pq, m in blocks.items():
                    dst[pq] = dst[pq] + m if pq in dst else m.copy()
        return GradedOperator(self.n, parts)

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "GradedOperator":
        parts = {shift: {pq: scalar * m for pq, m in blocks.items()}
                 for shift, blocks in self.parts.items()}
        return GradedOperator(self.n, parts)

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        parts: dict[Shift, dict[Bidegree, np.ndarray]] = {}
        for s2, bl2 in other.parts.items():
            for s1, bl1 in self.parts.items():
                shift = (s1[0] + s2[0], s1[1] + s2[1])
                for pq, m2 in bl2.items():
                    mid = (pq[0] + s2[0], pq[1] + s2[1])
                    if mid not in bl1:
                        continue
                    m = bl1[mid] @ m2
                    dst = parts.setdefault(shift, {})
                    dst[pq] = dst[pq] + m if pq in dst else m
        return GradedOperator(self.n, parts)

    def adjoint(self, weight=None) -> "GradedOperator":
        """Gram-transpose; `weight(p)` is the inner-product weight on (p, q).

        With no weight this is the adjoint in an orthonormal coframe.
        """
        parts: dict[Shift, dict[Bidegree, np.ndarray]] = {}
        for (a, b), blocks in self.parts.items():
            dst = parts.setdefault((-a, -b), {})
            for (p, q), m in blocks.items():
                factor = 1.0 if weight is None else weight(p + a) / weight(p)
                tgt = (p + a, q + b)
                madj = factor * m.conj().T
                dst[tgt] = dst[tgt] + madj if tgt in dst else madj
        return GradedOperator(self.n, parts)

    def conjugate(self) -> "GradedOperator":
        parts: dict[Shift, dict[Bidegree, np.ndarray]] = {}
        n = self.n
        for (a, b), blocks in self.parts.items():
            dst = parts.setdefault((b, a), {})
            for (sp, sq), m in blocks.items():
                # conj . A . conj acting on (q, p) when A's block leaves (sp, sq)
                p, q = sq, sp
                tgt_block = conj_matrix(n, sp + a, sq + b) @ m.conj() @ conj_matrix(n, p, q)
                dst[(p, q)] = dst.get((p, q), 0) + tgt_block
        return GradedOperator(self.n, parts)

    def commutator(self, other: "GradedOperator") -> "GradedOperator":
        sign = -1.0 if (self.total_degree * other.total_degree) % 2 else 1.0
        return self @ other - sign * (other @ self)

    # -- assembly -----------------------------------------------------

    def total_matrix(self, k: int) -> np.ndarray:
        """Matrix on degree k, target degree k + total_degree (p ascending)."""
        n = self.n
        t = self.total_degree
        src = degree_bidegrees(n, k)
        tgt = degree_bidegrees(n, k + t)
        src_off = _offsets(n, src)
        tgt_off = _offsets(n, tgt)
        out = np.zeros((sum(dim_bidegree(n, *pq) for pq in tgt),
                        sum(dim_bidegree(n, *pq) for pq in src)), dtype=complex)
        for shift, blocks in self.parts.items():
            for pq, m in blocks.items():
                if pq not in src_off:
                    continue
                tpq = (pq[0] + shift[0], pq[1] + shift[1])
                if tpq not in tgt_off:
                    continue
                r0 = tgt_off[tpq]
                c0 = src_off[pq]
                out[r0:r0 + m.shape[0], c0:c0 + m.shape[1]] += m
        return out

    def op_norm(self) -> float:
        """Max spectral norm over total-degree assemblies."""
        best = 0.0
        for k in range(2 * self.n + 1):
            m = self.total_matrix(k)
            if m.size:
                best = max(best, float(np.linalg.norm(m, 2)))
        return best

    def max_block_residual(self, other: "GradedOperator" = None) -> float:
        diff = self if other is None else self - other
        worst = 0.0
        for blocks in diff.parts.values():
            for m in blocks.values():
                if m.size:
                    worst = max(worst, float(np.max(np.abs(m))))
        return worst


def _offsets(n: int, bidegrees) -> dict[Bidegree, int]:
    out = {}
    pos = 0
    for pq in bidegrees:
        out[pq] = pos
        pos += dim_bidegree(n, *pq)
    return out


def degree_offsets(n: int, k: int) -> dict[Bidegree, int]:
    """Column offsets of each bidegree inside the degree-k assembly."""
    return _offsets(n, degree_bidegrees(n, k))


def degree_dim(n: int, k: int) -> int:
    return sum(dim_bidegree(n, *pq) for pq in degree_bidegrees(n, k))


def wedge_operator(n: int, coeffs: dict[tuple[int, ...], complex], shift: Shift) -> GradedOperator:
    """Left wedge multiplication by a fixed form of bidegree `shift`."""
    a, b = shift
    blocks: dict[Bidegree, np.ndarray] = {}
    for p in range(n + 1):
        for q in range(n + 1):
            if not _valid(n, (p + a, q + b)):
                continue
            src = bidegree_monomials(n, p, q)
            tgt_index = monomial_index(n, p + a, q + b)
            m = np.zeros((dim_bidegree(n, p + a, q + b), len(src)), dtype=complex)
            for j, mono in enumerate(src):
                for fmono, c in coeffs.items():
                    w = wedge_monomials(fmono, mono)
                    if w is not None:
                        sign, merged = w
                        m[tgt_index[merged], j] += sign * c
            blocks[(p, q)] = m
    return GradedOperator.pure(n, shift, blocks)


def vector_to_form(n: int, p: int, q: int, vec: np.ndarray) -> dict[tuple[int, ...], complex]:
    monos = bidegree_monomials(n, p, q)
    return {m: complex(c) for m, c in zip(monos, vec) if abs(c) > 0}
