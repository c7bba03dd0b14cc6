"""Frölicher spectral sequence pages by three independent routes.

1. filtration: subquotient dimensions from Z_r = F^p ∩ d^{-1} F^{p+r};
2. chain condition: representatives (alpha, u_1, ..., u_{r-1}) of the
   zig-zag system dbar(alpha) = 0, del(alpha) = dbar(u_1), ... taken
   modulo the matching boundary space;
3. harmonic tower: the nested metric realisations with the induced page
   differentials, built from minimal-norm chain witnesses and orthogonal
   projections.

Exact Gaussian-rational arithmetic is used whenever the structure (and,
for the tower, the metric) allows; the float path mirrors every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import exactlin as xl
from .errors import InconsistencyError
from .exterior import degree_bidegrees, dim_bidegree
from .graded import degree_dim, degree_offsets
from .metric import HermitianModel
from .model import BigradedComplex, assemble_total, assemble_total_exact, betti_numbers
from .numerics import (
    complement_within,
    eigvalsh_c,
    min_norm_solve,
    nullspace,
    orthonormal_range,
    subspace_gap,
    svd_rank,
)

Bidegree = tuple[int, int]


# ---------------------------------------------------------------------------
# method 1: filtration subquotients
# ---------------------------------------------------------------------------

def _filtration_cols(n: int, k: int, p_min: int) -> list[int]:
    cols = []
    for (p, q) in degree_bidegrees(n, k):
        off = degree_offsets(n, k)[(p, q)]
        if p >= p_min:
            cols.extend(range(off, off + dim_bidegree(n, p, q)))
    return cols


def _filtration_rows_below(n: int, k: int, p_cut: int) -> list[int]:
    rows = []
    for (p, q) in degree_bidegrees(n, k):
        off = degree_offsets(n, k)[(p, q)]
        if p < p_cut:
            rows.extend(range(off, off + dim_bidegree(n, p, q)))
    return rows


class _FiltrationWorker:
    """Caches Z-space bases per (r, p, q) in either arithmetic."""

    def __init__(self, cx: BigradedComplex, exact: bool):
        self.cx = cx
        self.n = cx.n
        self.exact = exact and cx.exact
        self._d = {}
        self._z = {}

    def d_total(self, k: int):
        if k not in self._d:
            if k >= 2 * self.n:
                self._d[k] = None
            elif self.exact:
                self._d[k] = assemble_total_exact(self.cx, k)
            else:
                self._d[k] = assemble_total(self.cx, k)
        return self._d[k]

    def z_basis(self, r: int, p: int, q: int):
        """Columns (in degree-k coordinates) spanning Z_r^{p,q}.

        Bidegree labels are formal here: only p and k = p+q matter, and the
        filtration saturates at F^0 for negative p.
        """
        n = self.n
        k = p + q
        if k < 0 or k > 2 * n:
            return self._empty(k)
        key = (r, p, q)
        if key in self._z:
            return self._z[key]
        p_eff = max(p, 0)
        cols = _filtration_cols(n, k, p_eff)
        dim_k = comb(2 * n, k)
        if not cols:
            basis = self._empty(k)
            self._z[key] = basis
            return basis
        d = self.d_total(k)
        rows = _filtration_rows_below(n, k + 1, p + r) if d is not None else []
        if self.exact:
            if d is None or not rows:
                sub = xl.zeros(0, len(cols))
            else:
                sub = [[d[i][j] for j in cols] for i in rows]
            ker = xl.nullspace(sub) if xl.shape(sub)[0] else xl.eye(len(cols))
            basis = xl.zeros(dim_k, xl.shape(ker)[1])
            for ci, col in enumerate(cols):
                for bj in range(xl.shape(ker)[1]):
                    basis[col][bj] = ker[ci][bj]
        else:
            if d is None or not rows:
                ker = np.eye(len(cols), dtype=complex)
            else:
                ker = nullspace(np.asarray(d)[np.ix_(rows, cols)])
            basis = np.zeros((dim_k, ker.shape[1]), dtype=complex)
            basis[cols, :] = ker
        self._z[key] = basis
        return basis

    def _empty(self, k: int):
        dim_k = comb(2 * self.n, k) if 0 <= k <= 2 * self.n else 0
        return xl.zeros(dim_k, 0) if self.exact else np.zeros((dim_k, 0), dtype=complex)

    def dim_page(self, r: int, p: int, q: int) -> int:
        z = self.z_basis(r, p, q)
        z_in = self.z_basis(r - 1, p + 1, q - 1)
        z_src = self.z_basis(r - 1, p - r + 1, q + r - 2)
        k = p + q
        if self.exact:
            dz = xl.matmul(self.d_total(k - 1), z_src) if 0 < k <= 2 * self.n and xl.shape(z_src)[1] else None
            blocks = [z_in] + ([dz] if dz is not None else [])
            boundary = xl.hstack([b for b in blocks if xl.shape(b)[1]])
            dim_b = xl.rank(boundary) if boundary else 0
            return xl.shape(z)[1] - dim_b
        dz = None
        if 0 < k <= 2 * self.n and z_src.shape[1]:
            dz = np.asarray(self.d_total(k - 1)) @ z_src
        pieces = [z_in] + ([dz] if dz is not None else [])
        pieces = [b for b in pieces if b.shape[1]]
        boundary = np.hstack(pieces) if pieces else np.zeros((z.shape[0], 0), dtype=complex)
        return z.shape[1] - svd_rank(boundary)


def pages_by_filtration(cx: BigradedComplex, max_r: int | None = None, exact: bool = True):
    """Page dimensions per (r, p, q) up to stabilisation; filtration route."""
    n = cx.n
    cap = max_r if max_r is not None else 2 * n + 1
    worker = _FiltrationWorker(cx, exact)
    betti = betti_numbers(cx)
    dims: dict[int, dict[Bidegree, int]] = {0: {}}
    for p in range(n + 1):
        for q in range(n + 1):
            dims[0][(p, q)] = dim_bidegree(n, p, q)
    for r in range(1, cap + 1):
        dims[r] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                dims[r][(p, q)] = worker.dim_page(r, p, q)
        if _degenerate(dims[r], betti, n):
            break
    return dims, betti


def _degenerate(page_dims: dict[Bidegree, int], betti: list[int], n: int) -> bool:
    for k in range(2 * n + 1):
        total = sum(page_dims[(p, q)] for (p, q) in degree_bidegrees(n, k))
        if total != betti[k]:
            return False
    return True


# ---------------------------------------------------------------------------
# method 2: chain condition with representatives and page differentials
# ---------------------------------------------------------------------------

class _Arith:
    """Thin facade over the two arithmetic backends."""

    def __init__(self, exact: bool):
        self.exact = exact

    def zeros(self, r, c):
        return xl.zeros(r, c) if self.exact else np.zeros((r, c), dtype=complex)

    def shape(self, m):
        return xl.shape(m) if self.exact else m.shape

    def hstack(self, blocks):
        blocks = [b for b in blocks if self.shape(b)[1]]
        if not blocks:
            return None
        return xl.hstack(blocks) if self.exact else np.hstack(blocks)

    def vstack(self, blocks):
        return xl.vstack(blocks) if self.exact else np.vstack(blocks)

    def matmul(self, a, b):
        return xl.matmul(a, b) if self.exact else a @ b

    def rank(self, m):
        if m is None:
            return 0
        if self.exact:
            return xl.rank(m) if m and m[0] else 0
        return svd_rank(m)

    def nullspace(self, m):
        return xl.nullspace(m) if self.exact else nullspace(m)

    def column(self, m, j):
        if self.exact:
            return [[row[j]] for row in m]
        return m[:, j:j + 1]

    def solve(self, a, b):
        if self.exact:
            return xl.solve(a, b)
        x, res = min_norm_solve(a, b)
        scale = max(1.0, float(np.max(np.abs(b))) if np.asarray(b).size else 0.0)
        if res > 1e-8 * scale:
            return None
        return x


@dataclass
class ChainPages:
    """Representatives alpha with zig-zag witnesses, modulo boundaries."""

    dims: dict[int, dict[Bidegree, int]]
    reps: dict[int, dict[Bidegree, object]]          # ambient (p,q)-coefficient columns
    chains: dict[int, dict[Bidegree, list]]          # per column: list of u_l blocks
    d_mats: dict[int, dict[Bidegree, object]]        # page differential on the rep basis
    ranks: dict[int, dict[Bidegree, int]]            # rank of d_r per bidegree
    exact: bool


def _block(cx: BigradedComplex, which: str, pq: Bidegree, exact: bool):
    p, q = pq
    n = cx.n
    tp, tq = (p + 1, q) if which == "del" else (p, q + 1)
    if not (0 <= p <= n and 0 <= q <= n):
        rows = dim_bidegree(n, tp, tq)
        return xl.zeros(rows, 0) if exact else np.zeros((rows, 0), dtype=complex)
    if exact:
        return cx.d_exact_block(pq, which)
    op = cx.del_op if which == "del" else cx.dbar_op
    return op.block(pq)


def _chain_system(cx: BigradedComplex, pq: Bidegree, r: int, ar: _Arith):
    """Stacked zig-zag system on tuples (x_0..x_{r-1}): component of d x
    vanishes in holomorphic degrees p..p+r-2 beyond the leading one."""
    n = cx.n
    p, q = pq
    widths = [dim_bidegree(n, p + l, q - l) for l in range(r)]
    row_blocks = []
    # dbar x_0 = 0
    rows0 = []
    for l in range(r):
        if l == 0:
            rows0.append(_block(cx, "dbar", pq, ar.exact))
        else:
            rows0.append(ar.zeros(dim_bidegree(n, p, q + 1), widths[l]))
    row_blocks.append(ar.hstack(rows0) if any(widths) else None)
    for j in range(1, r):
        tgt_rows = dim_bidegree(n, p + j, q - j + 1)
        row = []
        for l in range(r):
            if l == j - 1:
                row.append(_block(cx, "del", (p + j - 1, q - j + 1), ar.exact))
            elif l == j:
                row.append(_block(cx, "dbar", (p + j, q - j), ar.exact))
            else:
                row.append(ar.zeros(tgt_rows, widths[l]))
        row_blocks.append(ar.hstack(row))
    rows = [b for b in row_blocks if b is not None]
    system = ar.vstack(rows) if rows else ar.zeros(0, sum(widths))
    return system, widths


def _boundary_generators(cx: BigradedComplex, pq: Bidegree, r: int, ar: _Arith):
    """Generators of Y_r: dbar-image plus trailing components of d(Z_{r-1})."""
    n = cx.n
    p, q = pq
    gens = [_block(cx, "dbar", (p, q - 1), ar.exact)] if q - 1 >= 0 else []
    if r >= 2:
        # tuples (x_0..x_{r-2}) starting r-1 steps down the filtration;
        # the free top block x_{r-1} enters only through dbar and is already
        # covered by the dbar-image generator above.
        src = (p - r + 1, q + r - 2)
        system, widths = _chain_system(cx, src, r - 1, ar)
        ker = ar.nullspace(system) if ar.shape(system)[0] else _identity_like(ar, sum(widths))
        if ar.shape(ker)[1] and widths[r - 2]:
            del_last = _block(cx, "del", (p - 1, q), ar.exact)
            sub = _rows_slice(ar, ker, sum(widths[:r - 2]), widths[r - 2])
            gens.append(ar.matmul(del_last, sub))
    gens = [g for g in gens if ar.shape(g)[1]]
    return ar.hstack(gens) if gens else None


def _identity_like(ar: _Arith, m: int):
    return xl.eye(m) if ar.exact else np.eye(m, dtype=complex)


def _rows_slice(ar: _Arith, m, off: int, count: int):
    if ar.exact:
        return m[off:off + count]
    return m[off:off + count, :]


def pages_by_chain_condition(cx: BigradedComplex, max_r: int | None = None,
                             exact: bool = True) -> ChainPages:
    n = cx.n
    ar = _Arith(exact and cx.exact)
    cap = max_r if max_r is not None else 2 * n + 1
    betti = betti_numbers(cx)
    dims: dict[int, dict[Bidegree, int]] = {0: {(p, q): dim_bidegree(n, p, q)
                                                for p in range(n + 1) for q in range(n + 1)}}
    reps: dict[int, dict[Bidegree, object]] = {}
    chains: dict[int, dict[Bidegree, list]] = {}
    d_mats: dict[int, dict[Bidegree, object]] = {}
    ranks: dict[int, dict[Bidegree, int]] = {0: {}}
    for p in range(n + 1):
        for q in range(n + 1):
            ranks[0][(p, q)] = ar.rank(_block(cx, "dbar", (p, q), ar.exact))

    for r in range(1, cap + 1):
        dims[r] = {}
        reps[r] = {}
        chains[r] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                rep_cols, chain_list = _page_representatives(cx, (p, q), r, ar)
                dims[r][(p, q)] = len(chain_list)
                reps[r][(p, q)] = rep_cols
                chains[r][(p, q)] = chain_list
        d_mats[r] = {}
        ranks[r] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                mat = _page_differential(cx, (p, q), r, ar, reps[r], chains[r])
                d_mats[r][(p, q)] = mat
                ranks[r][(p, q)] = ar.rank(mat)
        if _degenerate(dims[r], betti, n):
            break
    return ChainPages(dims=dims, reps=reps, chains=chains, d_mats=d_mats, ranks=ranks,
                      exact=ar.exact)


def _page_representatives(cx: BigradedComplex, pq: Bidegree, r: int, ar: _Arith):
    """Greedy complement of the boundary space inside the zig-zag solutions."""
    n = cx.n
    p, q = pq
    d0 = dim_bidegree(n, p, q)
    if d0 == 0:
        return ar.zeros(0, 0), []
    system, widths = _chain_system(cx, pq, r, ar)
    ker = ar.nullspace(system) if ar.shape(system)[0] else _identity_like(ar, sum(widths))
    boundary = _boundary_generators(cx, pq, r, ar)
    current = [boundary] if boundary is not None else []
    base_rank = ar.rank(ar.hstack(current)) if current else 0
    picked_cols = []
    chain_list = []
    nker = ar.shape(ker)[1]
    for j in range(nker):
        col = ar.column(ker, j)
        alpha = _rows_slice(ar, col, 0, d0)
        cand = ar.hstack(current + [alpha])
        rk = ar.rank(cand)
        if rk > base_rank:
            picked_cols.append(alpha)
            pieces = []
            off = d0
            for l in range(1, r):
                pieces.append(_rows_slice(ar, col, off, widths[l]))
                off += widths[l]
            chain_list.append(pieces)
            current.append(alpha)
            base_rank = rk
    rep_cols = ar.hstack(picked_cols) if picked_cols else ar.zeros(d0, 0)
    return rep_cols, chain_list


def _page_differential(cx: BigradedComplex, pq: Bidegree, r: int, ar: _Arith,
                       reps: dict, chains: dict):
    """Matrix of the page differential from (p, q) into (p+r, q-r+1)."""
    n = cx.n
    p, q = pq
    tgt = (p + r, q - r + 1)
    src_reps = reps[pq]
    src_chains = chains[pq]
    m_src = len(src_chains)
    valid_tgt = 0 <= tgt[0] <= n and 0 <= tgt[1] <= n
    m_tgt = len(chains[tgt]) if valid_tgt else 0
    if m_src == 0 or not valid_tgt or m_tgt == 0:
        return ar.zeros(m_tgt, m_src)
    cols = []
    for j in range(m_src):
        if r == 1:
            top = ar.column(src_reps, j)
        else:
            top = src_chains[j][r - 2]
        beta = ar.matmul(_block(cx, "del", (p + r - 1, q - r + 1), ar.exact), top)
        cols.append(beta)
    betas = ar.hstack(cols)
    tgt_reps = reps[tgt]
    tgt_boundary = _boundary_generators(cx, tgt, r, ar)
    blocks = [tgt_reps] + ([tgt_boundary] if tgt_boundary is not None else [])
    basis = ar.hstack(blocks)
    coords = ar.solve(basis, betas)
    if coords is None:
        raise InconsistencyError(
            f"page differential image at {pq} (r={r}) does not lie in the "
            "representative-plus-boundary span")
    if not ar.exact:
        scale = 1.0 + max(float(np.max(np.abs(basis))), float(np.max(np.abs(betas))))
        coords = np.asarray(coords).copy()
        coords[np.abs(coords) <= 1e-10 * scale] = 0.0
    return _rows_slice(ar, coords, 0, m_tgt)


# ---------------------------------------------------------------------------
# method 3: harmonic tower
# ---------------------------------------------------------------------------

@dataclass
class HarmonicTower:
    n: int
    exact: bool
    frames: dict[int, dict[Bidegree, object]]     # ambient coefficient columns per level
    grams: dict[int, dict[Bidegree, object]]      # level Gram matrices (None = orthonormal)
    d_mats: dict[int, dict[Bidegree, object]]     # page differential in tower bases
    images: dict[int, dict[Bidegree, object]]     # ambient del(u_{r-1}) columns (float path)
    t_constants: dict[int, dict[Bidegree, float]] # bounds for the witness maps (float path)
    dims: dict[int, dict[Bidegree, int]]
    levels: int

    def dim(self, r: int, pq: Bidegree) -> int:
        r_eff = min(r, self.levels)
        return self.dims[r_eff][pq]


class _TowerOps:
    """Backend shim: float path in the orthonormal coframe, exact path in
    the original coframe against the exact bidegree Grams."""

    def __init__(self, model: HermitianModel, exact: bool):
        self.model = model
        self.n = model.n
        self.exact = exact
        self.ar = _Arith(exact)
        if exact:
            self.cx = model.cx
            self._gram = {(p, q): model.gram_eps_exact(p, q)
                          for p in range(self.n + 1) for q in range(self.n + 1)}
            self.scale = 1.0
        else:
            self.cx = model.eta_complex
            self.scale = 1.0 + max(
                (float(np.max(np.abs(op.block((p, q))))) if op.block((p, q)).size else 0.0)
                for op in (self.cx.del_op, self.cx.dbar_op)
                for p in range(self.n + 1) for q in range(self.n + 1))

    def clean(self, m, tol: float):
        """Zero out float entries below the ambient operator scale."""
        if self.exact or m is None:
            return m
        out = np.asarray(m).copy()
        out[np.abs(out) <= tol * self.scale] = 0.0
        return out

    def block(self, which: str, pq: Bidegree):
        return _block(self.cx, which, pq, self.exact)

    def adjoint_block(self, which: str, pq: Bidegree):
        """Adjoint of del/dbar mapping INTO (p, q), i.e. acting on (p, q)."""
        p, q = pq
        src = (p, q - 1) if which == "dbar" else (p - 1, q)
        if src[0] < 0 or src[1] < 0:
            d_src = 0
            return self.ar.zeros(d_src, dim_bidegree(self.n, p, q))
        blk = self.block(which, src)
        if self.exact:
            g_src = self._gram[src]
            g_tgt = self._gram[pq]
            return xl.matmul(xl.inv(g_src), xl.matmul(xl.hconj(blk), g_tgt))
        return blk.conj().T

    def gram(self, pq: Bidegree):
        return self._gram[pq] if self.exact else None


def harmonic_tower(model: HermitianModel, max_r: int | None = None,
                   exact: bool = False, tol: float = 1e-10) -> HarmonicTower:
    """Nested metric realisations of the pages with induced differentials.

    Chain witnesses solve the full zig-zag system at once (for two-step
    chains this is the classical minimal-norm Neumann solution); page maps
    are orthogonal projections of del(u_{r-1}) onto the next frame.
    """
    n = model.n
    ops = _TowerOps(model, exact and model.cx.exact and model.metric.is_exact)
    ar = ops.ar
    cap = max_r if max_r is not None else 2 * n + 1
    betti = betti_numbers(ops.cx)
    frames: dict[int, dict[Bidegree, object]] = {1: {}}
    grams: dict[int, dict[Bidegree, object]] = {1: {}}
    d_mats: dict[int, dict[Bidegree, object]] = {}
    images: dict[int, dict[Bidegree, object]] = {}
    t_consts: dict[int, dict[Bidegree, float]] = {}
    dims: dict[int, dict[Bidegree, int]] = {}

    for p in range(n + 1):
        for q in range(n + 1):
            pq = (p, q)
            stacked = ar.vstack([ops.block("dbar", pq), ops.adjoint_block("dbar", pq)])
            frame = ar.nullspace(stacked)
            frames[1][pq] = frame
            grams[1][pq] = _level_gram(ops, frame, pq)
    dims[1] = {pq: ar.shape(f)[1] for pq, f in frames[1].items()}

    levels = 1
    for level in range(1, cap + 1):
        d_mats[level] = {}
        images[level] = {}
        t_consts[level] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                pq = (p, q)
                mat, img, tc = _tower_differential(ops, frames[level], grams[level], pq, level, tol)
                d_mats[level][pq] = mat
                images[level][pq] = img
                t_consts[level][pq] = tc
        levels = level
        if _degenerate(dims[level], betti, n):
            if not _all_zero(ar, d_mats[level]):
                raise InconsistencyError(
                    f"tower level {level} has Betti dimensions but a nonzero page map")
            break
        nxt_frames = {}
        nxt_grams = {}
        for p in range(n + 1):
            for q in range(n + 1):
                pq = (p, q)
                frame, gram = _next_level(ops, frames[level], grams[level], d_mats[level], pq, level)
                nxt_frames[pq] = frame
                nxt_grams[pq] = gram
        frames[level + 1] = nxt_frames
        grams[level + 1] = nxt_grams
        dims[level + 1] = {pq: ops.ar.shape(f)[1] for pq, f in nxt_frames.items()}
    return HarmonicTower(n=n, exact=ops.exact, frames=frames, grams=grams,
                         d_mats=d_mats, images=images, t_constants=t_consts,
                         dims=dims, levels=levels)


def _all_zero(ar: _Arith, mats: dict) -> bool:
    for m in mats.values():
        rows, cols = ar.shape(m)
        if rows and cols and ar.rank(m):
            return False
    return True


def _level_gram(ops: _TowerOps, frame, pq: Bidegree):
    if not ops.exact:
        return None
    if ops.ar.shape(frame)[1] == 0:
        return []
    return xl.matmul(xl.hconj(frame), xl.matmul(ops.gram(pq), frame))


def _tower_differential(ops: _TowerOps, frames, grams, pq: Bidegree, r: int, tol: float):
    """Page map on the level-r frame: project del(u_{r-1}) onto the target frame."""
    n = ops.n
    ar = ops.ar
    p, q = pq
    tgt = (p + r, q - r + 1)
    src_frame = frames[pq]
    m_src = ar.shape(src_frame)[1]
    valid = 0 <= tgt[0] <= n and 0 <= tgt[1] <= n
    m_tgt = ar.shape(frames[tgt])[1] if valid else 0
    empty_img = ar.zeros(dim_bidegree(n, *tgt) if valid else 0, m_src)
    if m_src == 0 or m_tgt == 0:
        return ar.zeros(m_tgt, m_src), empty_img, 0.0
    betas = _witness_images(ops, src_frame, pq, r, tol)
    tgt_frame = frames[tgt]
    if ops.exact:
        g = ops.gram(tgt)
        rhs = xl.matmul(xl.hconj(tgt_frame), xl.matmul(g, betas))
        coords = xl.solve(grams[tgt], rhs)
        tc = 0.0
    else:
        coords = ops.clean(tgt_frame.conj().T @ betas, tol)
        sv = np.linalg.svd(betas, compute_uv=False) if betas.size else np.zeros(1)
        tc = float(sv[0]) if sv.size else 0.0
    return coords, betas, tc


def _witness_images(ops: _TowerOps, src_frame, pq: Bidegree, r: int, tol: float):
    """del(u_{r-1}) for the minimal chain witnesses of every frame column."""
    ar = ops.ar
    n = ops.n
    p, q = pq
    if r == 1:
        return ar.matmul(ops.block("del", pq), src_frame)
    system, widths = _chain_system(ops.cx, pq, r, ar)
    d0 = widths[0]
    m_src = ar.shape(src_frame)[1]
    # constrain x_0 = alpha: move it to the right-hand side
    sys_rows = ar.shape(system)[0]
    lhs = _cols_slice(ar, system, d0, sum(widths) - d0)
    rhs_mat = ar.matmul(_cols_slice(ar, system, 0, d0), src_frame)
    rhs = _negate(ar, rhs_mat)
    if ops.exact:
        sol = xl.solve(lhs, rhs)
        if sol is None:
            raise InconsistencyError(
                f"chain equations unsolvable for a level-{r} element at {pq}")
    else:
        sol, res = min_norm_solve(lhs, rhs)
        scale = max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 0.0)
        if res > tol * scale * 1e2:
            raise InconsistencyError(
                f"chain equations unsolvable for a level-{r} element at {pq} "
                f"(residual {res:.3e})")
    top = _rows_slice(ar, sol, sum(widths[1:r - 1]), widths[r - 1])
    return ar.matmul(ops.block("del", (p + r - 1, q - r + 1)), top)


def _cols_slice(ar: _Arith, m, off: int, count: int):
    if ar.exact:
        return [row[off:off + count] for row in m]
    return m[:, off:off + count]


def _negate(ar: _Arith, m):
    if ar.exact:
        return [[-x for x in row] for row in m]
    return -m


def _next_level(ops: _TowerOps, frames, grams, d_mats, pq: Bidegree, r: int):
    """ker(d_r) minus the metric-orthogonal complement of im(d_r) inside it."""
    n = ops.n
    ar = ops.ar
    p, q = pq
    frame = frames[pq]
    m_here = ar.shape(frame)[1]
    if m_here == 0:
        return frame, grams[pq]
    out_mat = d_mats[pq]
    src = (p - r, q + r - 1)
    in_mat = d_mats.get(src) if 0 <= src[0] <= n and 0 <= src[1] <= n else None
    rows = []
    if ar.shape(out_mat)[0]:
        rows.append(out_mat)
    if in_mat is not None and ar.shape(in_mat)[1]:
        # orthogonality to the incoming image, in level coordinates
        g = grams[pq]
        if ops.exact:
            rows.append(xl.matmul(xl.hconj(in_mat), g))
        else:
            rows.append(in_mat.conj().T)
    if not rows:
        return frame, grams[pq]
    stacked = ar.vstack(rows)
    coeffs = ar.nullspace(stacked)
    new_frame = ar.matmul(frame, coeffs)
    if ops.exact:
        new_gram = xl.matmul(xl.hconj(coeffs), xl.matmul(grams[pq], coeffs))
    else:
        new_gram = None
    return new_frame, new_gram


# ---------------------------------------------------------------------------
# assembled page set and statistics
# ---------------------------------------------------------------------------

@dataclass
class SpectralPageSet:
    n: int
    betti: list[int]
    dims: dict[int, dict[Bidegree, int]]
    ranks: dict[int, dict[Bidegree, int]]
    reps: dict[int, dict[Bidegree, object]]
    chains: dict[int, dict[Bidegree, list]]
    d_mats: dict[int, dict[Bidegree, object]]
    degeneration_page: int
    exact: bool
    method_dims: dict[str, dict[int, dict[Bidegree, int]]] = field(default_factory=dict)

    @property
    def max_page(self) -> int:
        return max(self.dims)

    def dim(self, r: int, pq: Bidegree) -> int:
        r_eff = min(r, self.max_page)
        return self.dims[r_eff][pq]

    def dim_degree(self, r: int, k: int) -> int:
        return sum(self.dim(r, pq) for pq in degree_bidegrees(self.n, k))

    def rank_d(self, r: int, pq: Bidegree) -> int:
        if r > self.max_page or r not in self.ranks:
            return 0
        return self.ranks[r].get(pq, 0)

    def m_number(self, r: int, k: int) -> int:
        """Sum of rank d_l over l >= r and p+q = k."""
        total = 0
        for l in range(r, self.max_page + 1):
            if l not in self.ranks:
                continue
            for pq in degree_bidegrees(self.n, k):
                total += self.rank_d(l, pq)
        return total

    def dims_table(self) -> dict:
        return {r: {f"{p},{q}": v for (p, q), v in sorted(by.items()) if v}
                for r, by in sorted(self.dims.items())}


def compute_pages(cx: BigradedComplex, model: HermitianModel | None = None,
                  max_r: int | None = None, exact: bool = True) -> SpectralPageSet:
    """All three methods, cross-checked; raises InconsistencyError on mismatch."""
    filt_dims, betti = pages_by_filtration(cx, max_r=max_r, exact=exact)
    chain = pages_by_chain_condition(cx, max_r=max_r, exact=exact)
    n = cx.n
    top = max(filt_dims)
    for r in range(1, top + 1):
        a = filt_dims.get(r)
        b = chain.dims.get(min(r, max(chain.dims)))
        if a != b:
            raise InconsistencyError(
                f"page dimensions disagree at r={r}: filtration {a} vs chain {b}")
    tower_dims = None
    if model is not None:
        tower = harmonic_tower(model, max_r=max_r, exact=exact)
        tower_dims = tower.dims
        for r in range(1, top + 1):
            td = tower.dims[min(r, tower.levels)]
            if td != filt_dims[r]:
                raise InconsistencyError(
                    f"page dimensions disagree at r={r}: filtration {filt_dims[r]} vs tower {td}")
    degeneration = max(filt_dims)
    for r in sorted(filt_dims):
        if r >= 1 and _degenerate(filt_dims[r], betti, n):
            degeneration = r
            break
    method_dims = {"filtration": filt_dims, "chain": chain.dims}
    if tower_dims is not None:
        method_dims["tower"] = tower_dims
    return SpectralPageSet(
        n=n, betti=betti, dims=filt_dims, ranks=chain.ranks, reps=chain.reps,
        chains=chain.chains, d_mats=chain.d_mats, degeneration_page=degeneration,
        exact=chain.exact, method_dims=method_dims)


@dataclass
class PageStatistics:
    betti: list[int]
    dim_identity_ok: bool          # dim E_r^k = b_k + m_r^{k-1} + m_r^k
    duality_ok: bool               # dim E_r^k = dim E_r^{2n-k}
    euler_ok: bool                 # alternating sum constant in r
    d_squared_ok: bool
    bidegree_shift_ok: bool        # page maps land r steps up the filtration
    failures: list[str]


def page_statistics(pages: SpectralPageSet) -> PageStatistics:
    n = pages.n
    failures = []
    for r in range(0, pages.max_page + 1):
        for k in range(2 * n + 1):
            lhs = pages.dim_degree(r, k)
            rhs = pages.betti[k] + pages.m_number(r, k - 1) + pages.m_number(r, k)
            if lhs != rhs:
                failures.append(f"dim identity fails at (r={r}, k={k}): {lhs} != {rhs}")
    dim_ok = not failures
    dual_fail = []
    for r in range(1, pages.max_page + 1):
        for k in range(2 * n + 1):
            if pages.dim_degree(r, k) != pages.dim_degree(r, 2 * n - k):
                dual_fail.append(f"duality fails at (r={r}, k={k})")
    euler_fail = []
    euler_ref = sum((-1) ** k * pages.betti[k] for k in range(2 * n + 1))
    for r in range(1, pages.max_page + 1):
        euler = sum((-1) ** k * pages.dim_degree(r, k) for k in range(2 * n + 1))
        if euler != euler_ref:
            euler_fail.append(f"euler characteristic drifts at r={r}: {euler} != {euler_ref}")
    dsq_fail = []
    ar = _Arith(pages.exact)
    for r in range(1, pages.max_page + 1):
        if r not in pages.d_mats:
            continue
        for (p, q), m1 in pages.d_mats[r].items():
            tgt = (p + r, q - r + 1)
            if tgt not in pages.d_mats[r]:
                continue
            m2 = pages.d_mats[r][tgt]
            if ar.shape(m1)[1] and ar.shape(m2)[0] and ar.shape(m1)[0]:
                prod = ar.matmul(m2, m1)
                if ar.rank(prod):
                    dsq_fail.append(f"d_r o d_r != 0 at (r={r}, p={p}, q={q})")
    shift_fail = []
    for r in range(1, pages.max_page + 1):
        for (p, q) in pages.ranks.get(r, {}):
            if pages.rank_d(r, (p, q)) and not (p + r <= n and 0 <= q - r + 1 <= n):
                shift_fail.append(f"page map escapes the algebra at (r={r}, p={p}, q={q})")
    failures += dual_fail + euler_fail + dsq_fail + shift_fail
    return PageStatistics(
        betti=pages.betti,
        dim_identity_ok=dim_ok,
        duality_ok=not dual_fail,
        euler_ok=not euler_fail,
        d_squared_ok=not dsq_fail,
        bidegree_shift_ok=not shift_fail,
        failures=failures,
    )


def formal_page_laplacian(tower: HarmonicTower, r: int, k: int) -> tuple[np.ndarray, int]:
    """d_r d_r* + d_r* d_r on the level-r frames of total degree k (float path)."""
    if tower.exact:
        raise InconsistencyError("formal page Laplacian is a float-path construction")
    r_eff = min(r, tower.levels)
    up = _tower_degree_matrix(tower, r_eff, k)
    down = _tower_degree_matrix(tower, r_eff, k - 1)
    lap = up.conj().T @ up + down @ down.conj().T
    if lap.size == 0:
        return lap, 0
    w = eigvalsh_c(lap)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    dim_ker = int(np.sum(np.abs(w) <= 1e3 * np.finfo(float).eps * scale))
    return lap, dim_ker


def _tower_degree_matrix(tower: HarmonicTower, r: int, k: int) -> np.ndarray:
    """Assembled d_r from tower degree k to k+1 in the orthonormal tower frames."""
    n = tower.n
    srcs = list(degree_bidegrees(n, k)) if 0 <= k <= 2 * n else []
    tgts = list(degree_bidegrees(n, k + 1)) if k + 1 <= 2 * n else []
    r_eff = min(r, tower.levels)
    src_dims = [tower.dims[r_eff][pq] for pq in srcs]
    tgt_dims = [tower.dims[r_eff][pq] for pq in tgts]
    out = np.zeros((sum(tgt_dims), sum(src_dims)), dtype=complex)
    if r not in tower.d_mats:
        return out
    for si, pq in enumerate(srcs):
        tgt = (pq[0] + r, pq[1] - r + 1)
        if tgt not in tgts:
            continue
        ti = tgts.index(tgt)
        m = tower.d_mats[r][pq]
        r0 = sum(tgt_dims[:ti])
        c0 = sum(src_dims[:si])
        out[r0:r0 + m.shape[0], c0:c0 + m.shape[1]] = m
    return out
