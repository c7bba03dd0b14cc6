"""Float linear-algebra kernel.

Complex Hermitian eigenproblems are solved through the real symmetric
2m x 2m embedding [[A, -B], [B, A]] of H = A + iB; every eigenvalue of H
appears twice, so the spectrum is recovered by pairing, and eigenvectors
by re-orthonormalising x + iy within each eigenvalue group.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericError, UsageError

RANK_RTOL = 1e-10


def real_embedding(h: np.ndarray) -> np.ndarray:
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


def eigvalsh_c(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a complex Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        return np.zeros(0)
    _check_hermitian(h)
    w = np.linalg.eigvalsh(real_embedding(h))
    return 0.5 * (w[0::2] + w[1::2])


def eigh_c(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and an orthonormal complex eigenbasis (columns)."""
    h = np.asarray(h, dtype=complex)
    m = h.shape[0]
    if m == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    _check_hermitian(h)
    w2, v2 = np.linalg.eigh(real_embedding(h))
    scale = max(1.0, float(np.max(np.abs(w2))))
    groups = _even_groups(w2, 1e-7 * scale)
    vals = []
    vecs = []
    for lo, hi in groups:
        size = hi - lo
        cand = v2[:m, lo:hi] + 1j * v2[m:, lo:hi]
        u, s, _ = np.linalg.svd(cand, full_matrices=False)
        take = size // 2
        vals.extend([float(np.mean(w2[lo:hi]))] * take)
        vecs.append(u[:, :take])
    v = np.hstack(vecs) if vecs else np.zeros((m, 0), dtype=complex)
    return np.array(vals), v


def _even_groups(w: np.ndarray, tol: float) -> list[tuple[int, int]]:
    cuts = [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol:
            cuts.append(i)
    cuts.append(len(w))
    groups = [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]
    # embedding eigenvalues pair up; merge any odd group with its successor
    merged: list[tuple[int, int]] = []
    for g in groups:
        if merged and (merged[-1][1] - merged[-1][0]) % 2:
            merged[-1] = (merged[-1][0], g[1])
        else:
            merged.append(g)
    if merged and (merged[-1][1] - merged[-1][0]) % 2:
        raise NumericError("eigenvalue pairing failed in real embedding")
    return merged


def _check_hermitian(h: np.ndarray, rtol: float = 1e-10):
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    if float(np.max(np.abs(h - h.conj().T))) > rtol * scale:
        raise UsageError("matrix is not Hermitian within tolerance")


def svd_rank(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > max(m.shape) * s[0] * rtol))


def nullspace(m: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal columns spanning ker(m)."""
    m = np.asarray(m, dtype=complex)
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    u, s, vh = np.linalg.svd(m)
    if s.size and s[0] > 0:
        r = int(np.sum(s > max(m.shape) * s[0] * rtol))
    else:
        r = 0
    return vh[r:].conj().T


def orthonormal_range(m: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal columns spanning the column space of m."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    r = int(np.sum(s > max(m.shape) * s[0] * rtol))
    return u[:, :r]


def complement_within(frame: np.ndarray, sub: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(frame) minus the projection onto span(sub).

    Both arguments must have orthonormal columns in the ambient space.
    """
    if frame.shape[1] == 0:
        return frame
    if sub.shape[1] == 0:
        return frame
    resid = frame - sub @ (sub.conj().T @ frame)
    return orthonormal_range(resid)


def min_norm_solve(a: np.ndarray, b: np.ndarray, rtol: float = RANK_RTOL):
    """Minimum-norm least-squares solution and the residual norm."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[1] == 0:
        return np.zeros((0,) + b.shape[1:], dtype=complex), float(np.linalg.norm(b))
    x, *_ = np.linalg.lstsq(a, b, rcond=rtol)
    return x, float(np.linalg.norm(a @ x - b))


def pinv_apply(h: np.ndarray, b: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse action with the shared rank cutoff."""
    if h.size == 0:
        return np.zeros_like(b)
    return np.linalg.pinv(h, rcond=rtol) @ b


def projector(frame: np.ndarray) -> np.ndarray:
    return frame @ frame.conj().T


def subspace_gap(frame_a: np.ndarray, frame_b: np.ndarray) -> float:
    """Spectral distance between projectors onto two orthonormal frames."""
    pa, pb = projector(frame_a), projector(frame_b)
    if pa.size == 0 and pb.size == 0:
        return 0.0
    return float(np.linalg.norm(pa - pb, 2))
