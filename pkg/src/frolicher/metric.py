"""Hermitian metrics on the invariant coframe and the induced machinery.

The metric is the Gram matrix g of the (1,0)-coframe.  All operators are
realised in a g-orthonormal coframe (eta-basis), where the Gram of every
(p, q) component is the identity and adjoints are conjugate transposes.
The total volume is normalised to 1, so the global L2 pairing of invariant
forms coincides with the pointwise one.

Rescalings: the h-metric multiplies the pointwise product of (p, q)-forms
by h^(2p); its global pairing carries the extra volume factor h^(-2n).
"""
from __future__ import annotations

from functools import cached_property, lru_cache
from itertools import combinations

import numpy as np

from . import exactlin as xl
from .errors import MetricError, UsageError
from .exterior import bidegree_monomials, dim_bidegree, degree_bidegrees
from .graded import GradedOperator, conj_matrix, wedge_operator
from .model import BigradedComplex, InvariantComplexStructure, exterior_derivatives


def compound_matrix(m: np.ndarray, p: int) -> np.ndarray:
    """p-th compound: entries det(m[rows, cols]) over lexicographic p-subsets."""
    n = m.shape[0]
    subsets = list(combinations(range(n), p))
    out = np.zeros((len(subsets), len(subsets)), dtype=complex)
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(m[np.ix_(rows, cols)])
    return out


def compound_matrix_exact(m: xl.Matrix, p: int) -> xl.Matrix:
    n = len(m)
    subsets = list(combinations(range(n), p))
    out = xl.zeros(len(subsets), len(subsets))
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            out[a][b] = _det_exact([[m[i][j] for j in cols] for i in rows])
    return out


def _det_exact(m: xl.Matrix) -> xl.QQi:
    size = len(m)
    if size == 0:
        return xl.ONE
    if size == 1:
        return m[0][0]
    total = xl.ZERO
    for j in range(size):
        if not m[0][j]:
            continue
        minor = [[row[c] for c in range(size) if c != j] for row in m[1:]]
        term = m[0][j] * _det_exact(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def gram_bidegree(g: np.ndarray, p: int, q: int) -> np.ndarray:
    """Gram matrix of the (p, q) monomial basis induced by the coframe Gram g."""
    return np.kron(compound_matrix(g, p).T, compound_matrix(np.conj(g), q).T)


def gram_bidegree_exact(g: xl.Matrix, p: int, q: int) -> xl.Matrix:
    cp = compound_matrix_exact(g, p)
    cq = compound_matrix_exact([[e.conjugate() for e in row] for row in g], q)
    rows_p = len(cp)
    rows_q = len(cq)
    out = xl.zeros(rows_p * rows_q, rows_p * rows_q)
    for a in range(rows_p):
        for i in range(rows_p):
            for b in range(rows_q):
                for j in range(rows_q):
                    out[a * rows_q + b][i * rows_q + j] = cp[i][a] * cq[j][b]
    return out


class HermitianMetric:
    """Positive-definite Hermitian Gram matrix of the (1,0)-coframe."""

    def __init__(self, g, exact_g: xl.Matrix | None = None):
        g = np.asarray(g, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise MetricError(f"metric must be square, got shape {g.shape}")
        if float(np.max(np.abs(g - g.conj().T))) > 1e-12 * max(1.0, float(np.max(np.abs(g)))):
            raise MetricError("metric matrix is not Hermitian")
        smallest = float(np.min(np.linalg.eigvalsh(g)))
        if smallest <= 0:
            raise MetricError(f"metric is not positive definite (smallest eigenvalue {smallest:.3e})")
        self.g = g
        self.exact_g = exact_g

    @classmethod
    def identity(cls, n: int) -> "HermitianMetric":
        return cls(np.eye(n), exact_g=xl.eye(n))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.exact_g is not None

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower factor L with g = L L^H; the orthonormal coframe is eta = L^-1 eps."""
        return np.linalg.cholesky(self.g)

    @cached_property
    def coframe_change(self) -> np.ndarray:
        return np.linalg.inv(self.cholesky)


def random_pd_metric(n: int, seed: int) -> HermitianMetric:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    g = np.eye(n) + 0.25 * (a @ a.conj().T) / n
    return HermitianMetric(g)


class HermitianModel:
    """An invariant complex structure together with a Hermitian metric,
    realised in the g-orthonormal coframe."""

    def __init__(self, structure: InvariantComplexStructure, metric: HermitianMetric | None = None):
        self.structure = structure
        self.n = structure.n
        self.cx = exterior_derivatives(structure)
        self.metric = metric if metric is not None else HermitianMetric.identity(self.n)
        if self.metric.n != self.n:
            raise MetricError(f"metric is {self.metric.n}x{self.metric.n}, structure has n={self.n}")
        self._basis_change = self._build_basis_change()
        self.del_op, self.dbar_op = self._transform_complex()

    # -- coframe transformation ----------------------------------------

    def _build_basis_change(self):
        d = self.metric.cholesky          # eps = D eta
        c = self.metric.coframe_change    # eta = C eps
        fwd = {}
        bwd = {}
        for p in range(self.n + 1):
            cp_d = compound_matrix(d, p).T
            cp_c = compound_matrix(c, p).T
            for q in range(self.n + 1):
                cq_d = compound_matrix(np.conj(d), q).T
                cq_c = compound_matrix(np.conj(c), q).T
                fwd[(p, q)] = np.kron(cp_d, cq_d)   # eps-coefficients -> eta-coefficients
                bwd[(p, q)] = np.kron(cp_c, cq_c)
        return fwd, bwd

    def to_eta(self, pq, vec: np.ndarray) -> np.ndarray:
        return self._basis_change[0][pq] @ vec

    def to_eps(self, pq, vec: np.ndarray) -> np.ndarray:
        return self._basis_change[1][pq] @ vec

    def _transform_complex(self):
        fwd, bwd = self._basis_change
        del_blocks = {}
        dbar_blocks = {}
        for p in range(self.n + 1):
            for q in range(self.n + 1):
                if p + 1 <= self.n:
                    del_blocks[(p, q)] = fwd[(p + 1, q)] @ self.cx.del_op.block((p, q)) @ bwd[(p, q)]
                if q + 1 <= self.n:
                    dbar_blocks[(p, q)] = fwd[(p, q + 1)] @ self.cx.dbar_op.block((p, q)) @ bwd[(p, q)]
        return (GradedOperator.pure(self.n, (1, 0), del_blocks),
                GradedOperator.pure(self.n, (0, 1), dbar_blocks))

    @cached_property
    def eta_complex(self) -> BigradedComplex:
        """The transformed complex; exact blocks survive only for the identity metric."""
        identity_metric = bool(np.allclose(self.metric.g, np.eye(self.n), atol=0))
        keep_exact = identity_metric and self.cx.exact
        return BigradedComplex(
            n=self.n,
            name=self.structure.name,
            exact=keep_exact,
            del_op=self.del_op,
            dbar_op=self.dbar_op,
            del_exact=self.cx.del_exact if keep_exact else None,
            dbar_exact=self.cx.dbar_exact if keep_exact else None,
        )

    # -- inner products -------------------------------------------------

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Base inner product of eta-coefficient vectors of equal bidegree."""
        return complex(np.vdot(v, u))

    def rescaled_inner(self, u, v, h: float, pq) -> complex:
        """Pointwise h-rescaled product on (p, q)-forms: h^(2p) <u, v>."""
        _check_h(h)
        return (h ** (2 * pq[0])) * self.inner(u, v)

    def global_rescaled_inner(self, u, v, h: float, pq) -> complex:
        """Global L2 product of the rescaled metric: h^(-2(n-p)) <<u, v>>."""
        _check_h(h)
        return (h ** (-2 * (self.n - pq[0]))) * self.inner(u, v)

    def pointwise_weight(self, h: float):
        _check_h(h)
        return lambda p: h ** (2 * p)

    def global_weights_degree(self, k: int, h: float) -> np.ndarray:
        """Diagonal of the global h-metric Gram on the degree-k assembly."""
        _check_h(h)
        parts = []
        for (p, q) in degree_bidegrees(self.n, k):
            parts.append(np.full(dim_bidegree(self.n, p, q), h ** (-2 * (self.n - p))))
        return np.concatenate(parts) if parts else np.zeros(0)

    # -- distinguished operators ----------------------------------------

    def theta(self, h: float) -> GradedOperator:
        """The rescaling isometry u |-> h^p u on (p, q)-forms."""
        _check_h(h)
        return GradedOperator.scalar_by_bidegree(self.n, lambda p, q: h ** p)

    @cached_property
    def omega_coeffs(self) -> dict[tuple[int, ...], complex]:
        return {(a, self.n + a): 1j for a in range(self.n)}

    @cached_property
    def omega_vec(self) -> np.ndarray:
        idx = {m: i for i, m in enumerate(bidegree_monomials(self.n, 1, 1))}
        vec = np.zeros(dim_bidegree(self.n, 1, 1), dtype=complex)
        for mono, c in self.omega_coeffs.items():
            vec[idx[mono]] = c
        return vec

    @cached_property
    def lefschetz(self) -> GradedOperator:
        return wedge_operator(self.n, self.omega_coeffs, (1, 1))

    @cached_property
    def lefschetz_adjoint(self) -> GradedOperator:
        return self.lefschetz.adjoint()

    def lefschetz_pair(self) -> tuple[GradedOperator, GradedOperator]:
        return self.lefschetz, self.lefschetz_adjoint

    @cached_property
    def hodge_star(self) -> GradedOperator:
        """Star operator with u ^ star(conj v) = <u, v> dV and dV = omega^n / n!.

        Maps (q, p) -> (n - p, n - q); realised per block by inverting the
        signed wedge pairing against the complementary monomials.
        """
        n = self.n
        shift_parts: dict[tuple[int, int], dict] = {}
        for p in range(n + 1):
            for q in range(n + 1):
                src = (q, p)
                tgt = (n - p, n - q)
                block = _antilinear_star_matrix(n, p, q) @ conj_matrix(n, q, p)
                shift = (tgt[0] - src[0], tgt[1] - src[1])
                shift_parts.setdefault(shift, {})[src] = block
        return GradedOperator(self.n, shift_parts)

    def multiplication(self, pq, vec: np.ndarray) -> GradedOperator:
        """Left wedge multiplication by the (p, q)-form with eta-coefficients vec."""
        monos = bidegree_monomials(self.n, *pq)
        coeffs = {m: complex(c) for m, c in zip(monos, vec) if c != 0}
        return wedge_operator(self.n, coeffs, pq)

    def gram_eps(self, p: int, q: int) -> np.ndarray:
        """Gram of the (p, q) monomial basis in the original coframe."""
        return gram_bidegree(self.metric.g, p, q)

    def gram_eps_exact(self, p: int, q: int) -> xl.Matrix:
        if not self.metric.is_exact:
            raise MetricError("exact Gram requested for an inexact metric")
        return gram_bidegree_exact(self.metric.exact_g, p, q)


def _check_h(h: float):
    if not (h > 0):
        raise UsageError(f"scale h must be positive, got {h}")


@lru_cache(maxsize=None)
def _volume_unit(n: int) -> complex:
    """dV = c Vol with Vol the ordered top monomial; c = i^n (-1)^(n(n-1)/2)."""
    return (1j ** n) * ((-1) ** (n * (n - 1) // 2))


def _antilinear_star_matrix(n: int, p: int, q: int) -> np.ndarray:
    """Matrix A with star(conj v) = A conj(coeffs v) for v in (p, q)."""
    from .exterior import wedge_monomials

    src = bidegree_monomials(n, p, q)
    tgt = bidegree_monomials(n, n - p, n - q)
    tgt_index = {m: i for i, m in enumerate(tgt)}
    pairing = np.zeros((len(src), len(tgt)), dtype=complex)
    c = _volume_unit(n)
    for a, wa in enumerate(src):
        for b, zb in enumerate(tgt):
            w = wedge_monomials(wa, zb)
            if w is not None:
                pairing[a, b] = w[0] / c
    # pairing is an invertible signed permutation (over dV units)
    return np.linalg.inv(pairing)
