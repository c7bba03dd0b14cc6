"""Adjoints, Laplacians, torsion operators and their verification.

Everything acts in the g-orthonormal coframe, where the omega-adjoint is
the blockwise conjugate transpose and the h-metric adjoint carries the
weight h^(2p) of the source holomorphic degree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError, VerificationError
from .graded import GradedOperator, degree_dim
from .metric import HermitianModel
from .numerics import eigh_c, eigvalsh_c, nullspace, subspace_gap


def adjoint(op: GradedOperator, model: HermitianModel, inner: str = "omega", h: float | None = None) -> GradedOperator:
    """Adjoint w.r.t. the base metric or the h-rescaled one."""
    if inner == "omega":
        return op.adjoint()
    if inner == "omega_h":
        if h is None:
            raise UsageError("h is required for the omega_h adjoint")
        return op.adjoint(weight=model.pointwise_weight(h))
    raise UsageError(f"unknown inner product {inner!r}")


@dataclass
class TorsionOperators:
    tau: GradedOperator
    tau_bar: GradedOperator
    tau_star: GradedOperator
    tau_bar_star: GradedOperator
    tau_bracket: GradedOperator       # [tau, tau*]
    tau_bar_bracket: GradedOperator   # [tau_bar, tau_bar*]
    x_omega: GradedOperator           # [del(omega) wedge, (del(omega) wedge)*]
    x_omega_bar: GradedOperator
    delta_prime_tau: GradedOperator   # [del + tau, (del + tau)*]
    del_omega_mult: GradedOperator
    dbar_omega_mult: GradedOperator


def torsion_operators(model: HermitianModel) -> TorsionOperators:
    cached = getattr(model, "_torsion_cache", None)
    if cached is not None:
        return cached
    del_omega = model.del_op.block((1, 1)) @ model.omega_vec
    dbar_omega = model.dbar_op.block((1, 1)) @ model.omega_vec
    m_del = model.multiplication((2, 1), del_omega)
    m_dbar = model.multiplication((1, 2), dbar_omega)
    lam = model.lefschetz_adjoint
    tau = lam.commutator(m_del)
    tau_bar = tau.conjugate()
    tau_star = tau.adjoint()
    tau_bar_star = tau_bar.adjoint()
    result = TorsionOperators(
        tau=tau,
        tau_bar=tau_bar,
        tau_star=tau_star,
        tau_bar_star=tau_bar_star,
        tau_bracket=tau.commutator(tau_star),
        tau_bar_bracket=tau_bar.commutator(tau_bar_star),
        x_omega=m_del.commutator(m_del.adjoint()),
        x_omega_bar=m_dbar.commutator(m_dbar.adjoint()),
        delta_prime_tau=(model.del_op + tau).commutator((model.del_op + tau).adjoint()),
        del_omega_mult=m_del,
        dbar_omega_mult=m_dbar,
    )
    model._torsion_cache = result
    return result


@dataclass
class OperatorSuite:
    model: HermitianModel
    h: float
    del_op: GradedOperator
    dbar_op: GradedOperator
    d: GradedOperator
    del_star: GradedOperator
    dbar_star: GradedOperator
    d_star: GradedOperator
    d_h: GradedOperator
    d_h_star: GradedOperator
    d_omega_h_star: GradedOperator
    delta_prime: GradedOperator
    delta_second: GradedOperator
    delta: GradedOperator
    delta_h: GradedOperator
    delta_omega_h: GradedOperator
    torsion: TorsionOperators

    def laplacians(self):
        return {
            "delta_prime": self.delta_prime,
            "delta_second": self.delta_second,
            "delta": self.delta,
            "delta_h": self.delta_h,
            "delta_omega_h": self.delta_omega_h,
        }


def build_suite(model: HermitianModel, h: float) -> OperatorSuite:
    if not (h > 0):
        raise UsageError(f"h must be positive, got {h}")
    dl, db = model.del_op, model.dbar_op
    d = dl + db
    dl_s, db_s = dl.adjoint(), db.adjoint()
    d_s = dl_s + db_s
    d_h = h * dl + db
    d_h_s = h * dl_s + db_s
    d_oh_s = (h * h) * dl_s + db_s   # omega_h adjoints: del* gains h^2, dbar* unchanged
    suite = OperatorSuite(
        model=model,
        h=h,
        del_op=dl,
        dbar_op=db,
        d=d,
        del_star=dl_s,
        dbar_star=db_s,
        d_star=d_s,
        d_h=d_h,
        d_h_star=d_h_s,
        d_omega_h_star=d_oh_s,
        delta_prime=dl.commutator(dl_s),
        delta_second=db.commutator(db_s),
        delta=d.commutator(d_s),
        delta_h=d_h.commutator(d_h_s),
        delta_omega_h=d.commutator(d_oh_s),
        torsion=torsion_operators(model),
    )
    _check_expansion(suite)
    return suite


def _check_expansion(suite: OperatorSuite, tol: float = 1e-12):
    """delta_h = h^2 delta' + delta'' + h[del, dbar*] + h[dbar, del*]."""
    h = suite.h
    cross1 = suite.del_op.commutator(suite.dbar_star)
    cross2 = suite.dbar_op.commutator(suite.del_star)
    rhs = (h * h) * suite.delta_prime + suite.delta_second + h * cross1 + h * cross2
    res = (suite.delta_h - rhs).max_block_residual()
    scale = max(1.0, suite.delta_h.max_block_residual())
    if res > tol * scale:
        raise VerificationError(f"rescaled-Laplacian expansion residual {res:.3e}")


@dataclass
class BknReport:
    residual: float
    scale: float
    commutation_residuals: dict[str, float]
    tolerance: float

    @property
    def ok(self) -> bool:
        checks = [self.residual <= self.tolerance * self.scale]
        checks += [v <= self.tolerance * max(1.0, self.scale)
                   for v in self.commutation_residuals.values()]
        return all(checks)


def verify_bkn(model: HermitianModel, tol: float = 1e-10) -> BknReport:
    """Bochner-Kodaira-Nakano identity for Hermitian metrics, plus the torsion
    commutation rules it rests on.

    delta'' = [del + tau, (del + tau)*] + [L*, [L*, (i/2) del dbar omega]]
              - [del(omega) wedge, (del(omega) wedge)*]
    """
    suite = build_suite(model, 1.0)
    tors = suite.torsion
    lam = model.lefschetz_adjoint
    ddbar_omega = model.del_op.block((1, 2)) @ (model.dbar_op.block((1, 1)) @ model.omega_vec)
    m_ddbar = model.multiplication((2, 2), 0.5j * ddbar_omega)
    correction = lam.commutator(lam.commutator(m_ddbar))
    rhs = tors.delta_prime_tau + correction - tors.x_omega
    residual = (suite.delta_second - rhs).max_block_residual()
    scale = max(1.0, suite.delta_second.max_block_residual())

    cross = suite.del_op.commutator(suite.dbar_star)
    comm = {
        "[del,dbar*]+[del,taubar*]": (cross + suite.del_op.commutator(tors.tau_bar_star)).max_block_residual(),
        "[del,dbar*]+[tau,dbar*]": (cross + tors.tau.commutator(suite.dbar_star)).max_block_residual(),
    }
    report = BknReport(residual=residual, scale=scale, commutation_residuals=comm, tolerance=tol)
    if not report.ok:
        raise VerificationError(
            f"metric-convention anchor failed: BKN residual {residual:.3e} "
            f"(scale {scale:.3e}), commutators {comm}")
    return report


def skt_defect(model: HermitianModel) -> float:
    """Norm of del dbar omega; zero characterises an SKT metric."""
    ddbar_omega = model.del_op.block((1, 2)) @ (model.dbar_op.block((1, 1)) @ model.omega_vec)
    return float(np.linalg.norm(ddbar_omega))


@dataclass
class TildeDelta:
    projector_blocks: dict[tuple[int, int], np.ndarray]       # p'' per bidegree
    kernel_frames: dict[tuple[int, int], np.ndarray]          # ker(delta'') frames
    blocks: dict[tuple[int, int], np.ndarray]                 # tilde-Delta per bidegree
    kernel_dims: dict[tuple[int, int], int]

    def operator(self, n: int) -> GradedOperator:
        return GradedOperator.pure(n, (0, 0), self.blocks)


def tilde_delta(model: HermitianModel, tol: float = 1e-12) -> TildeDelta:
    """Projector-based Laplacian del p'' del* + del* p'' del + delta''.

    Its kernel per bidegree realises the second page; verified here against
    the intersection-of-kernels description.
    """
    n = model.n
    dl, db = model.del_op, model.dbar_op
    dl_s, db_s = dl.adjoint(), db.adjoint()
    delta_second = db.commutator(db_s)
    op_scale = 1.0 + max(dl.max_block_residual(), db.max_block_residual())

    def clean(m: np.ndarray) -> np.ndarray:
        out = m.copy()
        out[np.abs(out) <= tol * op_scale ** 2] = 0.0
        return out

    projector_blocks = {}
    kernel_frames = {}
    blocks = {}
    kernel_dims = {}
    for p in range(n + 1):
        for q in range(n + 1):
            pq = (p, q)
            frame = nullspace(np.vstack([db.block(pq), db_s.block(pq)]))
            projector_blocks[pq] = frame @ frame.conj().T
            kernel_frames[pq] = frame
    for p in range(n + 1):
        for q in range(n + 1):
            pq = (p, q)
            term_up = dl_s.block((p + 1, q)) @ projector_blocks[(p + 1, q)] @ dl.block(pq) \
                if p + 1 <= n else np.zeros((model.cx.dim(p, q),) * 2)
            term_down = dl.block((p - 1, q)) @ projector_blocks[(p - 1, q)] @ dl_s.block(pq) \
                if p - 1 >= 0 else np.zeros((model.cx.dim(p, q),) * 2)
            block = term_up + term_down + delta_second.block(pq)
            blocks[pq] = block
            # kernel as intersection: dbar, dbar*, p''del, p''del*
            pieces = [clean(db.block(pq)), clean(db_s.block(pq))]
            if p + 1 <= n:
                pieces.append(clean(projector_blocks[(p + 1, q)] @ dl.block(pq)))
            if p - 1 >= 0:
                pieces.append(clean(projector_blocks[(p - 1, q)] @ dl_s.block(pq)))
            inter = nullspace(np.vstack(pieces))
            w = eigvalsh_c(block)
            scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
            dim_ker = int(np.sum(np.abs(w) <= 1e3 * np.finfo(float).eps * scale + tol * scale))
            if dim_ker != inter.shape[1]:
                raise VerificationError(
                    f"tilde-Delta kernel mismatch at {pq}: spectral {dim_ker} vs intersection {inter.shape[1]}")
            kernel_dims[pq] = dim_ker
    return TildeDelta(projector_blocks, kernel_frames, blocks, kernel_dims)


@dataclass
class RescalingReport:
    conjugation_residual: float
    spectra_max_dev: float
    eigenspace_residual: float
    pure_type_residual: float
    generalized_vs_conjugated: float
    tolerance_conjugation: float
    tolerance_spectra: float

    @property
    def ok(self) -> bool:
        return (self.conjugation_residual <= self.tolerance_conjugation
                and self.spectra_max_dev <= self.tolerance_spectra
                and self.eigenspace_residual <= self.tolerance_spectra
                and self.pure_type_residual <= 1e-10
                and self.generalized_vs_conjugated <= self.tolerance_spectra)


def verify_rescaling_relations(model: HermitianModel, h: float,
                               tol_conj: float = 1e-11, tol_spec: float = 1e-9,
                               seed: int = 7) -> RescalingReport:
    """Conjugation relation, isospectrality and eigenspace transport under theta_h."""
    suite = build_suite(model, h)
    n = model.n
    theta = model.theta(h)
    theta_inv = model.theta(1.0 / h)
    conj_res = (suite.delta_h - theta @ suite.delta_omega_h @ theta_inv).max_block_residual()

    conjugated = theta @ suite.delta_omega_h @ theta_inv
    spectra_dev = 0.0
    eig_res = 0.0
    gen_dev = 0.0
    rng = np.random.default_rng(seed)
    for k in range(2 * n + 1):
        m_h = suite.delta_h.total_matrix(k)
        if m_h.size == 0:
            continue
        w = model.global_weights_degree(k, h)
        sq = np.sqrt(w)
        m_oh = suite.delta_omega_h.total_matrix(k)
        m_gen = (sq[:, None] * m_oh) / sq[None, :]   # generalized problem vs the omega_h Gram
        m_conj = conjugated.total_matrix(k)          # theta-conjugation route
        scale = max(1.0, float(np.max(np.abs(m_h))))
        gen_dev = max(gen_dev, float(np.max(np.abs(eigvalsh_c(m_gen) - eigvalsh_c(m_conj)))) / scale)
        ev_h = eigvalsh_c(m_h)
        ev_gen = eigvalsh_c(m_gen)
        spectra_dev = max(spectra_dev, float(np.max(np.abs(ev_h - ev_gen))) / scale)
        # eigenvector transport on a sample: theta_h maps omega_h-eigenvectors to delta_h ones
        vals, vecs = eigh_c(m_gen)
        take = min(3, vecs.shape[1])
        idx = rng.permutation(vecs.shape[1])[:take]
        th = theta.total_matrix(k)
        for i in idx:
            x = vecs[:, i] / sq      # omega_h-orthonormal eigenvector of delta_omega_h
            y = th @ x
            r = np.linalg.norm(m_h @ y - vals[i] * y) / max(np.linalg.norm(y), 1e-30)
            eig_res = max(eig_res, float(r))

    pure_res = _pure_type_quadratic_check(suite, rng)
    report = RescalingReport(
        conjugation_residual=float(conj_res),
        spectra_max_dev=spectra_dev,
        eigenspace_residual=eig_res,
        pure_type_residual=pure_res,
        generalized_vs_conjugated=gen_dev,
        tolerance_conjugation=tol_conj,
        tolerance_spectra=tol_spec,
    )
    if not report.ok:
        raise VerificationError(f"rescaling relations failed: {report}")
    return report


def _pure_type_quadratic_check(suite: OperatorSuite, rng) -> float:
    """<<delta_h u, u>> = h^2 <<delta' u, u>> + <<delta'' u, u>> on pure types."""
    model, h = suite.model, suite.h
    worst = 0.0
    for p in range(model.n + 1):
        for q in range(model.n + 1):
            m = model.cx.dim(p, q)
            if m == 0:
                continue
            u = rng.normal(size=m) + 1j * rng.normal(size=m)
            lhs = np.vdot(u, suite.delta_h.block((p, q), (0, 0)) @ u)
            rhs = (h * h) * np.vdot(u, suite.delta_prime.block((p, q)) @ u) \
                + np.vdot(u, suite.delta_second.block((p, q)) @ u)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return float(worst)


def kernel_frame_degree(op: GradedOperator, k: int) -> np.ndarray:
    """Orthonormal frame of the degree-k kernel of a nonneg. self-adjoint assembly."""
    m = op.total_matrix(k)
    if m.size == 0:
        return np.zeros((0, 0), dtype=complex)
    w, v = eigh_c(m)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    keep = np.abs(w) <= 1e3 * np.finfo(float).eps * scale
    return v[:, keep]


def kernel_equality_gap(op_a: GradedOperator, op_b: GradedOperator, k: int) -> tuple[int, int, float]:
    fa = kernel_frame_degree(op_a, k)
    fb = kernel_frame_degree(op_b, k)
    return fa.shape[1], fb.shape[1], subspace_gap(fa, fb)
