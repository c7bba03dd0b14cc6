"""Operator inequalities as positive-semidefiniteness of Hermitian blocks.

Each check assembles LHS - RHS on every total degree and certifies that
the smallest eigenvalue clears -tol * |LHS - RHS|.  Verdicts are asserted
only inside their hypothesis regime (torsion-kernel inclusion for the
degeneration chain, a pluriclosed metric for the appendix family);
outside it they are reported informationally.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .graded import GradedOperator
from .metric import HermitianModel
from .numerics import eigvalsh_c, subspace_gap
from .operators import OperatorSuite, build_suite, kernel_frame_degree, skt_defect, torsion_operators

DEFAULT_TOL = 1e-10


def psd_gap(a: np.ndarray, b: np.ndarray | None = None, rtol: float = 1e-10) -> float:
    """Smallest eigenvalue of the Hermitian difference a - b."""
    diff = np.asarray(a, dtype=complex)
    if b is not None:
        diff = diff - np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(diff))) if diff.size else 0.0)
    if float(np.max(np.abs(diff - diff.conj().T))) > rtol * scale:
        raise UsageError("psd_gap needs self-adjoint operators")
    if diff.size == 0:
        return 0.0
    w = eigvalsh_c(0.5 * (diff + diff.conj().T))
    return float(w[0])


@dataclass
class InequalityVerdict:
    name: str
    k: int
    parameter: float | None
    min_gap: float
    scale: float
    tolerance: float
    asserted: bool
    constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_gap >= -self.tolerance * max(1.0, self.scale)

    @property
    def ok(self) -> bool:
        return self.passed or not self.asserted


def _degree_verdicts(name: str, diff: GradedOperator, parameter, asserted: bool,
                     tol: float, constants: dict | None = None) -> list[InequalityVerdict]:
    out = []
    n = diff.n
    for k in range(2 * n + 1):
        m = diff.total_matrix(k)
        if m.size == 0:
            continue
        scale = float(np.max(np.abs(m)))
        gap = psd_gap(m)
        out.append(InequalityVerdict(name=name, k=k, parameter=parameter, min_gap=gap,
                                     scale=scale, tolerance=tol, asserted=asserted,
                                     constants=dict(constants or {})))
    return out


# ---------------------------------------------------------------------------
# hypothesis and SKT checkers
# ---------------------------------------------------------------------------

@dataclass
class HypothesisVerdict:
    """ker(delta'') inside ker[tau, tau*] in degrees 1..n."""
    per_degree: dict[int, float]      # max |[tau,tau*] u| over a kernel frame
    scale: float
    tolerance: float

    def passed_degree(self, k: int) -> bool:
        return self.per_degree[k] <= self.tolerance * max(1.0, self.scale)

    @property
    def passed(self) -> bool:
        return all(self.passed_degree(k) for k in self.per_degree)


def check_hypothesis(model: HermitianModel, tol: float = 1e-8) -> HypothesisVerdict:
    suite = build_suite(model, 1.0)
    bracket = suite.torsion.tau_bracket
    scale = max(bracket.max_block_residual(), 1e-30)
    per_degree = {}
    for k in range(1, model.n + 1):
        frame = kernel_frame_degree(suite.delta_second, k)
        if frame.shape[1] == 0:
            per_degree[k] = 0.0
            continue
        per_degree[k] = float(np.linalg.norm(bracket.total_matrix(k) @ frame, 2))
    return HypothesisVerdict(per_degree=per_degree, scale=scale, tolerance=tol)


@dataclass
class SktVerdict:
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.tolerance


def check_skt(model: HermitianModel, tol: float = 1e-10) -> SktVerdict:
    return SktVerdict(defect=skt_defect(model), tolerance=tol)


# ---------------------------------------------------------------------------
# degeneration chain: lower bound, torsion comparison, kernel equality
# ---------------------------------------------------------------------------

def lower_bound_constant(suite: OperatorSuite) -> float:
    """Smallest C with delta_h >= (3/4) delta'' + h^2 delta' - C h^2 at this h."""
    h = suite.h
    diff = 0.75 * suite.delta_second + (h * h) * suite.delta_prime - suite.delta_h
    worst = 0.0
    for k in range(2 * suite.model.n + 1):
        m = diff.total_matrix(k)
        if m.size:
            worst = max(worst, float(np.max(eigvalsh_c(0.5 * (m + m.conj().T)))))
    return worst / (h * h)


def check_core_inequalities(model: HermitianModel, h_grid: list[float],
                            hypothesis: HypothesisVerdict | None = None,
                            tol: float = DEFAULT_TOL) -> list[InequalityVerdict]:
    n = model.n
    if hypothesis is None:
        hypothesis = check_hypothesis(model)
    tors = torsion_operators(model)
    suites = {h: build_suite(model, h) for h in h_grid}
    suite1 = suites.get(1.0) or build_suite(model, 1.0)
    verdicts: list[InequalityVerdict] = []

    # uniform lower bound: minimal C stays below the proof constant 4 max-eig[tau,tau*]
    c_theory = 0.0
    for k in range(2 * n + 1):
        m = tors.tau_bracket.total_matrix(k)
        if m.size:
            c_theory = max(c_theory, float(np.max(eigvalsh_c(m))))
    c_theory *= 4.0
    for h in h_grid:
        suite = suites[h]
        c_min = lower_bound_constant(suite)
        verdicts.append(InequalityVerdict(
            name="lower_bound_3_4", k=-1, parameter=h,
            min_gap=c_theory - c_min, scale=max(1.0, c_theory),
            tolerance=tol, asserted=True,
            constants={"c_min": c_min, "c_theory": c_theory}))

    # delta_h - h^2 delta >= (1-h) h (delta'' - h [tau, tau*]) for 0 < h < 1
    for h in h_grid:
        if not (0 < h < 1):
            continue
        suite = suites[h]
        lhs = suite.delta_h - (h * h) * suite.delta
        rhs = ((1 - h) * h) * (suite.delta_second - h * tors.tau_bracket)
        verdicts.extend(_degree_verdicts("torsion_gap", lhs - rhs, h, True, tol))

    # delta'' >= h [tau, tau*] for h below the spectral-gap ratio, per degree
    for k in range(1, n + 1):
        m_second = suite1.delta_second.total_matrix(k)
        m_bracket = tors.tau_bracket.total_matrix(k)
        ev = eigvalsh_c(m_second) if m_second.size else np.zeros(0)
        scale = max(1.0, float(np.max(np.abs(ev))) if ev.size else 0.0)
        positive = ev[ev > 1e3 * np.finfo(float).eps * scale]
        delta_gap = float(positive[0]) if positive.size else None
        c_k = float(np.max(eigvalsh_c(m_bracket))) if m_bracket.size else 0.0
        if c_k <= tol * scale:
            h0 = 1.0
        elif delta_gap is None:
            h0 = 0.0
        else:
            h0 = min(delta_gap / c_k, 1.0)
        asserted = hypothesis.passed_degree(k) and h0 > 0
        constants = {"delta_second_gap": delta_gap, "c_k": c_k, "h0": h0}
        for h in h_grid:
            if not (0 < h < h0) and h0 > 0:
                continue
            diff = m_second - h * m_bracket
            verdicts.append(InequalityVerdict(
                name="second_vs_torsion", k=k, parameter=h,
                min_gap=psd_gap(diff), scale=float(np.max(np.abs(diff))) if diff.size else 0.0,
                tolerance=tol, asserted=asserted, constants=dict(constants)))

    # delta_h >= h^2 delta and kernel equality, under the kernel hypothesis
    for k in range(1, n + 1):
        h0 = next((v.constants["h0"] for v in verdicts
                   if v.name == "second_vs_torsion" and v.k == k), 1.0)
        asserted = hypothesis.passed_degree(k)
        for h in h_grid:
            if not (0 < h < max(h0, 1e-12)):
                continue
            suite = suites[h]
            diff = (suite.delta_h - (h * h) * suite.delta).total_matrix(k)
            verdicts.append(InequalityVerdict(
                name="rescaled_vs_total", k=k, parameter=h,
                min_gap=psd_gap(diff), scale=float(np.max(np.abs(diff))) if diff.size else 0.0,
                tolerance=tol, asserted=asserted, constants={"h0": h0}))
            dim_a, dim_b, gap = _kernel_equality(suite, k)
            verdicts.append(InequalityVerdict(
                name="kernel_equality", k=k, parameter=h,
                min_gap=-gap, scale=1.0, tolerance=1e-7, asserted=asserted,
                constants={"dim_ker_delta_h": dim_a, "dim_ker_delta": dim_b}))
    return verdicts


def _kernel_equality(suite: OperatorSuite, k: int):
    fa = kernel_frame_degree(suite.delta_h, k)
    fb = kernel_frame_degree(suite.delta, k)
    if fa.shape[1] != fb.shape[1]:
        return fa.shape[1], fb.shape[1], 1.0
    return fa.shape[1], fb.shape[1], subspace_gap(fa, fb)


# ---------------------------------------------------------------------------
# SKT comparison family
# ---------------------------------------------------------------------------

def check_appendix(model: HermitianModel, h_grid: list[float],
                   delta_grid: tuple[float, ...] = (0.5, 1.0, 2.0),
                   skt: SktVerdict | None = None,
                   tol: float = DEFAULT_TOL) -> list[InequalityVerdict]:
    if skt is None:
        skt = check_skt(model)
    asserted = skt.passed
    tors = torsion_operators(model)
    suites = {h: build_suite(model, h) for h in h_grid if 0 < h < 1}
    suite1 = build_suite(model, 1.0)
    dprime, dsecond = suite1.delta_prime, suite1.delta_second
    verdicts: list[InequalityVerdict] = []

    for delta in delta_grid:
        upper = (1 + delta) * dsecond + (1 + 1 / delta) * tors.tau_bar_bracket - dprime
        lower = dprime - (1 / (1 + delta)) * dsecond + (1 / delta) * tors.tau_bracket
        verdicts.extend(_degree_verdicts("skt_upper_comparison", upper, delta, asserted, tol))
        verdicts.extend(_degree_verdicts("skt_lower_comparison", lower, delta, asserted, tol))

    c_bound = 0.0
    for k in range(2 * model.n + 1):
        m = tors.tau_bar_bracket.total_matrix(k)
        if m.size:
            c_bound = max(c_bound, float(np.max(eigvalsh_c(m))))

    for h in h_grid:
        if not (0 < h < 1):
            continue
        suite = suites[h]
        hdiff = suite.delta_h - h * suite.delta
        h2diff = suite.delta_h - (h * h) * suite.delta
        bounded_part = (1 - h) * tors.x_omega_bar - tors.tau_bar_bracket
        verdicts.extend(_degree_verdicts(
            "skt_second_vs_prime",
            dsecond - h * dprime - h * tors.x_omega_bar
            + (h / (1 - h)) * tors.tau_bar_bracket,
            h, asserted, tol))
        verdicts.extend(_degree_verdicts(
            "skt_h_gap", hdiff - h * bounded_part, h, asserted, tol))
        verdicts.extend(_degree_verdicts(
            "skt_h_gap_constant",
            hdiff + (c_bound * h) * GradedOperator.identity(model.n),
            h, asserted, tol, constants={"c": c_bound}))
        verdicts.extend(_degree_verdicts(
            "skt_h2_gap", h2diff - (h * h) * bounded_part, h, asserted, tol,
            constants={"c": c_bound}))
    return verdicts
