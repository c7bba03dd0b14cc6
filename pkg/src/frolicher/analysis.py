"""End-to-end analysis pipeline: validate, page, sweep, classify, certify."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .adiabatic import (
    classify_decay,
    classify_with_extension,
    degeneration_criterion,
    metric_independence,
    pure_type_energy_identities,
    spectra_duality_dev,
    sweep,
    verify_counting_identities,
    verify_theorem_main,
)
from .catalog import load_manifold
from .inequalities import (
    check_appendix,
    check_core_inequalities,
    check_hypothesis,
    check_skt,
)
from .metric import HermitianMetric, HermitianModel, random_pd_metric
from .model import verify_complex_identities
from .operators import tilde_delta, verify_bkn, verify_rescaling_relations
from .pages import compute_pages, harmonic_tower, page_statistics
from .report import AnalysisReport, classification_csv, eigenvalues_csv, to_jsonable, verdicts_csv

RESCALING_H = (1.0, 0.5, 0.125, 0.015625)


@dataclass
class AnalyzeOptions:
    j_max: int = 10
    tol: float = 1e-10
    exact: bool = True
    seed: int = 0
    r_max: int = 3

    def inequality_grid(self) -> list[float]:
        return [2.0 ** (-j) for j in range(0, min(self.j_max, 7) + 1)]


def run_analysis(manifold_source, metric: HermitianMetric | None = None,
                 options: AnalyzeOptions | None = None) -> AnalysisReport:
    opts = options or AnalyzeOptions()
    structure, default_metric = load_manifold(manifold_source)
    metric = metric if metric is not None else default_metric
    model = HermitianModel(structure, metric)
    failures: list[str] = []

    identities = verify_complex_identities(model.cx)
    bkn = verify_bkn(model, tol=opts.tol)
    rescaling = {h: verify_rescaling_relations(model, h, seed=opts.seed + 7)
                 for h in RESCALING_H}
    for h, rep in rescaling.items():
        if not rep.ok:
            failures.append(f"rescaling relations fail at h={h}")

    pages = compute_pages(model.cx, model=model, exact=opts.exact)
    stats = page_statistics(pages)
    failures.extend(stats.failures)

    td = tilde_delta(model)
    for pq, dim in td.kernel_dims.items():
        if dim != pages.dim(2, pq):
            failures.append(f"tilde-Delta kernel at {pq} is {dim}, second page has {pages.dim(2, pq)}")

    sw, cls = classify_with_extension(model, j_max=opts.j_max)
    duality_dev = spectra_duality_dev(sw)
    if duality_dev > 1e-9:
        failures.append(f"degree-duality of spectra deviates by {duality_dev:.3e}")
    theorem = verify_theorem_main(pages, cls, r_max=opts.r_max)
    if not theorem.passed:
        failures.extend(
            f"eigenvalue count mismatch at (r={row.r}, k={row.k}): "
            f"{row.eigen_count} != {row.page_dim}" for row in theorem.failures())

    degeneration = {}
    for r in (1, 2):
        verdict = degeneration_criterion(sw, pages, r)
        degeneration[r] = verdict
        if not verdict.passed:
            failures.append(f"degeneration criterion disagrees with exact pages at r={r}")

    counting = []
    for k in range(1, 2 * model.n):
        rep = verify_counting_identities(model, 0.25, k)
        counting.append(rep)
        failures.extend(rep.failures)

    tower = harmonic_tower(model, exact=False)
    energy = pure_type_energy_identities(model, tower, 0.5, seed=opts.seed + 11)
    if energy.pure_type_residual > 1e-10:
        failures.append(f"pure-type quadratic identity residual {energy.pure_type_residual:.3e}")
    if energy.adjoint_weight_residual > 1e-10:
        failures.append(f"page adjoint weight residual {energy.adjoint_weight_residual:.3e}")

    hypothesis = check_hypothesis(model)
    skt = check_skt(model)
    core = check_core_inequalities(model, opts.inequality_grid(), hypothesis=hypothesis, tol=opts.tol)
    appendix = check_appendix(model, opts.inequality_grid(), skt=skt, tol=opts.tol)
    for v in core + appendix:
        if not v.ok:
            failures.append(f"inequality {v.name} fails at (k={v.k}, parameter={v.parameter})")
    if hypothesis.passed:
        for k in range(2 * model.n + 1):
            if pages.dim_degree(2, k) != pages.betti[k]:
                failures.append(
                    f"torsion-kernel hypothesis holds but the second page exceeds b_{k}")

    independence = metric_independence(
        structure, metric, random_pd_metric(model.n, seed=opts.seed + 101), j_max=opts.j_max)
    if not independence.passed:
        failures.append("decay-class counts depend on the metric")

    payload = {
        "schema_version": 1,
        "tool": {"name": "frolicher", "version": __version__},
        "manifold": _structure_summary(structure),
        "metric": _metric_summary(metric),
        "options": to_jsonable(opts),
        "complex_check": to_jsonable(identities),
        "betti": pages.betti,
        "pages": {
            "dims_bidegree": pages.dims_table(),
            "dims_degree": {r: [pages.dim_degree(r, k) for k in range(2 * model.n + 1)]
                            for r in sorted(pages.dims)},
            "m_numbers": {r: [pages.m_number(r, k) for k in range(2 * model.n + 1)]
                          for r in sorted(pages.dims)},
            "degeneration_page": pages.degeneration_page,
            "methods_agree": True,
            "exact_path": pages.exact,
            "representatives": _representatives_payload(pages),
            "statistics": to_jsonable(stats),
        },
        "tilde_delta_kernel_dims": {f"{p},{q}": d for (p, q), d in sorted(td.kernel_dims.items()) if d},
        "bkn": to_jsonable(bkn),
        "rescaling": {repr(h): to_jsonable(rep) for h, rep in rescaling.items()},
        "sweep": {
            "j_max": len(sw.h_values) - 1,
            "isospectral_dev": sw.isospectral_dev,
            "duality_dev": duality_dev,
            "smallest_positive": {
                str(k): [sw.smallest_positive(j, k) for j in range(len(sw.h_values))]
                for k in range(2 * model.n + 1)},
        },
        "classification": {
            "counts": cls.counts_table(opts.r_max),
            "warnings": cls.warnings,
            "branches": to_jsonable(cls.branches),
        },
        "theorem": to_jsonable(theorem),
        "degeneration_criterion": {str(r): to_jsonable(v) for r, v in degeneration.items()},
        "counting_identities": to_jsonable(counting),
        "energy_identities": to_jsonable(energy),
        "hypothesis": {"passed": hypothesis.passed, "per_degree": to_jsonable(hypothesis.per_degree),
                       "tolerance": hypothesis.tolerance},
        "skt": {"passed": skt.passed, "defect": skt.defect, "tolerance": skt.tolerance},
        "inequalities": {
            "core": to_jsonable(core),
            "appendix": to_jsonable(appendix),
            "asserted_all_pass": all(v.ok for v in core + appendix),
        },
        "metric_independence": to_jsonable(independence),
        "verdict_summary": {
            "all_asserted_pass": not failures,
            "failures": failures,
        },
    }
    return AnalysisReport(payload=payload)


def run_sweep(manifold_source, metric: HermitianMetric | None = None,
              j_max: int = 10, r_max: int = 3, exact: bool = True):
    """Sweep + classification + verdict table, as CSV text blocks."""
    structure, default_metric = load_manifold(manifold_source)
    metric = metric if metric is not None else default_metric
    model = HermitianModel(structure, metric)
    pages = compute_pages(model.cx, model=model, exact=exact)
    sw = sweep(model, j_max=j_max)
    cls = classify_decay(sw)
    theorem = verify_theorem_main(pages, cls, r_max=r_max)
    return {
        "eigenvalues_csv": eigenvalues_csv(sw),
        "classification_csv": classification_csv(cls),
        "verdicts_csv": verdicts_csv(theorem.rows),
        "all_passed": theorem.passed,
    }


def _representatives_payload(pages) -> dict:
    """Page representatives as (p, q)-coefficient column vectors."""
    from . import exactlin as xl

    out = {}
    for r, by_pq in sorted(pages.reps.items()):
        table = {}
        for (p, q), cols in sorted(by_pq.items()):
            mat = xl.to_complex(cols) if pages.exact else np.asarray(cols)
            if mat.size == 0 or mat.shape[1] == 0:
                continue
            table[f"{p},{q}"] = [[[c.real, c.imag] for c in mat[:, j]]
                                 for j in range(mat.shape[1])]
        out[str(r)] = table
    return out


def _structure_summary(structure) -> dict:
    def coeffs(table):
        return [{"i": i, "j": j, "k": k, "re": repr(complex(v).real), "im": repr(complex(v).imag)}
                for (i, j, k), v in sorted(table.items())]

    return {
        "name": structure.name,
        "n": structure.n,
        "exact": structure.exact,
        "partial": coeffs(structure.partial_coeffs),
        "dbar": coeffs(structure.dbar_coeffs),
    }


def _metric_summary(metric: HermitianMetric) -> dict:
    g = metric.g
    return {
        "exact": metric.is_exact,
        "matrix": [[[g[i, j].real, g[i, j].imag] for j in range(metric.n)]
                   for i in range(metric.n)],
    }
