import numpy as np
import pytest

from frolicher.catalog import load_manifold
from frolicher.errors import UsageError
from frolicher.inequalities import (
    check_appendix,
    check_core_inequalities,
    check_hypothesis,
    check_skt,
    psd_gap,
)
from frolicher.metric import HermitianModel, random_pd_metric
from frolicher.operators import build_suite, torsion_operators

H_GRID = [2.0 ** (-j) for j in range(0, 8)]


def _model(name, metric=None):
    s, default = load_manifold(name)
    return HermitianModel(s, metric if metric is not None else default)


def test_psd_gap_basics():
    a = np.diag([1.0, 2.0])
    assert psd_gap(a, a) == 0.0
    assert psd_gap(a) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        psd_gap(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_kaehler_identity_gap_on_torus():
    # delta = 2 delta'' on any invariant torus metric: both one-sided gaps vanish
    m = _model("torus2", random_pd_metric(2, seed=21))
    suite = build_suite(m, 1.0)
    for k in range(5):
        a = suite.delta.total_matrix(k)
        b = 2.0 * suite.delta_second.total_matrix(k)
        if a.size:
            assert abs(psd_gap(a, b)) <= 1e-12
            assert abs(psd_gap(b, a)) <= 1e-12
    assert psd_gap(suite.delta_second.total_matrix(2)) >= -1e-15


def test_hypothesis_ground_truth(models):
    assert check_hypothesis(models["torus1"]).passed
    assert check_hypothesis(models["torus2"]).passed
    assert check_hypothesis(models["torus3"]).passed
    assert not check_hypothesis(models["iwasawa"]).passed
    assert not check_hypothesis(models["calabi_eckmann"]).passed


def test_skt_ground_truth(models):
    assert check_skt(models["torus2"]).passed
    assert check_skt(models["kodaira_thurston"]).passed
    assert check_skt(models["calabi_eckmann"]).passed
    iw = check_skt(models["iwasawa"])
    assert not iw.passed
    assert iw.defect == pytest.approx(1.0)


def test_core_verdicts_on_catalog(models):
    for name, m in models.items():
        verdicts = check_core_inequalities(m, H_GRID)
        bad = [v for v in verdicts if not v.ok]
        assert not bad, (name, [(v.name, v.k, v.parameter, v.min_gap) for v in bad])


def test_torus_second_vs_torsion_is_vacuous(models):
    verdicts = check_core_inequalities(models["torus2"], H_GRID)
    rows = [v for v in verdicts if v.name == "second_vs_torsion"]
    assert rows
    for v in rows:
        assert v.asserted
        assert v.constants["h0"] == 1.0
        assert v.constants["c_k"] <= 1e-12
        assert v.min_gap >= -1e-12


def test_h0_is_in_unit_interval(models):
    for name, m in models.items():
        verdicts = check_core_inequalities(m, H_GRID)
        for v in verdicts:
            if v.name == "second_vs_torsion":
                assert 0.0 <= v.constants["h0"] <= 1.0, name


def test_torsion_gap_independent_assembly():
    # oracle for the 0 < h < 1 torsion bound: assemble both sides from the
    # delta', delta'', tau blocks directly
    m = _model("iwasawa")
    h = 0.1
    suite = build_suite(m, h)
    tors = torsion_operators(m)
    for k in range(7):
        lhs = suite.delta_h.total_matrix(k) - (h * h) * suite.delta.total_matrix(k)
        rhs = (1 - h) * h * (suite.delta_second.total_matrix(k)
                             - h * tors.tau_bracket.total_matrix(k))
        if lhs.size:
            norm = max(1.0, float(np.max(np.abs(lhs - rhs))))
            assert psd_gap(lhs, rhs) >= -1e-10 * norm, k


def test_kernel_equality_verdicts_on_tori(models):
    verdicts = check_core_inequalities(models["torus3"], H_GRID)
    kernel_rows = [v for v in verdicts if v.name == "kernel_equality"]
    assert kernel_rows
    for v in kernel_rows:
        assert v.asserted and v.passed
        assert v.constants["dim_ker_delta_h"] == v.constants["dim_ker_delta"]


def test_appendix_on_skt_surface(models):
    verdicts = check_appendix(models["kodaira_thurston"], H_GRID)
    assert all(v.asserted for v in verdicts)
    bad = [v for v in verdicts if not v.passed]
    assert not bad, [(v.name, v.k, v.parameter, v.min_gap) for v in bad]


def test_appendix_independent_two_sided_assembly():
    # delta = 1, h = 0.25 on the SKT surface: rebuild each side from primitives
    m = _model("kodaira_thurston")
    tors = torsion_operators(m)
    suite = build_suite(m, 1.0)
    delta = 1.0
    for k in range(5):
        second = suite.delta_second.total_matrix(k)
        prime = suite.delta_prime.total_matrix(k)
        tb = tors.tau_bar_bracket.total_matrix(k)
        tt = tors.tau_bracket.total_matrix(k)
        if not second.size:
            continue
        upper = (1 + delta) * second + 2.0 * tb - prime
        lower = prime - second / (1 + delta) + tt
        for side in (upper, lower):
            norm = max(1.0, float(np.max(np.abs(side))))
            assert psd_gap(side) >= -1e-10 * norm, k
    h = 0.25
    suite_h = build_suite(m, h)
    for k in range(5):
        lhs = suite_h.delta_h.total_matrix(k) - h * suite_h.delta.total_matrix(k)
        rhs = h * ((1 - h) * tors.x_omega_bar.total_matrix(k)
                   - tors.tau_bar_bracket.total_matrix(k))
        if lhs.size:
            norm = max(1.0, float(np.max(np.abs(lhs - rhs))))
            assert psd_gap(lhs, rhs) >= -1e-10 * norm, k


def test_appendix_collapses_on_torus(models):
    verdicts = check_appendix(models["torus2"], H_GRID)
    assert all(v.asserted for v in verdicts)
    assert all(v.passed for v in verdicts)
    c_values = {v.constants["c"] for v in verdicts if "c" in v.constants}
    assert c_values == {0.0}


def test_appendix_informational_outside_skt(models):
    verdicts = check_appendix(models["iwasawa"], H_GRID)
    assert all(not v.asserted for v in verdicts)
    assert all(v.ok for v in verdicts)
    # the inequalities genuinely fail somewhere without the SKT hypothesis
    assert any(not v.passed for v in verdicts)


def test_hypothesis_implies_second_page_collapse(models, catalog_pages):
    for name, m in models.items():
        if check_hypothesis(m).passed:
            pages = catalog_pages[name]
            for k in range(2 * m.n + 1):
                assert pages.dim_degree(2, k) == pages.betti[k], (name, k)


def test_lower_bound_constant_is_bounded(models):
    for name, m in models.items():
        verdicts = check_core_inequalities(m, H_GRID)
        rows = [v for v in verdicts if v.name == "lower_bound_3_4"]
        assert rows, name
        for v in rows:
            assert v.passed, (name, v.parameter, v.constants)
