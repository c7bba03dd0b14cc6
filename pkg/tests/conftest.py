import pytest

from frolicher.catalog import catalog_names, load_manifold
from frolicher.metric import HermitianModel
from frolicher.pages import compute_pages

CATALOG = tuple(catalog_names())


@pytest.fixture(scope="session")
def models():
    """One HermitianModel per catalog entry, default metric."""
    out = {}
    for name in CATALOG:
        structure, metric = load_manifold(name)
        out[name] = HermitianModel(structure, metric)
    return out


@pytest.fixture(scope="session")
def catalog_pages(models):
    """Cross-validated page sets for every entry (exact path)."""
    return {name: compute_pages(m.cx, model=m, exact=True) for name, m in models.items()}


@pytest.fixture(scope="session")
def catalog_sweeps(models):
    from frolicher.adiabatic import classify_decay, sweep

    out = {}
    for name, m in models.items():
        sw = sweep(m, j_max=10)
        out[name] = (sw, classify_decay(sw))
    return out
