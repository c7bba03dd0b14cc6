"""Frölicher spectral sequence workbench on invariant-form models.

Builds the bigraded complex of a left-invariant complex structure from its
structure constants, computes every page of the Frölicher spectral sequence
by three independent methods, sweeps the spectrum of the rescaled Laplacian
d_h = h*del + dbar as h drops to zero, and certifies that small-eigenvalue
counts, dualities and operator inequalities behave as the theory demands.
"""

__version__ = "0.1.0"

from .catalog import catalog_listing, catalog_names, load_manifold
from .errors import (
    CatalogError,
    ConfigurationError,
    FrolicherError,
    InconsistencyError,
    MetricError,
    ModelInvalidError,
    NumericError,
    SchemaError,
    UsageError,
    VerificationError,
)
from .metric import HermitianMetric, HermitianModel, random_pd_metric
from .model import (
    BigradedComplex,
    InvariantComplexStructure,
    assemble_total,
    betti_numbers,
    build_basis,
    exterior_derivatives,
    verify_complex_identities,
)
from .pages import (
    HarmonicTower,
    SpectralPageSet,
    compute_pages,
    harmonic_tower,
    page_statistics,
    pages_by_chain_condition,
    pages_by_filtration,
)

__all__ = [
    "BigradedComplex",
    "CatalogError",
    "ConfigurationError",
    "FrolicherError",
    "HarmonicTower",
    "HermitianMetric",
    "HermitianModel",
    "InconsistencyError",
    "InvariantComplexStructure",
    "MetricError",
    "ModelInvalidError",
    "NumericError",
    "SchemaError",
    "SpectralPageSet",
    "UsageError",
    "VerificationError",
    "assemble_total",
    "betti_numbers",
    "build_basis",
    "catalog_listing",
    "catalog_names",
    "compute_pages",
    "exterior_derivatives",
    "harmonic_tower",
    "load_manifold",
    "page_statistics",
    "pages_by_chain_condition",
    "pages_by_filtration",
    "random_pd_metric",
    "verify_complex_identities",
]
