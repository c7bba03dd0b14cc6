"""Exception hierarchy."""


class FrolicherError(Exception):
    pass


class ConfigurationError(FrolicherError):
    pass


class SchemaError(FrolicherError):
    """Manifold or metric file violates the input schema."""


class CatalogError(FrolicherError):
    pass


class ModelInvalidError(FrolicherError):
    """Structure constants fail the double-complex axioms."""


class MetricError(FrolicherError):
    pass


class VerificationError(FrolicherError):
    """An identity the construction guarantees failed to verify."""


class InconsistencyError(VerificationError):
    """Two independent computations of the same quantity disagree."""


class NumericError(FrolicherError):
    pass


class UsageError(FrolicherError):
    pass
