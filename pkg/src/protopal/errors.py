"""Exception hierarchy shared across the package."""


class ProtoPalError(Exception):
    """Base class for all package errors."""


class SchemaError(ProtoPalError):
    """Invalid schema definition, or data that does not match the schema shape."""


class CohortValidationError(ProtoPalError):
    """A row value violates its feature domain.

    Carries the offending data-row index (0-based, header excluded) and
    feature/column name.
    """

    def __init__(self, message: str, row: int | None = None, feature: str | None = None):
        super().__init__(message)
        self.row = row
        self.feature = feature


class GeneratorConfigError(ProtoPalError):
    """Synthetic generator configuration references unknown features or is inconsistent."""


class DimensionMismatchError(ProtoPalError):
    """Vector/matrix operands do not conform."""


class DegenerateBasisError(ProtoPalError):
    """Rank-deficient input where an orthonormal basis was required."""


class TrainingError(ProtoPalError):
    """Prototype training cannot start or must abort.

    ``epoch`` and ``sample`` locate a non-finite gradient when that is the cause.
    """

    def __init__(self, message: str, epoch: int | None = None, sample: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.sample = sample


class InterventionError(ProtoPalError):
    """An assignment touched a feature that is not intervenable."""


class MetricError(ProtoPalError):
    """A ranking metric is undefined for the given inputs."""


class ConvergenceError(ProtoPalError):
    """Iterative fit failed to converge; carries diagnostics."""

    def __init__(self, message: str, iterations: int | None = None,
                 gradient_norm: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.gradient_norm = gradient_norm


class BundleError(ProtoPalError):
    """Model bundle is corrupt, has an unknown format version, or fails checks."""
