"""Error types shared across the toolkit.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message text.
"""


class PhyTrafficError(Exception):
    """Base class for all toolkit errors."""


class InputDomainError(PhyTrafficError, ValueError):
    """An argument is outside the documented input domain."""


class ValidationError(PhyTrafficError, ValueError):
    """Data violates a structural invariant (bad record, malformed file, ...)."""


class SchemaMismatchError(ValidationError):
    """A model/file was produced under a different feature schema."""


class DegenerateDataError(PhyTrafficError, ValueError):
    """Training data cannot support the requested operation (e.g. one class)."""


class EmptyTestSetError(PhyTrafficError, RuntimeError):
    """Evaluation has no test samples left after filtering."""
