"""Exception hierarchy shared by all modules."""


class SupergeomError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SupergeomError):
    """Operands live in incompatible algebras, charts or backends."""


class DegreeOverflowError(SupergeomError):
    """A polynomial operation would exceed the backend's degree bound."""


class UnsupportedError(SupergeomError):
    """The requested combination of backend / target / geometry is not implemented."""


class SingularFrameError(SupergeomError):
    """A frame or super matrix is not invertible at the body."""


class SolverError(SupergeomError):
    """An order-by-order linear solve failed; the message names the condition."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NotNormalizedError(SupergeomError):
    """An embedding with nonzero odd images was passed where i^# eta = 0 is required."""


class SchemaError(SupergeomError):
    """A scene file failed validation."""
