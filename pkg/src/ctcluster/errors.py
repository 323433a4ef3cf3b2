"""Exception types shared across the package."""


class CtclusterError(Exception):
    """Base class for all package-specific errors."""


class DataFormatError(CtclusterError):
    """Malformed input file; the message carries the offending line number."""


class DegenerateDataError(CtclusterError):
    """Input data admits no meaningful similarity scale (e.g. all points equal)."""


class GraphDisconnectedError(CtclusterError):
    """Operation requires a connected graph but got more than one component."""


class SolverError(CtclusterError):
    """Linear solver failed to meet its residual contract."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
