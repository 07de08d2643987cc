"""Exception types shared across the package."""


class EITSimError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(EITSimError):
    """A physical parameter or derived constant is invalid or inconsistent."""


class ConfigError(EITSimError):
    """Configuration text could not be parsed or validated.

    Carries an optional 1-based line number of the offending entry.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SupportError(EITSimError):
    """An analytic profile does not fit inside the simulation domain."""


class BasisResolutionError(EITSimError):
    """A projection basis is not orthonormal on the grid to the required tolerance."""


class DivergenceError(EITSimError):
    """A solver produced a non-finite or out-of-bound field.

    ``step_index`` is the time-step count at failure; ``partial_series``
    holds whatever snapshots were emitted before the failure (may be None).
    """

    def __init__(self, message, step_index=None, partial_series=None):
        super().__init__(message)
        self.step_index = step_index
        self.partial_series = partial_series


class SnapshotFormatError(EITSimError):
    """A snapshot file is truncated, has a bad magic, or an unsupported version."""


class TimeGridMismatchError(EITSimError):
    """Two time series do not share compatible snapshot times or grids."""
