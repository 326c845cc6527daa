"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (bad sizes, rates, ranges, files)."""


class DegenerateSignalError(RuntimeError):
    """Input signal carries no usable information (e.g. all-zero buffer)."""


class ResolutionError(RuntimeError):
    """The integer-offset peak-walk did not terminate within its iteration cap.

    Callers running Monte Carlo trials should count this as an estimator
    failure rather than treat it as a crash.
    """
