"""Exception types raised across the package."""


class KsdaggError(Exception):
    """Base class for all package-specific errors."""


class DataError(KsdaggError, ValueError):
    """Input data is malformed (wrong shape, non-finite entries, ...)."""


class DegenerateDataError(DataError):
    """Data admits no meaningful bandwidth (e.g. all points identical)."""


class ConfigError(KsdaggError, ValueError):
    """Invalid configuration value or combination of values."""


class CapabilityError(KsdaggError, RuntimeError):
    """A requested operation needs a capability the model does not provide."""


class ModelEvaluationError(KsdaggError, RuntimeError):
    """A score model produced non-finite values on the given data."""
