"""Exception types shared across the package."""


class LecamError(Exception):
    """Base class for all package errors."""

    #: short machine-readable prefix used by the CLI on stderr
    code = "error"


class DimensionError(LecamError, ValueError):
    code = "dimension"


class DomainError(LecamError, ValueError):
    code = "domain"


class NumericError(LecamError, ValueError):
    code = "numeric"


class ConfigError(LecamError, ValueError):
    code = "config"


class IngestionError(LecamError, ValueError):
    code = "ingest"


class ConvergenceError(LecamError, RuntimeError):
    code = "nonconvergence"


class UsageError(LecamError, RuntimeError):
    code = "usage"


class TrainingAborted(LecamError, RuntimeError):
    code = "aborted"
