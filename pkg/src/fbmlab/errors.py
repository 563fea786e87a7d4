"""Shared exception types; the CLI maps these to exit codes."""


class FbmLabError(Exception):
    """Base class for all package errors."""


class ConfigError(FbmLabError):
    """Invalid run configuration or precondition violation (exit code 2)."""


class ModelError(FbmLabError):
    """Bad covariance model or point set (duplicates, PSD violation)."""


class FactorizationError(FbmLabError):
    """Covariance factorization failed even after jitter escalation (exit code 3)."""


class CapExceededError(FbmLabError):
    """A point set exceeded the configured dense-solver cap (exit code 4)."""
