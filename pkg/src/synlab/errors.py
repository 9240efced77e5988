"""Exception types shared across the package."""


class SynlabError(Exception):
    """Base class for all synlab errors."""


class ConfigurationError(SynlabError):
    """Invalid configuration or parameter values (CLI exit code 1)."""


class FitNonConvergenceError(SynlabError):
    """A fit failed to converge while running in strict mode (CLI exit code 2)."""
