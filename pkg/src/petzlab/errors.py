"""Exception hierarchy shared by all petzlab modules."""


class PetzlabError(Exception):
    """Base class for every error raised by petzlab."""


class DimensionError(PetzlabError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(PetzlabError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ValidationError(PetzlabError, ValueError):
    """A matrix fails the invariants of the type it is being turned into."""


class PreconditionError(PetzlabError, ValueError):
    """A documented precondition of an operation does not hold."""


class ConvergenceError(PetzlabError, RuntimeError):
    """An iterative routine hit its iteration cap.

    ``residual`` carries the last measured residual.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(PetzlabError, RuntimeError):
    """A result violates an invariant it is guaranteed to satisfy."""


class ConstructionError(PetzlabError, ValueError):
    """A model cannot be built from the given ingredients."""


class ConfigError(PetzlabError, ValueError):
    """A configuration file is malformed; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key
