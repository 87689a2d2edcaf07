"""Exception hierarchy shared by all modules."""


class GsDecayError(Exception):
    """Base class for errors raised by gsdecay."""


class InputError(GsDecayError, ValueError):
    """Invalid argument: wrong dimension, non-positive time, degenerate ball."""


class DomainError(GsDecayError, ValueError):
    """Evaluation outside the region where a potential is defined or bounded."""


class SingularityError(GsDecayError, ValueError):
    """Kernel evaluated at a point where it diverges."""


class ConfigError(GsDecayError, ValueError):
    """Invalid run configuration or a check that cannot be set up."""


class SolverError(GsDecayError, RuntimeError):
    """Eigen-solver failed to converge or produced an invalid ground state."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
