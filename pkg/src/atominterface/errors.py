"""Exception hierarchy shared by the library and the CLI."""


class NumericalError(RuntimeError):
    """A computation hit a singularity or lost track of a branch."""


class SingularityError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class TrackingLossError(NumericalError):
    def __init__(self, message, step=None, eta1=None):
        super().__init__(message)
        self.step = step
        self.eta1 = eta1


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, violated invariant, ...)."""
