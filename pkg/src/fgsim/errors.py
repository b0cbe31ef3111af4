"""Exception hierarchy shared by every fgsim module."""


class FGSimError(Exception):
    """Base class for all fgsim failures."""


class ParameterError(FGSimError, ValueError):
    """A physical parameter or configuration value is outside its domain.

    ``key`` names the offending field when known, so the CLI can report it.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalError(FGSimError):
    """Base for failures that happen during a computation.

    ``time`` is the simulation time (s) at which the failure was detected,
    or None when the failure is not tied to a trajectory.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GeometryError(NumericalError):
    """Bodies overlap, or the FG reached the superconductor surface."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed or the step budget was exhausted."""


class LevitationError(NumericalError):
    """No force-balance height exists for the requested parameters."""
