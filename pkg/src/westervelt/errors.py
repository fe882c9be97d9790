"""Exception hierarchy shared by all modules.

Numerical guards (shock formation, loss of hyperbolicity) derive from
:class:`NumericalGuardError` so callers can treat them uniformly; the CLI maps
them to exit status 3.
"""


class WesterveltError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WesterveltError, ValueError):
    """An argument lies outside the domain of the operation."""


class EvaluationError(WesterveltError):
    """A field produced a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NumericalGuardError(WesterveltError):
    """A runtime guard on the physics was violated."""


class ShockError(NumericalGuardError):
    """Characteristics crossed, or would cross, before the requested time."""

    def __init__(self, message, s_tilde=None):
        super().__init__(message)
        self.s_tilde = s_tilde


class HyperbolicityError(NumericalGuardError):
    """``1 - 2*alpha*p`` dropped below the configured floor ``b0``."""

    def __init__(self, message, time=None, node=None):
        super().__init__(message)
        self.time = time
        self.node = node


class StepConvergenceError(NumericalGuardError):
    """The per-node fixed-point iteration of the time stepper did not converge."""


class GeometryError(WesterveltError):
    """A geometric precondition (support separation, stencil extent) failed."""


class ConditioningError(WesterveltError):
    """A least-squares design matrix is too ill-conditioned to trust."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class LevelError(WesterveltError):
    """A requested level is not attained by a profile."""


class ShapeError(WesterveltError):
    """A profile has an unexpected shape, e.g. repeated level crossings."""


class DataError(WesterveltError, ValueError):
    """Input data violate a structural invariant."""


class AlignmentError(WesterveltError, ValueError):
    """Arrays that should share a grid do not."""


class ConfigError(WesterveltError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
