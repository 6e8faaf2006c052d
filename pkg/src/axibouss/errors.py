"""Exception types shared across the package."""


class AxiboussError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(AxiboussError, ValueError):
    """A scalar argument is outside its admissible range."""


class InvalidParityError(AxiboussError, ValueError):
    """An operation received a field with the wrong axis parity."""


class InvalidInputError(AxiboussError, ValueError):
    """Structurally bad input (unordered series, history gaps, ...)."""


class SolverFailureError(AxiboussError, RuntimeError):
    """A direct solve hit a singular factorization; signals grid corruption."""


class StepRejectedError(AxiboussError, RuntimeError):
    """A transport step violated its CFL precondition.

    Carries the largest admissible step in ``admissible_dt``.
    """

    def __init__(self, message, admissible_dt):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class BlowUpError(AxiboussError, RuntimeError):
    """Non-finite values appeared during time stepping.

    ``last_state`` holds the last valid flow state for post-mortem output.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class UndefinedRatioError(AxiboussError, ZeroDivisionError):
    """A dyadic-block ratio was requested on a numerically vanishing block."""


class ConfigError(AxiboussError, ValueError):
    """Run-configuration text failed to parse or validate."""
