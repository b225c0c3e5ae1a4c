"""Exception types shared by all modules.

The CLI maps ``ValidationError`` to exit code 2 and ``ConvergenceError`` to
exit code 3.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedFeatureError(ValidationError):
    """Feature needs analytic information the equilibrium does not provide."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    ``estimate`` carries the achieved error estimate when one is available.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
