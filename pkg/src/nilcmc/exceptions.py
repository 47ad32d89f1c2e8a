"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input or hypothesis check failed before any numerics ran."""


class SingularityError(ArithmeticError):
    """A formula or chart degenerated (zero denominator, non-immersion)."""


class ConvergenceError(RuntimeError):
    """An iterative procedure did not converge.

    Carries an optional ``diagnostics`` mapping describing the last state.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
