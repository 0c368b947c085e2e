"""Exception types raised by the numerical routines."""


class GaussMeansError(Exception):
    """Base class for all library errors."""


class DomainError(GaussMeansError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DivergentIntegralError(DomainError):
    """The requested integral does not converge (e.g. infinite range with alpha <= 0)."""


class OverflowGuardError(DomainError):
    """Input rejected because intermediate values would overflow double precision."""


class NonConvergenceError(GaussMeansError, ArithmeticError):
    """A quadrature or iteration ran out of budget.

    Carries the best estimate reached and its error bound so callers can
    decide whether the partial answer is usable.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error

    def __str__(self):
        base = super().__str__()
        return f"{base} (estimate={self.estimate!r}, error bound={self.error!r})"
