"""Exception taxonomy shared by all modules."""

from __future__ import annotations


class EllBaileyError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EllBaileyError, ValueError):
    """Input outside the mathematical domain (|q| >= 1, z = 0, ...)."""


class NonConvergent(EllBaileyError):
    """A truncated product would need more terms than the configured cap."""

    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed


class PoleError(EllBaileyError, ArithmeticError):
    """Evaluation point within the exclusion radius of a pole."""


class DegenerateError(EllBaileyError):
    """A pole sits exactly on the integration contour."""


class UnknownSymbol(EllBaileyError, KeyError):
    """A parameter or contour-variable name has no bound value."""


class NotConverged(EllBaileyError):
    """Adaptive quadrature hit its node cap before the target was met.

    Carries the best estimate so callers can still report it.
    """

    def __init__(self, message: str, best: complex | None = None,
                 est_error: float | None = None):
        super().__init__(message)
        self.best = best
        self.est_error = est_error


class EvaluationError(EllBaileyError):
    """An integrand callable failed at a grid node."""


class ConstraintViolation(EllBaileyError):
    """A validity inequality fails; the message names it with numbers."""


class SamplingExhausted(EllBaileyError):
    """Rejection sampling could not find an admissible assignment."""


class ShapeError(EllBaileyError):
    """A pair operation was applied to a structurally incompatible pair."""
