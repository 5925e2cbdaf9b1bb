"""Exception and warning types shared across the package."""


class ErtbpError(Exception):
    """Base class for all package errors."""


class DomainError(ErtbpError, ValueError):
    """Input outside the mathematical domain of an operation."""


class AccuracyError(ErtbpError):
    """A quadrature/iteration failed to reach the requested tolerance.

    The best available estimate and the achieved error are attached so
    callers can decide whether to proceed anyway.
    """

    def __init__(self, message, estimate=None, achieved=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class SingularityError(ErtbpError):
    """Evaluation at a collision configuration (sigma_S or sigma_J = 0)."""


class IntegrationError(ErtbpError):
    """Step-size underflow or non-finite state during ODE integration."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ContourError(ErtbpError):
    """Branch inversion failed while following the complex contour."""

    def __init__(self, message, u=None):
        super().__init__(message)
        self.u = u


class TableRangeError(ErtbpError, KeyError):
    """A harmonic table does not cover the requested (q, k) range."""


class DegenerateAmplitudeError(ErtbpError):
    """The q=1 amplitude B vanished (or its anchor harmonic is below noise)."""


class CriticalPointError(ErtbpError):
    """Newton failed or the critical point is degenerate.

    Signals proximity to the amplitude-degeneracy locus near alpha = 0,
    G ~ (12 e)^(-1/2).
    """


class GradientVanishedError(ErtbpError):
    """Level-curve tracing hit a critical point of the reduced function."""


class StallError(ErtbpError):
    """The itinerary planner cannot make transversal progress."""

    def __init__(self, message, alpha=None, G=None, diagnostics=None):
        super().__init__(message)
        self.alpha = alpha
        self.G = G
        self.diagnostics = diagnostics or {}


class TailFitError(ErtbpError):
    """Asymptotic tail extrapolation of the ODE experiment did not converge."""


class DivergentTailWarning(UserWarning):
    """Harmonic series evaluated outside its guaranteed convergence region."""


class RegimeWarning(UserWarning):
    """Quantity evaluated outside the regime where its bounds are proven."""
