"""Exception types shared across the package."""


class DiscflightError(Exception):
    """Base class for errors raised by this package."""


class DomainError(DiscflightError, ValueError):
    """Input outside the domain of a special function."""


class BracketError(DiscflightError, ValueError):
    """Root-finding bracket without a sign change."""


class AccuracyError(DiscflightError, RuntimeError):
    """A numerical procedure missed its tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class DensityError(DiscflightError, ValueError):
    """A radial density violates positivity, the wall condition or normalisation."""


class NoBoundStateError(DiscflightError, RuntimeError):
    """The radial boundary problem has no decaying positive ground state."""


class NonConvergenceError(DiscflightError, RuntimeError):
    """An iteration exhausted its budget; ``history`` holds the iterates."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class RegimeError(DiscflightError, ValueError):
    """Parameters outside the validity range of the large-radius expansion."""


class ConfigError(DiscflightError, ValueError):
    """Invalid run or simulation configuration."""
