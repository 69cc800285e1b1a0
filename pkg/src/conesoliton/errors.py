"""Exception hierarchy for the conesoliton package."""

from __future__ import annotations


class ConeSolitonError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(ConeSolitonError):
    """A metric field violates a structural invariant (a <= 0, bad grid...)."""


class SingularInputError(ConeSolitonError):
    """Pointwise evaluation outside the admissible domain (s <= 0, w <= 0)."""


class ConvergenceError(ConeSolitonError):
    """Anchor-doubling failed to reach the Cauchy tolerance."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])


class DomainError(ConeSolitonError):
    """The available radial domain is too short for the requested operation."""


class FitError(ConeSolitonError):
    """Ill-conditioned or under-determined regression window."""


class GaugeError(ConeSolitonError):
    """Reparametrization preconditions violated (nonmonotone potential...)."""


class SupportError(ConeSolitonError):
    """A test section's support leaves the validated region."""


class ResamplingError(ConeSolitonError):
    """Two flows cannot be put on a common chart (range mismatch)."""


class ParameterError(ConeSolitonError):
    """Parameter combination violates a documented constraint."""


class ConfigError(ConeSolitonError):
    """Malformed configuration or missing input file (CLI exit code 2)."""
