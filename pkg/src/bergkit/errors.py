"""Exception types shared across the toolkit."""

from __future__ import annotations


class BergkitError(Exception):
    """Base class for all toolkit errors."""


class InputError(BergkitError, ValueError):
    """Invalid argument: wrong arity, out-of-range parameter, bad index."""


class SamplingError(BergkitError):
    """Interior-point rejection sampling exceeded its iteration cap."""


class DivergentMomentError(BergkitError):
    """A quadrature value was requested for a divergent moment."""


class AccuracyError(BergkitError):
    """Adaptive refinement exhausted its budget.

    Carries the best available value and its error estimate.
    """

    def __init__(self, message: str, value: float, abs_error: float):
        super().__init__(message)
        self.value = value
        self.abs_error = abs_error


class StencilError(BergkitError):
    """A finite-difference stencil hit a non-finite potential value."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class DegenerateMetricError(BergkitError):
    """The metric tensor failed the positive-definiteness check."""

    def __init__(self, message: str, smallest_eigenvalue: float):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class NumericsError(BergkitError):
    """A consistency check failed beyond the propagated numerical error."""


class EvaluationDomainError(BergkitError):
    """A kernel model was evaluated outside its domain of validity."""


class KernelAssemblyError(BergkitError):
    """A kernel series could not be assembled from the given moment table."""


class ConfigError(BergkitError):
    """Malformed run configuration (CLI exit code 2)."""
