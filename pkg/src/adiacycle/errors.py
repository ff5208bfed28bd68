"""Exception hierarchy shared by the library and the command line."""


class AdiacycleError(Exception):
    """Base class for all library errors."""


class DomainError(AdiacycleError, ValueError):
    """A quantity was requested outside its domain (e.g. at the field origin)."""


class DegenerateCurveError(DomainError):
    """The control curve has (numerically) zero length or zero geodesic length."""


class UnsupportedCurveError(DomainError):
    """The curve is self-intersecting where a simple curve is required."""


class OrientationError(DomainError):
    """The curve circulates the wrong way for the requested operating mode."""


class ConvergenceError(AdiacycleError, RuntimeError):
    """An adaptive procedure did not reach its tolerance."""


class SolverError(AdiacycleError, RuntimeError):
    """A linear solve in the master-equation oracle was singular or degenerate."""


class OptimizationError(AdiacycleError, RuntimeError):
    """Every start of a multi-start search failed."""
