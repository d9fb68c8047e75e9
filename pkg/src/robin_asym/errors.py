"""Exception types shared across the package."""


class RobinAsymError(Exception):
    """Base class for all package errors."""


class GeometryError(RobinAsymError, ValueError):
    """Invalid or degenerate boundary curve."""


class SelfIntersectionError(GeometryError):
    """Curve crosses itself at sample resolution."""


class DegenerateCurveError(GeometryError):
    """Vanishing speed or failed arc-length normalization."""


class TubularWidthError(GeometryError):
    """Certified one-sided tube width is uselessly small."""


class UnsupportedGeometryError(GeometryError):
    """Domain shape outside what the mesher handles (e.g. not star-shaped)."""


class ParameterError(RobinAsymError, ValueError):
    """Arguments outside an operation's admissible range."""


class SingularCoordinateError(ParameterError):
    """Normal coordinate crosses the focal distance (1 - u*gamma <= 0)."""


class PlacementError(ParameterError):
    """Trial-function windows do not fit on the boundary."""


class ResolutionError(RobinAsymError, RuntimeError):
    """Discretization too coarse; a convergence check failed."""


class AssemblyError(RobinAsymError, RuntimeError):
    """Finite-element assembly failed (degenerate element, bad forms)."""


class IterationError(RobinAsymError, RuntimeError):
    """Eigenvalue iteration did not converge to the requested residual."""


class FitError(RobinAsymError, RuntimeError):
    """Least-squares fit is ill-posed or under-determined."""


class UsageError(RobinAsymError, ValueError):
    """Invalid command-line or configuration input."""
