"""Negative Robin-Laplacian eigenvalues on smooth planar domains at large coupling.

Subpackages: geometry (curves and curvature), comparison_1d (periodic boundary
operators), transverse (strip modes), disc_oracle (Bessel ground truth),
robin_fem (2D finite elements), asymptotics (bounds, fits, trial functions),
cli (batch front-end).
"""

from . import asymptotics, comparison_1d, disc_oracle, geometry, robin_fem, transverse
from .errors import RobinAsymError

__version__ = "0.1.0"

__all__ = [
    "asymptotics",
    "comparison_1d",
    "disc_oracle",
    "geometry",
    "robin_fem",
    "transverse",
    "RobinAsymError",
    "__version__",
]
