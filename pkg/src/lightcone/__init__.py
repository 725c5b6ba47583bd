"""Numerical laboratory for conformal surface geometry in the light-cone
model: central sphere congruences, (constrained) Willmore residuals, the
lambda-family of flat connections, spectral deformation, Bäcklund
transformation by rational dressing, and isothermic detection."""

__version__ = "0.1.0"

from . import (chart, config, connection, dressing, errors, export, gauge,
               isothermic, minkowski, multiplier, oracle, report, surface)

__all__ = [
    "chart", "config", "connection", "dressing", "errors", "export", "gauge",
    "isothermic", "minkowski", "multiplier", "oracle", "report", "surface",
    "__version__",
]
