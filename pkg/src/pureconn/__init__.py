"""Numerical toolkit for self-dual curvature, definite SO(3) connections, the pure
connection formulation of Einstein metrics and the second variation of its action."""
from . import (config, connection, curvature, errors, exterior, fd, hessian_gauge, kernels, models,
               pure_plebanski, quadrature)
from .errors import PureConnError

__version__ = "0.1.0"

__all__ = ["config", "connection", "curvature", "errors", "exterior", "fd", "hessian_gauge",
           "kernels", "models", "pure_plebanski", "quadrature", "PureConnError", "__version__"]
