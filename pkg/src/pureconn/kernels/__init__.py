"""Hot per-point kernels with a numba path and a pure-numpy fallback.

Set ``PURECONN_NUMBA=0`` in the environment to force the numpy path. The numba
path is also skipped automatically when numba cannot be imported.
"""
import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("PURECONN_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off"):
    try:
        from . import _numba
    except ImportError:  # pragma: no cover - numba is optional
        pass
    else:
        _impl = _numba
        BACKEND = "numba"


def sd_frame(g, orientation=1):
    """Oriented frame of Lambda^+_g (3 x 6 components, |Sigma_i| = sqrt 2) and mu."""
    return _impl.sd_frame(g, int(orientation))


def christoffel(g, dg):
    return _impl.christoffel(g, dg)


def riemann(g, dg, ddg):
    return _impl.riemann(g, dg, ddg)


__all__ = ["BACKEND", "sd_frame", "christoffel", "riemann"]
