"""Fourth-order central finite differences for batched fields on R^4.

A field is any callable ``f(X)`` taking points of shape ``(..., 4)`` and
returning an array of shape ``(..., *value_shape)``. Derivative axes are
inserted right after the batch axes.
"""
import numpy as np

from .errors import NumericError

DEFAULT_H = 1e-3

_STEPS = np.array([-2.0, -1.0, 1.0, 2.0])
_W1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_W2 = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0
_W2_CENTER = -30.0 / 12.0

_OFF1 = np.einsum("s,mk->msk", _STEPS, np.eye(4)).reshape(16, 4)


def _check(vals):
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite value inside a finite-difference stencil")
    return vals


def gradient(f, x, h=DEFAULT_H):
    """d_mu f at x; result shape (..., 4, *value_shape)."""
    x = np.asarray(x, dtype=float)
    X = x[..., None, :] + h * _OFF1
    vals = _check(np.asarray(f(X)))
    lead = x.ndim - 1
    vals = vals.reshape(x.shape[:-1] + (4, 4) + vals.shape[lead + 1:])
    return np.moveaxis(vals, lead + 1, -1) @ _W1 / h


def hessian(f, x, h=DEFAULT_H):
    """d_l d_k f at x; result shape (..., 4, 4, *value_shape)."""
    x = np.asarray(x, dtype=float)
    pts = [np.zeros(4)]
    for k in range(4):
        for l in range(4):
            for s in _STEPS:
                if k == l:
                    pts.append(s * np.eye(4)[k])
                else:
                    for t in _STEPS:
                        if k < l:
                            pts.append(s * np.eye(4)[k] + t * np.eye(4)[l])
    pts = np.array(pts)
    X = x[..., None, :] + h * pts
    vals = _check(np.asarray(f(X)))
    lead = x.ndim - 1
    vals = np.moveaxis(vals, lead, 0)
    center = vals[0]
    out = np.zeros((4, 4) + center.shape, dtype=vals.dtype)
    pos = 1
    for k in range(4):
        for l in range(4):
            if k == l:
                acc = _W2_CENTER * center
                for w in _W2:
                    acc = acc + w * vals[pos]
                    pos += 1
                out[k, k] = acc / h**2
            elif k < l:
                acc = 0.0
                for ws in _W1:
                    for wt in _W1:
                        acc = acc + ws * wt * vals[pos]
                        pos += 1
                out[k, l] = out[l, k] = acc / h**2
    # (4, 4, *batch, *value) -> (*batch, 4, 4, *value)
    nb = x.ndim - 1
    return np.moveaxis(out, [0, 1], [nb, nb + 1])


def exterior_derivative(f, x, k, h=DEFAULT_H):
    """d of a k-form field given by components (or of a stack (..., n, dim))."""
    from .exterior import _WEDGE
    grad = np.moveaxis(gradient(f, x, h), x.ndim - 1, -2)  # (..., [n,] 4, dim_k)
    return np.einsum("...mq,mqr->...r", grad, _WEDGE[(1, k)])
