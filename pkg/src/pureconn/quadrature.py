"""Quadrature on coordinate charts and on S^4, compactly supported bump fields,
and integrated action / Hessian values.

Densities are functions ``f(X[..., 4]) -> values[...]`` integrated against
Lebesgue measure dx1..dx4. To integrate a 4-form with dx1234 coefficient c on a
chart of orientation o, integrate ``o * c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fd
from .connection import perturbation_jet
from .errors import ArgumentError, ConvergenceError, DomainError, NumericError
from .hessian_gauge import gauge_residuals, hessian_pre_gauge_integrand, norm_sq

DEFAULT_CHUNK = 2048


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (n, 4)
    weights: np.ndarray  # (n,)
    domain: dict

    def __post_init__(self):
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 4 or len(self.weights) != len(self.nodes):
            raise ArgumentError("malformed quadrature rule")
        if np.any(self.weights <= 0):
            raise ArgumentError("quadrature weights must be positive")

    def __len__(self):
        return len(self.weights)


def gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def box_rule(center=(0.0, 0.0, 0.0, 0.0), half_width=0.5, n: int = 16) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on a cube."""
    c = np.asarray(center, dtype=float)
    x, w = gauss_legendre(n, -half_width, half_width)
    grids = np.meshgrid(x, x, x, x, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1) + c
    W = np.einsum("a,b,c,d->abcd", w, w, w, w).ravel()
    return QuadratureRule(nodes, W, {"kind": "box", "center": c.tolist(), "half_width": half_width})


def s3_rule(n_psi: int = 8, n_theta: int = 8, n_phi: int = 16):
    """Product rule on the unit 3-sphere in hyperspherical angles; weights sum to 2 pi^2.

    psi: Gauss-Chebyshev (second kind) in cos psi, exact for the sin^2 psi weight;
    theta: Gauss-Legendre in cos theta; phi: equispaced.
    """
    k = np.arange(1, n_psi + 1)
    tp = np.cos(k * np.pi / (n_psi + 1))
    wp = np.pi / (n_psi + 1) * np.sin(k * np.pi / (n_psi + 1)) ** 2
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    ph = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    wph = np.full(n_phi, 2 * np.pi / n_phi)
    P, T, F = np.meshgrid(tp, ct, ph, indexing="ij")
    sp, st = np.sqrt(1 - P**2), np.sqrt(1 - T**2)
    pts = np.stack([P, sp * T, sp * st * np.cos(F), sp * st * np.sin(F)], axis=-1).reshape(-1, 4)
    W = np.einsum("a,b,c->abc", wp, wt, wph).ravel()
    return pts, W


def ball_rule(center=(0.0, 0.0, 0.0, 0.0), radius=1.0, n_r: int = 16,
              s3=(8, 8, 16)) -> QuadratureRule:
    """Radial Gauss-Legendre times the S^3 product rule on a ball."""
    c = np.asarray(center, dtype=float)
    r, wr = gauss_legendre(n_r, 0.0, radius)
    u, wu = s3_rule(*s3)
    nodes = (r[:, None, None] * u[None]).reshape(-1, 4) + c
    W = ((wr * r**3)[:, None] * wu[None]).ravel()
    return QuadratureRule(nodes, W, {"kind": "ball", "center": c.tolist(), "radius": radius})


def s4_rule(n_r: int = 64, s3=(5, 5, 8)) -> QuadratureRule:
    """All of R^4 (the stereographic chart of S^4) with r = t / (1 - t), t in (0, 1)."""
    t, wt = gauss_legendre(n_r, 0.0, 1.0)
    r = t / (1 - t)
    wr = wt / (1 - t) ** 2 * r**3
    u, wu = s3_rule(*s3)
    nodes = (r[:, None, None] * u[None]).reshape(-1, 4)
    W = (wr[:, None] * wu[None]).ravel()
    return QuadratureRule(nodes, W, {"kind": "s4", "n_r": n_r, "s3": list(s3)})


def evaluate_chunked(fn, nodes, chunk: int = DEFAULT_CHUNK):
    parts = [np.asarray(fn(nodes[i:i + chunk])) for i in range(0, len(nodes), chunk)]
    return np.concatenate(parts, axis=0)


def integrate_chart(density, rule: QuadratureRule, chunk: int = DEFAULT_CHUNK) -> float:
    """sum_k w_k density(node_k), compensated summation in node order."""
    vals = evaluate_chunked(density, rule.nodes, chunk)
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite density at a quadrature node")
    return math.fsum((rule.weights * vals).tolist())


def integrate_s4(density, n_r: int = 64, s3=(5, 5, 8), rtol: float = 1e-3, atol: float = 1e-12,
                 chunk: int = DEFAULT_CHUNK) -> float:
    """Integral over S^4 through the stereographic chart; raises ConvergenceError
    unless halving the radial and angular node counts changes the value by < rtol."""
    val = integrate_chart(density, s4_rule(n_r, s3), chunk)
    coarse = integrate_chart(density, s4_rule(max(2, n_r // 2), tuple(max(2, k // 2 + 1) for k in s3)),
                             chunk)
    if abs(val - coarse) > rtol * abs(val) + atol:
        raise ConvergenceError(f"S^4 integral not converged ({coarse} vs {val})")
    return val


# --- bumps --------------------------------------------------------------------------------


class BumpField:
    """(1 - |x - c|^2 / R^2)^3 times a constant amplitude, zero outside the ball;
    exact gradient and Hessian."""

    def __init__(self, center, radius: float, amplitude=1.0):
        if not radius > 0:
            raise ArgumentError("bump radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.amplitude = np.asarray(amplitude, dtype=float)

    @property
    def support(self):
        return self.center, self.radius

    def _s(self, X):
        y = np.asarray(X, dtype=float) - self.center
        s = np.sum(y * y, axis=-1) / self.radius**2
        return y, s, s < 1.0

    def profile(self, X):
        _, s, inside = self._s(X)
        return np.where(inside, (1.0 - np.minimum(s, 1.0)) ** 3, 0.0)

    def profile_gradient(self, X):
        y, s, inside = self._s(X)
        fp = np.where(inside, -3.0 * (1.0 - np.minimum(s, 1.0)) ** 2, 0.0)
        return fp[..., None] * 2.0 * y / self.radius**2

    def profile_hessian(self, X):
        y, s, inside = self._s(X)
        one = 1.0 - np.minimum(s, 1.0)
        fp = np.where(inside, -3.0 * one**2, 0.0)
        fpp = np.where(inside, 6.0 * one, 0.0)
        ds = 2.0 * y / self.radius**2
        return (fpp[..., None, None] * ds[..., :, None] * ds[..., None, :]
                + fp[..., None, None] * 2.0 / self.radius**2 * np.eye(4))

    def _times(self, f):
        amp = self.amplitude
        return f.reshape(f.shape + (1,) * amp.ndim) * amp

    def __call__(self, X):
        return self._times(self.profile(X))

    def gradient(self, X):
        return self._times(self.profile_gradient(X))

    def hessian(self, X):
        return self._times(self.profile_hessian(X))


# --- integrated quantities ----------------------------------------------------------------------


@dataclass(frozen=True)
class HessianValue:
    value: float  # integral of the pre-gauge Hessian integrand
    l2_norm_sq: float  # integral of |a|^2 mu_A
    max_horizontal_residual: float
    max_vertical_residual: float
    n_nodes: int


def _support(a_field, support):
    if support is not None:
        return support
    for obj in (a_field, getattr(a_field, "a", None), getattr(a_field, "xi", None)):
        if obj is not None and hasattr(obj, "support"):
            return obj.support
    raise ArgumentError("cannot determine the support of the perturbation field")


def hessian_quadratic_form(field, a_field, rule: Optional[QuadratureRule] = None, support=None,
                           h: float = fd.DEFAULT_H, chart=None, n_r: int = 12, s3=(6, 6, 12),
                           chunk: int = 512) -> HessianValue:
    """Integral of the pre-gauge Hessian integrand of a compactly supported a-field.

    ``field`` provides the connection (call) and the gauge context (``context``) of a
    critical point, e.g. a PureConnectionField.
    """
    center, radius = _support(a_field, support)
    center = np.asarray(center, dtype=float)
    chart = chart if chart is not None else getattr(getattr(field.conn, "model", None), "chart", None)
    if chart is not None and chart.distance_to_boundary(center) <= radius + 4 * h:
        raise DomainError("perturbation support touches the chart boundary")
    rule = rule if rule is not None else ball_rule(center, radius, n_r, s3)
    orientation = field.orientation
    acc = {"val": [], "l2": [], "hor": 0.0, "ver": 0.0}

    for i in range(0, len(rule), chunk):
        X = rule.nodes[i:i + chunk]
        ctx = field.context(X)
        pj = perturbation_jet(field, a_field, X, h)
        acc["val"].append(orientation * hessian_pre_gauge_integrand(ctx, pj))
        acc["l2"].append(norm_sq(ctx, pj.a) * np.abs(ctx.mu))
        hor, ver, _ = gauge_residuals(ctx, pj)
        acc["hor"] = max(acc["hor"], float(np.max(np.abs(hor))))
        acc["ver"] = max(acc["ver"], float(np.max(np.abs(ver / ctx.mu[..., None]))))
    vals, l2 = np.concatenate(acc["val"]), np.concatenate(acc["l2"])
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(l2))):
        raise NumericError("non-finite Hessian integrand")
    return HessianValue(math.fsum((rule.weights * vals).tolist()),
                        math.fsum((rule.weights * l2).tolist()), acc["hor"], acc["ver"], len(rule))
