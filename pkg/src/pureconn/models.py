"""Catalogue of closed-form model metrics on coordinate charts.

Exact first and second derivatives are produced by differentiating the
symbolic metric once with sympy and compiling the result with ``lambdify``;
the finite-difference jet uses the fourth-order stencils in :mod:`pureconn.fd`.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import sympy as sp

from . import fd
from .errors import ArgumentError, DomainError, NumericError

MODEL_NAMES = ("flat", "sphere4", "hyperbolic4", "cp2-fubini-study", "s2xs2")

# Einstein constants at unit scale
EINSTEIN_CONSTANTS = {"flat": 0.0, "sphere4": 3.0, "hyperbolic4": -3.0,
                      "cp2-fubini-study": 6.0, "s2xs2": 1.0}


@dataclass(frozen=True)
class ChartSpec:
    name: str
    kind: str  # "box" (radius = half-width) or "ball"
    radius: float
    center: tuple = (0.0, 0.0, 0.0, 0.0)
    orientation: int = 1

    def __post_init__(self):
        if self.kind not in ("box", "ball"):
            raise ArgumentError(f"unknown chart kind {self.kind!r}")
        if not self.radius > 0:
            raise ArgumentError("chart domain must be nonempty")
        if self.orientation not in (1, -1):
            raise ArgumentError("orientation must be +1 or -1")

    def distance_to_boundary(self, p):
        p = np.asarray(p, dtype=float) - np.asarray(self.center)
        if self.kind == "ball":
            return self.radius - np.linalg.norm(p, axis=-1)
        return self.radius - np.max(np.abs(p), axis=-1)

    def require(self, p, margin=0.0):
        d = self.distance_to_boundary(p)
        if np.any(d <= margin):
            if np.any(d <= 0):
                raise DomainError(f"point outside chart {self.name}")
            raise DomainError(f"point within {margin:g} of the boundary of chart {self.name}")


@dataclass(frozen=True)
class Point4:
    coords: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) != 4 or not all(np.isfinite(c)):
            raise ArgumentError("Point4 needs 4 finite coordinates")
        object.__setattr__(self, "coords", c)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


@dataclass(frozen=True)
class MetricJet:
    g: np.ndarray  # (..., 4, 4)
    dg: np.ndarray  # (..., 4, 4, 4): dg[..., k, i, j] = d_k g_ij
    ddg: np.ndarray  # (..., 4, 4, 4, 4): ddg[..., l, k, i, j] = d_l d_k g_ij
    point: np.ndarray


@dataclass(frozen=True, eq=False)
class ModelMetric:
    name: str
    chart: ChartSpec
    evaluate: Callable
    d_evaluate: Optional[Callable] = None
    dd_evaluate: Optional[Callable] = None
    scale: float = 1.0
    einstein_constant: Optional[float] = None
    sample_radius: float = 1.0
    expr: Optional[sp.Matrix] = field(default=None, repr=False)

    @property
    def orientation(self):
        return self.chart.orientation

    @property
    def has_analytic_jet(self):
        return self.d_evaluate is not None and self.dd_evaluate is not None

    def sample(self, rng, n):
        """n points uniformly distributed in the sampling ball."""
        v = rng.normal(size=(n, 4))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        r = self.sample_radius * rng.uniform(size=(n, 1)) ** 0.25
        return np.asarray(self.chart.center) + r * v


X_SYMS = sp.symbols("x1:5", real=True)


def _compile(exprs, shape):
    flat = list(exprs)
    fn = sp.lambdify(X_SYMS, flat, modules="numpy", cse=True)

    def call(X):
        X = np.asarray(X, dtype=float)
        vals = fn(*np.moveaxis(X, -1, 0))
        lead = X.shape[:-1]
        out = np.stack([np.broadcast_to(np.asarray(v, dtype=float), lead) for v in vals], axis=-1)
        return out.reshape(lead + shape)

    return call


def _metric_functions(expr: sp.Matrix):
    g_list = [expr[i, j] for i in range(4) for j in range(4)]
    d_list = [sp.diff(expr[i, j], X_SYMS[k]) for k in range(4) for i in range(4) for j in range(4)]
    dd = {}
    dd_list = []
    for l in range(4):
        for k in range(4):
            for i in range(4):
                for j in range(4):
                    key = (min(k, l), max(k, l), min(i, j), max(i, j))
                    if key not in dd:
                        dd[key] = sp.diff(expr[i, j], X_SYMS[k], X_SYMS[l])
                    dd_list.append(dd[key])
    return (_compile(g_list, (4, 4)), _compile(d_list, (4, 4, 4)),
            _compile(dd_list, (4, 4, 4, 4)))


def _symbolic_metric(name):
    x = sp.Matrix(X_SYMS)
    r2 = sum(s**2 for s in X_SYMS)
    I4 = sp.eye(4)
    if name == "flat":
        return I4
    if name == "sphere4":
        return 4 / (1 + r2) ** 2 * I4
    if name == "hyperbolic4":
        return 4 / (1 - r2) ** 2 * I4
    if name == "cp2-fubini-study":
        # affine chart z = (x1 + i x2, x3 + i x4); holomorphic sectional curvature 4
        w = sp.Matrix([-X_SYMS[1], X_SYMS[0], -X_SYMS[3], X_SYMS[2]])
        return I4 / (1 + r2) - (x * x.T + w * w.T) / (1 + r2) ** 2
    if name == "s2xs2":
        u2 = X_SYMS[0] ** 2 + X_SYMS[1] ** 2
        v2 = X_SYMS[2] ** 2 + X_SYMS[3] ** 2
        return sp.diag(4 / (1 + u2) ** 2, 4 / (1 + u2) ** 2, 4 / (1 + v2) ** 2, 4 / (1 + v2) ** 2)
    raise ArgumentError(f"unknown model {name!r}; choose from {MODEL_NAMES}")


_CHARTS = {
    "flat": ("box", 20.0, 2.0),
    # compact models: the chart covers all of R^4 (the manifold minus a null set)
    "sphere4": ("ball", np.inf, 2.0),
    "hyperbolic4": ("ball", 1.0, 0.7),
    "cp2-fubini-study": ("ball", np.inf, 2.0),
    "s2xs2": ("ball", np.inf, 2.0),
}


def _scaled(f, c):
    return lambda X: c * f(X)


@lru_cache(maxsize=None)
def _catalog_functions(name):
    return _metric_functions(_symbolic_metric(name))


def get_model(name: str, scale: float = 1.0, orientation: int = 1) -> ModelMetric:
    """Catalogue model; ``scale`` is a length scale (the metric is multiplied by scale**2)."""
    if name not in MODEL_NAMES:
        raise ArgumentError(f"unknown model {name!r}; choose from {MODEL_NAMES}")
    if not scale > 0:
        raise ArgumentError("scale must be positive")
    kind, radius, sample_radius = _CHARTS[name]
    g, dg, ddg = _catalog_functions(name)
    s2 = float(scale) ** 2
    if s2 != 1.0:
        g, dg, ddg = (_scaled(f, s2) for f in (g, dg, ddg))
    return ModelMetric(name=name, chart=ChartSpec(name, kind, radius, orientation=orientation),
                       evaluate=g, d_evaluate=dg, dd_evaluate=ddg, scale=float(scale),
                       einstein_constant=EINSTEIN_CONSTANTS[name] / s2,
                       sample_radius=sample_radius, expr=_symbolic_metric(name) * s2)


def with_orientation(model: ModelMetric, orientation: int) -> ModelMetric:
    """Same metric on the same chart with the given orientation of dx1^dx2^dx3^dx4."""
    chart = dataclasses.replace(model.chart, orientation=orientation)
    suffix = "" if orientation == 1 else "[reversed]"
    return dataclasses.replace(model, chart=chart, name=model.name.split("[")[0] + suffix)


def reversed_orientation(model: ModelMetric) -> ModelMetric:
    return with_orientation(model, -model.orientation)


def from_sympy(name: str, builder: Callable, chart: ChartSpec, einstein_constant=None,
               sample_radius: float = 1.0) -> ModelMetric:
    """User model from ``builder(x1, x2, x3, x4) -> sympy 4x4 Matrix``; exact jets."""
    expr = sp.Matrix(builder(*X_SYMS))
    if expr.shape != (4, 4):
        raise ArgumentError("metric expression must be 4x4")
    g, dg, ddg = _metric_functions(expr)
    return ModelMetric(name=name, chart=chart, evaluate=g, d_evaluate=dg, dd_evaluate=ddg,
                       einstein_constant=einstein_constant, sample_radius=sample_radius, expr=expr)


def from_callable(name: str, fn: Callable, chart: ChartSpec, einstein_constant=None,
                  sample_radius: float = 1.0) -> ModelMetric:
    """User model from a numeric evaluator ``fn(X[..., 4]) -> g[..., 4, 4]``; FD jets only."""
    return ModelMetric(name=name, chart=chart, evaluate=fn, einstein_constant=einstein_constant,
                       sample_radius=sample_radius)


def conformal_perturbation(model: ModelMetric, amplitude: float = 0.1) -> ModelMetric:
    """model metric times exp(2 amplitude x1 x2 exp(-|x|^2)): generically non-Einstein."""
    if model.expr is None:
        raise ArgumentError("conformal_perturbation needs a symbolic model")
    x = X_SYMS
    factor = sp.exp(2 * amplitude * x[0] * x[1] * sp.exp(-sum(s**2 for s in x)))
    expr = model.expr * factor
    g, dg, ddg = _metric_functions(expr)
    return dataclasses.replace(model, name=model.name + "+bump", evaluate=g, d_evaluate=dg,
                               dd_evaluate=ddg, einstein_constant=None, expr=expr)


def _as_points(p):
    return np.asarray(p, dtype=float)


def evaluate_metric(model: ModelMetric, p) -> np.ndarray:
    p = _as_points(p)
    model.chart.require(p)
    g = np.asarray(model.evaluate(p))
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite metric value")
    return g


def metric_jet(model: ModelMetric, p, scheme: str = "analytic", h: float = fd.DEFAULT_H) -> MetricJet:
    """Metric with first and second coordinate derivatives at p (batched)."""
    p = _as_points(p)
    if scheme == "analytic":
        if not model.has_analytic_jet:
            raise ArgumentError(f"model {model.name} has no analytic derivatives; use scheme='fd'")
        model.chart.require(p)
        jet = MetricJet(model.evaluate(p), model.d_evaluate(p), model.dd_evaluate(p), p)
    elif scheme == "fd":
        # the mixed stencil reaches 2h along two axes
        model.chart.require(p, margin=4 * h)
        jet = MetricJet(model.evaluate(p), fd.gradient(model.evaluate, p, h),
                        fd.hessian(model.evaluate, p, h), p)
    else:
        raise ArgumentError(f"unknown scheme {scheme!r}")
    for arr in (jet.g, jet.dg, jet.ddg):
        if not np.all(np.isfinite(arr)):
            raise NumericError("non-finite metric jet")
    return jet
