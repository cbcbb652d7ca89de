"""Levi-Civita curvature, its chiral block decomposition, and the induced
connection on the bundle of self-dual 2-forms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exterior as ex
from . import fd, kernels
from .errors import ArgumentError, NumericError, PreconditionError
from .models import MetricJet, ModelMetric, metric_jet

# complex-step size used to differentiate the self-dual frame exactly
_CSTEP = 1e-30


@dataclass(frozen=True)
class RiemannTensor:
    R: np.ndarray  # (..., 4, 4, 4, 4), R_abab > 0 for positive sectional curvature
    g: np.ndarray


@dataclass(frozen=True)
class ChiralDecomp:
    Rplus: np.ndarray
    Rminus: np.ndarray
    C: np.ndarray  # C[i, j]: Lambda^- component i of Rm(Sigma^+_j)
    scalar: np.ndarray
    splus: np.ndarray  # frames the blocks are expressed in
    sminus: np.ndarray
    orientation: int = 1


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite {what}")
    return arr


def christoffel(jet: MetricJet) -> np.ndarray:
    """Gamma[..., k, i, j] = Gamma^k_ij."""
    return _finite(kernels.christoffel(jet.g, jet.dg), "Christoffel symbols")


def riemann(jet: MetricJet) -> RiemannTensor:
    return RiemannTensor(_finite(kernels.riemann(jet.g, jet.dg, jet.ddg), "curvature"), jet.g)


def ricci(rm: RiemannTensor) -> np.ndarray:
    ginv = np.linalg.inv(rm.g)
    return np.einsum("...ac,...abcd->...bd", ginv, rm.R)


def scalar_curvature(rm: RiemannTensor) -> np.ndarray:
    return np.einsum("...bd,...bd->...", np.linalg.inv(rm.g), ricci(rm))


def _raise2(ginv, T):
    return np.einsum("...ac,...bd,...cd->...ab", ginv, ginv, T, optimize=True)


def curvature_operator_form(rm: RiemannTensor, alpha, beta):
    """<Rm(alpha), beta> for 2-form components, with Rm(w)_ab = R_abcd w^cd / 2."""
    ginv = np.linalg.inv(rm.g)
    a = _raise2(ginv, ex.to_tensor(alpha, 2))
    b = _raise2(ginv, ex.to_tensor(beta, 2))
    return 0.25 * np.einsum("...abcd,...ab,...cd->...", rm.R, b, a, optimize=True)


def chiral_decompose(rm: RiemannTensor, g=None, orientation: int = 1) -> ChiralDecomp:
    g = rm.g if g is None else g
    splus = ex.sd_frame(g, orientation).sigma
    sminus = ex.sd_frame(g, -orientation).sigma
    ginv = np.linalg.inv(g)
    R = rm.R
    Tp = _raise2(ginv[..., None, :, :], ex.to_tensor(splus, 2))
    Tm = _raise2(ginv[..., None, :, :], ex.to_tensor(sminus, 2))
    # <Rm S_j, T_i> / 2 in frames of norm sqrt(2)
    Rplus = 0.125 * np.einsum("...abcd,...iab,...jcd->...ij", R, Tp, Tp, optimize=True)
    Rminus = 0.125 * np.einsum("...abcd,...iab,...jcd->...ij", R, Tm, Tm, optimize=True)
    C = 0.125 * np.einsum("...abcd,...iab,...jcd->...ij", R, Tm, Tp, optimize=True)
    return ChiralDecomp(Rplus, Rminus, C, scalar_curvature(rm), splus, sminus, orientation)


def sectional_direct(rm: RiemannTensor, u, v):
    """Sectional curvature of span(u, v) straight from R_abcd."""
    g = rm.g
    num = np.einsum("...abcd,...a,...b,...c,...d->...", rm.R, u, v, u, v, optimize=True)
    den = (np.einsum("...ab,...a,...b->...", g, u, u) * np.einsum("...ab,...a,...b->...", g, v, v)
           - np.einsum("...ab,...a,...b->...", g, u, v) ** 2)
    return num / den


def sectional(decomp: ChiralDecomp, g, u, v, c_tol: float = 1e-6, ortho_tol: float = 1e-8):
    """<R+ a, a> + <R- b, b> with a, b the chiral parts of u^b ^ v^b (Einstein metrics only)."""
    scale = max(1.0, float(np.max(np.abs(decomp.Rplus))))
    if np.max(np.abs(decomp.C)) > c_tol * scale:
        raise PreconditionError("sectional formula needs an Einstein metric (C != 0)")
    u, v = np.asarray(u, float), np.asarray(v, float)
    gram = np.array([[u @ g @ u, u @ g @ v], [v @ g @ u, v @ g @ v]])
    if np.max(np.abs(gram - np.eye(2))) > ortho_tol:
        raise ArgumentError("u and v must be g-orthonormal")
    omega = ex.wedge(g @ u, g @ v, 1, 1)
    total = 0.0
    for frame, block in ((decomp.splus, decomp.Rplus), (decomp.sminus, decomp.Rminus)):
        c = ex.frame_coefficients(frame, omega)
        total += 2.0 * c @ block @ c
    return float(total)


# --- induced connection on Lambda^+ -------------------------------------------------


def frame_derivative(g, dg, orientation=1):
    """d_mu Sigma_i of the sd_frame field, exact via complex-step in the metric."""
    gc = g[..., None, :, :] + 1j * _CSTEP * dg  # (..., 4, 4, 4), one perturbation per mu
    sig = kernels.sd_frame(gc, orientation)[0]
    return np.imag(sig) / _CSTEP  # (..., 4, 3, 6)


def connection_from_frame(g, gamma, sigma, dsigma):
    """A^j_mu = eps_ijk <nabla_mu Sigma_i, Sigma_k> / 4 for an oriented frame field."""
    T = ex.to_tensor(sigma, 2)  # (..., 3, 4, 4)
    dT = ex.to_tensor(dsigma, 2)  # (..., 4, 3, 4, 4)
    # nabla_mu S_ab = d_mu S_ab - Gamma^c_{mu a} S_cb - Gamma^c_{mu b} S_ac
    nab = (dT - np.einsum("...cma,...icb->...miab", gamma, T)
           - np.einsum("...cmb,...iac->...miab", gamma, T))
    ginv = np.linalg.inv(g)
    Tup = np.einsum("...ac,...bd,...kcd->...kab", ginv, ginv, T, optimize=True)
    pair = 0.5 * np.einsum("...miab,...kab->...mik", nab, Tup)  # <nabla_mu S_i, S_k>
    return 0.25 * np.einsum("ijk,...mik->...jm", ex.LEVI3, pair)


def lc_connection_on_lambda_plus(model: ModelMetric, p, scheme: str = "analytic",
                                 h: float = fd.DEFAULT_H) -> np.ndarray:
    """Connection 1-forms A[..., i, mu] of the Levi-Civita connection on Lambda^+,
    pulled back by the sd_frame field."""
    p = np.asarray(p, dtype=float)
    o = model.orientation
    jet = metric_jet(model, p, scheme, h)
    gamma = christoffel(jet)
    sigma = ex.sd_frame(jet.g, o).sigma
    if scheme == "analytic":
        dsigma = frame_derivative(jet.g, jet.dg, o)
    else:
        dsigma = fd.gradient(lambda X: ex.sd_frame(model.evaluate(X), o).sigma, p, h)
    return _finite(connection_from_frame(jet.g, gamma, sigma, dsigma), "connection")


def lc_curvature_from_riemann(rm: RiemannTensor, orientation: int = 1) -> np.ndarray:
    """Curvature 2-forms F^j of the induced connection on Lambda^+, from R_abcd."""
    g = rm.g
    sigma = ex.sd_frame(g, orientation).sigma
    ginv = np.linalg.inv(g)
    T = ex.to_tensor(sigma, 2)
    Rmixed = np.einsum("...ea,...ebcd->...abcd", ginv, rm.R)  # R^a_bcd
    # (R_cd S)_ab = -R^e_acd S_eb - R^e_bcd S_ae
    act = (-np.einsum("...eacd,...ieb->...icdab", Rmixed, T)
           - np.einsum("...ebcd,...iae->...icdab", Rmixed, T))
    Tup = np.einsum("...ac,...bd,...kcd->...kab", ginv, ginv, T, optimize=True)
    omega = 0.25 * np.einsum("...icdab,...kab->...ikcd", act, Tup)  # <R_cd S_i, S_k>/2
    Ften = 0.5 * np.einsum("ijk,...ikcd->...jcd", ex.LEVI3, omega)
    return ex.from_tensor(Ften, 2)


class LeviCivitaField:
    """The Levi-Civita connection on Lambda^+ of a model, as a connection field.

    Calling the field gives the coefficients A[..., 3, 4]; ``curvature`` gives
    F[..., 3, 6] straight from the Riemann tensor (no differentiation of A);
    ``sigma`` gives the sd_frame field the connection is expressed in.
    """

    def __init__(self, model: ModelMetric, scheme: str = "analytic", h: float = fd.DEFAULT_H):
        if scheme not in ("analytic", "fd"):
            raise ArgumentError(f"unknown scheme {scheme!r}")
        if scheme == "analytic" and not model.has_analytic_jet:
            scheme = "fd"
        self.model, self.scheme, self.h = model, scheme, h

    @property
    def orientation(self):
        return self.model.orientation

    def __call__(self, X):
        return lc_connection_on_lambda_plus(self.model, X, self.scheme, self.h)

    def curvature(self, X):
        jet = metric_jet(self.model, X, self.scheme, self.h)
        return _finite(lc_curvature_from_riemann(riemann(jet), self.orientation), "curvature")

    def metric(self, X):
        return self.model.evaluate(np.asarray(X, dtype=float))

    def sigma(self, X):
        return ex.sd_frame(self.metric(X), self.orientation).sigma
