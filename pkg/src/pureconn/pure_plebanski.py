"""From a definite connection to (Sigma_A, Psi_A, g_A); Plebanski residuals,
first variation and action densities.

Normalisation: F^i ^ F^j = 2 (Y^2)_ij mu_A with tr Y = Lambda, so that
Sigma_A = X F (X = Y^-1) satisfies Sigma_i ^ Sigma_j = 2 delta_ij mu_A and
mu_A is exactly the volume form of g_A.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from . import exterior as ex
from . import fd
from .connection import (ConnectionJet, PerturbationJet, covariant_d, covariant_d_field,
                         curvature_forms, d_stack, field_curvature, urbantke)
from .errors import (ArgumentError, ConvergenceError, DefinitenessError, NumericError,
                     OrientationError, SignError)


@dataclass(frozen=True)
class PureConnectionData:
    F: np.ndarray  # (..., 3, 6)
    Lam: float
    Y: np.ndarray
    X: np.ndarray
    mu: np.ndarray  # coefficient of dx1234 in mu_A
    Sigma: np.ndarray
    Psi: np.ndarray
    g: np.ndarray
    orientation: int  # orientation for which span(F) is self-dual
    Q: np.ndarray  # F^i ^ F^j against the reference 4-form

    @property
    def volume_density(self):
        """|mu_A| as a density against dx1..dx4."""
        return np.abs(self.mu)


@dataclass(frozen=True)
class PlebanskiPoint:
    """(A, Sigma, Psi) at a point; ``dSigma`` (exterior derivatives of the Sigma
    field, (3, 4) 3-forms) is needed for the connection equation."""

    jet: ConnectionJet
    Sigma: np.ndarray
    Psi: np.ndarray
    Lam: float
    dSigma: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.Lam == 0:
            raise ArgumentError("Lambda must be nonzero")
        tr = np.trace(ex.wedge_pairs(self.Sigma, self.Sigma), axis1=-2, axis2=-1)
        # tr(Sigma ^ Sigma) > 0 relative to the orientation of the frame; only nondegeneracy
        # is checked here since the orientation is carried by the caller
        if np.any(tr == 0):
            raise ArgumentError("tr(Sigma ^ Sigma) must be nonzero")

    @property
    def Y(self):
        return self.Psi + self.Lam / 3.0 * np.eye(3)

    @property
    def F(self):
        return self.jet.F

    @property
    def A(self):
        return self.jet.A


# --- metric reconstruction -----------------------------------------------------------------


def wedge_orthogonality_residual(Sigma, mu):
    """Sigma_i ^ Sigma_j / mu - 2 delta_ij."""
    mu = np.asarray(mu, dtype=float)
    if np.any(mu == 0):
        raise ArgumentError("mu must be nonzero")
    return ex.wedge_pairs(Sigma, Sigma) / mu[..., None, None] - 2.0 * np.eye(3)


def _frame_mu(Sigma):
    return np.trace(ex.wedge_pairs(Sigma, Sigma), axis1=-2, axis2=-1) / 6.0


def metric_from_sigma(Sigma, orientation: int = 1, method: str = "urbantke", tol: float = 1e-8):
    """Metric g with Lambda^+_g = span(Sigma), |Sigma_i|_g = sqrt(2) and dvol = mu.

    Returns (g, mu) with mu the dx1234 coefficient of Sigma_1 ^ Sigma_1 / 2.
    ``urbantke`` uses the cubic Urbantke formula (batched); ``fit`` solves the
    self-duality conditions by nonlinear least squares over unit-determinant
    metrics (pointwise).
    """
    Sigma = np.asarray(Sigma, dtype=float)
    mu = _frame_mu(Sigma)
    if np.any(mu * orientation <= 0):
        raise OrientationError("Sigma ^ Sigma is not positive for this orientation")
    res = wedge_orthogonality_residual(Sigma, mu)
    if np.any(np.max(np.abs(res), axis=(-2, -1)) > tol):
        raise ArgumentError("Sigma is not wedge-orthogonal")
    if method == "urbantke":
        U = orientation * urbantke(Sigma)
        w = np.linalg.eigvalsh(U)
        if np.any(w <= 0):
            raise OrientationError("Sigma is negatively oriented (reconstructed metric not positive)")
        g = U / np.linalg.det(U)[..., None, None] ** 0.25
    elif method == "fit":
        if Sigma.ndim != 2:
            raise ArgumentError("method='fit' works pointwise")
        g = _fit_conformal_metric(Sigma, orientation)
        M = ex.frame_coefficients(ex.sd_frame(g, orientation).sigma, Sigma)
        if np.linalg.det(M) <= 0:
            raise OrientationError("Sigma is negatively oriented")
    else:
        raise ArgumentError(f"unknown method {method!r}")
    # unit-determinant g -> sqrt(det) = |mu|
    g = g * np.sqrt(np.abs(mu))[..., None, None]
    return g, mu


_S_SYM = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _unit_metric(params):
    S = np.zeros((4, 4))
    for v, (i, j) in zip(params, _S_SYM):
        S[i, j] = S[j, i] = v
    S[3, 3] = -(S[0, 0] + S[1, 1] + S[2, 2])
    return expm(S)


def _fit_conformal_metric(Sigma, orientation):
    scale = np.linalg.norm(Sigma)

    def resid(params):
        g = _unit_metric(params)
        return ((ex.hodge_star(g, Sigma, 2, orientation) - Sigma) / scale).ravel()

    sol = least_squares(resid, np.zeros(9), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if np.max(np.abs(sol.fun)) > 1e-9:
        raise ConvergenceError("metric fit did not converge")
    return _unit_metric(sol.x)


# --- Sigma_A, Psi_A, g_A ---------------------------------------------------------------------


def build_pure_connection_data(jet_or_F, Lam: float, tol: float = 1e-8, orientation: int = 1,
                               mu0: float = 1.0) -> PureConnectionData:
    """Sigma_A = X F, Psi_A = Y - Lambda/3, mu_A and g_A from curvature forms (batched).

    ``mu0`` scales the reference 4-form used for Q before normalisation; the
    output does not depend on it.
    """
    if Lam == 0:
        raise ArgumentError("Lambda must be nonzero")
    F = np.asarray(jet_or_F.F if isinstance(jet_or_F, ConnectionJet) else jet_or_F, dtype=float)
    Q = ex.wedge_pairs(F, F) / (orientation * mu0)
    Qs = 0.5 * (Q + np.swapaxes(Q, -1, -2))
    w = np.linalg.eigvalsh(Qs)
    scale = np.max(np.abs(w), axis=-1)
    if np.any(scale == 0) or np.any(np.min(np.abs(w), axis=-1) <= tol * scale):
        raise DefinitenessError("connection is not definite (degenerate wedge matrix)")
    pos, neg = np.all(w > 0, axis=-1), np.all(w < 0, axis=-1)
    if not (np.all(pos) or np.all(neg)):
        raise DefinitenessError("connection is not definite (indefinite wedge matrix)")
    chir = 1 if np.all(pos) else -1
    o_eff = orientation * chir
    Q0 = chir * Qs  # positive definite, against the positive 4-form o_eff * mu0 dx1234
    # sign of the connection: orientation of e_i -> F^i onto the induced Lambda^+
    U = o_eff * urbantke(F)
    wu = np.linalg.eigvalsh(U)
    upos, uneg = np.all(wu > 0, axis=-1), np.all(wu < 0, axis=-1)
    if not np.all(upos | uneg):
        raise DefinitenessError("curvature span is not a definite subspace")
    conn_sign = np.where(upos, 1, -1)
    if np.any(conn_sign != np.sign(Lam)):
        raise SignError("the sign of the definite connection differs from the sign of Lambda")
    Y0 = ex.sym3_sqrt(Q0, np.sign(Lam))
    t = Lam / np.trace(Y0, axis1=-2, axis2=-1)
    Y = t[..., None, None] * Y0
    X = np.linalg.inv(Y)
    mu = o_eff * mu0 / (2.0 * t**2)
    Sigma = np.einsum("...ij,...jq->...iq", X, F)
    g, _ = metric_from_sigma(Sigma, o_eff, tol=max(tol, 1e-8) * 1e2)
    Psi = Y - Lam / 3.0 * np.eye(3)
    return PureConnectionData(F, float(Lam), Y, X, mu, Sigma, Psi, g, o_eff, Qs)


def rotate_frame(data_or_F, h):
    """Act by a constant rotation h of E: F^i -> h_ij F^j."""
    return np.einsum("ij,...jq->...iq", h, data_or_F)


# --- fields ------------------------------------------------------------------------------


class PureConnectionField:
    """A connection field together with its Sigma_A / g_A / Y data at every point."""

    def __init__(self, conn, Lam: float, orientation: Optional[int] = None, h: float = fd.DEFAULT_H,
                 tol: float = 1e-8):
        self.conn, self.Lam, self.h, self.tol = conn, float(Lam), h, tol
        self.orientation = getattr(conn, "orientation", 1) if orientation is None else orientation

    def __call__(self, X):
        return self.conn(X)

    def curvature(self, X):
        return field_curvature(self.conn, X, self.h)

    def data(self, X) -> PureConnectionData:
        return build_pure_connection_data(self.curvature(X), self.Lam, self.tol, self.orientation)

    def sigma(self, X):
        return self.data(X).Sigma

    def metric(self, X):
        return self.data(X).g

    def context(self, X):
        from .hessian_gauge import GaugeContext
        return GaugeContext.from_data(self.data(X))


def torsion_residual(A_field, Sigma_field, p, h: float = fd.DEFAULT_H):
    """(d_A Sigma)_i = d Sigma_i - eps_ijk A^j ^ Sigma_k as (3, 4) 3-forms."""
    return covariant_d_field(A_field, Sigma_field, p, 2, h)


def theta(conn, p, Lam: float, h: float = fd.DEFAULT_H, orientation: Optional[int] = None,
          tol: float = 1e-8):
    """theta(A) = (A, Sigma_A, Psi_A) at p, with d Sigma_A from the Sigma_A field.

    Returns (PlebanskiPoint, PureConnectionData).
    """
    field = conn if isinstance(conn, PureConnectionField) else \
        PureConnectionField(conn, Lam, orientation, h, tol)
    p = np.asarray(p, dtype=float)
    jet = curvature_forms(field.conn, p, "analytic" if hasattr(field.conn, "curvature") else "fd", h)
    data = build_pure_connection_data(jet.F, Lam, tol, field.orientation)
    dSigma = d_stack(fd.gradient(field.sigma, p, h), 2)
    return PlebanskiPoint(jet, data.Sigma, data.Psi, float(Lam), dSigma), data


def plebanski_residuals(pp: PlebanskiPoint):
    """(r_A, r_Psi, r_Sigma): connection, wedge-orthogonality and curvature equations."""
    rA = None if pp.dSigma is None else covariant_d(pp.A, pp.Sigma, pp.dSigma, 2)
    rPsi = wedge_orthogonality_residual(pp.Sigma, _frame_mu(pp.Sigma))
    rSigma = pp.F - np.einsum("...ij,...jq->...iq", pp.Y, pp.Sigma)
    return rA, rPsi, rSigma


def plebanski_density(pp: PlebanskiPoint):
    """F^i ^ Sigma_i - 1/2 (Psi + Lambda/3)_ij Sigma_i ^ Sigma_j (dx1234 coefficient)."""
    FS = np.einsum("...ii->...", ex.wedge_pairs(pp.F, pp.Sigma))
    SS = np.einsum("...ij,...ij->...", pp.Y, ex.wedge_pairs(pp.Sigma, pp.Sigma))
    return FS - 0.5 * SS


def plebanski_first_variation(pp: PlebanskiPoint, a: Optional[PerturbationJet] = None,
                              sigma=None, phi=None):
    """Integrand densities of dS_P/dA (a), dS_P/dPsi (phi) and dS_P/dSigma (sigma)."""
    zero = np.zeros(np.shape(pp.Sigma)[:-2])
    dA = zero if a is None else np.einsum("...ii->...", ex.wedge_pairs(a.dAa, pp.Sigma))
    dPsi = zero if phi is None else \
        -0.5 * np.einsum("...ij,...ij->...", phi, ex.wedge_pairs(pp.Sigma, pp.Sigma))
    if sigma is None:
        dSigma = zero
    else:
        dSigma = (np.einsum("...ii->...", ex.wedge_pairs(pp.F, sigma))
                  - np.einsum("...ij,...ij->...", pp.Y, ex.wedge_pairs(pp.Sigma, sigma)))
    return dA, dPsi, dSigma


def action_density(pcd: PureConnectionData):
    """Density of the pure connection action, (Lambda/2) mu_A = X_ij F^i ^ F^j / 4."""
    return 0.25 * np.einsum("...ij,...ij->...", pcd.X, ex.wedge_pairs(pcd.F, pcd.F))


def point_report(pcd: PureConnectionData, residuals=None) -> str:
    """JSON record for a single point."""
    rec = {
        "Lambda": pcd.Lam,
        "Q": np.asarray(pcd.Q).tolist(),
        "Y": np.asarray(pcd.Y).tolist(),
        "X_spectrum": np.linalg.eigvalsh(pcd.X).tolist(),
        "mu_A": float(pcd.mu),
        "g_A": np.asarray(pcd.g).tolist(),
        "orientation": pcd.orientation,
    }
    if residuals is not None:
        names = ("connection", "wedge_orthogonality", "curvature")
        rec["residual_norms"] = {n: (None if r is None else float(np.linalg.norm(r)))
                                 for n, r in zip(names, residuals)}
    if not all(np.all(np.isfinite(np.asarray(v))) for v in (pcd.Y, pcd.g)):
        raise NumericError("non-finite data in report")
    return json.dumps(rec, sort_keys=True)
