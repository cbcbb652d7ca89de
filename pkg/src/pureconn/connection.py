"""SO(3)-connections given by coefficient fields: curvature, covariant exterior
derivatives, the definiteness test, and the infinitesimal gauge action.

A *field* is any callable ``f(X)`` on points ``X[..., 4]``. A connection field
returns ``A[..., 3, 4]`` (``A[..., i, mu]`` = component ``mu`` of the 1-form
``A^i``). A field may expose ``gradient(X)`` (exact first derivatives, shape
``(..., 4, *value)``) and a connection field may expose ``curvature(X)``;
otherwise both are obtained by finite differences.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import exterior as ex
from . import fd
from .errors import ArgumentError, NumericError

CLASSES = ("positive", "negative", "degenerate")


def d_stack(dw, k):
    """Exterior derivative of a stack of k-forms from partials dw[..., mu, n, comp]."""
    return np.einsum("...mnq,mqr->...nr", dw, ex._WEDGE[(1, k)])


@dataclass(frozen=True)
class ConnectionJet:
    """Connection coefficients at a point with their first derivatives.

    ``dA[..., mu, i, nu]`` = d_mu A^i_nu and ``F[..., i, :]`` are 2-form components.
    """

    A: np.ndarray
    dA: np.ndarray
    F: np.ndarray
    point: np.ndarray

    @property
    def dA_form(self):
        """Exterior derivatives dA^i as 2-forms."""
        return d_stack(self.dA, 1)


@dataclass(frozen=True)
class PerturbationJet:
    """a in Lambda^1 x so(3) with its covariant exterior derivative d_A a."""

    a: np.ndarray  # (..., 3, 4)
    dAa: np.ndarray  # (..., 3, 6)
    provenance: str = "synthetic"  # or "field"


@dataclass(frozen=True)
class DefinitenessReport:
    Q: np.ndarray
    classification: str
    min_abs_eigenvalue: float
    chirality: int  # +1 when Q > 0 w.r.t. the orientation, -1 when Q < 0, 0 otherwise
    M: Optional[np.ndarray] = None  # F^i = M_ij Sigma_j in the sd_frame of the induced metric

    @property
    def definite(self):
        return self.classification != "degenerate"

    @property
    def sign(self):
        return {"positive": 1, "negative": -1}.get(self.classification, 0)


# --- fields ------------------------------------------------------------------------------


def field_gradient(f, X, h=fd.DEFAULT_H):
    """d_mu f at X, exact when the field provides ``gradient``."""
    if hasattr(f, "gradient"):
        return np.asarray(f.gradient(X))
    return fd.gradient(f, X, h)


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite {what}")
    return arr


def curvature_from_coefficients(A, dA_form):
    """F^i = dA^i - 1/2 eps_ijk A^j ^ A^k."""
    return dA_form - 0.5 * ex.cross_wedge(A, A, 1, 1)


def field_curvature(field, X, h=fd.DEFAULT_H):
    """Curvature 2-forms of a connection field (analytic when provided)."""
    if hasattr(field, "curvature"):
        return np.asarray(field.curvature(X))
    X = np.asarray(X, dtype=float)
    return curvature_from_coefficients(field(X), d_stack(field_gradient(field, X, h), 1))


def curvature_forms(field, p, scheme: str = "fd", h: float = fd.DEFAULT_H) -> ConnectionJet:
    """ConnectionJet of a connection field at p (batched).

    ``scheme="fd"`` differentiates the coefficients (the jet invariant holds
    exactly); ``scheme="analytic"`` uses the field's own ``curvature`` and
    ``gradient`` where available.
    """
    p = np.asarray(p, dtype=float)
    A = _finite(np.asarray(field(p)), "connection coefficients")
    if scheme == "fd":
        dA = fd.gradient(field, p, h)
        F = curvature_from_coefficients(A, d_stack(dA, 1))
    elif scheme == "analytic":
        dA = field_gradient(field, p, h)
        F = field_curvature(field, p, h) if hasattr(field, "curvature") else \
            curvature_from_coefficients(A, d_stack(dA, 1))
    else:
        raise ArgumentError(f"unknown scheme {scheme!r}")
    return ConnectionJet(A, _finite(dA, "connection derivatives"), _finite(F, "curvature"), p)


def jet_from_constant(A, point=(0.0, 0.0, 0.0, 0.0)) -> ConnectionJet:
    A = np.asarray(A, dtype=float)
    dA = np.zeros(A.shape[:-2] + (4, 3, 4))
    return ConnectionJet(A, dA, curvature_from_coefficients(A, d_stack(dA, 1)), np.asarray(point))


# --- covariant derivatives ------------------------------------------------------------------


def covariant_d(A, omega, d_omega, k):
    """(d_A w)^i = dw^i - eps_ijk A^j ^ w^k for a so(3)- or E*-valued k-form."""
    if k == 0:
        return d_omega - np.einsum("ijk,...jm,...k->...im", ex.LEVI3, A, omega)
    return d_omega - ex.cross_wedge(A, omega, 1, k)


def covariant_d_field(conn, omega_field, X, k, h=fd.DEFAULT_H):
    """d_A of a so(3)-valued k-form field (values (..., 3, dim_k)) at X."""
    X = np.asarray(X, dtype=float)
    grad = field_gradient(omega_field, X, h)
    if k == 0:
        d_omega = np.swapaxes(grad, -1, -2)  # (..., 3, 4)
    else:
        d_omega = d_stack(grad, k)
    return covariant_d(conn(X), omega_field(X), d_omega, k)


def perturbation_jet(conn, a_field, p, h=fd.DEFAULT_H) -> PerturbationJet:
    """a and d_A a of a perturbation field at p, by finite differences."""
    p = np.asarray(p, dtype=float)
    a = _finite(np.asarray(a_field(p)), "perturbation")
    dAa = covariant_d_field(conn, a_field, p, 1, h)
    return PerturbationJet(a, _finite(dAa, "covariant derivative"), "field")


def contract_curvature(v, F):
    """(iota_v F)^i for vectors v[..., 4] and 2-forms F[..., 3, 6]."""
    return ex.interior(v[..., None, :], F, 2)


class GaugeGeneratorField:
    """a = d_A xi + iota_v F_A as a perturbation field (the infinitesimal gauge action)."""

    def __init__(self, conn, xi_field, v_field, h=fd.DEFAULT_H):
        self.conn, self.xi, self.v, self.h = conn, xi_field, v_field, h

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = covariant_d_field(self.conn, self.xi, X, 0, self.h)
        if self.v is not None:
            out = out + contract_curvature(np.asarray(self.v(X)), field_curvature(self.conn, X, self.h))
        return out


def infinitesimal_gauge(conn, xi_field, v_field, p, h=fd.DEFAULT_H) -> PerturbationJet:
    """L_eta A = d_A xi + iota_v F_A at p, with its covariant derivative (field-derived)."""
    return perturbation_jet(conn, GaugeGeneratorField(conn, xi_field, v_field, h), p, h)


# --- wedge matrix and definiteness -----------------------------------------------------------


def wedge_matrix(F, mu0=1.0):
    """Q_ij = (F^i ^ F^j) / mu0 with mu0 the coefficient of dx1234 of a reference 4-form."""
    mu0 = np.asarray(mu0, dtype=float)
    if np.any(mu0 == 0):
        raise ArgumentError("reference 4-form must be nonzero")
    return ex.wedge_pairs(F, F) / mu0[..., None, None]


def urbantke(S):
    """U_ab = eps_ijk S^i_ac S^j_bd S^k_ef eps^cdef: 12 o sqrt(det g) g_ab for an oriented
    frame of Lambda^+_g; scales by det(M) under S -> M S."""
    T = ex.to_tensor(S, 2)
    D = np.einsum("...kef,cdef->...kcd", T, ex.LEVI4)
    TD = np.einsum("...jbd,...kcd->...jkbc", T, D)
    return np.einsum("ijk,...iac,...jkbc->...ab", ex.LEVI3, T, TD)


def _conformal_metric(S, orientation):
    """Unit-determinant metric g with span(S) = Lambda^+_g, and sign(det M) (0 if none)."""
    U = orientation * urbantke(S)
    w = np.linalg.eigvalsh(U)
    if np.all(w > 0):
        sign = 1
    elif np.all(w < 0):
        sign, U = -1, -U
    else:
        return None, 0
    return U / np.linalg.det(U) ** 0.25, sign


def classify_definite(jet_or_F, tol: float = 1e-8, orientation: int = 1) -> DefinitenessReport:
    """Definiteness of a single point's curvature from the spectrum of its wedge matrix.

    Q is taken against the positive coordinate 4-form. A definite Q of either sign
    means a definite connection; the sign is that of det M where F = M Sigma in the
    oriented sd_frame of the metric for which span(F) is self-dual.
    """
    F = np.asarray(jet_or_F.F if isinstance(jet_or_F, ConnectionJet) else jet_or_F, dtype=float)
    if F.shape != (3, 6):
        raise ArgumentError("classify_definite works pointwise (F of shape (3, 6))")
    Q = wedge_matrix(F, float(orientation))
    w = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    scale = float(np.max(np.abs(w)))
    min_abs = float(np.min(np.abs(w)))
    degenerate = scale == 0 or min_abs <= tol * scale or not (np.all(w > 0) or np.all(w < 0))
    if degenerate:
        return DefinitenessReport(Q, "degenerate", min_abs, 0)
    chir = 1 if w[0] > 0 else -1
    o_eff = orientation * chir
    g, sign = _conformal_metric(F, o_eff)
    if g is None:
        return DefinitenessReport(Q, "degenerate", min_abs, chir)
    frame = ex.sd_frame(g, o_eff).sigma
    M = ex.frame_coefficients(frame, F)
    cls = "positive" if np.linalg.det(M) > 0 else "negative"
    return DefinitenessReport(Q, cls, min_abs, chir, M)


def definiteness_sampled(jet_or_F, n: int = 1000, rng=None, tol: float = 1e-8) -> bool:
    """Brute-force check that F(u, v) != 0 on random independent pairs (u, v).

    Returns False iff some sampled pair has ``|F(u,v)| <= tol |F| |u^v|``. Besides
    uniform pairs, each sampled u is paired with the directions minimising
    |F(u, .)| (the kernel of v -> F(u, v) restricted to u-perp), which is where
    degeneracy shows up.
    """
    if n < 1:
        raise ArgumentError("n must be >= 1")
    F = np.asarray(jet_or_F.F if isinstance(jet_or_F, ConnectionJet) else jet_or_F, dtype=float)
    rng = np.random.default_rng() if rng is None else rng
    normF = np.linalg.norm(F)
    if normF == 0:
        return False
    T = ex.to_tensor(F, 2)  # (3, 4, 4)
    U = rng.normal(size=(n, 4))
    V = rng.normal(size=(n, 4))
    # worst direction for each u: smallest singular vector of v -> F(u, v) on u-perp
    Mu = np.einsum("iab,na->nib", T, U)  # (n, 3, 4)
    Bperp = np.linalg.svd(U[:, None, :])[2][:, 1:, :]  # (n, 3, 4): orthonormal basis of u-perp
    _, _, vh = np.linalg.svd(np.einsum("nia,nka->nik", Mu, Bperp))
    W = np.einsum("nk,nka->na", vh[:, -1, :], Bperp)
    for Vs in (V, W):
        Fuv = np.einsum("iab,na,nb->ni", T, U, Vs)
        wedge = np.linalg.norm(ex.wedge(U, Vs, 1, 1), axis=1)
        ok = wedge > 1e-12 * np.linalg.norm(U, axis=1) * np.linalg.norm(Vs, axis=1)
        if np.any(np.linalg.norm(Fuv, axis=1)[ok] <= tol * normF * wedge[ok]):
            return False
    return True


# --- CSV layout: x1,x2,x3,x4 followed by A^1_1..A^1_4, A^2_1..A^3_4 -----------------------

CSV_HEADER = ["x1", "x2", "x3", "x4"] + [f"A{i}_{m}" for i in range(1, 4) for m in range(1, 5)]


def write_connection_csv(path, points, A):
    points = np.asarray(points, dtype=float).reshape(-1, 4)
    A = np.asarray(A, dtype=float).reshape(-1, 12)
    if len(points) != len(A):
        raise ArgumentError("points and coefficients differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for p, a in zip(points, A):
            w.writerow([repr(float(v)) for v in np.concatenate([p, a])])


def read_connection_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ArgumentError("unexpected CSV header for a connection grid")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 16)
    return data[:, :4], data[:, 4:].reshape(-1, 3, 4)
