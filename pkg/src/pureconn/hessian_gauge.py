"""Almost complex structures, the gauge maps p, q and the projection Pi, gauge
residuals, the phi-solve, the three Hessian integrands and the symbol of the
gauge-fixing operator d_A^* Pi d_A.

Perturbations a are arrays ``a[..., i, mu]`` (three 1-forms); so(3) vectors
are ``xi[..., i]``. The norm on so(3)-valued forms is |a|^2 = sum_i |a^i|_g^2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import exterior as ex
from . import fd
from .connection import PerturbationJet, contract_curvature, covariant_d_field
from .errors import (ArgumentError, ConsistencyError, DefinitenessError, OrientationError,
                     PreconditionError)

ALGEBRAIC_TOL = 1e-10


def build_J(Sigma, g, orientation: int = 1, tol: float = 1e-8):
    """J_i(alpha) = *(Sigma_i ^ alpha) as matrices J[..., i, :, :] acting on 1-form components."""
    H3 = ex.hodge_matrix(g, 3, orientation)
    J = np.einsum("...ar,...iq,qbr->...iab", H3, Sigma, ex._WEDGE[(2, 1)])
    res = quaternion_residual(J)
    if np.any(res > tol):
        raise OrientationError("J_i violate the quaternion relations (Sigma orientation-reversing?)")
    return J


def quaternion_residual(J):
    """max |J_i J_j - eps_ijk J_k + delta_ij| per point."""
    JJ = np.einsum("...iab,...jbc->...ijac", J, J)
    rhs = np.einsum("ijk,...kac->...ijac", ex.LEVI3, J) - np.einsum("ij,ac->ijac", np.eye(3), np.eye(4))
    return np.max(np.abs(JJ - rhs), axis=(-4, -3, -2, -1))


@dataclass(frozen=True)
class GaugeContext:
    Sigma: np.ndarray  # (..., 3, 6) wedge-orthogonal, Sigma_i ^ Sigma_j = 2 delta_ij mu
    g: np.ndarray
    Y: np.ndarray
    X: np.ndarray
    Lam: float
    J: np.ndarray
    mu: np.ndarray  # dx1234 coefficient of the volume form of g
    orientation: int = 1

    @classmethod
    def from_data(cls, pcd, tol: float = 1e-8):
        return cls.build(pcd.Sigma, pcd.g, pcd.Y, pcd.orientation, tol, Lam=pcd.Lam)

    @classmethod
    def build(cls, Sigma, g, Y, orientation: int = 1, tol: float = 1e-8, Lam=None):
        Y = np.asarray(Y, dtype=float)
        trY = np.trace(Y, axis1=-2, axis2=-1)
        Lam = float(np.mean(trY)) if Lam is None else float(Lam)
        if Lam == 0:
            raise ArgumentError("Lambda must be nonzero")
        if np.any(np.abs(trY - Lam) > tol * max(1.0, abs(Lam))):
            raise ArgumentError("tr Y must equal Lambda")
        X = np.linalg.inv(Y)
        mu = ex.volume_coefficient(g, orientation)
        J = build_J(Sigma, g, orientation, tol)
        return cls(np.asarray(Sigma), np.asarray(g), Y, X, Lam, J, mu, orientation)

    @classmethod
    def synthetic(cls, g, Y, orientation: int = 1):
        """Context of a critical point whose metric is g and whose curvature is F = Y Sigma."""
        g = np.asarray(g, dtype=float)
        return cls.build(ex.sd_frame(g, orientation).sigma, g, Y, orientation)

    @property
    def F(self):
        return np.einsum("...ij,...jq->...iq", self.Y, self.Sigma)

    @property
    def ginv(self):
        return np.linalg.inv(self.g)


# --- p, q, Pi ------------------------------------------------------------------------------


def p_map(ctx: GaugeContext, a):
    """p(a) = J_i a^i."""
    return np.einsum("...iab,...ib->...a", ctx.J, a)


def q_map(ctx: GaugeContext, v):
    """q(v) = iota_v F with F = Y Sigma."""
    return contract_curvature(np.asarray(v, dtype=float), ctx.F)


def pq_matrix(ctx: GaugeContext):
    """Matrix of p o q from vectors to covectors."""
    E = np.eye(4)
    cols = [p_map(ctx, q_map(ctx, np.broadcast_to(E[b], ctx.mu.shape + (4,)))) for b in range(4)]
    return np.stack(cols, axis=-1)


def _pi_compositional(ctx, a):
    v = np.linalg.solve(pq_matrix(ctx), p_map(ctx, a)[..., None])[..., 0]
    return a - q_map(ctx, v)


def _pi_closed(ctx, a):
    Ja = np.einsum("...lab,...jb->...jla", ctx.J, a)  # J_l(a^j)
    term = np.einsum("kjl,...ik,...jla->...ia", ex.LEVI3, ctx.Y, Ja)
    return a + (term - np.einsum("...ij,...ja->...ia", ctx.Y, a)) / ctx.Lam


def projection_pi(ctx: GaugeContext, a, tol: float = ALGEBRAIC_TOL, both: bool = False):
    """Pi(a) = a - q (p q)^-1 p (a), cross-checked against the closed formula in Y."""
    a = np.asarray(a, dtype=float)
    comp = _pi_compositional(ctx, a)
    closed = _pi_closed(ctx, a)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(comp - closed)) > tol * scale:
        raise ConsistencyError("the two routes for Pi disagree")
    return (comp, closed) if both else comp


# --- gauge conditions -----------------------------------------------------------------------


def n_matrix(ctx: GaugeContext, dAa):
    """N with (d_A^+ a)^i = N_ij Sigma_j."""
    return ex.wedge_pairs(dAa, ctx.Sigma) / (2.0 * ctx.mu[..., None, None])


def gauge_residuals(ctx: GaugeContext, pj: PerturbationJet):
    """(Sigma_i ^ a^i [3-form], eps_ijk Sigma_j ^ (d_A a)^k [three 4-form coefficients],
    Sigma_i ^ (d_A a)^i / mu [scalar])."""
    horizontal = np.einsum("...iq,...ib,qbr->...r", ctx.Sigma, pj.a, ex._WEDGE[(2, 1)])
    W = ex.wedge_pairs(ctx.Sigma, pj.dAa)  # W[j, k] = Sigma_j ^ dAa^k
    vertical = np.einsum("ijk,...jk->...i", ex.LEVI3, W)
    trace = np.einsum("...ii->...", W) / ctx.mu
    return horizontal, vertical, trace


def l_matrix(X):
    """Matrix of L(phi) = S20(X phi) on the orthonormal basis of S20."""
    B = ex.s20_basis()
    LB = ex.s20_project(np.einsum("...ij,bjk->...bik", X, B))
    return np.einsum("aij,...bij->...ab", B, LB)


def solve_phi(X, N, cond_tol: float = 1e-12):
    """The trace-free symmetric phi with S20(X phi) = S20(X N)."""
    X = np.asarray(X, dtype=float)
    B = ex.s20_basis()
    L = l_matrix(X)
    s = np.linalg.svd(L, compute_uv=False)
    if np.any(s[..., -1] <= cond_tol * s[..., 0]):
        raise DefinitenessError("L is singular (X not sign-definite with tr X^-1 = Lambda?)")
    rhs = np.einsum("aij,...ij->...a", B, ex.s20_project(X @ N))
    c = np.linalg.solve(L, rhs[..., None])[..., 0]
    return np.einsum("...a,aij->...ij", c, B)


def theta_star(ctx: GaugeContext, pj: PerturbationJet):
    """(sigma, phi) of the tangent vector theta_*(a)."""
    N = n_matrix(ctx, pj.dAa)
    phi = solve_phi(ctx.X, N)
    resid = pj.dAa - np.einsum("...jk,...kq->...jq", phi, ctx.Sigma)
    sigma = np.einsum("...ij,...jq->...iq", ctx.X, resid)
    return sigma, phi


# --- Hessian integrands ---------------------------------------------------------------------


def _eps_aa_sigma(a, Sigma):
    """eps_ijk a^i ^ a^j ^ Sigma_k."""
    return np.einsum("...kq,...kq->...", ex.cross_wedge(a, a, 1, 1) @ ex.PAIRING, Sigma)


def hessian_plebanski_integrand(pp, a, dAa, sigma, phi):
    """-eps a^i a^j Sigma_k + 2 (dAa^i - phi_ij Sigma_j) ^ sigma_i - Y_ij sigma_i ^ sigma_j.

    ``pp`` is anything with ``Sigma`` and ``Y`` = Psi + Lambda/3 (a PlebanskiPoint or
    GaugeContext). Returns the dx1234 coefficient.
    """
    Sigma, Y = pp.Sigma, pp.Y
    lin = dAa - np.einsum("...ij,...jq->...iq", phi, Sigma)
    return (-_eps_aa_sigma(a, Sigma)
            + 2.0 * np.einsum("...ii->...", ex.wedge_pairs(lin, sigma))
            - np.einsum("...ij,...ij->...", Y, ex.wedge_pairs(sigma, sigma)))


def hessian_pre_gauge_integrand(ctx: GaugeContext, pj: PerturbationJet):
    """-eps a a Sigma + X_ij (dAa - phi Sigma)^i ^ (dAa - phi Sigma)^j, phi from solve_phi."""
    phi = solve_phi(ctx.X, n_matrix(ctx, pj.dAa))
    lin = pj.dAa - np.einsum("...ij,...jq->...iq", phi, ctx.Sigma)
    return (-_eps_aa_sigma(pj.a, ctx.Sigma)
            + np.einsum("...ij,...ij->...", ctx.X, ex.wedge_pairs(lin, lin)))


def norm_sq(ctx: GaugeContext, a):
    """|a|^2 = sum_i g^-1(a^i, a^i)."""
    return np.einsum("...ia,...ab,...ib->...", a, ctx.ginv, a)


def gauge_fixed_violation(ctx: GaugeContext, pj: PerturbationJet):
    """Largest gauge residual, relative to the size of (a, d_A a)."""
    hor, ver, tr = gauge_residuals(ctx, pj)
    scale = max(1e-300, float(np.max(np.abs(pj.a))), float(np.max(np.abs(pj.dAa))))
    rel_mu = np.abs(ctx.mu)
    return max(float(np.max(np.abs(hor))) / scale,
               float(np.max(np.abs(ver) / rel_mu[..., None])) / scale,
               float(np.max(np.abs(tr))) / scale)


def hessian_gauge_fixed_integrand(ctx: GaugeContext, pj: PerturbationJet, tol: float = 1e-8):
    """|a|^2 - X_ij <(d^- a)^i, (d^- a)^j>, a density against mu_A."""
    if gauge_fixed_violation(ctx, pj) > tol:
        raise PreconditionError("perturbation is not fully gauge fixed")
    _, dminus = ex.sd_split(ctx.g[..., None, :, :], pj.dAa, ctx.orientation)
    G2 = ex.gram(ctx.g, 2)
    inner = np.einsum("...ip,...pq,...jq->...ij", dminus, G2, dminus)
    return norm_sq(ctx, pj.a) - np.einsum("...ij,...ij->...", ctx.X, inner)


# --- symbol -----------------------------------------------------------------------------------


def symbol_check(ctx: GaugeContext, alpha, xi):
    """(<alpha, Pi(alpha x xi)>, (xi - Y xi / Lambda)|alpha|^2)."""
    alpha = np.asarray(alpha, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.any(np.linalg.norm(alpha, axis=-1) == 0):
        raise ArgumentError("alpha must be nonzero")
    a = xi[..., :, None] * alpha[..., None, :]
    b = projection_pi(ctx, a)
    direct = np.einsum("...a,...ab,...ib->...i", alpha, ctx.ginv, b)
    alpha2 = np.einsum("...a,...ab,...b->...", alpha, ctx.ginv, alpha)
    formula = (xi - np.einsum("...ij,...j->...i", ctx.Y, xi) / ctx.Lam) * alpha2[..., None]
    return direct, formula


def symbol_matrix(ctx: GaugeContext, alpha):
    """Sym(alpha) as a 3x3 matrix (through the projection Pi)."""
    cols = [symbol_check(ctx, alpha, np.broadcast_to(np.eye(3)[k], np.shape(alpha)[:-1] + (3,)))[0]
            for k in range(3)]
    return np.stack(cols, axis=-1)


def ellipticity_gap(ctx: GaugeContext):
    """min_k |Lambda - y_k| / |Lambda|: the predicted lower bound of the singular values of
    Sym(alpha)/|alpha|^2 (zero iff Lambda is an eigenvalue of Y)."""
    y = np.linalg.eigvalsh(ctx.Y)
    return np.min(np.abs(ctx.Lam - y), axis=-1) / abs(ctx.Lam)


def is_elliptic(ctx: GaugeContext, tol: float = 1e-10):
    return bool(np.all(ellipticity_gap(ctx) > tol))


# --- field-level operators ----------------------------------------------------------------------


class FrozenContextField:
    """Constant coefficients: A = 0 and a fixed GaugeContext at every point."""

    def __init__(self, ctx: GaugeContext):
        self.ctx = ctx

    def __call__(self, X):
        return np.zeros(np.shape(X)[:-1] + (3, 4))

    def curvature(self, X):
        return np.broadcast_to(self.ctx.F, np.shape(X)[:-1] + (3, 6))

    def context(self, X):
        return self.ctx


def _codifferential(field, b_field, p, h):
    """(d_A^* b)(p) = -*(d_A * b) for an so(3)-valued 1-form field b."""
    def star_b(X):
        ctx = field.context(X)
        return ex.hodge_star(ctx.g[..., None, :, :], b_field(X), 1, ctx.orientation)

    d4 = covariant_d_field(field, star_b, p, 3, h)[..., 0]  # (..., 3)
    return -d4 / field.context(p).mu[..., None]


def coulomb_equivalence_check(field, a_field, p, h: float = fd.DEFAULT_H, tol: float = 1e-8):
    """(d_A^* a, -*(eps_ijk Sigma_j ^ (d_A a)^k)) at p for a horizontal a-field."""
    p = np.asarray(p, dtype=float)
    ctx = field.context(p)
    a = np.asarray(a_field(p))
    hor = np.einsum("...iq,...ib,qbr->...r", ctx.Sigma, a, ex._WEDGE[(2, 1)])
    if np.max(np.abs(hor)) > tol * max(1.0, float(np.max(np.abs(a)))):
        raise PreconditionError("perturbation is not horizontal")
    lhs = _codifferential(field, a_field, p, h)
    dAa = covariant_d_field(field, a_field, p, 1, h)
    _, vertical, _ = gauge_residuals(ctx, PerturbationJet(a, dAa, "field"))
    rhs = -vertical / ctx.mu[..., None]
    return lhs, rhs


class HorizontalProjection:
    """Pi applied pointwise to a perturbation field."""

    def __init__(self, field, a_field):
        self.field, self.a = field, a_field

    def __call__(self, X):
        return projection_pi(self.field.context(X), self.a(X))


def gauge_operator_apply(field, xi_field, p, h: float = fd.DEFAULT_H):
    """(d_A^* Pi d_A xi)(p) by finite differences."""
    p = np.asarray(p, dtype=float)

    def b_field(X):
        return projection_pi(field.context(X), covariant_d_field(field, xi_field, X, 0, h))

    return _codifferential(field, b_field, p, h)


# --- synthetic instances -------------------------------------------------------------------------


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    return Q if np.linalg.det(Q) > 0 else -Q


def random_definite_Y(rng, Lam):
    """Random symmetric Y with tr Y = Lambda and all eigenvalues of the sign of Lambda."""
    w = rng.dirichlet(np.ones(3)) * Lam
    R = random_rotation(rng)
    return R @ np.diag(w) @ R.T


def random_metric(rng, spread=0.5):
    B = np.eye(4) + spread * rng.normal(size=(4, 4)) / 2
    return B @ B.T + 0.1 * np.eye(4)


def random_context(rng, Lam=-3.0, orientation=1):
    return GaugeContext.synthetic(random_metric(rng), random_definite_Y(rng, Lam), orientation)


def synthetic_gauge_fixed_jet(ctx: GaugeContext, rng) -> PerturbationJet:
    """Horizontal a with d_A a = N Sigma + (anti-self-dual), N symmetric trace-free."""
    a = projection_pi(ctx, rng.normal(size=(3, 4)))
    N = ex.s20_project(rng.normal(size=(3, 3)))
    sminus = ex.sd_frame(ctx.g, -ctx.orientation).sigma
    dAa = N @ ctx.Sigma + rng.normal(size=(3, 3)) @ sminus
    return PerturbationJet(a, dAa, "synthetic")


def diagnostic_record(ctx: GaugeContext, pj: PerturbationJet) -> str:
    """Per-point JSON record: gauge residuals, integrands by route, symbol spectrum."""
    hor, ver, tr = gauge_residuals(ctx, pj)
    sigma, phi = theta_star(ctx, pj)
    rec = {
        "gauge_residuals": {"horizontal": float(np.linalg.norm(hor)),
                            "vertical": float(np.linalg.norm(ver)), "trace_N": float(np.abs(tr))},
        "integrands": {
            "plebanski": float(hessian_plebanski_integrand(ctx, pj.a, pj.dAa, sigma, phi)),
            "pre_gauge": float(hessian_pre_gauge_integrand(ctx, pj)),
        },
        "symbol_spectrum": sorted((1.0 - np.linalg.eigvalsh(ctx.Y) / ctx.Lam).tolist()),
        "ellipticity_gap": float(ellipticity_gap(ctx)),
    }
    if gauge_fixed_violation(ctx, pj) <= 1e-8:
        rec["integrands"]["gauge_fixed"] = float(hessian_gauge_fixed_integrand(ctx, pj) * ctx.mu)
    return json.dumps(rec, sort_keys=True)
