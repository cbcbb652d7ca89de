"""Pointwise exterior algebra on an oriented 4-dimensional inner-product space.

Component conventions (zero-based coordinate indices, all arrays may carry
leading batch dimensions):

* 1-forms: 4 components on ``dx1..dx4``.
* 2-forms: 6 components on ``(dx12, dx13, dx14, dx34, dx42, dx23)``.
* 3-forms: 4 components on ``(dx123, dx124, dx134, dx234)``.
* 4-forms: the scalar coefficient of ``dx1234``.

so(3) conventions: ``eps_123 = +1`` and the basis element ``e_i`` of so(3)
acts on R^3 by the matrix ``(e_i)_jk = -eps_ijk``.
"""
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from . import kernels
from .errors import DefinitenessError, NumericError
from .kernels._common import PAIRING, PAIRS

LEVI3 = np.zeros((3, 3, 3))
for _p in permutations(range(3)):
    LEVI3[_p] = np.linalg.det(np.eye(3)[list(_p)])

LEVI4 = np.zeros((4, 4, 4, 4))
for _p in permutations(range(4)):
    LEVI4[_p] = np.linalg.det(np.eye(4)[list(_p)])

SO3_BASIS = -LEVI3

BASES = {
    0: [()],
    1: [(a,) for a in range(4)],
    2: list(PAIRS),
    3: list(combinations(range(4), 3)),
    4: [(0, 1, 2, 3)],
}
DIMS = {k: len(v) for k, v in BASES.items()}

FLAT_SD_BASIS = np.array([[1.0, 0, 0, 1, 0, 0],
                          [0, 1.0, 0, 0, 1, 0],
                          [0, 0, 1.0, 0, 0, 1]])


def _perm_sign(seq):
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _basis_tensor(k):
    """B[I, a1..ak] with T = sum_I c_I B[I] the antisymmetric tensor of a k-form."""
    B = np.zeros((DIMS[k],) + (4,) * k)
    for n, idx in enumerate(BASES[k]):
        for p in permutations(range(k)):
            B[(n,) + tuple(idx[q] for q in p)] = _perm_sign(p)
    return B


_TENSOR = {k: _basis_tensor(k) for k in range(5)}


def _wedge_table(k, l):
    W = np.zeros((DIMS[k], DIMS[l], DIMS[k + l]))
    target = {tuple(sorted(I)): (n, _perm_sign(I)) for n, I in enumerate(BASES[k + l])}
    for i, I in enumerate(BASES[k]):
        for j, J in enumerate(BASES[l]):
            seq = I + J
            s = _perm_sign(seq)
            if s == 0:
                continue
            n, base_sign = target[tuple(sorted(seq))]
            # dx^seq = s * dx^sorted and dx^basis = base_sign * dx^sorted
            W[i, j, n] = s * base_sign
    return W


_WEDGE = {(k, l): _wedge_table(k, l) for k in range(5) for l in range(5 - k)}
# complement map: dx^I ^ (_DUAL[k] @ e_I) = dx1234
_DUAL = {k: _WEDGE[(k, 4 - k)][:, :, 0].T.copy() for k in range(5)}


def to_tensor(c, k):
    """Components -> antisymmetric tensor T_{a1..ak} (omega = T dx^a1..dx^ak / k!)."""
    return np.tensordot(c, _TENSOR[k], axes=([-1], [0])) if k else np.asarray(c)


def from_tensor(T, k):
    if k == 0:
        return np.asarray(T)
    idx = tuple(np.array([I[m] for I in BASES[k]]) for m in range(k))
    return T[(Ellipsis,) + idx]


def wedge(a, b, k, l):
    """Wedge product of a k-form and an l-form given by components."""
    return np.einsum("...i,...j,ijn->...n", a, b, _WEDGE[(k, l)])


def wedge22(a, b):
    """Coefficient of dx1234 in a ^ b for 2-forms."""
    return np.einsum("...i,ij,...j->...", a, PAIRING, b)


def wedge_pairs(S, T):
    """Matrix of wedge products S_i ^ T_j for stacks of 2-forms (..., n, 6)."""
    return np.einsum("...ia,ab,...jb->...ij", S, PAIRING, T)


def gram(g, k):
    """Gram matrix of the k-form basis induced by the metric g."""
    ginv = np.linalg.inv(g)
    if k == 0:
        return np.ones(g.shape[:-2] + (1, 1), dtype=ginv.dtype)
    rows = np.array(BASES[k])
    sub = ginv[..., rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(sub)


def volume_coefficient(g, orientation=1):
    """Coefficient of dx1234 in the Riemannian volume form."""
    det = np.linalg.det(g)
    if np.any(np.real(det) <= 0):
        raise NumericError("metric is not positive definite")
    return orientation * np.sqrt(det)


def inner(g, a, b, k):
    return np.einsum("...i,...ij,...j->...", a, gram(g, k), b)


def hodge_matrix(g, k, orientation=1):
    """Matrix of the Hodge star from k-forms to (4-k)-forms."""
    vol = volume_coefficient(g, orientation)
    return vol[..., None, None] * (_DUAL[k] @ gram(g, k))


def hodge_star(g, omega, k, orientation=1):
    """Hodge star of a k-form; alpha ^ *beta = <alpha, beta> dvol."""
    return np.einsum("...ij,...j->...i", hodge_matrix(g, k, orientation), omega)


def sd_split(g, omega, orientation=1):
    """Split a 2-form into self-dual and anti-self-dual parts."""
    star = hodge_star(g, omega, 2, orientation)
    return 0.5 * (omega + star), 0.5 * (omega - star)


def interior(v, omega, k):
    """Contraction iota_v omega of a k-form, k >= 1."""
    T = to_tensor(omega, k)
    return from_tensor(np.einsum("...a,...a" + "bcd"[: k - 1] + "->..." + "bcd"[: k - 1], v, T), k - 1)


def two_form_matrix(omega):
    """2-form components -> antisymmetric 4x4 matrix omega_ab."""
    return to_tensor(omega, 2)


def evaluate_two_form(omega, u, v):
    return np.einsum("...ab,...a,...b->...", to_tensor(omega, 2), u, v)


@dataclass(frozen=True)
class SDFrame:
    """Oriented frame of Lambda^+_g with |Sigma_i| = sqrt(2) and Sigma_i ^ Sigma_j = 2 delta_ij mu."""

    sigma: np.ndarray  # (..., 3, 6)
    mu: np.ndarray  # (...,) coefficient of dx1234
    g: np.ndarray
    orientation: int = 1


def sd_frame(g, orientation=1):
    g = np.asarray(g)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite metric")
    sigma, mu = kernels.sd_frame(g, orientation)
    if np.iscomplexobj(g):
        return SDFrame(sigma, mu, g, orientation)
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(mu))):
        raise NumericError("Gram-Schmidt breakdown in sd_frame (metric not positive definite?)")
    return SDFrame(sigma, mu, g, orientation)


def frame_coefficients(frame_sigma, omega):
    """Coefficients c_i with omega^+ = c_i Sigma_i, using wedge products.

    Works for any wedge-orthogonal frame without needing a metric.
    """
    mu = wedge22(frame_sigma[..., 0, :], frame_sigma[..., 0, :]) / 2.0
    return np.einsum("...ia,ab,...b->...i", frame_sigma, PAIRING, omega) / (2.0 * mu[..., None])


def sym3_sqrt(Q, sign=1, tol=0.0):
    """Definite square root of a positive-definite symmetric 3x3 matrix."""
    Q = np.asarray(Q, dtype=float)
    Qs = 0.5 * (Q + np.swapaxes(Q, -1, -2))
    w, V = np.linalg.eigh(Qs)
    scale = np.max(np.abs(w), axis=-1)
    if np.any(w[..., 0] <= tol * scale) or np.any(scale == 0):
        raise DefinitenessError("matrix is not positive definite")
    root = np.einsum("...ij,...j,...kj->...ik", V, np.sqrt(w), V)
    return sign * root


def s20_project(M):
    """Trace-free symmetric part of a 3x3 matrix."""
    M = np.asarray(M)
    S = 0.5 * (M + np.swapaxes(M, -1, -2))
    tr = np.trace(S, axis1=-2, axis2=-1)
    return S - tr[..., None, None] / 3.0 * np.eye(3)


def s20_basis():
    """Orthonormal basis (Frobenius) of trace-free symmetric 3x3 matrices."""
    B = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        E = np.zeros((3, 3))
        E[i, j] = E[j, i] = 1 / np.sqrt(2)
        B.append(E)
    B.append(np.diag([1.0, -1.0, 0.0]) / np.sqrt(2))
    B.append(np.diag([1.0, 1.0, -2.0]) / np.sqrt(6))
    return np.array(B)


def cross_wedge(a, b, k, l):
    """(a x b)^i = eps_ijk a^j ^ b^k for so(3)-valued forms (..., 3, dim)."""
    return np.einsum("ijk,...jp,...kq,pqn->...in", LEVI3, a, b, _WEDGE[(k, l)])
