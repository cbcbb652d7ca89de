"""Vectorised numpy implementations of the per-point kernels.

All functions accept arbitrary leading batch dimensions and work for real or
complex input (complex input is used for complex-step differentiation).
"""
import numpy as np

from ._common import PAIR_A, PAIR_B, PAIRING, SEEDS


def gram2(ginv):
    """Gram matrix of the 2-form basis under the metric with inverse ``ginv``."""
    a, b = PAIR_A, PAIR_B
    return (ginv[..., a[:, None], a[None, :]] * ginv[..., b[:, None], b[None, :]]
            - ginv[..., a[:, None], b[None, :]] * ginv[..., b[:, None], a[None, :]])


def sd_frame(g, orientation):
    ginv = np.linalg.inv(g)
    vol = np.sqrt(np.linalg.det(g))
    G = gram2(ginv)
    H = orientation * vol[..., None, None] * (PAIRING @ G)
    seeds = SEEDS[orientation]
    v = 0.5 * (seeds + np.einsum("...ij,kj->...ki", H, seeds))
    out = np.empty(v.shape, dtype=np.result_type(v, g))
    for i in range(3):
        w = v[..., i, :]
        for j in range(i):
            e = out[..., j, :]
            w = w - 0.5 * np.einsum("...a,...ab,...b->...", w, G, e)[..., None] * e
        n2 = np.einsum("...a,...ab,...b->...", w, G, w)
        out[..., i, :] = np.sqrt(2.0 / n2)[..., None] * w
    return out, orientation * vol


def christoffel(g, dg):
    """Gamma^k_ij with dg[..., k, i, j] = d_k g_ij."""
    ginv = np.linalg.inv(g)
    # first kind: Gamma_{l i j} = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    first = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    return np.einsum("...kl,...lij->...kij", ginv, first)


def riemann(g, dg, ddg):
    """Fully covariant R_abcd, with R_abab > 0 on the round sphere."""
    gam = christoffel(g, dg)
    # ddg[..., l, k, i, j] = d_l d_k g_ij
    d2 = 0.5 * (np.einsum("...bcad->...abcd", ddg) + np.einsum("...adbc->...abcd", ddg)
                - np.einsum("...acbd->...abcd", ddg) - np.einsum("...bdac->...abcd", ddg))
    quad = (np.einsum("...ef,...ebc,...fad->...abcd", g, gam, gam)
            - np.einsum("...ef,...ebd,...fac->...abcd", g, gam, gam))
    return d2 + quad
