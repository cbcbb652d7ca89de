"""Numba-compiled loop kernels; same contracts as ``_numpy``.

Inputs are flattened to a single batch axis before entering the jitted loops.
"""
import numpy as np
from numba import njit

from ._common import PAIR_A, PAIR_B, PAIRING, SEEDS


@njit(cache=True)
def _sd_frame_flat(g, orientation, seeds, pa, pb, pairing):
    n = g.shape[0]
    out = np.empty((n, 3, 6), dtype=g.dtype)
    mu = np.empty(n, dtype=g.dtype)
    G = np.empty((6, 6), dtype=g.dtype)
    v = np.empty((3, 6), dtype=g.dtype)
    for t in range(n):
        ginv = np.linalg.inv(g[t])
        vol = np.sqrt(np.linalg.det(g[t]))
        for I in range(6):
            a, b = pa[I], pb[I]
            for J in range(6):
                c, d = pa[J], pb[J]
                G[I, J] = ginv[a, c] * ginv[b, d] - ginv[a, d] * ginv[b, c]
        # Hodge star on 2-forms: H = orientation * vol * PAIRING @ G
        for k in range(3):
            for I in range(6):
                acc = 0.0 * vol
                for K in range(6):
                    if pairing[I, K] != 0.0:
                        for J in range(6):
                            acc += pairing[I, K] * G[K, J] * seeds[k, J]
                v[k, I] = 0.5 * (seeds[k, I] + orientation * vol * acc)
        for i in range(3):
            w = v[i].copy()
            for j in range(i):
                ip = 0.0 * vol
                for I in range(6):
                    for J in range(6):
                        ip += w[I] * G[I, J] * out[t, j, J]
                for I in range(6):
                    w[I] = w[I] - 0.5 * ip * out[t, j, I]
            n2 = 0.0 * vol
            for I in range(6):
                for J in range(6):
                    n2 += w[I] * G[I, J] * w[J]
            s = np.sqrt(2.0 / n2)
            for I in range(6):
                out[t, i, I] = s * w[I]
        mu[t] = orientation * vol
    return out, mu


@njit(cache=True)
def _christoffel_flat(g, dg):
    n = g.shape[0]
    out = np.empty((n, 4, 4, 4), dtype=g.dtype)
    for t in range(n):
        ginv = np.linalg.inv(g[t])
        for k in range(4):
            for i in range(4):
                for j in range(i, 4):
                    acc = 0.0
                    for l in range(4):
                        acc += ginv[k, l] * (dg[t, i, l, j] + dg[t, j, l, i] - dg[t, l, i, j])
                    out[t, k, i, j] = 0.5 * acc
                    out[t, k, j, i] = 0.5 * acc
    return out


@njit(cache=True)
def _riemann_flat(g, dg, ddg):
    n = g.shape[0]
    gam = _christoffel_flat(g, dg)
    out = np.empty((n, 4, 4, 4, 4), dtype=g.dtype)
    for t in range(n):
        # lowered christoffel Gamma_{f a d} = g_fe Gamma^e_ad
        low = np.zeros((4, 4, 4), dtype=g.dtype)
        for f in range(4):
            for a in range(4):
                for d in range(4):
                    acc = 0.0
                    for e in range(4):
                        acc += g[t, f, e] * gam[t, e, a, d]
                    low[f, a, d] = acc
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        val = 0.5 * (ddg[t, b, c, a, d] + ddg[t, a, d, b, c]
                                     - ddg[t, a, c, b, d] - ddg[t, b, d, a, c])
                        for e in range(4):
                            val += gam[t, e, b, c] * low[e, a, d] - gam[t, e, b, d] * low[e, a, c]
                        out[t, a, b, c, d] = val
    return out


def _flatten(x, tail):
    lead = x.shape[: x.ndim - tail]
    return np.ascontiguousarray(x.reshape((-1,) + x.shape[x.ndim - tail:])), lead


def sd_frame(g, orientation):
    gf, lead = _flatten(g, 2)
    seeds = SEEDS[orientation].astype(gf.dtype)
    out, mu = _sd_frame_flat(gf, float(orientation), seeds, PAIR_A, PAIR_B,
                             PAIRING.astype(gf.dtype))
    return out.reshape(lead + (3, 6)), mu.reshape(lead)


def christoffel(g, dg):
    gf, lead = _flatten(g, 2)
    dgf, _ = _flatten(dg, 3)
    return _christoffel_flat(gf, dgf).reshape(lead + (4, 4, 4))


def riemann(g, dg, ddg):
    gf, lead = _flatten(g, 2)
    dgf, _ = _flatten(dg, 3)
    ddgf, _ = _flatten(ddg, 4)
    return _riemann_flat(gf, dgf, ddgf).reshape(lead + (4, 4, 4, 4))
