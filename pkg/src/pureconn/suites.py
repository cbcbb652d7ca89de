"""Verification suites: named checks producing pass/fail records."""
from __future__ import annotations

import hashlib
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import connection as K
from . import curvature as C
from . import exterior as ex
from . import hessian_gauge as H
from . import models as M
from . import pure_plebanski as P
from . import quadrature as Q
from .config import RunConfig


@dataclass(frozen=True)
class CheckRecord:
    name: str
    inputs: dict
    value: object
    tolerance: float
    passed: bool

    def to_json(self):
        inputs = json.dumps(self.inputs, sort_keys=True)
        return json.dumps({
            "check": self.name,
            "inputs": self.inputs,
            "inputs_digest": hashlib.sha256(inputs.encode()).hexdigest()[:16],
            "value": _jsonable(self.value),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }, sort_keys=True)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        return float(v) if np.isfinite(v) else str(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def check_rng(cfg: RunConfig, name: str):
    """Independent stream per check, stable under any execution order."""
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, zlib.crc32(name.encode())]))


def _tol(cfg, default):
    return default if cfg.tol is None else cfg.tol


def _models(cfg, allowed):
    if cfg.model is not None:
        return [cfg.model] if cfg.model in allowed else []
    return list(allowed)


def _record(name, cfg, value, tol, inputs=None):
    base = {"points": cfg.points, "seed": cfg.seed, "scheme": cfg.scheme, "scale": cfg.scale}
    base.update(inputs or {})
    return CheckRecord(name, base, value, tol, bool(value <= tol))


DEFINITE = {"sphere4": (1, 3.0), "hyperbolic4": (1, -3.0), "cp2-fubini-study": (-1, 6.0)}


def _model(name, cfg, orientation=1):
    return M.get_model(name, cfg.scale, orientation)


def _lam(name, cfg):
    base = DEFINITE[name][1] / cfg.scale**2
    return base if cfg.lam is None or cfg.model is None else cfg.lam


# --- identities ---------------------------------------------------------------------------


def _identities(cfg) -> List[Callable]:
    checks = []
    for name in _models(cfg, M.MODEL_NAMES):
        def run(name=name, cname=f"identities.trace.{name}"):
            rng = check_rng(cfg, cname)
            m = _model(name, cfg)
            jet = M.metric_jet(m, m.sample(rng, cfg.points), cfg.scheme, cfg.h)
            d = C.chiral_decompose(C.riemann(jet))
            err = max(np.max(np.abs(d.scalar - 4 * np.trace(d.Rplus, axis1=-2, axis2=-1))),
                      np.max(np.abs(d.scalar - 4 * np.trace(d.Rminus, axis1=-2, axis2=-1))))
            return _record(cname, cfg, float(err), _tol(cfg, 1e-6), {"model": name})

        def einstein(name=name, cname=f"identities.einstein_C.{name}"):
            rng = check_rng(cfg, cname)
            m = _model(name, cfg)
            jet = M.metric_jet(m, m.sample(rng, cfg.points), cfg.scheme, cfg.h)
            d = C.chiral_decompose(C.riemann(jet))
            return _record(cname, cfg, float(np.max(np.abs(d.C))), _tol(cfg, 1e-6), {"model": name})

        checks += [run, einstein]

    spectra = {"sphere4": [1.0, 1.0, 1.0], "hyperbolic4": [-1.0, -1.0, -1.0], "s2xs2": [0.0, 0.0, 1.0],
               "flat": [0.0, 0.0, 0.0]}
    for name in _models(cfg, spectra):
        def spectrum(name=name, cname=f"identities.spectrum.{name}"):
            rng = check_rng(cfg, cname)
            m = _model(name, cfg)
            jet = M.metric_jet(m, m.sample(rng, cfg.points), cfg.scheme, cfg.h)
            d = C.chiral_decompose(C.riemann(jet))
            expected = np.array(spectra[name]) / cfg.scale**2
            err = np.max(np.abs(np.linalg.eigvalsh(d.Rplus) - expected))
            if name == "sphere4":
                err = max(err, np.max(np.abs(d.scalar - 12.0 / cfg.scale**2)))
            return _record(cname, cfg, float(err), _tol(cfg, 1e-6), {"model": name})

        checks.append(spectrum)

    def cratio(cname="identities.C_over_Ric0"):
        rng = check_rng(cfg, cname)
        m = M.conformal_perturbation(_model("sphere4", cfg), 0.3)
        jet = M.metric_jet(m, m.sample(rng, cfg.points))
        rm = C.riemann(jet)
        d = C.chiral_decompose(rm)
        gi = np.linalg.inv(jet.g)
        R0 = C.ricci(rm) - d.scalar[:, None, None] * jet.g / 4
        nR0 = np.sqrt(np.einsum("nab,nbc,ncd,nda->n", gi, R0, gi, R0))
        ratio = np.linalg.norm(d.C, axis=(-2, -1)) / nR0
        return _record(cname, cfg, float(np.max(ratio) - np.min(ratio)), _tol(cfg, 1e-8),
                       {"measured_constant": float(np.mean(ratio))})

    return checks + [cratio]


# --- definiteness -------------------------------------------------------------------------


EXPECTED_CLASS = {("sphere4", 1): "positive", ("hyperbolic4", 1): "negative",
                  ("cp2-fubini-study", 1): "degenerate", ("cp2-fubini-study", -1): "positive",
                  ("s2xs2", 1): "degenerate", ("flat", 1): "degenerate"}


def _definiteness(cfg):
    checks = []
    for (name, o), expected in sorted(EXPECTED_CLASS.items()):
        if cfg.model is not None and cfg.model != name:
            continue

        def run(name=name, o=o, expected=expected, cname=f"definiteness.{name}.o{o:+d}"):
            rng = check_rng(cfg, cname)
            m = _model(name, cfg, o)
            field = C.LeviCivitaField(m, cfg.scheme, cfg.h)
            bad = 0
            n = min(cfg.points, 20)
            for p in m.sample(rng, n):
                jet = K.curvature_forms(field, p, "fd", cfg.h)
                rep = K.classify_definite(jet, orientation=o)
                sampled = K.definiteness_sampled(jet, 200, rng)
                bad += (rep.classification != expected) + (sampled != rep.definite)
            return _record(cname, cfg, float(bad), 0.0, {"model": name, "orientation": o,
                                                       "expected": expected, "points_used": n})

        checks.append(run)
    return checks


# --- reconstruction -------------------------------------------------------------------------


def _reconstruction(cfg):
    checks = []
    for name in _models(cfg, DEFINITE):
        def run(name=name, cname=f"reconstruction.metric.{name}"):
            rng = check_rng(cfg, cname)
            o, _ = DEFINITE[name]
            m = _model(name, cfg, o)
            field = C.LeviCivitaField(m, cfg.scheme, cfg.h)
            pts = m.sample(rng, cfg.points)
            jet = K.curvature_forms(field, pts, "fd", cfg.h)
            d = P.build_pure_connection_data(jet.F, _lam(name, cfg), orientation=o)
            g = m.evaluate(pts)
            err = np.max(np.abs(d.g - g), axis=(-2, -1)) / np.max(np.abs(g), axis=(-2, -1))
            return _record(cname, cfg, float(np.max(err)), _tol(cfg, 1e-4), {"model": name})

        checks.append(run)
    return checks


# --- plebanski ------------------------------------------------------------------------------


def _plebanski(cfg):
    checks = []
    for name in _models(cfg, DEFINITE):
        def run(name=name, cname=f"plebanski.residuals.{name}"):
            rng = check_rng(cfg, cname)
            o, _ = DEFINITE[name]
            m = _model(name, cfg, o)
            field = C.LeviCivitaField(m, cfg.scheme, cfg.h)
            worst = 0.0
            for p in m.sample(rng, min(cfg.points, 20)):
                pp, _ = P.theta(field, p, _lam(name, cfg), cfg.h)
                for r in P.plebanski_residuals(pp):
                    worst = max(worst, float(np.max(np.abs(r))))
            return _record(cname, cfg, worst, _tol(cfg, 1e-5), {"model": name})

        def instanton(name=name, cname=f"plebanski.instanton.{name}"):
            rng = check_rng(cfg, cname)
            o, _ = DEFINITE[name]
            m = _model(name, cfg, o)
            field = C.LeviCivitaField(m, cfg.scheme, cfg.h)
            pts = m.sample(rng, cfg.points)
            jet = K.curvature_forms(field, pts, "fd", cfg.h)
            g = m.evaluate(pts)[:, None]
            _, Fm = ex.sd_split(g, jet.F, o)
            ratio = np.linalg.norm(Fm, axis=(-2, -1)) / np.linalg.norm(jet.F, axis=(-2, -1))
            return _record(cname, cfg, float(np.max(ratio)), _tol(cfg, 1e-5), {"model": name})

        checks += [run, instanton]

    for name in _models(cfg, M.MODEL_NAMES):
        def torsion(name=name, cname=f"plebanski.torsion.{name}"):
            rng = check_rng(cfg, cname)
            m = _model(name, cfg)
            field = C.LeviCivitaField(m, cfg.scheme, cfg.h)
            r = P.torsion_residual(field, field.sigma, m.sample(rng, cfg.points), cfg.h)
            return _record(cname, cfg, float(np.max(np.linalg.norm(r, axis=(-2, -1)))),
                           _tol(cfg, 1e-5), {"model": name})

        checks.append(torsion)
    return checks


# --- hessian ------------------------------------------------------------------------------


def _hessian(cfg):
    n = max(cfg.points, 1)

    def chain(cname="hessian.chain.field_derived"):
        rng = check_rng(cfg, cname)
        m = _model("hyperbolic4", cfg)
        f = P.PureConnectionField(C.LeviCivitaField(m, cfg.scheme, cfg.h), -3.0 / cfg.scale**2)
        c1, c2 = rng.normal(size=(3, 4, 4)), rng.normal(size=(3, 4, 4, 4))

        def a_field(X):
            return (np.einsum("iam,...m->...ia", c1, X)
                    + np.einsum("iamn,...m,...n->...ia", c2, X, X))

        pts = m.sample(rng, n)
        ctx = f.context(pts)
        pj = K.perturbation_jet(f, a_field, pts, cfg.h)
        sigma, phi = H.theta_star(ctx, pj)
        lhs = H.hessian_plebanski_integrand(ctx, pj.a, pj.dAa, sigma, phi)
        rhs = H.hessian_pre_gauge_integrand(ctx, pj)
        rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
        return _record(cname, cfg, float(np.max(rel)), _tol(cfg, 1e-8))

    def reduction(cname="hessian.chain.gauge_fixed"):
        rng = check_rng(cfg, cname)
        worst = 0.0
        for _ in range(n):
            ctx = H.random_context(rng, -3.0)
            pj = H.synthetic_gauge_fixed_jet(ctx, rng)
            pre = H.hessian_pre_gauge_integrand(ctx, pj)
            fixed = H.hessian_gauge_fixed_integrand(ctx, pj) * ctx.mu
            worst = max(worst, abs(pre - fixed) / abs(pre))
        return _record(cname, cfg, float(worst), _tol(cfg, 1e-8))

    def positivity(cname="hessian.positivity"):
        rng = check_rng(cfg, cname)
        m = _model("hyperbolic4", cfg)
        f = P.PureConnectionField(C.LeviCivitaField(m, cfg.scheme, cfg.h), -3.0 / cfg.scale**2)
        ctxs = f.context(m.sample(rng, min(n, 50)))
        violations = 0
        for k in range(10 * n):
            i = k % len(ctxs.mu)
            ctx = H.GaugeContext(ctxs.Sigma[i], ctxs.g[i], ctxs.Y[i], ctxs.X[i], ctxs.Lam, ctxs.J[i],
                                 ctxs.mu[i], ctxs.orientation)
            pj = H.synthetic_gauge_fixed_jet(ctx, rng)
            val = H.hessian_gauge_fixed_integrand(ctx, pj)
            violations += val < H.norm_sq(ctx, pj.a) * (1 - 1e-12)
        return _record(cname, cfg, float(violations), 0.0, {"instances": 10 * n})

    def phi(cname="hessian.phi_solve"):
        rng = check_rng(cfg, cname)
        worst = 0.0
        for _ in range(10 * n):
            X = np.linalg.inv(H.random_definite_Y(rng, -3.0))
            N = rng.normal(size=(3, 3))
            ph = H.solve_phi(X, N)
            target = ex.s20_project(X @ N)
            resid = np.max(np.abs(ex.s20_project(X @ ph) - target)) / max(1.0, np.max(np.abs(target)))
            worst = max(worst, float(resid))
        N = rng.normal(size=(3, 3))
        closed = float(np.max(np.abs(H.solve_phi(-np.eye(3), N) - ex.s20_project(N))))
        return _record(cname, cfg, max(worst, closed), _tol(cfg, 1e-12),
                       {"instances": 10 * n, "closed_form_error": closed})

    return [chain, reduction, positivity, phi]


# --- gauge ----------------------------------------------------------------------------------


def _gauge(cfg):
    n = 10 * max(cfg.points, 1)

    def algebra(cname="gauge.algebraic"):
        rng = check_rng(cfg, cname)
        worst = {"quaternion": 0.0, "p_q": 0.0, "pi_routes": 0.0, "pi_idempotent": 0.0,
                 "p_pi": 0.0, "pi_q": 0.0}
        for _ in range(n):
            ctx = H.random_context(rng, rng.choice([-3.0, 3.0]))
            v, a = rng.normal(size=4), rng.normal(size=(3, 4))
            comp, closed = H.projection_pi(ctx, a, tol=np.inf, both=True)
            vals = {"quaternion": float(H.quaternion_residual(ctx.J)),
                    "p_q": np.max(np.abs(H.p_map(ctx, H.q_map(ctx, v)) + ctx.Lam * ctx.g @ v)),
                    "pi_routes": np.max(np.abs(comp - closed)),
                    "pi_idempotent": np.max(np.abs(H.projection_pi(ctx, comp) - comp)),
                    "p_pi": np.max(np.abs(H.p_map(ctx, comp))),
                    "pi_q": np.max(np.abs(H.projection_pi(ctx, H.q_map(ctx, v))))}
            for k, x in vals.items():
                worst[k] = max(worst[k], float(x))
        tol = _tol(cfg, 1e-10)
        return CheckRecord(cname, {"instances": n, "seed": cfg.seed}, worst, tol,
                           all(x <= tol for x in worst.values()))

    def coulomb(cname="gauge.coulomb_equivalence"):
        rng = check_rng(cfg, cname)
        m = _model("hyperbolic4", cfg)
        f = P.PureConnectionField(C.LeviCivitaField(m, cfg.scheme, cfg.h), -3.0 / cfg.scale**2)
        c = 0.1 * rng.normal(size=4) * cfg.scale
        bump = Q.BumpField(c, 0.3 * cfg.scale, rng.normal(size=(3, 4)))
        a = H.HorizontalProjection(f, bump)
        worst = 0.0
        for p in c + 0.1 * cfg.scale * rng.normal(size=(5, 4)):
            lhs, rhs = H.coulomb_equivalence_check(f, a, p, cfg.h)
            worst = max(worst, float(np.max(np.abs(lhs - rhs)) / max(1e-12, np.max(np.abs(rhs)))))
        return _record(cname, cfg, worst, _tol(cfg, 1e-4))

    def degeneracy(cname="gauge.degeneracy"):
        rng = check_rng(cfg, cname)
        m = _model("hyperbolic4", cfg)
        f = P.PureConnectionField(C.LeviCivitaField(m, cfg.scheme, cfg.h), -3.0 / cfg.scale**2)
        c, R = np.array([0.1, -0.05, 0.05, 0.0]) * cfg.scale, 0.3 * cfg.scale
        xi = Q.BumpField(c, R, rng.normal(size=3))
        v = Q.BumpField(c, R, rng.normal(size=4) * cfg.scale)
        pure = Q.hessian_quadratic_form(f, K.GaugeGeneratorField(f, xi, v, cfg.h), support=(c, R),
                                        h=cfg.h)
        generic = Q.hessian_quadratic_form(f, Q.BumpField(c, R, rng.normal(size=(3, 4))), h=cfg.h)
        ratio = (abs(pure.value) / pure.l2_norm_sq) / (abs(generic.value) / generic.l2_norm_sq)
        return _record(cname, cfg, float(ratio), _tol(cfg, 1e-3),
                       {"pure_gauge": pure.value, "generic": generic.value})

    return [algebra, coulomb, degeneracy]


# --- symbol -----------------------------------------------------------------------------------


def _symbol(cfg):
    n = 10 * max(cfg.points, 1)

    def routes(cname="symbol.two_routes"):
        rng = check_rng(cfg, cname)
        worst = 0.0
        for _ in range(n):
            ctx = H.random_context(rng, -3.0)
            direct, formula = H.symbol_check(ctx, rng.normal(size=4), rng.normal(size=3))
            worst = max(worst, float(np.max(np.abs(direct - formula))))
        return _record(cname, cfg, worst, _tol(cfg, 1e-10), {"instances": n})

    def gap(cname="symbol.ellipticity_gap"):
        rng = check_rng(cfg, cname)
        worst = -np.inf
        for _ in range(n):
            ctx = H.random_context(rng, -3.0)
            alpha = rng.normal(size=4)
            a2 = alpha @ ctx.ginv @ alpha
            smin = np.linalg.svd(H.symbol_matrix(ctx, alpha) / a2, compute_uv=False)[-1]
            worst = max(worst, float(H.ellipticity_gap(ctx) - smin))
        return _record(cname, cfg, worst, _tol(cfg, 1e-10), {"instances": n})

    def plane_wave(cname="symbol.plane_wave"):
        rng = check_rng(cfg, cname)
        ctx = H.GaugeContext.synthetic(np.eye(4), -np.eye(3))
        field = H.FrozenContextField(ctx)
        xi0 = rng.normal(size=3)
        k = 10.0 * rng.normal(size=4)

        def wave(X):
            return np.cos(X @ k)[..., None] * xi0

        out = H.gauge_operator_apply(field, wave, np.zeros(4), 1e-3)
        expected = H.symbol_check(ctx, k, xi0)[1]
        return _record(cname, cfg, float(np.max(np.abs(out - expected)) / np.max(np.abs(expected))),
                       _tol(cfg, 1e-5))

    return [routes, gap, plane_wave]


# --- action -----------------------------------------------------------------------------------


def _action(cfg):
    def run(cname="action.round_s4"):
        m = _model("sphere4", cfg)
        lam = 3.0 / cfg.scale**2
        f = P.PureConnectionField(C.LeviCivitaField(m, cfg.scheme, cfg.h), lam)
        value = Q.integrate_s4(lambda X: P.action_density(f.data(X)))
        expected = 4 * np.pi**2 * cfg.scale**2
        return _record(cname, cfg, abs(value / expected - 1), _tol(cfg, 5e-3),
                       {"value": value, "expected": expected})

    return [run]


SUITES: Dict[str, Callable] = {
    "identities": _identities,
    "definiteness": _definiteness,
    "reconstruction": _reconstruction,
    "plebanski": _plebanski,
    "hessian": _hessian,
    "gauge": _gauge,
    "symbol": _symbol,
    "action": _action,
}


def run_suite(name: str, cfg: RunConfig) -> List[CheckRecord]:
    """Run every check of a suite (in parallel); records sorted by check name."""
    checks = SUITES[name](cfg)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        records = list(pool.map(lambda c: c(), checks))
    return sorted(records, key=lambda r: r.name)
