import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pureconn import connection as K
from pureconn import curvature as C
from pureconn import exterior as ex
from pureconn import hessian_gauge as H
from pureconn import models
from pureconn import pure_plebanski as P
from pureconn.connection import PerturbationJet
from pureconn.errors import DefinitenessError, OrientationError, PreconditionError
from pureconn.quadrature import BumpField

seeds = st.integers(0, 2**32 - 1)
lams = st.sampled_from([-3.0, 3.0, -0.7, 5.0])
orientations = st.sampled_from([1, -1])


def ctx_from(seed, lam=-3.0, o=1):
    return H.random_context(np.random.default_rng(seed), lam, o)


@pytest.fixture(scope="module")
def hyper_field():
    return P.PureConnectionField(C.LeviCivitaField(models.get_model("hyperbolic4")), -3.0)


@pytest.fixture(scope="module")
def sphere_field():
    return P.PureConnectionField(C.LeviCivitaField(models.get_model("sphere4")), 3.0)


class TestJ:
    def test_flat_complex_structure(self):
        J = H.build_J(ex.FLAT_SD_BASIS, np.eye(4))
        e = np.eye(4)
        s = J[0] @ e[0] @ e[1]  # sign convention of J1: dx1 -> s dx2
        assert abs(s) == pytest.approx(1.0)
        np.testing.assert_allclose(J[0] @ e[0], s * e[1], atol=1e-15)
        np.testing.assert_allclose(J[0] @ e[2], s * e[3], atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(seeds, orientations)
    def test_quaternion_relations(self, seed, o):
        ctx = ctx_from(seed, -3.0, o)
        J = ctx.J
        alpha = np.random.default_rng(seed).normal(size=4)
        np.testing.assert_allclose(J[0] @ J[1] @ alpha, J[2] @ alpha, atol=1e-10)
        np.testing.assert_allclose(J[0] @ J[0] @ alpha, -alpha, atol=1e-10)
        assert H.quaternion_residual(J) <= 1e-8

    def test_wrong_orientation(self):
        with pytest.raises(OrientationError):
            H.build_J(ex.FLAT_SD_BASIS, np.eye(4), -1)


class TestPQ:
    def test_p_of_J_beta(self, rng):
        ctx = H.random_context(rng)
        beta = rng.normal(size=4)
        a = np.einsum("iab,b->ia", ctx.J, beta)
        np.testing.assert_allclose(H.p_map(ctx, a), -3 * beta, atol=1e-12)

    def test_q_zero(self, rng):
        assert np.all(H.q_map(H.random_context(rng), np.zeros(4)) == 0)

    def test_hyperbolic_pq(self, hyper_field):
        p = np.array([0.1, 0.2, 0.0, -0.1])
        ctx = hyper_field.context(p)
        v = np.array([1.0, 0, 0, 0])
        np.testing.assert_allclose(H.p_map(ctx, H.q_map(ctx, v)), 3.0 * ctx.g @ v, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(seeds, lams, orientations)
    def test_pq_is_minus_lambda_flat(self, seed, lam, o):
        ctx = ctx_from(seed, lam, o)
        np.testing.assert_allclose(H.pq_matrix(ctx), -lam * ctx.g, atol=1e-10 * abs(lam) * 10)


class TestPi:
    @settings(max_examples=50, deadline=None)
    @given(seeds, lams, orientations)
    def test_projection_properties(self, seed, lam, o):
        rng = np.random.default_rng(seed)
        ctx = ctx_from(seed, lam, o)
        a, v = rng.normal(size=(3, 4)), rng.normal(size=4)
        comp, closed = H.projection_pi(ctx, a, both=True)
        np.testing.assert_allclose(comp, closed, atol=1e-10)
        np.testing.assert_allclose(H.projection_pi(ctx, comp), comp, atol=1e-10)
        np.testing.assert_allclose(H.p_map(ctx, comp), 0, atol=1e-10)
        np.testing.assert_allclose(H.projection_pi(ctx, H.q_map(ctx, v)), 0, atol=1e-10)

    def test_fixes_kernel_of_p(self, rng):
        ctx = H.random_context(rng)
        a = H.projection_pi(ctx, rng.normal(size=(3, 4)))
        np.testing.assert_allclose(H.projection_pi(ctx, a), a, atol=1e-12)


class TestGaugeResiduals:
    def test_horizontal_quaternion_example(self, rng):
        ctx = H.random_context(rng)
        beta = rng.normal(size=4)
        J = ctx.J
        a = np.stack([beta, -J[2] @ beta, np.zeros(4)])  # J1 beta + J2(-J3 beta) = 0
        np.testing.assert_allclose(H.p_map(ctx, a), 0, atol=1e-12)
        hor, _, _ = H.gauge_residuals(ctx, PerturbationJet(a, np.zeros((3, 6))))
        np.testing.assert_allclose(hor, 0, atol=1e-12)

    def test_zero(self, rng):
        ctx = H.random_context(rng)
        out = H.gauge_residuals(ctx, PerturbationJet(np.zeros((3, 4)), np.zeros((3, 6))))
        assert all(np.all(np.asarray(x) == 0) for x in out)

    def test_skew_N_vertical(self, rng):
        ctx = H.random_context(rng)
        K_ = rng.normal(size=(3, 3))
        N = K_ - K_.T
        _, ver, tr = H.gauge_residuals(ctx, PerturbationJet(np.zeros((3, 4)), N @ ctx.Sigma))
        n_vec = np.einsum("ijk,jk->i", ex.LEVI3, N)
        np.testing.assert_allclose(ver, -2 * ctx.mu * n_vec, atol=1e-10)
        assert abs(tr) <= 1e-12

    def test_horizontal_identity(self, rng):
        ctx = H.random_context(rng)
        a = H.projection_pi(ctx, rng.normal(size=(3, 4)))
        lhs = -H._eps_aa_sigma(a, ctx.Sigma)
        assert lhs == pytest.approx(H.norm_sq(ctx, a) * ctx.mu, rel=1e-10)


class TestCoulomb:
    def test_zero(self, hyper_field):
        zero = lambda X: np.zeros(np.shape(X)[:-1] + (3, 4))
        lhs, rhs = H.coulomb_equivalence_check(hyper_field, zero, np.zeros(4))
        assert np.max(np.abs(lhs)) <= 1e-12 and np.max(np.abs(rhs)) <= 1e-12

    @pytest.mark.parametrize("which", ["hyper_field", "sphere_field"])
    def test_horizontal_bump(self, which, request, rng):
        field = request.getfixturevalue(which)
        a = H.HorizontalProjection(field, BumpField(np.zeros(4), 0.4, rng.normal(size=(3, 4))))
        for p in 0.1 * rng.normal(size=(3, 4)):
            lhs, rhs = H.coulomb_equivalence_check(field, a, p)
            assert np.max(np.abs(lhs - rhs)) <= 1e-4 * np.max(np.abs(rhs))

    def test_non_horizontal_rejected(self, hyper_field, rng):
        a = BumpField(np.zeros(4), 0.4, rng.normal(size=(3, 4)))
        with pytest.raises(PreconditionError):
            H.coulomb_equivalence_check(hyper_field, a, np.zeros(4))


class TestPhi:
    def test_examples(self, rng):
        N = rng.normal(size=(3, 3))
        np.testing.assert_allclose(H.solve_phi(-np.eye(3), N), ex.s20_project(N), atol=1e-14)
        assert np.all(H.solve_phi(-np.eye(3), np.zeros((3, 3))) == 0)

    @settings(max_examples=200, deadline=None)
    @given(seeds)
    def test_substitute_back(self, seed):
        rng = np.random.default_rng(seed)
        X = np.linalg.inv(H.random_definite_Y(rng, -3.0))
        N = rng.normal(size=(3, 3))
        phi = H.solve_phi(X, N)
        target = ex.s20_project(X @ N)
        assert np.max(np.abs(ex.s20_project(X @ phi) - target)) <= 1e-12 * max(1, np.max(np.abs(target)))
        np.testing.assert_allclose(phi, phi.T, atol=1e-12)
        assert abs(np.trace(phi)) <= 1e-10 * max(1, np.max(np.abs(phi)))

    def test_singular(self):
        with pytest.raises(DefinitenessError):
            H.solve_phi(np.diag([1.0, 1.0, -0.5]), np.eye(3))  # indefinite X: L is singular


class TestIntegrands:
    def test_plebanski_zero_and_sigma1(self):
        ctx = H.GaugeContext.synthetic(np.eye(4) * 2.0, np.eye(3))
        zero_a, zero_s = np.zeros((3, 4)), np.zeros((3, 6))
        assert H.hessian_plebanski_integrand(ctx, zero_a, zero_s, zero_s, np.zeros((3, 3))) == 0
        sigma = np.zeros((3, 6))
        sigma[0] = ctx.Sigma[0]
        val = H.hessian_plebanski_integrand(ctx, zero_a, zero_s, sigma, np.zeros((3, 3)))
        assert val == pytest.approx(-2 * ctx.mu)

    def test_pre_gauge_zero_and_asd(self, rng):
        ctx = H.random_context(rng)
        zero = PerturbationJet(np.zeros((3, 4)), np.zeros((3, 6)))
        assert H.hessian_pre_gauge_integrand(ctx, zero) == 0
        sminus = ex.sd_frame(ctx.g, -1).sigma
        dm = rng.normal(size=(3, 3)) @ sminus
        pj = PerturbationJet(rng.normal(size=(3, 4)), dm)
        expected = -H._eps_aa_sigma(pj.a, ctx.Sigma) + np.einsum("ij,ij->", ctx.X, ex.wedge_pairs(dm, dm))
        assert H.hessian_pre_gauge_integrand(ctx, pj) == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seeds, lams, orientations)
    def test_chain_equalities(self, seed, lam, o):
        rng = np.random.default_rng(seed)
        ctx = ctx_from(seed, lam, o)
        pj = PerturbationJet(rng.normal(size=(3, 4)), rng.normal(size=(3, 6)))
        sigma, phi = H.theta_star(ctx, pj)
        lhs = H.hessian_plebanski_integrand(ctx, pj.a, pj.dAa, sigma, phi)
        assert lhs == pytest.approx(H.hessian_pre_gauge_integrand(ctx, pj), rel=1e-9, abs=1e-9)
        gf = H.synthetic_gauge_fixed_jet(ctx, rng)
        pre = H.hessian_pre_gauge_integrand(ctx, gf)
        assert pre == pytest.approx(H.hessian_gauge_fixed_integrand(ctx, gf) * ctx.mu, rel=1e-8)

    def test_gauge_fixed_zero_and_X_minus_identity(self, rng):
        ctx = H.GaugeContext.synthetic(H.random_metric(rng), -np.eye(3))
        assert H.hessian_gauge_fixed_integrand(ctx, PerturbationJet(np.zeros((3, 4)),
                                                                    np.zeros((3, 6)))) == 0
        pj = H.synthetic_gauge_fixed_jet(ctx, rng)
        _, dminus = ex.sd_split(ctx.g, pj.dAa)
        G2 = ex.gram(ctx.g, 2)
        expected = H.norm_sq(ctx, pj.a) + np.einsum("ip,pq,iq->", dminus, G2, dminus)
        val = H.hessian_gauge_fixed_integrand(ctx, pj)
        assert val > 0 and val == pytest.approx(expected, rel=1e-12)

    def test_gauge_fixed_rejects_unfixed(self, rng):
        ctx = H.random_context(rng)
        with pytest.raises(PreconditionError):
            H.hessian_gauge_fixed_integrand(ctx, PerturbationJet(rng.normal(size=(3, 4)),
                                                                 rng.normal(size=(3, 6))))

    def test_positivity_negative_definite(self, rng):
        for _ in range(200):
            ctx = H.random_context(rng, -3.0, rng.choice([1, -1]))
            pj = H.synthetic_gauge_fixed_jet(ctx, rng)
            assert H.hessian_gauge_fixed_integrand(ctx, pj) >= H.norm_sq(ctx, pj.a) * (1 - 1e-12)

    def test_field_derived_chain(self, hyper_field, rng):
        c1 = rng.normal(size=(3, 4, 4))
        a_field = lambda X: np.einsum("iam,...m->...ia", c1, X) + 0.3
        p = models.get_model("hyperbolic4").sample(rng, 10)
        ctx = hyper_field.context(p)
        pj = K.perturbation_jet(hyper_field, a_field, p)
        sigma, phi = H.theta_star(ctx, pj)
        np.testing.assert_allclose(H.hessian_plebanski_integrand(ctx, pj.a, pj.dAa, sigma, phi),
                                   H.hessian_pre_gauge_integrand(ctx, pj), rtol=1e-8)

    def test_diagnostic_record(self, rng):
        ctx = H.random_context(rng)
        rec = json.loads(H.diagnostic_record(ctx, H.synthetic_gauge_fixed_jet(ctx, rng)))
        assert rec["integrands"]["pre_gauge"] == pytest.approx(rec["integrands"]["plebanski"], rel=1e-8)


class TestSymbol:
    def test_example(self):
        ctx = H.GaugeContext.synthetic(np.eye(4), -np.eye(3))
        direct, formula = H.symbol_check(ctx, np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0]))
        np.testing.assert_allclose(direct, [2 / 3, 0, 0], atol=1e-14)
        np.testing.assert_allclose(formula, [2 / 3, 0, 0], atol=1e-14)

    def test_zero_xi(self, rng):
        d, f = H.symbol_check(H.random_context(rng), rng.normal(size=4), np.zeros(3))
        assert np.all(d == 0) and np.all(f == 0)

    @settings(max_examples=100, deadline=None)
    @given(seeds, orientations)
    def test_two_routes_and_gap(self, seed, o):
        rng = np.random.default_rng(seed)
        ctx = ctx_from(seed, -3.0, o)
        alpha, xi = rng.normal(size=4), rng.normal(size=3)
        d, f = H.symbol_check(ctx, alpha, xi)
        np.testing.assert_allclose(d, f, atol=1e-10 * (1 + np.max(np.abs(f))))
        a2 = alpha @ ctx.ginv @ alpha
        smin = np.linalg.svd(H.symbol_matrix(ctx, alpha) / a2, compute_uv=False)[-1]
        assert smin >= H.ellipticity_gap(ctx) - 1e-10
        assert H.is_elliptic(ctx)

    def test_non_elliptic_when_lambda_in_spectrum(self):
        ctx = H.GaugeContext.synthetic(np.eye(4), np.diag([3.0, 1.0, -1.0]))  # Lambda = 3 = y_1
        assert H.ellipticity_gap(ctx) == 0 and not H.is_elliptic(ctx)
        alpha = np.array([0.3, 1.0, -0.2, 0.5])
        assert np.linalg.svd(H.symbol_matrix(ctx, alpha), compute_uv=False)[-1] <= 1e-12

    def test_constant_xi_flat(self):
        field = H.FrozenContextField(H.GaugeContext.synthetic(np.eye(4), -np.eye(3)))
        const = lambda X: np.broadcast_to([1.0, -2.0, 0.5], np.shape(X)[:-1] + (3,))
        assert np.max(np.abs(H.gauge_operator_apply(field, const, np.zeros(4)))) <= 1e-8

    @pytest.mark.parametrize("omega", [5.0, 20.0])
    def test_plane_wave(self, omega, rng):
        ctx = H.GaugeContext.synthetic(np.eye(4), -np.eye(3))
        field = H.FrozenContextField(ctx)
        xi0 = rng.normal(size=3)
        k = rng.normal(size=4)
        k *= omega / np.linalg.norm(k)
        out = H.gauge_operator_apply(field, lambda X: np.cos(X @ k)[..., None] * xi0, np.zeros(4),
                                     1e-3 / omega)
        np.testing.assert_allclose(out, 2 / 3 * omega**2 * xi0, rtol=1e-6)

    def test_richardson_on_hyperbolic(self, hyper_field):
        xi = BumpField(np.zeros(4), 0.5, [1.0, -0.5, 0.25])
        p = np.array([0.05, 0.1, -0.05, 0.02])
        v = [H.gauge_operator_apply(hyper_field, xi, p, h) for h in (0.02, 0.01, 0.005)]
        assert np.all(np.isfinite(v))
        ratio = np.linalg.norm(v[0] - v[1]) / np.linalg.norm(v[1] - v[2])
        assert 12 < ratio < 20
