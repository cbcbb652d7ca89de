import math

import numpy as np
import pytest

from pureconn import connection as K
from pureconn import curvature as C
from pureconn import models
from pureconn import pure_plebanski as P
from pureconn import quadrature as Q
from pureconn.errors import ArgumentError, ConvergenceError, DomainError

VOL_S4 = 8 * math.pi**2 / 3


@pytest.fixture(scope="module")
def round_field():
    return P.PureConnectionField(C.LeviCivitaField(models.get_model("sphere4")), 3.0)


@pytest.fixture(scope="module")
def hyper_field():
    return P.PureConnectionField(C.LeviCivitaField(models.get_model("hyperbolic4")), -3.0)


class TestRules:
    def test_unit_box(self):
        rule = Q.box_rule(np.full(4, 0.5), 0.5)
        assert Q.integrate_chart(lambda X: np.ones(len(X)), rule) == pytest.approx(1.0, abs=1e-14)
        assert Q.integrate_chart(lambda X: X[:, 0] ** 2, rule) == pytest.approx(1 / 3, abs=1e-12)

    def test_polynomial_exactness(self, rng):
        rule = Q.box_rule(np.zeros(4), 1.0, 8)
        c = rng.integers(0, 8, size=4)  # degree <= 15 per axis is exact for 8 nodes
        exact = np.prod([(1 - (-1) ** (k + 1)) / (k + 1) for k in c])
        assert Q.integrate_chart(lambda X: np.prod(X**c, axis=1), rule) == pytest.approx(exact, abs=1e-13)

    def test_s3_area(self):
        _, w = Q.s3_rule()
        assert w.sum() == pytest.approx(2 * math.pi**2, rel=1e-13)

    def test_ball_volume(self):
        rule = Q.ball_rule(np.ones(4), 2.0)
        assert Q.integrate_chart(lambda X: np.ones(len(X)), rule) == pytest.approx(math.pi**2 / 2 * 16)

    def test_sphere_volume_radial(self):
        dens = lambda X: 16.0 / (1 + np.sum(X * X, axis=-1)) ** 4
        assert Q.integrate_chart(dens, Q.s4_rule()) == pytest.approx(VOL_S4, rel=1e-3)

    def test_bad_rule(self):
        with pytest.raises(ArgumentError):
            Q.QuadratureRule(np.zeros((3, 4)), -np.ones(3), {})


class TestS4:
    def test_zero(self):
        assert Q.integrate_s4(lambda X: np.zeros(len(X))) == 0

    def test_volume_of_connection_metric(self, round_field):
        vol = Q.integrate_s4(lambda X: round_field.data(X).volume_density)
        assert vol == pytest.approx(VOL_S4, rel=5e-3)

    def test_action(self, round_field):
        S = Q.integrate_s4(lambda X: P.action_density(round_field.data(X)))
        assert S == pytest.approx(4 * math.pi**2, rel=5e-3)

    def test_node_doubling(self, round_field):
        dens = lambda X: round_field.data(X).volume_density
        a = Q.integrate_chart(dens, Q.s4_rule(32, (4, 4, 6)))
        b = Q.integrate_chart(dens, Q.s4_rule(64, (8, 8, 12)))
        assert abs(a - b) < 10 * 5e-3 * VOL_S4

    def test_unconverged(self):
        with pytest.raises(ConvergenceError):
            Q.integrate_s4(lambda X: np.cos(40 * X[:, 0]) * np.exp(-np.sum(X * X, axis=1)), n_r=8,
                           s3=(3, 3, 4))


class TestBump:
    def test_derivatives(self, rng):
        b = Q.BumpField(rng.normal(size=4) * 0.1, 0.7, rng.normal(size=(3, 4)))
        x = b.center + 0.2 * rng.normal(size=4)
        h = 1e-5
        g = np.stack([(b.profile(x + h * e) - b.profile(x - h * e)) / (2 * h) for e in np.eye(4)])
        np.testing.assert_allclose(b.profile_gradient(x), g, atol=1e-8)
        Hs = np.stack([(b.profile_gradient(x + h * e) - b.profile_gradient(x - h * e)) / (2 * h)
                       for e in np.eye(4)])
        np.testing.assert_allclose(b.profile_hessian(x), Hs, atol=1e-7)
        assert b(x).shape == (3, 4) and b.gradient(x).shape == (4, 3, 4)

    def test_support(self):
        b = Q.BumpField(np.zeros(4), 0.5)
        assert b.profile(np.array([0.6, 0, 0, 0])) == 0
        with pytest.raises(ArgumentError):
            Q.BumpField(np.zeros(4), 0.0)


class TestHessianForm:
    def test_zero(self, hyper_field):
        zero = Q.BumpField(np.zeros(4), 0.3, np.zeros((3, 4)))
        v = Q.hessian_quadratic_form(hyper_field, zero, n_r=4, s3=(3, 3, 4))
        assert v.value == 0 and v.l2_norm_sq == 0

    def test_support_touching_boundary(self, hyper_field):
        b = Q.BumpField(np.array([0.8, 0, 0, 0]), 0.3, np.ones((3, 4)))
        with pytest.raises(DomainError):
            Q.hessian_quadratic_form(hyper_field, b)

    def test_horizontalised_bump_positive(self, hyper_field):
        from pureconn.hessian_gauge import HorizontalProjection
        rng = np.random.default_rng(5)
        bump = Q.BumpField(np.zeros(4), 0.3, rng.normal(size=(3, 4)))
        v = Q.hessian_quadratic_form(hyper_field, HorizontalProjection(hyper_field, bump),
                                     support=bump.support)
        assert v.value > 0
        assert v.max_horizontal_residual <= 1e-10

    def test_pure_gauge_degenerate(self, hyper_field):
        rng = np.random.default_rng(11)
        c, R = np.array([0.1, -0.05, 0.05, 0.0]), 0.3
        xi = Q.BumpField(c, R, rng.normal(size=3))
        v = Q.BumpField(c, R, rng.normal(size=4))
        pure = Q.hessian_quadratic_form(hyper_field, K.GaugeGeneratorField(hyper_field, xi, v),
                                        support=(c, R))
        generic = Q.hessian_quadratic_form(hyper_field, Q.BumpField(c, R, rng.normal(size=(3, 4))))
        ratio = (abs(pure.value) / pure.l2_norm_sq) / (abs(generic.value) / generic.l2_norm_sq)
        assert ratio <= 1e-3
