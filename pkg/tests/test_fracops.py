"""Unit tests for the Prabhakar integral and Caputo-Prabhakar derivative."""

import math

import numpy as np
import pytest

from prabtel.errors import DomainError, InvalidParams, QuadratureFailure
from prabtel.expr import ExprFunction
from prabtel.fracops import (
    PrabhakarParams,
    QuadPolicy,
    _integral_fixed_n,
    caputo_prabhakar_deriv,
    kernel_cell_moments,
    prabhakar_integral,
)
from prabtel.quadrature import graded_mesh
from prabtel.specfun import SeriesPolicy, ml_prabhakar


ONES = ExprFunction("1")


class TestParams:
    def test_m_is_one_for_unit_interval_beta(self):
        assert PrabhakarParams(1.0, 0.5, 0.5, -1.0).m == 1

    def test_alpha_positive_required(self):
        with pytest.raises(InvalidParams):
            PrabhakarParams(0.0, 0.5, 0.5, -1.0)

    def test_quad_policy_validation(self):
        with pytest.raises(InvalidParams):
            QuadPolicy(n_points=2)
        with pytest.raises(InvalidParams):
            QuadPolicy(grading=0.5)
        with pytest.raises(InvalidParams):
            QuadPolicy(tol=0.0)


class TestPrabhakarIntegral:
    @pytest.mark.parametrize("alpha,beta,gamma,delta,t", [
        (1.0, 0.5, 0.5, -1.0, 0.5),
        (0.7, 0.3, 1.2, -2.0, 1.3),
        (1.5, 0.9, -0.8, 0.6, 0.8),
        (2.0, 1.4, 0.3, -0.5, 1.0),
    ])
    def test_unit_data_identity(self, alpha, beta, gamma, delta, t):
        p = PrabhakarParams(alpha, beta, gamma, delta)
        got = prabhakar_integral(p, ONES, t)
        want = t ** beta * ml_prabhakar(alpha, beta + 1.0, gamma, delta * t ** alpha)
        assert got == pytest.approx(want, rel=1e-10)

    def test_gamma_zero_riemann_liouville(self):
        p = PrabhakarParams(1.0, 0.5, 0.0, -1.0)
        got = prabhakar_integral(p, ONES, 0.7)
        assert got == pytest.approx(0.7 ** 0.5 / math.gamma(1.5), rel=1e-12)

    def test_delta_zero_riemann_liouville(self):
        p = PrabhakarParams(1.0, 0.5, 0.7, 0.0)
        got = prabhakar_integral(p, ONES, 0.7)
        assert got == pytest.approx(0.7 ** 0.5 / math.gamma(1.5), rel=1e-12)

    def test_quadratic_data_identity(self):
        # integral of xi^2 has the closed form 2 t^(beta+2) E^g_{a,beta+3}
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        got = prabhakar_integral(p, lambda s: s ** 2, 1.0)
        want = 2.0 * ml_prabhakar(1.0, 3.5, 0.5, -1.0)
        assert got == pytest.approx(want, rel=1e-9)

    def test_linearity(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        quad = QuadPolicy()
        lhs = prabhakar_integral(p, ExprFunction("2*sin(t) - 3*t^2"), 0.8, quad)
        rhs = (2.0 * prabhakar_integral(p, ExprFunction("sin(t)"), 0.8, quad)
               - 3.0 * prabhakar_integral(p, ExprFunction("t^2"), 0.8, quad))
        assert abs(lhs - rhs) <= 10.0 * quad.tol

    def test_doubling_reduces_error(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        want = 2.0 * ml_prabhakar(1.0, 3.5, 0.5, -1.0)
        errs = [abs(_integral_fixed_n(p, lambda s: s ** 2, 1.0, n, 2.0,
                                      SeriesPolicy())[0] - want)
                for n in (32, 64, 128, 256)]
        for e0, e1 in zip(errs, errs[1:]):
            assert e0 / e1 >= 3.0

    def test_positive_t_required(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        with pytest.raises(DomainError):
            prabhakar_integral(p, ONES, 0.0)

    def test_nonintegrable_weight_rejected(self):
        p = PrabhakarParams(1.0, -0.2, 0.5, -1.0)
        with pytest.raises(DomainError):
            prabhakar_integral(p, ONES, 1.0)

    def test_unreachable_tol_fails(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        quad = QuadPolicy(n_points=4, tol=1e-16)
        with pytest.raises(QuadratureFailure):
            prabhakar_integral(p, lambda s: np.sin(50.0 * np.asarray(s)), 1.0, quad)


class TestKernelMoments:
    def test_moments_sum_to_unit_data_integral(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        mesh = graded_mesh(0.8, 64, r=2.0)
        m0, _ = kernel_cell_moments(p, mesh.nodes)
        want = 0.8 ** 0.5 * ml_prabhakar(1.0, 1.5, 0.5, -1.0 * 0.8)
        assert float(np.sum(m0)) == pytest.approx(want, rel=1e-11)


class TestCaputoPrabhakarDeriv:
    def test_constant_is_exactly_zero_symbolic(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        assert caputo_prabhakar_deriv(p, ExprFunction("3.5"), 0.8) == 0.0

    def test_constant_is_zero_sampled(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        got = caputo_prabhakar_deriv(
            p, lambda s: 3.5 * np.ones_like(np.asarray(s)), 0.8)
        assert abs(got) <= 1e-10

    def test_identity_data_classical_caputo(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, 0.0)
        t = 0.8
        got = caputo_prabhakar_deriv(p, ExprFunction("t"), t)
        assert got == pytest.approx(t ** 0.5 / math.gamma(1.5), rel=1e-10)

    def test_identity_data_general(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        t = 0.8
        got = caputo_prabhakar_deriv(p, ExprFunction("t"), t)
        want = t ** (1.0 - 0.5) * ml_prabhakar(1.0, 1.5, -0.5, -1.0 * t)
        assert got == pytest.approx(want, rel=1e-10)

    def test_shares_code_with_integral(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        t = 0.9
        sub = PrabhakarParams(1.0, 0.5, -0.5, -1.0)
        got = caputo_prabhakar_deriv(p, ExprFunction("t^2"), t)
        want = prabhakar_integral(sub, ExprFunction("2*t"), t)
        assert got == want

    def test_finite_difference_fallback(self):
        p = PrabhakarParams(1.0, 0.5, 0.5, -1.0)
        got = caputo_prabhakar_deriv(p, lambda s: np.sin(np.asarray(s)), 0.9)
        want = caputo_prabhakar_deriv(p, ExprFunction("sin(t)"), 0.9)
        assert got == pytest.approx(want, abs=5e-8)

    def test_beta_range_enforced(self):
        with pytest.raises(InvalidParams):
            caputo_prabhakar_deriv(PrabhakarParams(1.0, 1.5, 0.5, -1.0),
                                   ExprFunction("t"), 0.5)
