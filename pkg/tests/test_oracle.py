"""Tests for the high-precision reference implementations."""

import math

import numpy as np
import pytest
from mpmath import mp

from prabtel import oracle
from prabtel.errors import DomainError, InvalidParams, QuadratureFailure
from prabtel.specfun import ML2Params, ml2, ml3


class Coeffs:
    def __init__(self, a, b):
        self.a = a
        self.b = b


class Domain:
    def __init__(self, q, p):
        self.q = q
        self.p = p


class TestHpMl:
    def test_exponential(self):
        with mp.workdps(60):
            got = oracle.hp_ml(1.0, 1.0, 1.0, mp.mpf(3) / 7)
            assert abs(got - mp.exp(mp.mpf(3) / 7)) < mp.mpf(10) ** -40

    def test_cosh(self):
        with mp.workdps(60):
            got = oracle.hp_ml(2.0, 1.0, 1.0, 4.0)
            assert abs(got - mp.cosh(2)) < mp.mpf(10) ** -40

    def test_deep_cancellation(self):
        with mp.workdps(60):
            got = oracle.hp_ml(1.0, 1.0, 1.0, -20.0)
            assert abs(got - mp.exp(-20)) / mp.exp(-20) < mp.mpf(10) ** -25

    def test_min_precision_enforced(self):
        with pytest.raises(InvalidParams):
            oracle.hp_ml(1.0, 1.0, 1.0, 0.5, dps=20)

    def test_alpha_validated(self):
        with pytest.raises(InvalidParams):
            oracle.hp_ml(-1.0, 1.0, 1.0, 0.5)


class TestHpMl2:
    def test_origin_closed_form(self):
        p = oracle._tele_ml2(1.0, 0.5, 0.5)
        with mp.workdps(60):
            got = oracle.hp_ml2(p, 0.0, 0.0)
            want = mp.rgamma(p.d1) * mp.rgamma(p.d2) * mp.rgamma(p.d3)
            assert abs(got - want) / abs(want) < mp.mpf(10) ** -30

    def test_separable_product(self):
        # a1 = a3, b1 = b2, a2 = 0 cancel the coupled gamma factors, so
        # the double sum factorizes into two univariate sums
        p = ML2Params(1.0, 1.0, 1.0, 0.0, 1.0,
                      1.0, 1.0, 1.0, 0.5, 1.2, 0.7, 0.9)
        with mp.workdps(60):
            got = oracle.hp_ml2(p, -1.3, 0.8)
            want = (oracle.hp_ml(0.5, 1.2, 1.0, -1.3)
                    * oracle.hp_ml(0.7, 0.9, 1.0, 0.8))
            assert abs(got - want) / abs(want) < mp.mpf(10) ** -35

    def test_agrees_with_production(self):
        p = oracle._tele_ml2(0.9, 0.6, 0.35)
        got = float(oracle.hp_ml2(p, -1.7, -0.9))
        assert ml2(p, -1.7, -0.9) == pytest.approx(got, rel=1e-12)

    def test_precision_independent_beyond_30_digits(self):
        p = oracle._tele_ml2(0.9, 0.6, 0.35)
        with mp.workdps(130):
            v60 = oracle.hp_ml2(p, -2.0, -1.5, dps=60)
            v120 = oracle.hp_ml2(p, -2.0, -1.5, dps=120)
            assert abs(v60 - v120) / abs(v120) < mp.mpf(10) ** -25


class TestHpMl3:
    def test_origin_closed_form(self):
        p = oracle._tele_ml3("V1", 1.0, 0.5, 0.5)
        with mp.workdps(60):
            got = oracle.hp_ml3(p, 0.0, 0.0, 0.0)
            want = (mp.gamma(p.d1) * mp.gamma(p.d2)
                    * mp.rgamma(p.d3) * mp.rgamma(p.d4) * mp.rgamma(p.d5)
                    * mp.rgamma(p.d6) * mp.rgamma(p.d7) * mp.rgamma(p.d8))
            assert abs(got - want) / abs(want) < mp.mpf(10) ** -30

    def test_agrees_with_production(self):
        p = oracle._tele_ml3("V2", 1.0, 0.5, 0.5)
        got = float(oracle.hp_ml3(p, -0.8, -0.6, -0.5))
        assert ml3(p, -0.8, -0.6, -0.5) == pytest.approx(got, rel=1e-12)


class TestAdaptiveQuad:
    def test_inverse_sqrt_weight(self):
        got = oracle.adaptive_quad(lambda s: 1.0, 0.0, 1.0, -0.5)
        assert abs(got - 2) < 1e-14

    def test_smooth_exponential(self):
        got = oracle.adaptive_quad(mp.exp, 0.0, 1.0, 0.0)
        with mp.workdps(60):
            assert abs(got - (mp.e - 1)) < 1e-14

    def test_prabhakar_integral_of_one_identity(self):
        al, be, ga, de, t = 0.9, 0.6, 0.4, -1.3, 0.8
        got = oracle.adaptive_quad(
            lambda s: oracle.hp_ml(al, be, ga, de * s ** al, dps=40),
            0.0, t, be - 1.0, dps=40)
        with mp.workdps(40):
            want = mp.mpf(t) ** be * oracle.hp_ml(
                al, be + 1.0, ga, de * mp.mpf(t) ** al, dps=40)
            assert abs(got - want) / abs(want) < mp.mpf(10) ** -10

    def test_shifted_interval_weight(self):
        # int_2^3 (s-2)^(-1/3) * s ds, closed form via v = s - 2
        got = oracle.adaptive_quad(lambda s: s, 2.0, 3.0, -1.0 / 3.0)
        want = 3.0 / 2.0 * 2.0 + 3.0 / 5.0
        assert abs(got - want) < 1e-13

    def test_weight_exponent_validated(self):
        with pytest.raises(DomainError):
            oracle.adaptive_quad(lambda s: 1.0, 0.0, 1.0, -1.0)

    def test_interval_validated(self):
        with pytest.raises(DomainError):
            oracle.adaptive_quad(lambda s: 1.0, 1.0, 1.0, 0.0)

    def test_hopeless_integrand_fails(self):
        with pytest.raises(QuadratureFailure):
            oracle.adaptive_quad(lambda s: math.sin(1.0 / (1.0000001 - s)),
                                 0.0, 1.0, 0.0, max_depth=4)


class TestClassicalTelegraphFd:
    def test_zero_coefficients_exact(self):
        phi = lambda t: 0.3 + math.sin(t)
        tau = lambda x: 0.3 + x ** 2
        n = 16
        u = oracle.classical_telegraph_fd(
            Coeffs(0.0, 0.0), Domain(1.0, 1.0), phi, tau,
            lambda t, x: 0.0, n)
        ref = np.array([[tau(j / n) + phi(i / n) - phi(0.0)
                         for j in range(n + 1)] for i in range(n + 1)])
        assert np.abs(u - ref).max() < 1e-13

    def test_constant_data(self):
        u = oracle.classical_telegraph_fd(
            Coeffs(-0.3, -0.7), Domain(1.0, 1.0),
            lambda t: 2.5, lambda x: 2.5, lambda t, x: 0.0, 8)
        assert np.abs(u - 2.5).max() == 0.0

    def test_second_order_on_manufactured_solution(self):
        a, b = -0.3, -0.7

        def f(t, x):
            return (-math.cos(t) * math.sin(x)
                    + a * math.sin(t) * math.sin(x)
                    - b * math.cos(t) * math.cos(x))

        errs = []
        for n in (16, 32, 64):
            u = oracle.classical_telegraph_fd(
                Coeffs(a, b), Domain(1.0, 1.0),
                math.sin, lambda x: 0.0, f, n)
            ref = np.array([[math.sin(i / n) * math.cos(j / n)
                             for j in range(n + 1)] for i in range(n + 1)])
            errs.append(np.abs(u - ref).max())
        assert errs[0] / errs[1] == pytest.approx(4.0, abs=0.3)
        assert errs[1] / errs[2] == pytest.approx(4.0, abs=0.3)

    def test_grid_size_validated(self):
        with pytest.raises(InvalidParams):
            oracle.classical_telegraph_fd(
                Coeffs(0.0, 0.0), Domain(1.0, 1.0),
                lambda t: 0.0, lambda x: 0.0, lambda t, x: 0.0, 0)


class TestFixtures:
    def test_fixture_file_in_sync_with_oracles(self):
        # spot-check stored values against fresh oracle runs
        data = oracle.load_fixtures()
        assert data["meta"]["command"] == "prabtel selftest --regen-fixtures"
        with mp.workdps(50):
            for entry in data["ml2"][:2] + data["ml2"][-2:]:
                p = ML2Params(**entry["params"])
                fresh = oracle.hp_ml2(p, entry["x"], entry["y"], dps=40)
                stored = mp.mpf(entry["value"])
                scale = abs(stored) if stored != 0 else mp.mpf(1)
                assert abs(fresh - stored) / scale < mp.mpf(10) ** -15
        pr = data["prabhakar"][0]
        with mp.workdps(50):
            fresh = mp.mpf(pr["t"]) ** pr["beta"] * oracle.hp_ml(
                pr["alpha"], pr["beta"] + 1.0, pr["gamma"],
                pr["delta"] * mp.mpf(pr["t"]) ** pr["alpha"], dps=40)
            stored = mp.mpf(pr["integral_of_one"])
            assert abs(fresh - stored) / abs(stored) < mp.mpf(10) ** -15
