import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy import special

from mimocell import specfun as sf
from mimocell.errors import ConvergenceError, DivergenceError, DomainError


class TestGamma:
    @pytest.mark.parametrize("x, expected", [(1.0, 1.0), (1.5, 0.8862269255), (3.5, 3.3233509704)])
    def test_known_values(self, x, expected):
        assert sf.gamma_fn(x) == pytest.approx(expected, abs=1e-10)

    def test_recurrence(self):
        assert sf.gamma_fn(3.5) == pytest.approx(2.5 * 1.5 * math.sqrt(math.pi) / 2, rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            sf.gamma_fn(x)


class TestIncompleteGamma:
    @pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 4.0, 30.0])
    def test_a_equals_one(self, x):
        assert sf.lower_inc_gamma(1.0, x) == pytest.approx(-math.expm1(-x), rel=1e-13, abs=1e-300)
        assert sf.upper_inc_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-12)

    def test_endpoints(self):
        assert sf.lower_inc_gamma(2.3, 0.0) == 0.0
        assert sf.upper_inc_gamma(2.3, 0.0) == pytest.approx(math.gamma(2.3), rel=1e-15)

    def test_half_integer_against_brute_force(self):
        brute, _ = sint.quad(lambda t: t ** -0.5 * math.exp(-t), 0, 1)
        assert sf.lower_inc_gamma(0.5, 1.0) == pytest.approx(brute, rel=1e-10)
        assert sf.lower_inc_gamma(0.5, 1.0) == pytest.approx(math.sqrt(math.pi) * math.erf(1.0),
                                                             rel=1e-12)
        assert sf.lower_inc_gamma(0.5, 1.0) == pytest.approx(1.4936482656, abs=1e-10)

    def test_upper_at_path_loss_exponent(self):
        a = 2 / 3.7
        brute, _ = sint.quad(lambda t: t ** (a - 1) * math.exp(-t), 2.0, np.inf)
        assert sf.upper_inc_gamma(a, 2.0) == pytest.approx(brute, rel=1e-9)

    @pytest.mark.parametrize("a", [0.05, 0.4595, 1.0, 2.5, 5.0])
    @pytest.mark.parametrize("x", [1e-6, 0.5, 1.9, 3.0, 10.0, 50.0])
    def test_against_scipy(self, a, x):
        g = math.gamma(a)
        assert sf.lower_inc_gamma(a, x) == pytest.approx(special.gammainc(a, x) * g, rel=1e-11)
        assert sf.upper_inc_gamma(a, x) == pytest.approx(special.gammaincc(a, x) * g, rel=1e-10,
                                                         abs=1e-300)

    def test_against_mpmath_deep_tail(self):
        val = sf.upper_inc_gamma(0.3, 200.0)
        ref = float(mpmath.gammainc(0.3, 200.0))
        assert val == pytest.approx(ref, rel=1e-10)

    def test_underflowing_tail_is_zero(self):
        assert sf.upper_inc_gamma(0.4595, 1.78e24) == 0.0
        assert sf.lower_inc_gamma(0.4595, 1.78e24) == pytest.approx(math.gamma(0.4595))

    def test_broadcasting(self):
        x = np.array([[0.1, 1.0], [5.0, 20.0]])
        out = sf.lower_inc_gamma(1.5, x)
        assert out.shape == (2, 2)
        np.testing.assert_allclose(out, special.gammainc(1.5, x) * math.gamma(1.5), rtol=1e-11)

    @pytest.mark.parametrize("a, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1)])
    def test_domain(self, a, x):
        with pytest.raises(DomainError):
            sf.lower_inc_gamma(a, x)
        with pytest.raises(DomainError):
            sf.upper_inc_gamma(a, x)

    def test_complement_grid(self):
        for a in np.linspace(0.05, 5.0, 12):
            g = math.gamma(a)
            for x in np.linspace(0.0, 50.0, 26):
                total = sf.lower_inc_gamma(a, x) + sf.upper_inc_gamma(a, x)
                assert abs(total - g) <= 1e-10 * g

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.01, 8.0), x=st.floats(0.0, 80.0))
    def test_complement_property(self, a, x):
        g = math.gamma(a)
        assert abs(sf.lower_inc_gamma(a, x) + sf.upper_inc_gamma(a, x) - g) <= 1e-10 * g


class TestDoubleFactorial:
    @pytest.mark.parametrize("n, expected", [(5, 15), (0, 1), (7, 105), (1, 1), (6, 48), (-1, 1)])
    def test_values(self, n, expected):
        assert sf.double_factorial(n) == expected

    def test_gamma_identity(self):
        # (2k-1)!! = 2^k Gamma(k + 1/2) / sqrt(pi)
        for k in range(1, 40):
            exact = sf.double_factorial(2 * k - 1)
            via_gamma = math.exp(k * math.log(2) + math.lgamma(k + 0.5) - 0.5 * math.log(math.pi))
            assert via_gamma == pytest.approx(exact, rel=1e-12)


class TestQuadrature:
    def test_spec_validation(self):
        with pytest.raises(DomainError):
            sf.QuadratureSpec(rel_tol=-1)
        with pytest.raises(DomainError):
            sf.QuadratureSpec(max_subdivisions=0)

    @pytest.mark.parametrize("f, expected", [
        (lambda t: np.exp(-t), 1.0),
        (lambda t: 1.0 / (1.0 + t * t), math.pi / 2),
        (lambda t: t ** 2.5 * np.exp(-3.5 * t), math.gamma(3.5) / 3.5 ** 3.5),
    ])
    def test_semi_infinite(self, f, expected):
        assert sf.integrate_semi_infinite(f, 0.0) == pytest.approx(expected, rel=1e-9)

    def test_shifted_lower_limit(self):
        assert sf.integrate_semi_infinite(lambda t: np.exp(-t), 2.0) == pytest.approx(math.exp(-2),
                                                                                       rel=1e-10)

    def test_vector_lower_limits(self):
        lower = np.array([0.0, 1.0, 3.0])
        out = sf.integrate_semi_infinite(lambda t: np.exp(-t), lower)
        np.testing.assert_allclose(out, np.exp(-lower), rtol=1e-10)

    def test_finite_interval(self):
        assert sf.integrate(np.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-12)
        assert sf.integrate(np.sin, math.pi, 0.0) == pytest.approx(-2.0, rel=1e-12)
        assert sf.integrate(np.sin, 1.0, 1.0) == 0.0

    def test_peaked_integrand(self):
        val = sf.integrate(lambda x: 1e-3 / ((x - 0.3) ** 2 + 1e-6), 0.0, 1.0)
        ref, _ = sint.quad(lambda x: 1e-3 / ((x - 0.3) ** 2 + 1e-6), 0.0, 1.0, points=[0.3],
                           epsabs=1e-13, epsrel=1e-12)
        assert val == pytest.approx(ref, rel=1e-8)

    def test_convergence_error_carries_estimate(self):
        spec = sf.QuadratureSpec(max_subdivisions=3, rel_tol=1e-15, abs_tol=1e-300)
        with pytest.raises(ConvergenceError) as info:
            sf.integrate(lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, spec)
        assert math.isfinite(info.value.estimate)

    @settings(max_examples=40, deadline=None)
    @given(c=st.floats(0.1, 10.0), k=st.floats(0.5, 3.0))
    def test_nonnegative_integrand_nonnegative(self, c, k):
        val = sf.integrate_semi_infinite(lambda t: np.exp(-c * t ** k) / (1 + t * t))
        assert val >= 0.0


class TestRho:
    def test_closed_forms(self):
        assert sf.rho(0.0, 2.0) == pytest.approx(math.pi / 2, abs=1e-10)
        assert sf.rho(1.0, 2.0) == pytest.approx(math.pi / 4, abs=1e-10)

    def test_against_closed_form_at_3_7(self):
        mu = 3.7
        assert sf.rho(0.0, mu / 2) == pytest.approx((2 * math.pi / mu) / math.sin(2 * math.pi / mu),
                                                    rel=1e-9)

    @pytest.mark.parametrize("a, b", [(0.3, 1.5), (2.0, 1.85), (0.01, 3.0), (10.0, 2.5)])
    def test_against_mpmath(self, a, b):
        ref = float(mpmath.quad(lambda u: 1 / (1 + u ** b), [a, a + 1, mpmath.inf]))
        assert sf.rho(a, b) == pytest.approx(ref, rel=1e-9)

    def test_array_argument(self):
        a = np.array([0.0, 0.5, 1.0, np.inf])
        out = sf.rho(a, 2.0)
        np.testing.assert_allclose(out, [math.pi / 2, math.pi / 2 - math.atan(0.5), math.pi / 4, 0],
                                   rtol=1e-10, atol=1e-15)

    def test_errors(self):
        with pytest.raises(DivergenceError):
            sf.rho(0.0, 1.0)
        with pytest.raises(DomainError):
            sf.rho(-0.1, 2.0)

    def test_monotone_in_both_arguments(self):
        a_grid = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0]
        b_grid = [1.2, 1.5, 1.85, 2.0, 2.5, 3.0]
        for b in b_grid:
            vals = [sf.rho(a, b) for a in a_grid]
            assert all(x > y for x, y in zip(vals, vals[1:]))
        for a in a_grid:
            vals = [sf.rho(a, b) for b in b_grid]
            assert all(x > y for x, y in zip(vals, vals[1:]))


class TestBetaConstants:
    def test_beta_nfd_values(self):
        assert sf.beta_nfd(4.0) == pytest.approx(6 ** 1.5 / (4 * math.sqrt(2)), rel=1e-14)
        assert sf.beta_nfd(4.0) == pytest.approx(2.5981, abs=1e-4)
        mu = 3.7
        direct = (mu + 2) ** (2 / mu + 1) / (mu * (mu - 2) ** (2 / mu))
        assert sf.beta_nfd(mu) == pytest.approx(direct, rel=1e-14)
        assert sf.beta_nfd(mu) == pytest.approx(2.962697, abs=1e-6)

    def test_beta_nfd_limit(self):
        assert sf.beta_nfd(1e9) == pytest.approx(1.0, abs=1e-6)
        assert sf.beta_nfd(math.inf) == 1.0

    def test_beta_fd_values(self):
        assert sf.beta_fd(4.0) == pytest.approx(math.pi / 2, rel=1e-14)
        assert sf.beta_fd(3.7) == pytest.approx(1.712025, abs=1e-6)

    @pytest.mark.parametrize("mu", [3.0, 3.7, 4.0, 5.0])
    def test_beta_fd_is_rho_at_zero(self, mu):
        ref, _ = sint.quad(lambda u: 1 / (1 + u ** (mu / 2)), 0, np.inf, epsabs=1e-13, epsrel=1e-12)
        assert sf.beta_fd(mu) == pytest.approx(ref, abs=1e-8)

    @pytest.mark.parametrize("mu", [3.0, 3.7, 4.0, 5.0])
    def test_fd_below_nfd(self, mu):
        assert sf.beta_fd(mu) < sf.beta_nfd(mu)

    @pytest.mark.parametrize("mu", [2.0, 1.5, -3.0])
    def test_domain(self, mu):
        with pytest.raises(DomainError):
            sf.beta_nfd(mu)
        with pytest.raises(DomainError):
            sf.beta_fd(mu)
