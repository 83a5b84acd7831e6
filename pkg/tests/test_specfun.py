import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtdyn.exceptions import DomainError
from rmtdyn.specfun import digamma, erfi, erfi_real_scaled, log_gamma_complex, trigamma

mpmath.mp.dps = 40


def close(got, ref, tol=1e-12):
    """Mixed absolute/relative error, meaningful near roots such as psi(1.4616)."""
    return abs(got - ref) <= tol * max(1.0, abs(ref))


def euler_gamma_by_series():
    # gamma = H_k - log k - 1/(2k) + 1/(12k^2) - 1/(120k^4) + O(k^-6)
    k = 10**4
    h = math.fsum(1.0 / j for j in range(1, k + 1))
    return h - math.log(k) - 1 / (2 * k) + 1 / (12 * k**2) - 1 / (120 * k**4)


class TestDigamma:
    def test_at_one_matches_independent_euler_constant(self):
        assert abs(digamma(1.0) + 0.5772156649015329) < 1e-15
        assert abs(digamma(1.0) + euler_gamma_by_series()) < 1e-13

    def test_unit_step(self):
        assert abs(digamma(2.0) - digamma(1.0) - 1.0) < 1e-14

    def test_asymptotic_remainder_at_ten(self):
        x = 10.0
        approx = math.log(x) - 1 / (2 * x) - 1 / (12 * x**2)
        assert abs(digamma(x) - approx) <= 1 / (120 * x**4) * 1.01

    @pytest.mark.parametrize("x", [1e-8, 0.01, 0.3, 1.4616321449683622, 2.5, 9.99, 10.0, 37.2, 1e3, 1e7])
    def test_against_mpmath(self, x):
        assert close(digamma(x), float(mpmath.digamma(x)), 1e-13)

    def test_root_and_vectorised(self):
        xs = np.linspace(0.05, 80, 997)
        got = digamma(xs)
        ref = np.array([float(mpmath.digamma(x)) for x in xs])
        assert got.shape == xs.shape
        assert np.all(np.abs(got - ref) <= 1e-13 * np.maximum(1, np.abs(ref)))

    @pytest.mark.parametrize("bad", [0.0, -1.0, -2.5, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            digamma(bad)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.5, 100.0))
    def test_recurrence_property(self, x):
        assert abs(digamma(x + 1) - digamma(x) - 1 / x) < 1e-12


class TestTrigamma:
    def test_at_one_by_direct_series(self):
        k = 10**6
        tail = 1 / k + 1 / (2 * k**2) + 1 / (6 * k**3)
        direct = math.fsum(1.0 / j**2 for j in range(1, k)) + tail
        assert abs(trigamma(1.0) - 1.6449340668482264) < 1e-15
        assert abs(trigamma(1.0) - direct) < 1e-13

    def test_recurrence_at_one(self):
        assert abs(trigamma(2.0) - (trigamma(1.0) - 1.0)) < 1e-14

    def test_large_argument(self):
        assert abs(trigamma(50.0) * 50 - 1) < 0.02

    def test_against_mpmath(self):
        xs = np.concatenate([np.geomspace(1e-6, 1, 50), np.linspace(1, 200, 300)])
        ref = np.array([float(mpmath.psi(1, x)) for x in xs])
        assert np.all(np.abs(trigamma(xs) - ref) <= 1e-12 * np.abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            trigamma(np.array([1.0, 0.0]))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.5, 100.0))
    def test_recurrence_property(self, x):
        assert abs(trigamma(x + 1) - trigamma(x) + 1 / x**2) < 1e-12


class TestLogGamma:
    def test_one_is_zero(self):
        assert log_gamma_complex(1.0) == 0.0 or abs(log_gamma_complex(1.0)) < 1e-15

    def test_functional_equation(self):
        z = 2.5 + 1.5j
        r = np.exp(log_gamma_complex(z + 1) - log_gamma_complex(z))
        assert abs(r - z) < 1e-13

    def test_reflection_modulus(self):
        tau = 1.0
        g2 = np.exp(2 * log_gamma_complex(1 + 1j * tau).real)
        assert abs(g2 - np.pi * tau / np.sinh(np.pi * tau)) < 1e-14

    def test_against_mpmath_on_kernel_strips(self):
        # arguments j - i tau and N - j + 1 + i tau of the finite kernel
        rng = np.random.default_rng(5)
        j = rng.integers(1, 65, 400)
        tau = rng.uniform(-200, 200, 400)
        z = np.concatenate([j - 1j * tau, j + 1j * tau])
        got = log_gamma_complex(z)
        for zz, g in zip(z, got):
            ref = complex(mpmath.loggamma(mpmath.mpc(zz.real, zz.imag)))
            assert abs(g - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_principal_branch_left_half_plane(self):
        for z in [-0.5 + 0.1j, -3.7 - 2j, -15.2 + 40j, 0.25 - 0.001j]:
            ref = complex(mpmath.loggamma(mpmath.mpc(z.real, z.imag)))
            assert abs(log_gamma_complex(z) - ref) <= 1e-12 * max(1.0, abs(ref))

    @pytest.mark.parametrize("pole", [0, -1, -7])
    def test_poles(self, pole):
        with pytest.raises(DomainError):
            log_gamma_complex(complex(pole, 0.0))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1.0, 60.0), st.floats(-50.0, 50.0))
    def test_functional_equation_property(self, re, im):
        z = complex(re, im)
        r = np.exp(log_gamma_complex(z + 1) - log_gamma_complex(z))
        assert abs(r - z) < 1e-10 * abs(z)

    def test_pure(self):
        z = np.array([3.3 + 7j, 1 - 100j])
        assert np.array_equal(log_gamma_complex(z), log_gamma_complex(z.copy()))


def erfi_taylor_oracle(x, terms=80):
    x = mpmath.mpf(x)
    return 2 / mpmath.sqrt(mpmath.pi) * mpmath.fsum(
        x ** (2 * k + 1) / (mpmath.factorial(k) * (2 * k + 1)) for k in range(terms))


class TestErfi:
    def test_zero(self):
        assert erfi(0.0) == 0.0

    def test_one_by_taylor_oracle(self):
        assert abs(erfi(1.0) - 1.6504257587975429) < 1e-15
        assert abs(erfi(1.0) - float(erfi_taylor_oracle(1))) < 1e-15

    def test_real_in_real_out(self):
        out = erfi(np.linspace(-5, 5, 11))
        assert out.dtype == float

    def test_conjugate_symmetry(self):
        z = 0.7 + 0.3j
        assert abs(erfi(np.conj(z)) - np.conj(erfi(z))) < 1e-15

    def test_against_mpmath_complex_plane(self):
        rng = np.random.default_rng(11)
        z = rng.uniform(-20, 20, 600) + 1j * rng.uniform(-20, 20, 600)
        z = z[(z * z).real < 700]
        got = erfi(z)
        for zz, g in zip(z, got):
            ref = complex(mpmath.erfi(mpmath.mpc(zz.real, zz.imag)))
            assert abs(g - ref) <= 1e-12 * abs(ref)

    def test_against_taylor_oracle_real_axis(self):
        for x in [0.1, 0.9, 1.49, 1.51, 2.7, 4.0]:
            assert close(erfi(x), float(erfi_taylor_oracle(x, 200)), 1e-14)

    def test_crossover_continuity(self):
        # Taylor branch inside |z| <= 1.5, Faddeeva outside
        ang = np.linspace(0, 2 * np.pi, 64)
        inside = erfi((1.5 - 1e-12) * np.exp(1j * ang))
        outside = erfi((1.5 + 1e-12) * np.exp(1j * ang))
        assert np.max(np.abs(inside - outside) / np.abs(inside)) < 1e-11

    def test_overflow(self):
        with pytest.raises(OverflowError):
            erfi(27.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_odd(self, re, im):
        z = complex(re, im)
        assert abs(erfi(-z) + erfi(z)) <= 1e-12 * max(1.0, abs(erfi(z)))

    def test_scaled_real_part(self):
        z = np.array([3 + 4j, -6.5 + 2j, 0.2 - 9j])
        v = erfi_real_scaled(z)
        # Re erfi is far below |erfi| here, so the oracle needs extra digits
        mpmath.mp.dps = 120
        try:
            for zz, vv in zip(z, v):
                ref = mpmath.re(mpmath.erfi(mpmath.mpc(zz.real, zz.imag)))
                scale = mpmath.exp((zz * zz).real)
                assert abs(vv - float(ref / scale)) <= 1e-12 * abs(vv)
        finally:
            mpmath.mp.dps = 40

    def test_scaled_real_part_deep_cancellation(self):
        # Re erfi(10 + 25i) ~ 1e-229 against |erfi| ~ 1: oracle through
        # mpmath's erfc, Re erfi = Im(e^{i Im z^2} e^{-z^2} erfc(-iz)) e^{Re z^2}
        z = 10 + 25j
        zm = mpmath.mpc(z.real, z.imag)
        w = mpmath.exp(-zm * zm) * mpmath.erfc(-1j * zm)
        ref = float(mpmath.im(mpmath.exp(1j * mpmath.im(zm * zm)) * w))
        assert abs(erfi_real_scaled(z) - ref) <= 1e-12 * abs(ref)
