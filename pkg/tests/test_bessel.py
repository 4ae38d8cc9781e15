"""Bessel function accuracy checks against an independent high-precision oracle.

mpmath evaluates J0/J1 with 50-digit arithmetic; the implementation under
test must track it to ~1e-13 absolute over the whole argument range the
quadrature uses (0 to 1e4).
"""

import math

import mpmath
import numpy as np
import pytest

from pavetsd import bessel

mpmath.mp.dps = 50


def _mp_j0(x):
    return float(mpmath.besselj(0, mpmath.mpf(x)))


def _mp_j1(x):
    return float(mpmath.besselj(1, mpmath.mpf(x)))


class TestJ0:
    def test_value_at_origin(self):
        assert bessel.j0(0.0) == 1.0

    def test_first_zero(self):
        # reference zero from high-precision evaluation
        assert abs(bessel.j0(2.404825557695773)) < 1e-12

    def test_matches_asymptotic_form_at_1000(self):
        # Hankel expansion sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)]
        # with P = 1 - 9/(128 x^2), Q = -1/(8x) + 75/(1024 x^3); the
        # truncation error at x = 1000 is ~1e-11 relative, far below the
        # asserted 1e-6, while the bare leading term is only good to ~2e-5.
        x = 1000.0
        chi = x - math.pi / 4.0
        p = 1.0 - 9.0 / (128.0 * x * x)
        q = -1.0 / (8.0 * x) + 75.0 / (1024.0 * x**3)
        asym = math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))
        assert bessel.j0(x) == pytest.approx(asym, rel=1e-6)

    def test_against_mpmath_dense_sweep(self):
        rng = np.random.default_rng(20260816)
        xs = np.concatenate([
            np.linspace(0.0, 20.0, 400),
            np.exp(rng.uniform(np.log(1e-8), np.log(1e4), 400)),
        ])
        got = bessel.j0(xs)
        want = np.array([_mp_j0(x) for x in xs])
        np.testing.assert_allclose(got, want, rtol=0.0, atol=1e-13)

    def test_scalar_input_returns_scalar(self):
        out = bessel.j0(1.5)
        assert isinstance(out, float)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            bessel.j0(np.nan)
        with pytest.raises(ValueError):
            bessel.j0(np.inf)


class TestJ1:
    def test_value_at_origin(self):
        assert bessel.j1(0.0) == 0.0

    def test_first_zero(self):
        assert abs(bessel.j1(3.8317059702075123)) < 1e-12

    def test_small_argument_series(self):
        x = 1e-3
        series = x / 2.0 - x**3 / 16.0
        assert bessel.j1(x) == pytest.approx(series, abs=1e-12)

    def test_matches_asymptotic_form_at_1000(self):
        # same Hankel expansion as for J0 but with mu = 4:
        # P = 1 + 15/(128 x^2), Q = 3/(8x) - 105/(1024 x^3)
        x = 1000.0
        chi = x - 3.0 * math.pi / 4.0
        p = 1.0 + 15.0 / (128.0 * x * x)
        q = 3.0 / (8.0 * x) - 105.0 / (1024.0 * x**3)
        asym = math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))
        assert bessel.j1(x) == pytest.approx(asym, rel=1e-6)

    def test_against_mpmath_dense_sweep(self):
        rng = np.random.default_rng(816)
        xs = np.concatenate([
            np.linspace(0.0, 20.0, 400),
            np.exp(rng.uniform(np.log(1e-8), np.log(1e4), 400)),
        ])
        got = bessel.j1(xs)
        want = np.array([_mp_j1(x) for x in xs])
        np.testing.assert_allclose(got, want, rtol=0.0, atol=1e-13)


class TestZeros:
    """Zero tables drive the quadrature partition; they must be real zeros."""

    def test_first_zeros_match_reference(self):
        np.testing.assert_allclose(bessel.j0_zeros(1)[0], 2.404825557695773, rtol=1e-13)
        np.testing.assert_allclose(bessel.j1_zeros(1)[0], 3.8317059702075123, rtol=1e-13)

    def test_j0_zeros_against_mpmath(self):
        got = bessel.j0_zeros(60)
        want = np.array([float(mpmath.besseljzero(0, k)) for k in range(1, 61)])
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_j1_zeros_against_mpmath(self):
        got = bessel.j1_zeros(60)
        want = np.array([float(mpmath.besseljzero(1, k)) for k in range(1, 61)])
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_zeros_strictly_increasing_and_interlaced(self):
        z0 = bessel.j0_zeros(200)
        z1 = bessel.j1_zeros(200)
        assert np.all(np.diff(z0) > 0)
        assert np.all(np.diff(z1) > 0)
        # J0 and J1 zeros interlace: j0_k < j1_k < j0_{k+1}
        assert np.all(z0[:-1] < z1[:-1])
        assert np.all(z1[:-1] < z0[1:])

    def test_function_vanishes_at_tabulated_zeros(self):
        z0 = bessel.j0_zeros(500)
        z1 = bessel.j1_zeros(500)
        assert np.max(np.abs(bessel.j0(z0))) < 1e-11
        assert np.max(np.abs(bessel.j1(z1))) < 1e-11
