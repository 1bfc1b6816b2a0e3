import math

import numpy as np
import pytest
from scipy.integrate import quad

from twistdensity.errors import ConfigError, DomainError, PoleError
from twistdensity.testfn import (build_testfn, build_weight,
                                 mellin_decay_check)


def mellin_wtilde_quadrature(wf, s: complex, u_min: float = -46.0) -> complex:
    """Oracle: direct Mellin integral of the folded weight, on u = log x."""
    re = quad(lambda u: math.exp(u * s.real) * math.cos(s.imag * u)
              * wf.wtilde(math.exp(u)), u_min, 3.0, epsabs=1e-13, limit=900)[0]
    im = quad(lambda u: math.exp(u * s.real) * math.sin(s.imag * u)
              * wf.wtilde(math.exp(u)), u_min, 3.0, epsabs=1e-13, limit=900)[0]
    return complex(re, im)


class TestFejer:
    def test_closed_form_values(self):
        tf = build_testfn("fejer", 1.0)
        assert tf.phihat(0.0) == 1.0
        assert tf.phi(0.0) == 1.0
        assert tf.phihat(1.0) == 0.0      # boundary of support, exact
        assert tf.phihat(1.7) == 0.0

    def test_inversion_oracle_20_points(self):
        tf = build_testfn("fejer", 0.7)
        for x in np.linspace(0.05, 9.0, 20):
            direct = 2.0 * quad(lambda xi: (1 - xi / 0.7) * math.cos(2 * math.pi * xi * x),
                                0.0, 0.7, epsabs=1e-14)[0]
            assert abs(direct - tf.phi(float(x))) < 1e-8

    def test_phi0_equals_integral_of_phihat(self):
        tf = build_testfn("fejer", 0.4)
        integral = quad(lambda xi: tf.phihat(xi), -0.4, 0.4, epsabs=1e-13)[0]
        assert abs(tf.phi(0.0) - integral) < 1e-10

    def test_evenness(self):
        tf = build_testfn("fejer", 0.5)
        rng = np.random.default_rng(7)
        for x in rng.uniform(-8, 8, 50):
            assert abs(tf.phi(x) - tf.phi(-x)) < 1e-12
            assert abs(tf.phihat(x) - tf.phihat(-x)) < 1e-12

    def test_envelope_bounds_phi(self):
        tf = build_testfn("fejer", 0.4)
        for x in np.linspace(0.1, 300, 200):
            assert abs(tf.phi(float(x))) <= tf.phi_envelope(float(x)) + 1e-15


class TestBump:
    def test_support_and_center(self):
        tf = build_testfn("smooth_bump", 0.4)
        assert tf.phihat(0.4) == 0.0
        assert abs(tf.phihat(0.0) - math.exp(-1)) < 1e-15

    def test_inversion_oracle(self):
        tf = build_testfn("smooth_bump", 0.4)
        for x in (0.0, 0.5, 3.0, 20.0):
            direct = 2.0 * quad(
                lambda xi: math.exp(-1.0 / (1.0 - (xi / 0.4) ** 2))
                * math.cos(2 * math.pi * xi * x),
                0.0, 0.4, epsabs=1e-14, limit=400)[0]
            assert abs(direct - tf.phi(x)) < 1e-8

    def test_evenness(self):
        tf = build_testfn("smooth_bump", 0.3)
        for x in np.linspace(0.1, 40, 25):
            assert abs(tf.phi(float(x)) - tf.phi(float(-x))) < 1e-12

    def test_beyond_cached_rule(self):
        tf = build_testfn("smooth_bump", 0.4, x_max=64.0)
        # falls back to an on-the-fly rule past x_max
        v = tf.phi(100.0)
        ref = build_testfn("smooth_bump", 0.4, x_max=256.0).phi(100.0)
        assert abs(v - ref) < 1e-10


class TestBuildValidation:
    def test_sigma_range(self):
        with pytest.raises(ConfigError):
            build_testfn("fejer", 0.0)
        with pytest.raises(ConfigError):
            build_testfn("fejer", 1.5)
        with pytest.raises(ConfigError):
            build_testfn("hat", 0.4)

    def test_weight_kinds(self):
        with pytest.raises(ConfigError):
            build_weight("exp", 11)
        with pytest.raises(ConfigError):
            build_weight("custom-samples", 11,
                         samples=[(0.0, 1.0), (1.0, -0.5)])


class TestGaussianWeight:
    def test_what_zero(self, weight11):
        assert weight11.what(0.0) == 1.0

    def test_mellin_closed_values(self, weight11):
        assert abs(weight11.mellin_w(1.0) - 0.5) < 1e-15
        assert abs(weight11.mellin_w(2.0) - 1.0 / (2 * math.pi)) < 1e-15

    def test_mellin_at_two_vs_quadrature(self, weight11):
        direct = quad(lambda x: x * math.exp(-math.pi * x * x), 0, 10,
                      epsabs=1e-14)[0]
        assert abs(weight11.mellin_w(2.0) - direct) < 1e-12

    def test_mellin_pole(self, weight11):
        with pytest.raises(PoleError):
            weight11.mellin_w(0.0)


class TestWtilde:
    def test_large_argument_single_term(self, weight11):
        assert abs(weight11.wtilde(10.0) - weight11.w(10.0)) < 1e-15

    def test_even(self, weight11):
        assert weight11.wtilde(-0.03) == weight11.wtilde(0.03)

    def test_direct_200_term_oracle(self, weight11):
        s = sum(math.exp(-math.pi * (n * n * 0.01) ** 2)
                for n in range(1, 201) if n % 11)
        assert abs(weight11.wtilde(0.01) - s) < 1e-13

    def test_blowup_rate_near_zero(self, weight11):
        xs = np.logspace(-6, -2, 40)
        vals = np.sqrt(xs) * weight11.wtilde_vec(xs)
        assert vals.min() > 0.55
        assert vals.max() < 0.70

    def test_rejects_zero(self, weight11):
        with pytest.raises(DomainError):
            weight11.wtilde(0.0)

    def test_asymptotic_matches_direct_at_switch(self, weight11):
        x0 = 1.4e-9    # just below the direct-summation regime
        direct = sum(math.exp(-math.pi * (n * n * x0) ** 2)
                     for n in range(1, 60_000) if n % 11)
        assert abs(weight11.wtilde(x0) / direct - 1.0) < 1e-10


class TestMellinWtilde:
    def test_product_formula_s2(self, weight11):
        got = weight11.mellin_wtilde(2.0)
        want = (1 - 11.0 ** -4) * (math.pi ** 4 / 90) * weight11.mellin_w(2.0)
        assert abs(got - want) < 1e-14

    def test_quadrature_oracle_s2(self, weight11):
        assert abs(weight11.mellin_wtilde(2.0)
                   - mellin_wtilde_quadrature(weight11, 2.0 + 0j)) < 1e-8

    def test_quadrature_oracle_complex(self, weight11):
        for s, umin in ((1 + 1j, -50.0), (0.75 + 0j, -95.0), (1.0 + 0j, -50.0)):
            gap = abs(weight11.mellin_wtilde(s)
                      - mellin_wtilde_quadrature(weight11, complex(s), umin))
            assert gap < 1e-6

    def test_pole_guard(self, weight11):
        with pytest.raises(PoleError):
            weight11.mellin_wtilde(0.5 + 1e-9j)


class TestDecayReport:
    def test_bounded_and_eventually_decreasing(self, weight11):
        rep = mellin_decay_check(weight11, 1.0, np.linspace(1, 50, 64))
        for n in (1, 2, 4):
            assert np.isfinite(rep[f"max_n{n}"])
        w = rep["windowed_max_n4"]
        peak = int(np.argmax(w))
        assert all(w[i] >= w[i + 1] for i in range(peak, len(w) - 1))

    def test_large_t_smaller_than_moderate_t(self, weight11):
        assert abs(weight11.mellin_w(1 + 50j)) < abs(weight11.mellin_w(1 + 10j))

    def test_value_at_origin(self, weight11):
        assert abs(weight11.mellin_w(complex(1.0, 0.0)) - 0.5) < 1e-15


class TestCustomSamples:
    def test_roundtrip_and_positivity(self):
        xs = np.linspace(0, 3, 60)
        ws = np.exp(-xs ** 2)
        wf = build_weight("custom-samples", 11,
                          samples=list(zip(xs.tolist(), ws.tolist())))
        assert wf.w(0.5) > 0
        assert wf.w(5.0) == 0.0
        assert abs(wf.mellin_w(1.0) - 0.5 * wf.what(0.0)) < 1e-3


class TestWeightEvenness:
    def test_w_and_what_even_at_random_points(self, weight11):
        rng = np.random.default_rng(5)
        for x in rng.uniform(-3, 3, 50):
            assert abs(weight11.w(x) - weight11.w(-x)) < 1e-12
            assert abs(weight11.what(x) - weight11.what(-x)) < 1e-12
