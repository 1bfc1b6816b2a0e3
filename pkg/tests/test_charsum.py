import math

import numpy as np
import pytest

from twistdensity.analytic import zeta_em_pair
from twistdensity.charsum import (char_sum_main_term, family_table,
                                  gauss_expansion_check, kappa, logd_sum,
                                  p_divides_d_sum, poisson_check,
                                  weighted_char_sum)
from twistdensity.errors import DomainError, ScaleError
from twistdensity.ntkit import kronecker
from twistdensity.sumutil import fsum_array


@pytest.fixture(scope="module")
def fam1e4(weight11, sieve):
    return family_table(weight11, 11, 1e4, True, sieve)


class TestKappa:
    def test_values(self):
        assert kappa(1) == 1
        assert kappa(9) == 1
        assert kappa(2) == 0
        assert kappa(36) == 1
        assert kappa(35) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            kappa(0)


class TestFamilyTable:
    def test_guard(self, weight11, sieve):
        with pytest.raises(ScaleError):
            family_table(weight11, 11, 2e6, True, sieve)

    def test_members_squarefree_coprime(self, fam1e4, sieve):
        assert np.all(sieve.squarefree[fam1e4.d])
        assert np.all(np.gcd(fam1e4.d, 11) == 1)

    def test_w_identity_both_routes(self, weight11, sieve):
        """W(X) = sum over all (d,N)=1 of w(d/X) = sum* of wtilde(d/X)."""
        X = 1000.0
        fam = family_table(weight11, 11, X, True, sieve)
        d = np.arange(1, int(3.632 * X) + 2, dtype=np.int64)
        d = d[np.gcd(d, 11) == 1]
        w_direct = 2.0 * fsum_array(np.exp(-math.pi * (d / X) ** 2))
        assert abs(fam.W - w_direct) < 1e-8 * w_direct


class TestWeightedCharSums:
    def test_n1_main_term_one_percent(self, weight11, fam1e4):
        main = char_sum_main_term(weight11, 11, 1e4, 1, True)
        assert abs(fam1e4.W / main - 1.0) < 0.01

    def test_main_term_is_remark_constant(self, weight11):
        # X what(0) prod_{p|11}(1 - 1/p) = (10/11) X for the gaussian
        assert abs(char_sum_main_term(weight11, 11, 1e4, 1, True)
                   - 1e4 * 10 / 11) < 1e-9

    def test_square_n_product_factor(self, weight11, sieve, fam1e4):
        s1 = weighted_char_sum(weight11, 11, 1e4, 1, True, sieve, fam1e4)
        s4 = weighted_char_sum(weight11, 11, 1e4, 4, True, sieve, fam1e4)
        assert abs(s4 / s1 / (2.0 / 3.0) - 1.0) < 0.03

    def test_nonsquare_small(self, weight11, sieve, fam1e4):
        for n in (2, 3, 5, 6):
            s = weighted_char_sum(weight11, 11, 1e4, n, True, sieve, fam1e4)
            assert abs(s) / 1e4 < 1e-2

    def test_odd_sign_cancellation(self, weight11, sieve, fam1e4):
        # (-1/3) = -1 makes the symmetric sum vanish identically
        assert weighted_char_sum(weight11, 11, 1e4, 3, True, sieve, fam1e4) == 0.0
        assert kronecker(-1, 3) == -1

    def test_squarefree_variant_constant(self, weight11, sieve):
        fam = family_table(weight11, 11, 1e4, False, sieve)
        want = 1e4 * (6 / math.pi ** 2) * (11 / 12)
        assert abs(fam.W / want - 1.0) < 0.02


class TestLogdSum:
    def test_gap_small_and_shrinking(self, weight11, sieve):
        _, _, g3 = logd_sum(weight11, 11, 1e3, sieve)
        _, _, g5 = logd_sum(weight11, 11, 1e5, sieve)
        assert abs(g3) < 0.01
        assert abs(g5) < abs(g3)

    def test_sqrt_correction_helps(self, weight11, sieve):
        _, _, gap = logd_sum(weight11, 11, 1e3, sieve)
        _, _, gap_no = logd_sum(weight11, 11, 1e3, sieve,
                                include_sqrt_correction=False)
        assert abs(gap_no) > abs(gap)

    def test_zeta_constant_cross_module(self, sieve):
        z, zp = zeta_em_pair(2.0)
        ld = (zp / z).real
        primes = sieve.primes()
        vm = -float(np.sum(np.log(primes.astype(float))
                           / (primes.astype(float) ** 2 - 1.0)))
        assert abs(ld - vm) < 1e-4   # oracle truncated at the sieve limit

    def test_log_moment_constant(self, weight11):
        from scipy.integrate import quad
        direct = quad(lambda x: math.exp(-math.pi * x * x) * math.log(x),
                      0, 10, epsabs=1e-14, points=[1e-12])[0]
        closed = -(0.5772156649015329 + math.log(4 * math.pi)) / 4
        assert abs(direct - closed) < 1e-10


class TestPDividesD:
    def test_ratio_targets(self, weight11, sieve, fam1e4):
        for p, tol in ((3, 0.01), (7, 0.01)):
            ratio, target = p_divides_d_sum(weight11, 11, 1e4, p, sieve, fam1e4)
            assert target == 1.0 / (p + 1)
            assert abs(ratio - target) < tol

    def test_exact_zero_for_bad_prime(self, weight11, sieve):
        ratio, target = p_divides_d_sum(weight11, 11, 1e4, 11, sieve)
        assert ratio == 0.0 and target == 0.0


class TestPoisson:
    def test_classical_b0(self, weight11):
        lhs, rhs, gap = poisson_check(weight11, 5, 1, 0, 30.0)
        assert abs(lhs.imag) < 1e-12
        assert gap < 1e-9

    def test_grid(self, weight11):
        count = 0
        for p in (3, 5, 7, 11, 13):
            for ell in (1, 2, 3):
                for b in (0, 1, 2):
                    if b >= p:
                        continue
                    _, _, gap = poisson_check(weight11, p, ell, b, 50.0)
                    assert gap < 1e-9
                    count += 1
        assert count >= 20

    def test_parameter_validation(self, weight11):
        with pytest.raises(DomainError):
            poisson_check(weight11, 4, 1, 0, 10.0)
        with pytest.raises(DomainError):
            poisson_check(weight11, 5, 1, 7, 10.0)


class TestGaussExpansion:
    def test_n_one_single_term(self, weight11):
        from twistdensity.testfn import build_weight
        wf1 = build_weight("gaussian", 1)
        assert gauss_expansion_check(wf1, 1, 5, 50.0) < 1e-8

    def test_composite_levels(self, weight11):
        from twistdensity.testfn import build_weight
        for N, p, Y in ((11, 7, 100.0), (15, 13, 60.0), (11, 5, 80.0)):
            wf = build_weight("gaussian", N)
            assert gauss_expansion_check(wf, N, p, Y) < 1e-8

    def test_sign_factor_doubling(self, weight11, sieve):
        # for p = 1 mod 4 the full-line sum doubles the one-sided sum
        p, Y = 13, 60.0
        d = np.arange(1, int(3.7 * Y) + 1, dtype=np.int64)
        d = d[np.gcd(d, 11) == 1]
        from twistdensity.ntkit import legendre_table
        chi = legendre_table(p)[d % p].astype(float)
        one_sided = float(np.sum(weight11.w(d / Y) * chi))
        full = (1 + kronecker(-1, p)) * one_sided
        assert abs(full - 2.0 * one_sided) < 1e-12


class TestNonsquareGrowth:
    def test_slower_than_x_tenth(self, weight11, sieve):
        """Nonsquare character sums grow slower than X^0.1 (identically-zero
        cases, where the sign factor kills the symmetric sum, count too)."""
        for n in (2, 3, 5, 6):
            vals = {}
            for X in (1e3, 1e4, 1e5):
                fam = family_table(weight11, 11, X, True, sieve)
                vals[X] = abs(weighted_char_sum(weight11, 11, X, n, True,
                                                sieve, fam))
            if vals[1e5] == 0.0:
                assert vals[1e3] == 0.0
                continue
            assert vals[1e5] / max(vals[1e3], 1e-12) < (1e5 / 1e3) ** 0.1 * 3
