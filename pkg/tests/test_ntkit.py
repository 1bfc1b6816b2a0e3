import math

import numpy as np
import pytest

from twistdensity.errors import ConfigError, DomainError
from twistdensity.ntkit import (build_sieve, char_partial_sum_max, gauss_data,
                                kronecker, kronecker_bottom_vec,
                                legendre_table, principal_char,
                                squarefree_part)


@pytest.fixture(scope="module")
def table():
    return build_sieve(10_000)


class TestSieve:
    def test_moebius_basics(self, table):
        assert table.moebius[1] == 1
        assert table.moebius[12] == 0   # 12 = 2^2 * 3
        assert table.moebius[30] == -1  # three prime factors

    def test_moebius_minus_one_at_primes(self, table):
        for p in table.primes():
            assert table.moebius[p] == -1

    def test_squarefree_iff_moebius_nonzero(self, table):
        assert np.array_equal(table.squarefree[1:], table.moebius[1:] != 0)

    def test_moebius_multiplicative_on_coprime(self, table):
        for a in range(1, 101):
            for b in range(1, 10_000 // a + 1):
                if math.gcd(a, b) == 1:
                    assert table.moebius[a * b] == table.moebius[a] * table.moebius[b]

    def test_moebius_by_trial_factorization(self, table):
        def mu_trial(n):
            out, f = 1, 2
            while f * f <= n:
                if n % f == 0:
                    n //= f
                    if n % f == 0:
                        return 0
                    out = -out
                f += 1
            return -out if n > 1 else out
        for n in range(1, 3000):
            assert table.moebius[n] == mu_trial(n)

    def test_limit_range(self):
        with pytest.raises(ConfigError):
            build_sieve(1)
        with pytest.raises(ConfigError):
            build_sieve(10 ** 9)

    def test_factorize(self, table):
        assert table.factorize(360) == [(2, 3), (3, 2), (5, 1)]


class TestKronecker:
    def test_trivial_top(self):
        for n in range(1, 50):
            assert kronecker(1, n) == 1

    def test_examples(self):
        assert kronecker(2, 7) == 1      # squares mod 7 are 1, 2, 4
        assert kronecker(-3, 11) == -1   # -3 = 8 mod 11, not a square

    def test_legendre_oracle_euler_criterion(self):
        for d in range(-50, 51):
            for p in (3, 5, 7, 11, 13, 17, 101, 499):
                if d % p == 0:
                    assert kronecker(d, p) == 0
                    continue
                e = pow(d % p, (p - 1) // 2, p)
                assert kronecker(d, p) == (-1 if e == p - 1 else 1)

    def test_completely_multiplicative_in_n(self):
        # spec grid: |d| <= 50, n <= 500 via factor pairs
        for d in range(-50, 51):
            if d == 0:
                continue
            vals = [kronecker(d, n) for n in range(0, 501)]
            for n1 in range(1, 23):
                for n2 in range(1, 501 // max(n1, 1)):
                    assert vals[n1 * n2] == vals[n1] * vals[n2]

    def test_values_in_range_for_squarefree_d(self, table):
        for d in range(1, 51):
            if not table.squarefree[d]:
                continue
            for n in range(1, 100):
                assert kronecker(d, n) in (-1, 0, 1)

    def test_negative_and_zero_bottom(self):
        assert kronecker(5, 0) == 0
        assert kronecker(1, 0) == 1
        assert kronecker(-1, 0) == 1
        for d in (-7, -2, 3, 10):
            for n in range(-30, 0):
                assert kronecker(d, n) == kronecker(d, -n) * (
                    -1 if d < 0 else 1)

    def test_vectorized_matches_scalar(self, table):
        d = np.arange(-200, 201, dtype=np.int64)
        for n in (1, 2, 4, 9, 12, 45):
            ref = np.array([kronecker(int(x), n) for x in d])
            assert np.array_equal(kronecker_bottom_vec(d, n, table), ref)


class TestPrincipalChar:
    def test_values(self):
        assert principal_char(11, 22) == 0
        assert principal_char(11, 12) == 1
        assert principal_char(1, 0) == 1  # gcd(0, 1) = 1

    def test_needs_positive_modulus(self):
        with pytest.raises(DomainError):
            principal_char(0, 5)


class TestGaussSums:
    def test_epsilon_by_residue_class(self):
        assert gauss_data(5).eps_p == 1
        assert gauss_data(7).eps_p == 1j

    def test_tau_value_small(self):
        assert abs(gauss_data(5).tau - math.sqrt(5)) < 1e-12

    def test_identity_up_to_200(self, table):
        for p in table.primes():
            p = int(p)
            if p == 2 or p > 200:
                continue
            qc = gauss_data(p)
            assert abs(qc.tau - qc.eps_p * math.sqrt(p)) < 1e-9

    def test_rejects_non_odd_prime(self):
        for bad in (2, 9, 15):
            with pytest.raises(DomainError):
                gauss_data(bad)


class TestPolyaVinogradov:
    def test_partial_sums_bounded(self, table):
        for p in table.primes():
            p = int(p)
            if p == 2 or p > 200:
                continue
            assert char_partial_sum_max(p, 5 * p) <= math.sqrt(p) * math.log(p)


class TestSquarefreePart:
    def test_examples(self):
        assert squarefree_part(1) == 1
        assert squarefree_part(12) == 3
        assert squarefree_part(-50) == -2

    def test_decomposition_property(self, table):
        for d in range(-500, 501):
            if d == 0:
                continue
            sf = squarefree_part(d, table)
            q, r = divmod(d, sf)
            assert r == 0
            root = math.isqrt(q)
            assert root * root == q          # cofactor is a perfect square
            assert table.squarefree[abs(sf)]
            assert (sf > 0) == (d > 0)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            squarefree_part(0)


def test_legendre_table_is_character(table):
    for p in (5, 13, 31):
        chi = legendre_table(p)
        for a in range(1, p):
            for b in range(1, p):
                assert chi[a * b % p] == chi[a] * chi[b]
