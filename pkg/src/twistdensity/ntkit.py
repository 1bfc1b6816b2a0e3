"""Arithmetic primitives: sieves, Moebius tables, Kronecker symbol, Gauss sums.

All tables are immutable after construction and safe to share across
concurrent workers.  The Kronecker symbol follows the standard completion
at n = 2 and n <= 0, which is needed to evaluate chi_d(N) for arbitrary
conductors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError

SIEVE_LIMIT_MAX = 100_000_000


@dataclass(frozen=True)
class SieveTable:
    """Dense arithmetic tables up to `limit` (inclusive).

    smallest_prime_factor[n] is the least prime dividing n (n >= 2),
    moebius[n] in {-1, 0, +1}, squarefree[n] = (moebius[n] != 0).
    """
    limit: int
    smallest_prime_factor: np.ndarray
    moebius: np.ndarray
    squarefree: np.ndarray
    _primes: np.ndarray = field(default=None, repr=False, compare=False)

    def primes(self) -> np.ndarray:
        return self._primes

    def factorize(self, n: int):
        """Prime factorization [(p, e), ...] of n <= limit (n >= 1)."""
        if n < 1 or n > self.limit:
            raise DomainError(f"factorize: n={n} outside table range")
        out = []
        spf = self.smallest_prime_factor
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out


def build_sieve(limit: int) -> SieveTable:
    """Sieve of smallest prime factors plus Moebius/squarefree tables.

    Accepts 2 <= limit <= 1e8.  Memory is dominated by the uint32 spf
    array (4 bytes per entry).
    """
    if not (2 <= limit <= SIEVE_LIMIT_MAX):
        raise ConfigError(f"sieve limit {limit} outside [2, {SIEVE_LIMIT_MAX}]")
    n = limit + 1
    spf = np.zeros(n, dtype=np.uint32)
    for i in range(2, int(math.isqrt(limit)) + 1):
        if spf[i] == 0:
            sl = spf[i * i::i]
            sl[sl == 0] = i
    rest = np.flatnonzero(spf[2:] == 0) + 2
    spf[rest] = rest
    primes = np.flatnonzero(spf == np.arange(n, dtype=np.uint32))
    primes = primes[primes >= 2].astype(np.int64)

    mu = np.ones(n, dtype=np.int8)
    for p in primes:
        mu[p::p] *= -1
        p2 = int(p) * int(p)
        if p2 <= limit:
            mu[p2::p2] = 0
    if limit >= 1:
        mu[1] = 1
    mu[0] = 0
    sqfree = mu != 0
    sqfree[0] = False
    return SieveTable(limit=limit, smallest_prime_factor=spf, moebius=mu,
                      squarefree=sqfree, _primes=primes)


@lru_cache(maxsize=8)
def shared_sieve(limit: int) -> SieveTable:
    """Process-wide sieve cache; computed once per run and shared read-only."""
    return build_sieve(limit)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# Kronecker symbol (d/2) depends on d mod 8.
_KR2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n), standard completion for all integers.

    Completely multiplicative in n for fixed d; equals the Legendre symbol
    when n is an odd prime not dividing d.
    """
    if n == 0:
        return 1 if d in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        v = _KR2[d & 7]
        if v == 0:
            return 0
        result *= v
    if n == 1:
        return result
    # Jacobi symbol (d/n) for odd n > 1
    d %= n
    while d != 0:
        while d % 2 == 0:
            d //= 2
            if n & 7 in (3, 5):
                result = -result
        d, n = n, d
        if d & 3 == 3 and n & 3 == 3:
            result = -result
        d %= n
    return result if n == 1 else 0


def principal_char(N: int, n: int) -> int:
    """Principal Dirichlet character mod N: 1 iff gcd(n, N) = 1."""
    if N < 1:
        raise DomainError("principal_char requires N >= 1")
    return 1 if math.gcd(n, N) == 1 else 0


@dataclass(frozen=True)
class QuadChar:
    """Quadratic character mod an odd prime with its Gauss sum."""
    p: int
    eps_p: complex
    tau: complex


@lru_cache(maxsize=4096)
def legendre_table(p: int) -> np.ndarray:
    """Array of (a/p) for a = 0..p-1, built from the squares mod p."""
    chi = np.full(p, -1, dtype=np.int8)
    a = np.arange(p, dtype=np.int64)
    chi[(a * a) % p] = 1
    chi[0] = 0
    return chi


def gauss_data(p: int) -> QuadChar:
    """Gauss sum tau = sum_b (b/p) e(b/p) by direct summation.

    eps_p is 1 for p = 1 mod 4 and i for p = 3 mod 4; |tau| = sqrt(p).
    """
    if p == 2 or not is_prime(p):
        raise DomainError(f"gauss_data requires an odd prime, got {p}")
    chi = legendre_table(p).astype(float)
    b = np.arange(p)
    tau = complex(np.sum(chi * np.exp(2j * np.pi * b / p)))
    eps = 1.0 + 0.0j if p % 4 == 1 else 1.0j
    return QuadChar(p=p, eps_p=eps, tau=tau)


def squarefree_part(d: int, table: SieveTable | None = None) -> int:
    """Squarefree part d' of d: d' squarefree, d/d' a perfect square."""
    if d == 0:
        raise DomainError("squarefree_part undefined at 0")
    sign = -1 if d < 0 else 1
    n = abs(d)
    out = 1
    if table is not None and n <= table.limit:
        for p, e in table.factorize(n):
            if e % 2 == 1:
                out *= p
        return sign * out
    f = 2
    while f * f <= n:
        if n % f == 0:
            e = 0
            while n % f == 0:
                n //= f
                e += 1
            if e % 2 == 1:
                out *= f
        f += 1 if f == 2 else 2
    return sign * out * n  # leftover n is prime (exponent 1)


def kronecker_bottom_vec(d_arr: np.ndarray, n: int,
                         table: SieveTable | None = None) -> np.ndarray:
    """(d/n) for an int64 array of d values, fixed n >= 1.

    Uses bottom multiplicativity: product of (d/p)^e over p^e || n, with
    per-prime residue table lookups.
    """
    if n < 1:
        raise DomainError("kronecker_bottom_vec requires n >= 1")
    out = np.ones(d_arr.shape, dtype=np.int8)
    if n == 1:
        return out
    if table is not None and n <= table.limit:
        fac = table.factorize(n)
    else:
        fac = _trial_factorize(n)
    for p, e in fac:
        if p == 2:
            v = np.array(_KR2, dtype=np.int8)[d_arr & 7]
        else:
            v = legendre_table(p)[d_arr % p]
        out = out * (v if e % 2 == 1 else (v * v))
    return out


def _trial_factorize(n: int):
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            e = 0
            while n % f == 0:
                n //= f
                e += 1
            out.append((f, e))
        f += 1 if f == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def divisors_of(n: int):
    """Sorted divisor list of n >= 1 (trial factorization)."""
    divs = [1]
    for p, e in _trial_factorize(n):
        divs = [d * p ** k for d in divs for k in range(e + 1)]
    return sorted(divs)


def char_partial_sum_max(p: int, t_max: int) -> float:
    """max_{T <= t_max} |sum_{u<=T} (u/p)|, for Polya-Vinogradov checks."""
    chi = legendre_table(p)
    u = np.arange(1, t_max + 1) % p
    return float(np.max(np.abs(np.cumsum(chi[u].astype(np.int64)))))
