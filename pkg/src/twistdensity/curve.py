"""Elliptic-curve local data for a short Weierstrass model y^2 = x^3 + ax + b.

Frobenius traces a_p come from Legendre-symbol point counts at good primes,
from the declared reduction type at bad primes, and from explicit config
overrides at p in {2, 3} when the short model is not minimal there.
Normalized Hecke eigenvalues and Satake power sums follow by the standard
recurrences from the local Euler factor.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, SingularCurveError
from .ntkit import SieveTable, kronecker, legendre_table, is_prime

REDUCTION_TYPES = ("split", "nonsplit", "additive")
_BAD_AP = {"split": 1, "nonsplit": -1, "additive": 0}

CACHE_MAGIC = 0x5457495354444E53  # "TWISTDNS"
CACHE_VERSION = 1
CACHE_ENV = "TWISTDENSITY_CACHE"


@dataclass(frozen=True)
class CurveSpec:
    """Validated curve data; immutable after validate_curve."""
    a: int
    b: int
    delta: int
    conductor: int
    root_number: int
    bad_reduction: dict            # prime -> reduction type string
    ap_overrides: dict = field(default_factory=dict)  # {2: a_2, 3: a_3} when needed

    @property
    def label(self) -> str:
        return f"E({self.a},{self.b})/N{self.conductor}"

    def bad_ap(self, p: int) -> int:
        return _BAD_AP[self.bad_reduction[p]]


def discriminant(a: int, b: int) -> int:
    return -16 * (4 * a ** 3 + 27 * b ** 2)


def validate_curve(a: int, b: int, conductor: int, root_number: int,
                   bad_reduction: dict, ap_overrides: dict | None = None) -> CurveSpec:
    """Check all CurveSpec invariants and return the frozen spec.

    Enforces: delta != 0, N >= 11, p | N <=> p | delta for every p > 3,
    a reduction type for every p | N, and a_2/a_3 overrides whenever the
    short model is singular mod 2 or 3 at a good prime.
    """
    delta = discriminant(a, b)
    if delta == 0:
        raise SingularCurveError(f"curve ({a},{b}) is singular (delta = 0)")
    if conductor < 11:
        raise ConfigError(f"conductor {conductor} < 11 is impossible over Q")
    if root_number not in (1, -1):
        raise ConfigError("root_number must be +1 or -1")
    bad = dict(bad_reduction)
    for p, kind in bad.items():
        if not is_prime(p):
            raise ConfigError(f"bad_reduction key {p} is not prime")
        if kind not in REDUCTION_TYPES:
            raise ConfigError(f"unknown reduction type {kind!r} at p={p}")
    n = conductor
    bad_primes = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            bad_primes.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        bad_primes.append(n)
    for p in bad_primes:
        if p not in bad:
            raise ConfigError(f"missing bad_reduction entry for p={p} | conductor")
        if p > 3 and delta % p != 0:
            raise ConfigError(
                f"p={p} divides the conductor but not the discriminant")
    # converse direction at p > 3: strip 2, 3 and declared bad primes from delta
    rem = abs(delta)
    for p in (2, 3, *bad_primes):
        while rem % p == 0:
            rem //= p
    if rem != 1:
        raise ConfigError(
            "discriminant has a prime factor > 3 not dividing the conductor "
            f"(leftover {rem}); supply the minimal short model")
    overrides = dict(ap_overrides or {})
    for p in (2, 3):
        if conductor % p != 0 and delta % p == 0 and p not in overrides:
            raise ConfigError(
                f"short model is singular mod {p} but p={p} is a good prime; "
                f"supply a{p} explicitly (model not minimal at {p})")
        if p in overrides and abs(overrides[p]) > 2 * math.isqrt(p) + 1:
            raise ConfigError(f"a{p} override violates the Hasse bound")
    return CurveSpec(a=a, b=b, delta=delta, conductor=conductor,
                     root_number=root_number, bad_reduction=bad,
                     ap_overrides=overrides)


def count_points_good(spec: CurveSpec, p: int) -> int:
    """a_p = p + 1 - #E(F_p) by the Legendre-symbol sum, for good p > 3."""
    if spec.conductor % p == 0:
        raise DomainError(f"p={p} divides the conductor")
    if p <= 3 or p > 10 ** 6:
        raise DomainError("point counting supported for good primes 3 < p <= 1e6")
    chi = legendre_table(p).astype(np.int64)
    x = np.arange(p, dtype=np.int64)
    f = (x * x % p * x + (spec.a % p) * x + spec.b) % p
    return -int(chi[f].sum())


def classify_bad_reduction(spec: CurveSpec, p: int) -> str:
    """Reduction type at a bad prime p > 3 from the reduced cubic.

    Additive iff the cubic has a triple root mod p; otherwise the node's
    tangent slopes +-m satisfy m^2 = 3r (r the double root), and the twist
    is split iff 3r is a square mod p.
    """
    if spec.conductor % p != 0 or p <= 3:
        raise DomainError("classification needs a bad prime p > 3")
    a, b = spec.a % p, spec.b % p
    if a == 0 and b == 0:
        return "additive"
    # double root of x^3+ax+b mod p: r = -3b * (2a)^{-1}
    r = (-3 * b) * pow(2 * a, -1, p) % p
    m2 = 3 * r % p
    chi = legendre_table(p)
    return "split" if chi[m2] == 1 else "nonsplit"


def ap(spec: CurveSpec, p: int, cache: "ApCache | None" = None) -> int:
    """Frobenius trace at any prime: config at bad p and small overrides,
    point count otherwise."""
    if spec.conductor % p == 0:
        return spec.bad_ap(p)
    if p in spec.ap_overrides:
        return spec.ap_overrides[p]
    if p <= 3:
        # good reduction and nonsingular short model mod p: count directly
        chi = legendre_table(p).astype(np.int64)
        x = np.arange(p, dtype=np.int64)
        f = (x ** 3 + (spec.a % p) * x + spec.b) % p
        return -int(chi[f].sum())
    if cache is not None:
        return cache.get(p)
    return count_points_good(spec, p)


@dataclass(frozen=True)
class LocalData:
    """Per-prime Frobenius data.

    lambda_pk[k] = lambda(p^k) for k = 0..k_max, power_sum[m-1] =
    alpha^m + beta^m for m = 1..m_max.
    """
    p: int
    a_p: int
    good: bool
    lambda_pk: np.ndarray
    power_sum: np.ndarray


def local_data(spec: CurveSpec, p: int, k_max: int = 32, m_max: int = 32,
               cache: "ApCache | None" = None) -> LocalData:
    if not (1 <= k_max <= 64 and 1 <= m_max <= 64):
        raise DomainError("k_max, m_max must lie in [1, 64]")
    a_p = ap(spec, p, cache)
    good = spec.conductor % p != 0
    sq = math.sqrt(p)
    lam = np.zeros(k_max + 1)
    s = np.zeros(m_max)
    lam[0] = 1.0
    lp = a_p / sq
    if good:
        if k_max >= 1:
            lam[1] = lp
        for k in range(1, k_max):
            lam[k + 1] = lp * lam[k] - lam[k - 1]
        prev2, prev1 = 2.0, lp            # s_0 = 2, s_1 = lambda(p)
        for m in range(1, m_max + 1):
            if m == 1:
                s[0] = lp
            else:
                cur = lp * prev1 - prev2
                s[m - 1] = cur
                prev2, prev1 = prev1, cur
    else:
        for k in range(1, k_max + 1):
            lam[k] = lp ** k
        for m in range(1, m_max + 1):
            s[m - 1] = lp ** m            # beta = 0 at bad p
    return LocalData(p=p, a_p=a_p, good=good, lambda_pk=lam, power_sum=s)


def lambda_n(spec: CurveSpec, n: int, table: SieveTable,
             cache: "ApCache | None" = None) -> float:
    """lambda(n): multiplicative extension of the prime-power values."""
    if n < 1:
        raise DomainError("lambda_n requires n >= 1")
    out = 1.0
    for p, e in table.factorize(n):
        out *= local_data(spec, p, k_max=max(e, 1), m_max=1, cache=cache).lambda_pk[e]
    return out


def lambda_coefficients(spec: CurveSpec, M: int, table: SieveTable,
                        cache: "ApCache | None" = None) -> np.ndarray:
    """Array lam[n] = lambda(n) for n = 0..M (lam[0] unused)."""
    lam = np.ones(M + 1)
    lam[0] = 0.0
    spf = table.smallest_prime_factor
    ld = {}
    for n in range(2, M + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if p not in ld:
            kmax = max(1, int(math.log(M) / math.log(p)) + 1)
            ld[p] = local_data(spec, p, k_max=min(64, kmax), m_max=1, cache=cache)
        lam[n] = lam[m] * ld[p].lambda_pk[e]
    return lam


def chi_d_coefficients(d: int, M: int, table: SieveTable) -> np.ndarray:
    """chi[n] = kronecker(d, n) for n = 0..M via complete multiplicativity."""
    chi = np.zeros(M + 1, dtype=np.int8)
    if M >= 1:
        chi[1] = 1
    spf = table.smallest_prime_factor
    prime_val = {}
    for n in range(2, M + 1):
        p = int(spf[n])
        if p not in prime_val:
            prime_val[p] = kronecker(d, p)
        chi[n] = prime_val[p] * chi[n // p]
    return chi


def twist_root_number(spec: CurveSpec, d: int,
                      table: SieveTable | None = None) -> int:
    """Root number of the quadratic twist by squarefree d coprime to N."""
    if d == 0 or math.gcd(d, spec.conductor) != 1:
        raise DomainError(f"twist d={d} must be nonzero and coprime to N")
    if table is not None and abs(d) <= table.limit:
        if not bool(table.squarefree[abs(d)]):
            raise DomainError(f"twist d={d} is not squarefree")
    else:
        from .ntkit import squarefree_part
        if squarefree_part(d) != d:
            raise DomainError(f"twist d={d} is not squarefree")
    sign = 1 if d > 0 else -1
    return spec.root_number * sign * kronecker(d, spec.conductor)


# ---------------------------------------------------------------------------
# a_p cache (in memory, with optional binary file persistence)
# ---------------------------------------------------------------------------

class ApCache:
    """Point-count cache for one curve.

    Binary layout: little-endian int64 header {magic, version, N, p_max},
    then (p, a_p) int64 pairs sorted by p.
    """

    def __init__(self, spec: CurveSpec):
        self.spec = spec
        self._data: dict[int, int] = {}

    def get(self, p: int) -> int:
        v = self._data.get(p)
        if v is None:
            v = count_points_good(self.spec, p)
            self._data[p] = v
        return v

    def warm(self, primes) -> None:
        for p in primes:
            if self.spec.conductor % int(p) != 0 and int(p) > 3:
                self.get(int(p))

    @property
    def p_max(self) -> int:
        return max(self._data) if self._data else 0

    def cache_path(self, directory: str) -> str:
        name = f"ap_a{self.spec.a}_b{self.spec.b}.bin"
        return os.path.join(directory, name)

    def save(self, directory: str | None = None) -> str | None:
        directory = directory or os.environ.get(CACHE_ENV)
        if not directory:
            return None
        os.makedirs(directory, exist_ok=True)
        path = self.cache_path(directory)
        items = sorted(self._data.items())
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4q", CACHE_MAGIC, CACHE_VERSION,
                                 self.spec.conductor, self.p_max))
            for p, a in items:
                fh.write(struct.pack("<2q", p, a))
        return path

    def load(self, directory: str | None = None) -> bool:
        directory = directory or os.environ.get(CACHE_ENV)
        if not directory:
            return False
        path = self.cache_path(directory)
        if not os.path.exists(path):
            return False
        with open(path, "rb") as fh:
            head = fh.read(32)
            if len(head) < 32:
                raise ConfigError(f"truncated cache file {path}")
            magic, version, ncond, _pmax = struct.unpack("<4q", head)
            if magic != CACHE_MAGIC or version != CACHE_VERSION:
                raise ConfigError(f"bad cache header in {path}")
            if ncond != self.spec.conductor:
                raise ConfigError(f"cache {path} belongs to another conductor")
            body = fh.read()
        if len(body) % 16:
            raise ConfigError(f"corrupt cache body in {path}")
        for off in range(0, len(body), 16):
            p, a = struct.unpack_from("<2q", body, off)
            self._data[int(p)] = int(a)
        return True
