"""Weighted character sums over the twist family, against their main terms.

The brute-force sums here are ground truth; the closed main terms from the
Mellin analysis are the predictions under test.  Error-term constants are
unknown, so callers assert relative gaps and shrink-with-X trends rather
than absolute constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import EULER_GAMMA, zeta_em_pair
from .errors import DomainError, ScaleError
from .ntkit import (SieveTable, shared_sieve, kronecker, legendre_table,
                    divisors_of, is_prime)
from .sumutil import fsum_array
from .testfn import WeightFunction

FAMILY_X_MAX = 1_000_000


@dataclass(frozen=True)
class FamilyTable:
    """Positive-side weighted family: squarefree d > 0 coprime to N.

    weight[i] is wtilde(d[i]/X) or w(d[i]/X) depending on use_wtilde.
    Full two-sided sums are recovered via evenness / the (1 + (-1/n))
    sign factor, since the family is symmetric in d -> -d.
    """
    N: int
    X: float
    use_wtilde: bool
    d: np.ndarray
    weight: np.ndarray

    @property
    def W(self) -> float:
        """Normalizer: the full two-sided weighted count."""
        return 2.0 * fsum_array(self.weight)


def family_table(wf: WeightFunction, N: int, X: float,
                 use_wtilde: bool = True,
                 table: SieveTable | None = None) -> FamilyTable:
    """Tabulate the weighted squarefree twist family up to the weight's decay."""
    if X > FAMILY_X_MAX:
        raise ScaleError(f"family sums capped at X = {FAMILY_X_MAX}")
    if X < 1.0:
        raise DomainError("family scale X must be >= 1")
    d_max = int(wf.support * X) + 1
    if table is None or table.limit < d_max:
        table = shared_sieve(max(d_max, 2))
    d = np.arange(1, d_max + 1, dtype=np.int64)
    mask = table.squarefree[1:d_max + 1].copy()
    if N > 1:
        mask &= np.gcd(d, N) == 1
    d = d[mask]
    x = d.astype(float) / X
    weight = wf.wtilde_vec(x) if use_wtilde else wf.w(x)
    keep = weight > 0.0
    return FamilyTable(N=N, X=float(X), use_wtilde=use_wtilde,
                       d=d[keep], weight=np.asarray(weight)[keep])


def weighted_char_sum(wf: WeightFunction, N: int, X: float, n: int,
                      use_wtilde: bool = True,
                      table: SieveTable | None = None,
                      fam: FamilyTable | None = None) -> float:
    """sum* over squarefree d coprime to N of weight(d/X) * (d/n)."""
    if n < 1:
        raise DomainError("weighted_char_sum needs n >= 1")
    if fam is None:
        fam = family_table(wf, N, X, use_wtilde, table)
    sign = 1 + kronecker(-1, n)
    if sign == 0:
        return 0.0
    from .ntkit import kronecker_bottom_vec
    chi = kronecker_bottom_vec(fam.d, n, table)
    return sign * fsum_array(fam.weight * chi)


def char_sum_main_term(wf: WeightFunction, N: int, X: float, n: int,
                       use_wtilde: bool = True) -> float:
    """Main term of the weighted character sum.

    kappa(n) X what(0) prod_{p|n}(1+1/p)^{-1} prod_{p|N}(1-1/p)
    prod_{p|(n,N)}(1+1/p) for the wtilde weighting; the squarefree (plain w)
    variant divides by zeta(2) and uses (1+1/p)^{-1} over p | N.
    """
    if kappa(n) == 0:
        return 0.0
    val = X * float(wf.what(0.0))
    for p in _prime_divisors(n):
        val /= 1.0 + 1.0 / p
    if use_wtilde:
        for p in _prime_divisors(N):
            val *= 1.0 - 1.0 / p
    else:
        val *= 6.0 / math.pi ** 2
        for p in _prime_divisors(N):
            val /= 1.0 + 1.0 / p
    for p in _prime_divisors(math.gcd(n, N)):
        val *= 1.0 + 1.0 / p
    return val


def kappa(n: int) -> int:
    """Perfect-square indicator."""
    if n < 1:
        raise DomainError("kappa needs n >= 1")
    r = math.isqrt(n)
    return 1 if r * r == n else 0


def _prime_divisors(n: int):
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def logd_sum(wf: WeightFunction, N: int, X: float,
             table: SieveTable | None = None,
             include_sqrt_correction: bool = True):
    """Weighted average of log|d| over the family: direct vs analytic.

    Returns (direct, analytic, gap).  The analytic expansion is
    log X + 2/what(0) int w log + sum_{p|N} 2 log p/(p^2-1) + 2 zeta'(2)/zeta(2)
    minus the zeta(1/2) X^{-1/2} correction.
    """
    fam = family_table(wf, N, X, use_wtilde=True, table=table)
    W = fam.W
    direct = 2.0 * fsum_array(fam.weight * np.log(fam.d.astype(float))) / W
    analytic = math.log(X) + 2.0 * _w_log_moment(wf) / float(wf.what(0.0))
    for p in _prime_divisors(N):
        analytic += 2.0 * math.log(p) / (p * p - 1.0)
    z2, zp2 = zeta_em_pair(2.0)
    analytic += 2.0 * (zp2 / z2).real
    if include_sqrt_correction:
        corr = 1.0
        for p in _prime_divisors(N):
            corr *= (1.0 - p ** -0.5) / (1.0 - 1.0 / p)
        zhalf = complex(_zeta_half()).real
        analytic -= (corr * (wf.mellin_w(0.5) / wf.mellin_w(1.0)).real
                     * zhalf / math.sqrt(X))
    return direct, analytic, direct - analytic


def _zeta_half() -> float:
    from .analytic import zeta_em
    return complex(zeta_em(0.5)).real


def _w_log_moment(wf: WeightFunction) -> float:
    """int_0^inf w(x) log x dx; closed form -(gamma + log 4pi)/4 for the gaussian."""
    if wf.kind == "gaussian":
        return -(EULER_GAMMA + math.log(4.0 * math.pi)) / 4.0
    from scipy.integrate import quad
    return quad(lambda x: wf.w(x) * math.log(x), 0.0, wf.support,
                epsabs=1e-14, epsrel=1e-10, points=[1e-12])[0]


def p_divides_d_sum(wf: WeightFunction, N: int, X: float, p: int,
                    table: SieveTable | None = None,
                    fam: FamilyTable | None = None):
    """(ratio, target) for the share of the family with p | d.

    target is 1/(p+1) when p is coprime to N and exactly 0 otherwise.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if fam is None:
        fam = family_table(wf, N, X, use_wtilde=True, table=table)
    if N % p == 0:
        return 0.0, 0.0
    mask = fam.d % p == 0
    ratio = 2.0 * fsum_array(fam.weight[mask]) / fam.W
    return ratio, 1.0 / (p + 1.0)


# ---------------------------------------------------------------------------
# Poisson summation and Gauss-sum expansion checks
# ---------------------------------------------------------------------------

def poisson_check(wf: WeightFunction, p: int, ell: int, b: int, Y: float):
    """Both sides of sum_r w(r ell/Y) e(r ell b/p) = (Y/ell) sum_s what(Y(s/ell - b/p)).

    Returns (lhs, rhs, gap) as complex lhs/rhs with |gap|.
    """
    if not is_prime(p) or p == 2:
        raise DomainError("poisson_check needs an odd prime p")
    if ell < 1 or not (0 <= b < p) or Y <= 0:
        raise DomainError("poisson_check parameter out of range")
    r_max = int(wf.support * Y / ell) + 2
    r = np.arange(-r_max, r_max + 1, dtype=np.int64)
    lhs = complex(np.sum(wf.w(r * ell / Y)
                         * np.exp(2j * np.pi * ((r * ell * b) % p) / p)))
    # what argument spacing is Y/ell; only a narrow s-window survives
    s_lo = int(math.floor(ell * b / p - ell * wf.support / Y)) - 2
    s_hi = int(math.ceil(ell * b / p + ell * wf.support / Y)) + 2
    s = np.arange(s_lo, s_hi + 1, dtype=float)
    rhs = (Y / ell) * complex(np.sum(wf.what(Y * (s / ell - b / p))))
    return lhs, rhs, abs(lhs - rhs)


def gauss_expansion_check(wf: WeightFunction, N: int, p: int, Y: float) -> float:
    """Gap between the direct weighted character sum over (d,N)=1 and its
    Gauss-sum expansion sum_{ell|N} mu(ell) (eps_p conj / sqrt p)
    sum_b (b/p) sum_r w(r ell/Y) e(r ell b/p)."""
    if not is_prime(p) or p == 2 or N % p == 0:
        raise DomainError("need an odd prime p not dividing N")
    d_max = int(wf.support * Y) + 1
    d = np.arange(1, d_max + 1, dtype=np.int64)
    if N > 1:
        d = d[np.gcd(d, N) == 1]
    chi = legendre_table(p)[d % p].astype(float)
    direct = (1 + kronecker(-1, p)) * float(np.sum(wf.w(d / Y) * chi))

    from .ntkit import gauss_data
    eps_bar = np.conj(gauss_data(p).eps_p)
    total = 0.0 + 0.0j
    sieve = shared_sieve(max(4, N))
    for ell in divisors_of(N):
        mu = int(sieve.moebius[ell])
        if mu == 0:
            continue
        bvals = np.arange(p)
        chib = legendre_table(p).astype(float)
        r_max = int(wf.support * Y / ell) + 2
        r = np.arange(-r_max, r_max + 1, dtype=np.int64)
        wr = wf.w(r * ell / Y)
        # sum over b of (b/p) sum_r w(r ell/Y) e(r ell b / p)
        phase = np.exp(2j * np.pi * np.outer((r * ell) % p, bvals) / p)
        inner = np.sum(chib * (wr @ phase))
        total += mu * (eps_bar / math.sqrt(p)) * inner
    return abs(direct - complex(total))
