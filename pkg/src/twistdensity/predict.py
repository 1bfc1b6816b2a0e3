"""Closed-form predictions for the family density.

Contents:
- the piecewise error exponents eta / theta / star for the three main
  estimates, as exact rational arithmetic on half-open intervals;
- the analytic log-average expansion and the theorem main terms;
- the ratios-conjecture route: digamma, zeta log-derivative, symmetric-square
  log-derivative with a truncation-uncertainty estimate, the arithmetic
  factor in both its closed and long Euler forms, and the t-integral
  evaluated by panel quadrature with the zeta pole cancelled analytically
  against the 1/(it) term.

The t = 0 singularity never appears explicitly: on the real axis the
1/(it) term is purely imaginary, so the real part of the combined bracket
is smooth and the even integral only needs Re of the regularized pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .analytic import (digamma as _digamma, digamma_real_sum, gauss_legendre,
                       zeta_em_pair, zeta_logderiv_reg)
from .charsum import family_table, logd_sum
from .curve import ApCache, CurveSpec, local_data
from .density import L_of, integral_term, s_even_closed
from .errors import DomainError, PoleError, ScaleError
from .ntkit import SieveTable, shared_sieve
from .sumutil import fsum_array
from .testfn import TestFunction, WeightFunction

digamma = _digamma


# ---------------------------------------------------------------------------
# piecewise error exponents
# ---------------------------------------------------------------------------

def eta(sigma: float) -> float:
    """Unconditional error exponent on (0, 1/2).

    -1 + 2 sigma on [1/(4m+2), 1/(4m+1)), -(4m-1)/(4m+1) on
    [1/(4m+1), 1/(4m-2)), m = 1, 2, ...
    """
    if not 0.0 < sigma < 0.5:
        raise DomainError("eta defined on (0, 1/2)")
    # compare against float-rounded breakpoints so sigma = float(1/(4m+2))
    # lands in its own branch (half-open [lower, upper) convention)
    m = 1
    while sigma < 1.0 / (4 * m + 2):
        m += 1
    if sigma < 1.0 / (4 * m + 1):
        return -1.0 + 2.0 * sigma
    return float(-Fraction(4 * m - 1, 4 * m + 1))


def theta(sigma: float) -> float:
    """Error exponent under the twisted-curve Riemann hypothesis, on (0, 1).

    -1 + sigma on [1/(4m+2), 1/(4m)), -1 + 1/(4m) on [1/(4m), 1/(4m-2)),
    and -1 + sigma again on [1/2, 1).
    """
    if not 0.0 < sigma < 1.0:
        raise DomainError("theta defined on (0, 1)")
    if sigma >= 0.5:
        return -1.0 + sigma
    m = 1
    while sigma < 1.0 / (4 * m + 2):
        m += 1
    if sigma < 1.0 / (4 * m):
        return -1.0 + sigma
    return float(-1 + Fraction(1, 4 * m))


def star_exponent(sigma: float) -> float:
    """Squarefree-family error exponent (sigma - 1)/2 on (0, 1)."""
    if not 0.0 < sigma < 1.0:
        raise DomainError("star exponent defined on (0, 1)")
    return (sigma - 1.0) / 2.0


def exponent_breakpoints(max_m: int = 10):
    """All branch endpoints sigma = 1/(4m+2), 1/(4m+1), 1/(4m), 1/(4m-2)
    with 4m + 2 <= 4*max_m + 2, as exact fractions."""
    pts = set()
    for m in range(1, max_m + 1):
        pts.update({Fraction(1, 4 * m + 2), Fraction(1, 4 * m + 1),
                    Fraction(1, 4 * m), Fraction(1, 4 * m - 2)})
    return sorted(p for p in pts if 0 < p < 1)


def katz_sarnak_target(tf: TestFunction) -> float:
    """Limiting value phihat(0) + phi(0)/2 (orthogonal symmetry)."""
    return float(tf.phihat(0.0)) + 0.5 * float(tf.phi(0.0))


# ---------------------------------------------------------------------------
# log-average main term
# ---------------------------------------------------------------------------

def log_average_term(spec: CurveSpec, wf: WeightFunction, X: float,
                     squarefree_only: bool = False,
                     L: float | None = None,
                     table: SieveTable | None = None) -> dict:
    """First main term: weighted average of log(N d^2/(2 pi)^2) over L.

    Returns the direct family sum together with the analytic expansion of
    the log|d| average (valid for the repetition-folded weighting; the
    squarefree variant reports the direct route only).
    """
    N = spec.conductor
    if L is None:
        L = L_of(N, X)
    fam = family_table(wf, N, X, use_wtilde=not squarefree_only, table=table)
    W = fam.W
    # two-sided weighted average of log|d| (positive side doubled)
    logavg_direct = 2.0 * fsum_array(fam.weight * np.log(fam.d.astype(float))) / W
    direct = (math.log(N / (2.0 * math.pi) ** 2) + 2.0 * logavg_direct) / L
    out = {"direct": direct, "W": W, "L": L}
    d_route, analytic, gap = logd_sum(wf, N, X, table=table)
    out["logd_direct"] = d_route
    out["logd_analytic"] = analytic
    out["logd_gap"] = gap
    out["analytic"] = (math.log(N / (2.0 * math.pi) ** 2) + 2.0 * analytic) / L
    return out


def theorem_main_terms(spec: CurveSpec, tf: TestFunction, wf: WeightFunction,
                       X: float, squarefree_only: bool = False,
                       table: SieveTable | None = None,
                       cache: ApCache | None = None) -> dict:
    """Main-term prediction: log average + archimedean integral + closed
    even prime side.  The error exponent depends on the family variant."""
    L = L_of(spec.conductor, X)
    la = log_average_term(spec, wf, X, squarefree_only, L, table)
    term_log = float(tf.phihat(0.0)) * la["direct"]
    term_int = integral_term(tf, L)
    se = s_even_closed(spec, tf, X, table, cache)
    if squarefree_only:
        exponent = star_exponent(tf.sigma)
    else:
        exponent = eta(tf.sigma) if tf.sigma < 0.5 else theta(tf.sigma)
    return {"term_log": term_log, "term_integral": term_int, "s_even": se,
            "total": term_log + term_int + se, "error_exponent": exponent,
            "L": L, "X": X}


# ---------------------------------------------------------------------------
# zeta and symmetric-square log-derivatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatiosTerms:
    """Pieces of the ratios integrand at one evaluation point r = it."""
    r: complex
    digamma_sum: complex
    zeta_ld: complex
    sym2_ld: complex
    a_alpha: complex
    pole_term: complex
    X_factor: complex


def x_factor(spec: CurveSpec, d: int, s) -> complex:
    """Functional-equation factor Gamma(3/2-s)/Gamma(1/2+s) times
    (sqrt(N)|d|/2pi)^{1-2s}, so that L(s) = eps * X(s) * L(1-s)."""
    from scipy.special import loggamma
    s = complex(s)
    q = math.sqrt(spec.conductor) * abs(d)
    return complex(np.exp(loggamma(1.5 - s) - loggamma(0.5 + s))) \
        * (q / (2.0 * math.pi)) ** (1.0 - 2.0 * s)


def ratios_terms(spec: CurveSpec, t: float, d: int = 1, P: int = 20_000,
                 table: SieveTable | None = None,
                 cache: ApCache | None = None) -> RatiosTerms:
    """Evaluate every integrand piece at r = it (diagnostic object)."""
    r = 1j * t
    dig = digamma(1.0 + r) + digamma(1.0 - r)
    if abs(t) < 1e-12:
        zl = complex("nan")
        pole = complex("inf")
    else:
        zl = zeta_logderiv(1.0 + 2.0 * r)
        pole = -1.0 / r
    sym = sym2_logderiv(spec, 1.0 + 2.0 * r, P, table, cache)
    aa = a_alpha(spec, r, P, table, cache)
    return RatiosTerms(r=r, digamma_sum=dig, zeta_ld=zl, sym2_ld=sym.value,
                       a_alpha=aa.value, pole_term=pole,
                       X_factor=x_factor(spec, d, 0.5 + r))


def zeta_logderiv(s) -> complex:
    """zeta'/zeta(s) for Re(s) >= 1 away from the pole (|s-1| >= 1e-3)."""
    s = complex(s)
    if abs(s - 1.0) < 1e-3:
        raise PoleError("zeta_logderiv within 1e-3 of the pole at s = 1")
    z, zp = zeta_em_pair(s)
    return zp / z


def zeta_logderiv_euler_truncated(s, P: int,
                                  table: SieveTable | None = None) -> complex:
    """zeta'/zeta(s) as the Euler sum -sum_{p<=P} log p/(p^s - 1).

    Used when an identity must be compared at a common prime cutoff with
    other truncated Euler objects; slowly convergent on its own.
    """
    s = complex(s)
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    total = 0.0 + 0.0j
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        total -= math.log(p) / (p ** s - 1.0)
    return total


@dataclass(frozen=True)
class ValueWithUncertainty:
    value: complex
    uncertainty: float


def _sym2_truncated(spec: CurveSpec, s: complex, P: int, table: SieveTable,
                    cache: ApCache | None):
    """Truncated Euler sum for L'/L(s, Sym^2): minus sum over p <= P, l >= 1
    of (a^2l + b^2l + 1) log p / p^{l s} at good p, and a^2l only at bad p."""
    terms = []
    res = s.real
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        logp = math.log(p)
        # power-sum storage caps at m = 64, so l <= 32; the dropped terms
        # are below 2e-10 even at p = 2
        ell_max = min(32, max(1, int(40.0 / (res * logp)) + 1))
        good = spec.conductor % p != 0
        ld = local_data(spec, p, k_max=1, m_max=min(64, 2 * ell_max), cache=cache)
        for ell in range(1, ell_max + 1):
            pw = p ** (-ell * s)
            if abs(pw) * logp * 3.0 < 1e-17:
                break
            s2l = float(ld.power_sum[2 * ell - 1])
            coeff = (s2l + 1.0) if good else s2l
            terms.append(-coeff * logp * pw)
    return sum(terms)


def sym2_logderiv(spec: CurveSpec, s, P: int = 100_000,
                  table: SieveTable | None = None,
                  cache: ApCache | None = None) -> ValueWithUncertainty:
    """L'/L(s, Sym^2 E) by the truncated Euler sum, Re(s) >= 1, P <= 1e7.

    On the line Re(s) = 1 the l = 1 part converges only conditionally; the
    returned uncertainty combines a delta-shift Richardson comparison
    (evaluations at Re(s) + 0.05 and + 0.025) with the analytic bound
    3 sum_{p > P} log p / p^2 for the truncated absolutely convergent part.
    """
    s = complex(s)
    if s.real < 1.0 - 1e-12:
        raise DomainError("sym2_logderiv needs Re(s) >= 1")
    if P > 10_000_000:
        raise DomainError("prime cutoff capped at 1e7")
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    value = _sym2_truncated(spec, s, P, table, cache)
    if s.real > 1.04:
        # |coeff| <= 3 and theta(x) <= 1.02 x:
        # sum_{p>P} 3 log p p^{-Re s} <= 3.1 P^{1-Re s}/(Re s - 1)
        tail_abs = 3.1 * P ** (1.0 - s.real) / (s.real - 1.0)
        return ValueWithUncertainty(value, tail_abs)
    # on the line only the l >= 2 part is absolutely convergent:
    # its p > P tail is below 3.1/P; the conditionally convergent l = 1
    # part is estimated by the delta-shift comparison
    tail_abs = 3.1 / P
    v1 = _sym2_truncated(spec, s + 0.05, P, table, cache)
    v2 = _sym2_truncated(spec, s + 0.025, P, table, cache)
    extrap = 2.0 * v2 - v1
    unc = abs(value - extrap) + abs(v2 - v1) + tail_abs
    return ValueWithUncertainty(value, unc)


# ---------------------------------------------------------------------------
# the arithmetic factor of the ratios prediction
# ---------------------------------------------------------------------------

def a_alpha(spec: CurveSpec, r, P: int = 100_000,
            table: SieveTable | None = None,
            cache: ApCache | None = None) -> ValueWithUncertainty:
    """Closed form of the arithmetic-factor derivative at alpha = gamma = r:

    - sum_{p | N} log p / (p^{1+2r} - 1)
    + sum_{p coprime N} log p/(p+1) sum_l (a^2l + b^2l) / p^{l(1+2r)}.

    Absolutely convergent for Re(r) >= 0; the reported uncertainty is the
    analytic tail bound 2.04 * P^{-(1+2 Re r)} * (1 + 2 Re r)^{-1}.
    """
    r = complex(r)
    if r.real < -1e-12:
        raise DomainError("a_alpha needs Re(r) >= 0")
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    s = 1.0 + 2.0 * r
    total = 0.0 + 0.0j
    for p, _kind in sorted(spec.bad_reduction.items()):
        total -= math.log(p) / (p ** s - 1.0)
    terms = []
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        if spec.conductor % p == 0:
            continue
        logp = math.log(p)
        ell_max = min(32, max(1, int(40.0 / (s.real * logp)) + 1))
        ld = local_data(spec, p, k_max=1, m_max=min(64, 2 * ell_max), cache=cache)
        inner = 0.0 + 0.0j
        for ell in range(1, ell_max + 1):
            pw = p ** (-ell * s)
            if abs(pw) * 2.0 < 1e-18:
                break
            inner += float(ld.power_sum[2 * ell - 1]) * pw
        terms.append(logp / (p + 1.0) * inner)
    total += sum(terms)
    # theta(x) <= 1.02 x gives sum_{p>P} log p p^{-1-s} <= 1.02 P^{-s}/s * (1+o(1))
    re_s = 1.0 + 2.0 * r.real
    tail = 2.04 * P ** (-re_s) / re_s * 2.0
    return ValueWithUncertainty(total, tail)


def a_alpha_long_form(spec: CurveSpec, r, P: int = 10_000,
                      table: SieveTable | None = None,
                      cache: ApCache | None = None) -> complex:
    """Independent long Euler form of the same derivative, per prime:

    bad p:  log p [ q/(1-q) - u/(1-u) - sum_e lam(p^2e) p^{-e(1+2r)} ],
            q = lam(p)^2 p^{-(1+2r)}, u = p^{-(1+2r)}
    good p: log p [ rational term - u/(1-u)
                    - (p/(p+1)) sum_e (lam(p^{2e+2}) - lam(p^2e)) p^{-(e+1)(1+2r)} ]
    """
    r = complex(r)
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    s = 1.0 + 2.0 * r
    total = 0.0 + 0.0j
    e_cut = 80
    for p, _kind in sorted(spec.bad_reduction.items()):
        logp = math.log(p)
        ld = local_data(spec, p, k_max=64, m_max=1, cache=cache)
        u = p ** (-s)
        q = float(ld.lambda_pk[1]) ** 2 * u
        tail_sum = 0.0 + 0.0j
        for e in range(1, e_cut):
            term = float(ld.lambda_pk[2 * e]) * p ** (-e * s)
            tail_sum += term
            if abs(term) < 1e-18:
                break
        total += logp * (q / (1.0 - q) - u / (1.0 - u) - tail_sum)
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        if spec.conductor % p == 0:
            continue
        logp = math.log(p)
        kmax = min(64, 2 * e_cut + 2)
        ld = local_data(spec, p, k_max=kmax, m_max=1, cache=cache)
        lam2 = float(ld.lambda_pk[2])
        u = p ** (-s)
        num = lam2 * u - 2.0 * lam2 * u ** 2 + 3.0 * u ** 3
        den = 1.0 - lam2 * u + lam2 * u ** 2 - u ** 3
        diff_sum = 0.0 + 0.0j
        for e in range(0, e_cut):
            if 2 * e + 2 >= ld.lambda_pk.size:
                break
            scale = p ** (-(e + 1) * s)
            diff_sum += ((float(ld.lambda_pk[2 * e + 2]) - float(ld.lambda_pk[2 * e]))
                         * scale)
            # envelope break: |lam(p^2e+2) - lam(p^2e)| <= 4e + 4, and
            # individual terms may vanish exactly mid-series
            if (4.0 * e + 4.0) * abs(scale) < 1e-18:
                break
        total += logp * (num / den - u / (1.0 - u)
                         - (p / (p + 1.0)) * diff_sum)
    return total


# ---------------------------------------------------------------------------
# full ratios objects Y_E, A_E and the averaged log-derivative
# ---------------------------------------------------------------------------

def _euler_block(spec: CurveSpec, p: int, alpha: complex, gamma: complex,
                 cache: ApCache | None, e_cut: int = 60):
    """The local factor of V at p (separate forms for good and bad p)."""
    ld = local_data(spec, p, k_max=min(64, 2 * e_cut + 2), m_max=1, cache=cache)
    pa = p ** (-(1.0 + 2.0 * alpha))
    sum_even = 0.0 + 0.0j      # sum_{e>=1} lam(p^2e) p^{-e(1+2a)}
    sum_even0 = 1.0 + 0.0j     # sum_{e>=0} lam(p^2e) p^{-e(1+2a)}
    sum_odd = 0.0 + 0.0j       # sum_{e>=0} lam(p^{2e+1}) p^{-e(1+2a)}
    pe = 1.0 + 0.0j
    for e in range(0, e_cut):
        if 2 * e + 1 < ld.lambda_pk.size:
            sum_odd += float(ld.lambda_pk[2 * e + 1]) * pe
        if e >= 1:
            if 2 * e >= ld.lambda_pk.size:
                break
            term = float(ld.lambda_pk[2 * e]) * pe
            sum_even += term
            sum_even0 += term
            # envelope break (terms can vanish exactly mid-series)
            if (2.0 * e + 1.0) * abs(pe) < 1e-19:
                break
        pe = pe * pa
    cross = p ** (-(1.0 + alpha + gamma))
    if spec.conductor % p == 0:
        return sum_even0 - float(ld.lambda_pk[1]) * cross * sum_odd
    pg = p ** (-(1.0 + 2.0 * gamma))
    inner = sum_even - float(ld.lambda_pk[1]) * cross * sum_odd + pg * sum_even0
    return 1.0 + (p / (p + 1.0)) * inner


def v_product(spec: CurveSpec, alpha: complex, gamma: complex,
              P: int = 100_000, table: SieveTable | None = None,
              cache: ApCache | None = None) -> complex:
    """Truncated Euler product V(alpha,gamma) over all p <= P (the full
    arithmetic product whose poles/zeros are carried by zeta and Sym^2)."""
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    out = 1.0 + 0.0j
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        out *= _euler_block(spec, p, alpha, gamma, cache)
    return out


def sym2_value(spec: CurveSpec, s: complex, P: int = 100_000,
               table: SieveTable | None = None,
               cache: ApCache | None = None) -> complex:
    """L(s, Sym^2 E) as a truncated Euler product (absolutely convergent
    for Re(s) > 1)."""
    if table is None or table.limit < P:
        table = shared_sieve(max(P, 100))
    out = 1.0 + 0.0j
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        ld = local_data(spec, p, k_max=2, m_max=1, cache=cache)
        u = p ** (-s)
        if spec.conductor % p == 0:
            out /= 1.0 - float(ld.lambda_pk[1]) ** 2 * u
        else:
            lam2 = float(ld.lambda_pk[2])
            out /= 1.0 - lam2 * u + lam2 * u * u - u ** 3
    return out


def y_factor(spec: CurveSpec, alpha: complex, gamma: complex,
             P: int = 100_000, table: SieveTable | None = None,
             cache: ApCache | None = None) -> complex:
    """zeta(1+2g) L(1+2a, Sym^2) / (zeta(1+a+g) L(1+a+g, Sym^2))."""
    from .analytic import zeta_em
    num = (complex(zeta_em(1.0 + 2.0 * gamma))
           * sym2_value(spec, 1.0 + 2.0 * alpha, P, table, cache))
    den = (complex(zeta_em(1.0 + alpha + gamma))
           * sym2_value(spec, 1.0 + alpha + gamma, P, table, cache))
    return num / den


def a_factor(spec: CurveSpec, alpha: complex, gamma: complex,
             P: int = 100_000, table: SieveTable | None = None,
             cache: ApCache | None = None) -> complex:
    """A(alpha,gamma) = V(alpha,gamma) / Y(alpha,gamma); equals 1 on the
    diagonal alpha = gamma."""
    return (v_product(spec, alpha, gamma, P, table, cache)
            / y_factor(spec, alpha, gamma, P, table, cache))


def ratios_avg_logderiv(spec: CurveSpec, wf: WeightFunction, X: float,
                        r, P: int = 100_000,
                        table: SieveTable | None = None,
                        cache: ApCache | None = None,
                        brute_force: bool = False) -> dict:
    """Conjectural family average of L'/L(1/2 + r, twist):

    -zeta'/zeta(1+2r) + L'/L(1+2r, Sym^2) + A_alpha(r, r).

    With brute_force=True (X <= 200 only) the left side is also computed by
    direct averaging of L'/L values from the zeros module.
    """
    r = complex(r)
    if not (r.real > 0 and r.real < 0.25):
        raise DomainError("need 0 < Re(r) < 1/4")
    sym = sym2_logderiv(spec, 1.0 + 2.0 * r, P, table, cache)
    aa = a_alpha(spec, r, P, table, cache)
    rhs = -zeta_logderiv(1.0 + 2.0 * r) + sym.value + aa.value
    out = {"rhs": rhs, "uncertainty": sym.uncertainty + aa.uncertainty}
    if brute_force:
        # experimental: averages the d = 1 mod 4 subfamily, the twists the
        # per-twist oracle can evaluate exactly
        if X > 200:
            raise ScaleError("brute-force average limited to X <= 200")
        from .zeros import l_logderiv
        fam = family_table(wf, spec.conductor, X, use_wtilde=True, table=table)
        num_parts, den_parts = [], []
        for d, w in zip(fam.d, fam.weight):
            for dd in (int(d), -int(d)):
                if dd % 4 != 1:
                    continue
                num_parts.append(w * l_logderiv(spec, dd, 0.5 + r, table,
                                                cache))
                den_parts.append(w)
        out["lhs"] = sum(num_parts) / math.fsum(den_parts)
        out["lhs_subfamily"] = "d = 1 mod 4"
    return out


# ---------------------------------------------------------------------------
# the ratios-conjecture density via panel quadrature
# ---------------------------------------------------------------------------

def _sym2_plus_a_coeffs(spec: CurveSpec, P: int, table: SieveTable,
                        cache: ApCache | None):
    """Coefficient list for Re[Sym2' / Sym2 + A](it): pairs (2 l log p, c)
    with c real, so the combined value at t is sum c * cos(2 l t log p).

    good p: c = -log p p^{-l} (1 + s_2l * p/(p+1));
    bad p:  c = -log p p^{-l} (1 + s_2l)   [s_2l = alpha^{2l}]
    """
    freqs, coeffs = [], []
    for p in table.primes():
        p = int(p)
        if p > P:
            break
        logp = math.log(p)
        good = spec.conductor % p != 0
        ell_max = min(32, max(1, int(40.0 / logp) + 1))
        ld = local_data(spec, p, k_max=1, m_max=min(64, 2 * ell_max), cache=cache)
        for ell in range(1, ell_max + 1):
            base = logp * p ** (-float(ell))
            if base < 1e-17:
                break
            s2l = float(ld.power_sum[2 * ell - 1])
            c = -base * (1.0 + s2l * p / (p + 1.0)) if good else -base * (1.0 + s2l)
            freqs.append(2.0 * ell * logp)
            coeffs.append(c)
    return np.asarray(freqs), np.asarray(coeffs)


def _bracket_re(spec: CurveSpec, t: np.ndarray, freqs, coeffs) -> np.ndarray:
    """Re of the full integrand bracket at real t:

    2 Re psi(1+it) + 2 Re[-zeta'/zeta(1+2it) - 1/(2it)]
    + 2 Re[Sym2'/Sym2(1+2it) + A(it,it)]

    (the -1/(it) term is purely imaginary for t != 0, so pairing it with
    the zeta pole only matters for the smooth continuation through 0).
    """
    dig = digamma_real_sum(t)
    zr = 2.0 * np.real(zeta_logderiv_reg(1.0 + 2.0j * t))
    pr = np.zeros_like(t)
    step = max(1, int(4e6 // max(1, freqs.size)))
    for lo in range(0, t.size, step):
        hi = min(lo + step, t.size)
        pr[lo:hi] = np.cos(np.outer(t[lo:hi], freqs)) @ coeffs
    return dig + zr + 2.0 * pr


def _t_max_for(tf: TestFunction, L: float, tol: float) -> float:
    """Truncation height for the t-integral.

    smooth_bump: where phi(tL/2pi) falls below 1e-12 (pointwise rule).
    fejer: the envelope tail bound (log T + 1) * 4/(pi sigma L^2 T) <= tol,
    since the pointwise rule would demand an unreasonable range.
    """
    if tf.kind == "smooth_bump":
        u = 1.0
        while tf.phi_envelope(u) > 1e-12:
            u *= 1.25
        return 2.0 * math.pi * u / L
    T = 50.0
    while True:
        tail = 4.0 * (math.log(T) + 1.0) / (math.pi * tf.sigma * L * L * T)
        if tail <= tol or T > 5e4:
            return T
        T *= 1.3


def ratios_tail_bound(tf: TestFunction, L: float, T: float) -> float:
    if tf.kind == "fejer":
        return 4.0 * (math.log(T) + 1.0) / (math.pi * tf.sigma * L * L * T)
    u = T * L / (2.0 * math.pi)
    return 4.0 * tf.phi_envelope(u) * (1.0 + math.log(1.0 + u))


def ratios_density(spec: CurveSpec, tf: TestFunction, wf: WeightFunction,
                   X: float, P: int = 100_000,
                   table: SieveTable | None = None,
                   cache: ApCache | None = None,
                   quad_tol: float = 1e-4,
                   prime_cutoff_integrand: int = 20_000) -> dict:
    """Ratios-conjecture prediction for the family density at scale X.

    total = log-average term + (1/2pi) integral of phi(tL/2pi) times the
    bracket + phi(0)/2.  The returned uncertainty combines the quadrature
    refinement delta, the t-truncation tail bound, and the pointwise
    symmetric-square truncation uncertainty at t = 0.
    """
    N = spec.conductor
    L = L_of(N, X)
    if table is None or table.limit < max(prime_cutoff_integrand, P):
        table = shared_sieve(max(prime_cutoff_integrand, P, 100))
    la = log_average_term(spec, wf, X, False, L, table)
    term_log = float(tf.phihat(0.0)) * la["direct"]

    Pint = min(P, prime_cutoff_integrand)
    freqs, coeffs = _sym2_plus_a_coeffs(spec, Pint, table, cache)
    T = _t_max_for(tf, L, quad_tol)
    max_freq = max(float(freqs.max(initial=1.0)), tf.sigma * L / (2.0 * math.pi) * 6.3)

    def quad_pass(nodes_per_panel: int) -> float:
        width = min(2.0 * math.pi / max_freq * (nodes_per_panel / 6.0), T / 4.0)
        xg, wg = gauss_legendre(nodes_per_panel)
        edges = np.arange(0.0, T + width, width)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            t = mid + half * xg
            phi_vals = tf.phi(t * L / (2.0 * math.pi))
            br = _bracket_re(spec, t, freqs, coeffs)
            total += half * float(np.dot(wg, phi_vals * br))
        return total / math.pi     # (1/2pi) * 2 (even integrand)

    coarse = quad_pass(12)
    fine = quad_pass(18)
    tail = ratios_tail_bound(tf, L, T)
    sym_unc = sym2_logderiv(spec, 1.0, P, table, cache).uncertainty
    integral = fine + 0.5 * float(tf.phi(0.0))
    unc = abs(fine - coarse) + tail + 0.5 * sym_unc / L
    return {"total": term_log + integral, "term_log": term_log,
            "ratios_integral": integral, "uncertainty": unc,
            "t_max": T, "tail_bound": tail, "P": P,
            "P_integrand": Pint, "L": L, "X": X,
            "regularization": "zeta pole paired with 1/(it); even real-part "
                              "quadrature on [0, T]"}
