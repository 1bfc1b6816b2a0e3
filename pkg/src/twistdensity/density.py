"""Explicit-formula evaluation of the weighted one-level density.

dx_single evaluates the density term for a single twist; family_density
averages over the weighted family, splitting the prime side into the even
and odd Satake-power pieces (s_even / s_odd).  All long sums use exact
blockwise summation so multi-worker runs reproduce single-worker totals.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import exp1

from .charsum import FamilyTable, family_table
from .curve import ApCache, CurveSpec, local_data
from .errors import DegenerateFamilyError, DomainError, NumericError, ScaleError
from .ntkit import SieveTable, kronecker, legendre_table, shared_sieve
from .sumutil import fsum_array, reduce_partials
from .testfn import TestFunction, WeightFunction

TWO_PI_E_SQ = (2.0 * math.pi * math.e) ** 2
X_GUARD = 1_000_000


def L_of(N: int, X: float) -> float:
    """Normalization scale L = log(N X^2 / (2 pi e)^2)."""
    if N <= 0 or X <= 0:
        raise DomainError("L_of needs positive arguments")
    return math.log(N * X * X / TWO_PI_E_SQ)


@dataclass(frozen=True)
class FamilyParams:
    """Derived scales for one family run."""
    N: int
    X: float
    sigma: float
    L: float = field(init=False)
    c_E: float = field(init=False)
    prime_cutoff: int = field(init=False)

    def __post_init__(self):
        if self.X < 1.0 or self.N < 11:
            raise DomainError("FamilyParams needs N >= 11, X >= 1")
        if self.X > X_GUARD:
            raise ScaleError(f"X capped at {X_GUARD}")
        L = L_of(self.N, self.X)
        if L <= 0.0:
            raise DomainError("scale L must be positive")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "c_E", self.N / TWO_PI_E_SQ)
        object.__setattr__(self, "prime_cutoff",
                           int(math.floor((self.c_E * self.X * self.X) ** self.sigma)))


@dataclass
class DensityReport:
    """Term-by-term breakdown of one family density computation."""
    term_log: float
    term_integral: float
    s_even: float
    s_odd: float
    W_value: float
    metadata: dict

    @property
    def total(self) -> float:
        return self.term_log + self.term_integral + self.s_even + self.s_odd

    def as_dict(self) -> dict:
        d = {"term_log": self.term_log, "term_integral": self.term_integral,
             "s_even": self.s_even, "s_odd": self.s_odd, "total": self.total,
             "W_value": self.W_value}
        d.update(self.metadata)
        return d


# ---------------------------------------------------------------------------
# the archimedean integral term
# ---------------------------------------------------------------------------

def _integrand(phihat, phihat0: float, x: float) -> float:
    """phihat(x/L)-weighted integrand with the removable singularity at 0
    expanded in series below 1e-3."""
    if x < 1e-3:
        # e^-x/(1-e^-x) = 1/x - 1/2 + x/12 - x^3/720; e^-x/x = 1/x - 1 + x/2 - x^2/6
        f = phihat(x)
        return ((f - phihat0) / x - 0.5 * f + phihat0
                + x * (f / 12.0 - 0.5 * phihat0) + x * x * phihat0 / 6.0)
    ex = math.exp(-x)
    return phihat(x) * ex / (1.0 - ex) - phihat0 * ex / x


def integral_term(tf: TestFunction, L: float) -> float:
    """-(2/L) int_0^inf (phihat(x/L) e^-x/(1-e^-x) - phihat(0) e^-x/x) dx.

    Beyond the support of phihat the integrand reduces to the exponential
    integral, added in closed form.
    """
    if L <= 0:
        raise DomainError("integral_term needs L > 0")
    phihat0 = float(tf.phihat(0.0))
    if phihat0 == 0.0 and tf.phihat(tf.sigma / 2.0) == 0.0:
        return 0.0
    upper = tf.sigma * L
    val, err = quad(lambda x: _integrand(lambda u: float(tf.phihat(u / L)),
                                         phihat0, x),
                    0.0, upper, epsabs=1e-14, epsrel=1e-10, limit=400)
    if err > 1e-8:
        raise NumericError("integral_term quadrature did not converge",
                           achieved=err)
    tail = -phihat0 * float(exp1(upper))
    return -(2.0 / L) * (val + tail)


# ---------------------------------------------------------------------------
# prime sums
# ---------------------------------------------------------------------------

def _prime_power_terms(spec: CurveSpec, params: FamilyParams, tf: TestFunction,
                       table: SieveTable, cache: ApCache | None = None):
    """Yield (p, m, coeff) with coeff = s_m(p) log p / p^{m/2} *
    phihat(m log p / L) over all p^m <= prime_cutoff."""
    cutoff = params.prime_cutoff
    if cutoff < 2:
        return
    primes = table.primes()
    primes = primes[primes <= cutoff]
    L = params.L
    for p in primes:
        p = int(p)
        m_max = int(math.log(cutoff) / math.log(p)) + 1
        while p ** m_max > cutoff:
            m_max -= 1
        if m_max < 1:
            continue
        ld = local_data(spec, p, k_max=1, m_max=max(1, m_max), cache=cache)
        logp = math.log(p)
        for m in range(1, m_max + 1):
            ph = float(tf.phihat(m * logp / L))
            if ph == 0.0:
                continue
            yield p, m, float(ld.power_sum[m - 1]) * logp * p ** (-m / 2.0) * ph


def prime_sum_single(spec: CurveSpec, d: int, tf: TestFunction, X: float,
                     table: SieveTable | None = None,
                     cache: ApCache | None = None) -> float:
    """-(2/L) sum over p^m <= (c_E X^2)^sigma of the chi_d-twisted prime terms."""
    if d == 0 or math.gcd(d, spec.conductor) != 1:
        raise DomainError("d must be nonzero and coprime to the conductor")
    if table is None:
        table = shared_sieve(10_000)
    params = FamilyParams(N=spec.conductor, X=X, sigma=tf.sigma)
    terms = []
    for p, m, coeff in _prime_power_terms(spec, params, tf, table, cache):
        chi = kronecker(d, p ** m)
        if chi:
            terms.append(coeff * chi)
    return -(2.0 / params.L) * math.fsum(terms)


def dx_single(spec: CurveSpec, d: int, tf: TestFunction, X: float,
              table: SieveTable | None = None,
              cache: ApCache | None = None) -> float:
    """Explicit-formula value of the one-level density term for one twist."""
    params = FamilyParams(N=spec.conductor, X=X, sigma=tf.sigma)
    log_term = (float(tf.phihat(0.0)) / params.L
                * math.log(spec.conductor * d * d / (2.0 * math.pi) ** 2))
    return (log_term + integral_term(tf, params.L)
            + prime_sum_single(spec, d, tf, X, table, cache))


# ---------------------------------------------------------------------------
# family averages
# ---------------------------------------------------------------------------

def _family_char_sums(fam: FamilyTable, primes, blocks):
    """Per-prime family character sums, blockwise.

    Returns (sum_w, sum_w_logd, odd[p], even[p]) where odd[p] is the
    two-sided sum of weight * (d/p) and even[p] the two-sided weighted count
    of d with p not dividing d.
    """
    d, w = fam.d, fam.weight
    logd = np.log(d.astype(float))
    part_w, part_wlog = [], []
    part_odd = {p: [] for p in primes}
    part_even = {p: [] for p in primes}
    for lo, hi in blocks:
        db, wb = d[lo:hi], w[lo:hi]
        part_w.append(fsum_array(wb))
        part_wlog.append(fsum_array(wb * logd[lo:hi]))
        for p in primes:
            if p == 2:
                chi = np.array((0, 1, 0, -1, 0, -1, 0, 1), dtype=np.int8)[db & 7]
            else:
                chi = legendre_table(p)[db % p]
            part_odd[p].append(fsum_array(wb * chi))
            part_even[p].append(fsum_array(wb[db % p != 0]))
    sum_w = reduce_partials(part_w)
    sum_wlog = reduce_partials(part_wlog)
    # two-sided sums: (1 + (-1/p)) * positive side for odd powers,
    # plain doubling for the p-coprime counts
    odd = {p: (1 + kronecker(-1, p)) * reduce_partials(part_odd[p])
           for p in primes}
    even = {p: 2.0 * reduce_partials(part_even[p]) for p in primes}
    return sum_w, sum_wlog, odd, even


def family_density(spec: CurveSpec, tf: TestFunction, wf: WeightFunction,
                   X: float, squarefree_only: bool = False,
                   table: SieveTable | None = None,
                   cache: ApCache | None = None,
                   workers: int = 1) -> DensityReport:
    """Weighted one-level density of the twist family at scale X.

    squarefree_only selects the plain-w squarefree average (normalizer W*);
    otherwise the repetition-folded wtilde weighting (normalizer W) is used.
    """
    N = spec.conductor
    params = FamilyParams(N=N, X=X, sigma=tf.sigma)
    if table is None or table.limit < max(int(wf.support * X) + 1, params.prime_cutoff, 100):
        table = shared_sieve(max(int(wf.support * X) + 1, params.prime_cutoff, 100))
    fam = family_table(wf, N, X, use_wtilde=not squarefree_only, table=table)
    primes = [int(p) for p in table.primes() if int(p) <= params.prime_cutoff]

    # fixed block structure regardless of worker count, so partial sums
    # (exact per block) reduce to the identical total either way
    n = fam.d.size
    nblocks = max(1, (n + 65535) // 65536)
    bounds = [(i * n // nblocks, (i + 1) * n // nblocks) for i in range(nblocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_task,
                                  [(fam, primes, [b]) for b in bounds]))
        sum_w = reduce_partials(p[0] for p in parts)
        sum_wlog = reduce_partials(p[1] for p in parts)
        odd = {p: reduce_partials(pt[2][p] for pt in parts) for p in primes}
        even = {p: reduce_partials(pt[3][p] for pt in parts) for p in primes}
    else:
        sum_w, sum_wlog, odd, even = _family_char_sums(fam, primes, bounds)

    W = 2.0 * sum_w
    if W < 1e-6:
        raise DegenerateFamilyError("family normalizer W(X) below 1e-6")
    L = params.L
    ph0 = float(tf.phihat(0.0))
    term_log = (ph0 / (L * W)
                * (W * math.log(N / (2.0 * math.pi) ** 2) + 4.0 * sum_wlog))
    term_int = integral_term(tf, L)

    s_even_parts, s_odd_parts = [], []
    for p, m, coeff in _prime_power_terms(spec, params, tf, table, cache):
        if m % 2 == 0:
            s_even_parts.append(coeff * even[p])
        else:
            s_odd_parts.append(coeff * odd[p])
    s_even = -(2.0 / (L * W)) * math.fsum(s_even_parts)
    s_odd = -(2.0 / (L * W)) * math.fsum(s_odd_parts)

    meta = {"X": X, "sigma": tf.sigma, "kind": tf.kind, "curve": spec.label,
            "weight_kind": wf.kind, "squarefree_only": squarefree_only,
            "prime_cutoff": params.prime_cutoff, "L": L}
    return DensityReport(term_log=term_log, term_integral=term_int,
                         s_even=s_even, s_odd=s_odd, W_value=W, metadata=meta)


def _block_task(args):
    fam, primes, blocks = args
    sum_w, sum_wlog, odd, even = _family_char_sums(fam, primes, blocks)
    return sum_w, sum_wlog, odd, even


def s_even_closed(spec: CurveSpec, tf: TestFunction, X: float,
                  table: SieveTable | None = None,
                  cache: ApCache | None = None) -> float:
    """Closed form of the even prime side:

    -(2/L) sum_{l,p} s_{2l}(p) log p / p^l phihat(2l log p/L) (1+psi_N(p)/p)^{-1}.

    The compact support of phihat makes the double sum finite (p^l bounded
    by sqrt of the prime cutoff), so no tail estimate is needed.
    """
    params = FamilyParams(N=spec.conductor, X=X, sigma=tf.sigma)
    L = params.L
    half_cut = int(math.isqrt(max(params.prime_cutoff, 1))) + 1
    if table is None or table.limit < max(100, half_cut):
        table = shared_sieve(max(100, half_cut))
    terms = []
    for p in table.primes():
        p = int(p)
        if p > half_cut:
            break
        logp = math.log(p)
        ell_max = max(1, int(params.sigma * L / (2.0 * logp)) + 1)
        ld = local_data(spec, p, k_max=1, m_max=min(64, 2 * ell_max + 2),
                        cache=cache)
        weight = 1.0 if spec.conductor % p == 0 else p / (p + 1.0)
        for ell in range(1, ell_max + 1):
            ph = float(tf.phihat(2.0 * ell * logp / L))
            if ph == 0.0:
                break
            terms.append(float(ld.power_sum[2 * ell - 1]) * logp
                         * p ** (-ell) * ph * weight)
    return -(2.0 / L) * math.fsum(terms)


def s_odd_empirical(reports) -> dict:
    """Fit the decay exponent of s_odd from reports at increasing X.

    Returns {'values', 'X', 'slope', 'noise_floor'}; slope is the two-point
    log-log fit between the first and last reports, None when any |s_odd|
    sits below the 1e-14 noise floor.
    """
    reports = list(reports)
    if len(reports) < 2:
        raise DomainError("need reports at >= 2 values of X")
    xs = [r.metadata["X"] for r in reports]
    vals = [r.s_odd for r in reports]
    if any(x2 <= x1 for x1, x2 in zip(xs, xs[1:])):
        raise DomainError("reports must come at strictly increasing X")
    floor = any(abs(v) < 1e-14 for v in vals)
    slope = None
    if not floor:
        slope = (math.log(abs(vals[-1]) / abs(vals[0]))
                 / math.log(xs[-1] / xs[0]))
    return {"values": vals, "X": xs, "slope": slope, "noise_floor": floor}
