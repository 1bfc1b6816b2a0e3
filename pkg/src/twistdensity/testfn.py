"""Test functions (phi, phihat) and family weights (w, what, Mellin data).

Two test-function kinds are built in:
  fejer       phihat(xi) = max(0, 1 - |xi|/sigma), phi in closed form
  smooth_bump phihat(xi) = exp(-1/(1-(xi/sigma)^2)) on |xi| < sigma,
              phi obtained by numerically inverting the transform with a
              cached Gauss-Legendre rule (built once, then frozen)

The weight side defaults to the gaussian w(x) = exp(-pi x^2) whose Fourier
and Mellin transforms are closed-form; sampled custom weights are supported
with transforms by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as cgamma

from .analytic import gauss_legendre, zeta_em
from .errors import ConfigError, DomainError, PoleError

TESTFN_KINDS = ("fejer", "smooth_bump")
WEIGHT_KINDS = ("gaussian", "custom-samples")

# gaussian w drops below 1e-16 past this argument; family sums truncate here
GAUSSIAN_SUPPORT = 3.6310  # exp(-pi x^2) = 1e-16  =>  x = sqrt(16 ln10 / pi)
WTILDE_TERM_FLOOR = 1e-18


@dataclass(frozen=True)
class TestFunction:
    """Even test function phi with compactly supported phihat.

    sigma = sup(supp phihat).  Instances are picklable and immutable; the
    smooth_bump kind carries its frozen inversion rule as plain arrays.
    """
    kind: str
    sigma: float
    _nodes: np.ndarray = field(default=None, repr=False, compare=False)
    _weights: np.ndarray = field(default=None, repr=False, compare=False)
    _fvals: np.ndarray = field(default=None, repr=False, compare=False)
    _x_max: float = field(default=0.0, repr=False, compare=False)

    def phihat(self, xi):
        xi = np.asarray(xi, dtype=float)
        axi = np.abs(xi)
        if self.kind == "fejer":
            out = np.maximum(0.0, 1.0 - axi / self.sigma)
        else:
            out = np.zeros_like(axi)
            inside = axi < self.sigma
            u = axi[inside] / self.sigma
            out[inside] = np.exp(-1.0 / (1.0 - u * u))
        return float(out) if out.ndim == 0 else out

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "fejer":
            out = self.sigma * np.sinc(self.sigma * x) ** 2
            return float(out) if out.ndim == 0 else out
        scalar = x.ndim == 0
        xa = np.atleast_1d(x)
        if float(np.max(np.abs(xa), initial=0.0)) <= self._x_max:
            nodes, weights, fvals = self._nodes, self._weights, self._fvals
        else:
            nodes, weights, fvals = _bump_rule(self.sigma,
                                               float(np.max(np.abs(xa))))
        out = np.empty(xa.shape)
        step = max(1, int(4e6 // max(1, nodes.size)))
        for lo in range(0, xa.size, step):
            hi = min(lo + step, xa.size)
            c = np.cos(2.0 * np.pi * np.outer(xa.flat[lo:hi], nodes))
            out.flat[lo:hi] = 2.0 * c @ (weights * fvals)
        return float(out[0]) if scalar else out

    def phi_envelope(self, x: float) -> float:
        """Monotone upper bound for |phi| at |argument| >= x, used by
        tail estimates."""
        x = abs(x)
        if self.kind == "fejer":
            if x < 1e-9:
                return self.sigma
            return min(self.sigma, 1.0 / (math.pi ** 2 * self.sigma * x * x))
        # bump kind: |phi| <= c*exp(-sqrt(2 pi sigma x)), floored at the
        # roundoff level of the cached inversion rule
        return min(2.0 * self.sigma,
                   max(2e-15, 2.0 * self.sigma
                       * math.exp(-math.sqrt(2.0 * math.pi * self.sigma * x))))

    def support_cutoff(self, L: float) -> int:
        """Largest integer q with phihat(log(q)/L) != 0, i.e. q < e^{sigma L}."""
        return int(math.floor(math.exp(min(self.sigma * L, 50.0))))


def _bump_rule(sigma: float, x_max: float):
    """Gauss-Legendre rule resolving cos(2 pi xi x) up to |x| = x_max."""
    n = int(math.pi * sigma * max(x_max, 8.0)) + 80
    xg, wg = gauss_legendre(min(n, 12000))
    nodes = 0.5 * sigma * (xg + 1.0)
    weights = 0.5 * sigma * wg
    u = nodes / sigma
    fvals = np.exp(-1.0 / (1.0 - u * u))
    return nodes, weights, fvals


def build_testfn(kind: str, sigma: float, x_max: float = 2048.0) -> TestFunction:
    """Construct a TestFunction; sigma must lie in (0, 1]."""
    if kind not in TESTFN_KINDS:
        raise ConfigError(f"unknown test-function kind {kind!r}")
    if not (0.0 < sigma <= 1.0):
        raise ConfigError(f"sigma must lie in (0, 1], got {sigma}")
    if kind == "fejer":
        return TestFunction(kind=kind, sigma=float(sigma))
    nodes, weights, fvals = _bump_rule(sigma, x_max)
    return TestFunction(kind=kind, sigma=float(sigma), _nodes=nodes,
                        _weights=weights, _fvals=fvals, _x_max=float(x_max))


@dataclass(frozen=True)
class WeightFunction:
    """Even nonnegative family weight w with transforms.

    Carries the conductor N used in the coprimality restriction of the
    repetition-folded weight wtilde(x) = sum_{(n,N)=1} w(n^2 x).
    """
    kind: str
    N: int
    support: float = GAUSSIAN_SUPPORT
    _samples_x: np.ndarray = field(default=None, repr=False, compare=False)
    _samples_w: np.ndarray = field(default=None, repr=False, compare=False)

    def w(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            out = np.exp(-np.pi * x * x)
        else:
            out = np.interp(np.abs(x), self._samples_x, self._samples_w,
                            left=float(self._samples_w[0]), right=0.0)
        return float(out) if out.ndim == 0 else out

    def what(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "gaussian":
            out = np.exp(-np.pi * xi * xi)
            return float(out) if out.ndim == 0 else out
        scalar = xi.ndim == 0
        xa = np.atleast_1d(xi)
        out = np.array([2.0 * quad(lambda t, u=u: self.w(t) * math.cos(2 * math.pi * u * t),
                                   0.0, self.support, epsabs=1e-14, epsrel=1e-10,
                                   limit=200)[0] for u in np.abs(xa)])
        return float(out[0]) if scalar else out

    def mellin_w(self, s):
        """Mellin transform of w; closed form for the gaussian kind."""
        if self.kind == "gaussian":
            s = complex(s)
            # poles of Gamma(s/2) at s = 0, -2, -4, ...
            if abs(s - round(s.real)) < 1e-12 and round(s.real) <= 0 and round(s.real) % 2 == 0:
                raise PoleError(f"Mellin transform pole at s = {s}")
            return 0.5 * np.pi ** (-s / 2.0) * complex(cgamma(s / 2.0))
        s = complex(s)
        re = quad(lambda x: x ** (s.real - 1) * math.cos(s.imag * math.log(x)) * self.w(x),
                  0.0, self.support, epsabs=1e-14, epsrel=1e-10, limit=400)[0]
        im = quad(lambda x: x ** (s.real - 1) * math.sin(s.imag * math.log(x)) * self.w(x),
                  0.0, self.support, epsabs=1e-14, epsrel=1e-10, limit=400)[0]
        return complex(re, im)

    def wtilde_n_max(self, x: float) -> int:
        """Truncation index: w(n^2 x) < 1e-18 for n beyond this."""
        if self.kind == "gaussian":
            cutoff = math.sqrt(18.0 * math.log(10.0) / math.pi)  # w < 1e-18
        else:
            cutoff = self.support
        return int(math.sqrt(cutoff / abs(x))) + 1

    def half_line_mass(self) -> float:
        """c_w = int_0^inf w(v^2) dv; for the gaussian, Gamma(1/4)/(4 pi^{1/4})."""
        if self.kind == "gaussian":
            return float(cgamma(0.25)) / (4.0 * np.pi ** 0.25)
        return quad(lambda v: self.w(v * v), 0.0, math.sqrt(self.support),
                    epsabs=1e-14, epsrel=1e-12)[0]

    def wtilde(self, x: float) -> float:
        """wtilde(x) = sum over n >= 1 coprime to N of w(n^2 x).

        For x below ~1e-9 the direct sum is replaced by its Poisson-summation
        asymptotic c_w/2 * prod_{p|N}(1 - 1/p) * x^{-1/2} (minus w(0)/2 when
        N = 1), whose corrections are exponentially small there.
        """
        if x == 0.0:
            raise DomainError("wtilde blows up at x = 0 (like x^{-1/2})")
        x = abs(x)
        n_max = self.wtilde_n_max(x)
        if n_max > 50_000:
            dens = 1.0
            m = self.N
            f = 2
            while f * f <= m:
                if m % f == 0:
                    dens *= 1.0 - 1.0 / f
                    while m % f == 0:
                        m //= f
                f += 1 if f == 2 else 2
            if m > 1:
                dens *= 1.0 - 1.0 / m
            val = self.half_line_mass() * dens / math.sqrt(x)
            if self.N == 1:
                val -= 0.5 * float(self.w(0.0))
            return val
        n = np.arange(1, n_max + 1, dtype=np.int64)
        if self.N > 1:
            n = n[np.gcd(n, self.N) == 1]
        return float(np.sum(self.w(n.astype(float) ** 2 * x)))

    def wtilde_vec(self, x: np.ndarray) -> np.ndarray:
        """Vectorized wtilde over positive arguments."""
        x = np.abs(np.asarray(x, dtype=float))
        if np.any(x == 0.0):
            raise DomainError("wtilde blows up at x = 0")
        out = np.zeros_like(x)
        xmin = float(np.min(x))
        for n in range(1, self.wtilde_n_max(xmin) + 1):
            if self.N > 1 and math.gcd(n, self.N) != 1:
                continue
            arg = n * n * x
            mask = arg <= (self.support + 0.5 if self.kind != "gaussian"
                           else 3.75)
            if not mask.any():
                break
            out[mask] += self.w(arg[mask])
        return out

    def mellin_wtilde(self, s) -> complex:
        """Mellin transform of wtilde: prod_{p|N}(1-p^{-2s}) zeta(2s) Mw(s)."""
        s = complex(s)
        if abs(s - 0.5) < 1e-6:
            raise PoleError("Mellin transform of wtilde has a pole at s = 1/2")
        val = complex(zeta_em(2.0 * s)) * self.mellin_w(s)
        n = self.N
        f = 2
        while f * f <= n:
            if n % f == 0:
                val *= 1.0 - f ** (-2.0 * s)
                while n % f == 0:
                    n //= f
            f += 1 if f == 2 else 2
        if n > 1:
            val *= 1.0 - n ** (-2.0 * s)
        return val


def build_weight(kind: str, N: int, samples=None) -> WeightFunction:
    """Construct a WeightFunction bound to conductor N."""
    if kind not in WEIGHT_KINDS:
        raise ConfigError(f"unknown weight kind {kind!r}")
    if N < 1:
        raise ConfigError("weight needs a positive conductor")
    if kind == "gaussian":
        return WeightFunction(kind=kind, N=N)
    if samples is None:
        raise ConfigError("custom-samples weight requires sample data")
    xs = np.asarray([s[0] for s in samples], dtype=float)
    ws = np.asarray([s[1] for s in samples], dtype=float)
    if np.any(ws < 0.0):
        raise ConfigError("weight samples must be nonnegative")
    if not np.all(np.diff(xs) > 0.0) or xs[0] < 0.0:
        raise ConfigError("weight samples need increasing nonnegative abscissae")
    if not np.any(ws > 0.0):
        raise ConfigError("weight must not be identically zero")
    return WeightFunction(kind=kind, N=N, support=float(xs[-1]),
                          _samples_x=xs, _samples_w=ws)


def mellin_decay_check(wf: WeightFunction, sigma_re: float, t_list) -> dict:
    """Decay report: max |Mw(sigma+it)| (1+|t|)^n over t_list for n in 1,2,4.

    Also records windowed maxima of the n=4 weighting so callers can verify
    the profile stays bounded past its peak.
    """
    t = np.asarray(sorted(t_list), dtype=float)
    vals = np.array([abs(wf.mellin_w(complex(sigma_re, tt))) for tt in t])
    report = {"sigma_re": sigma_re, "t": t, "abs_mellin": vals}
    for n in (1, 2, 4):
        report[f"max_n{n}"] = float(np.max(vals * (1.0 + np.abs(t)) ** n))
    nwin = max(1, t.size // 8)
    w4 = vals * (1.0 + np.abs(t)) ** 4
    report["windowed_max_n4"] = [float(np.max(w4[i:i + nwin]))
                                 for i in range(0, t.size, nwin)]
    return report
