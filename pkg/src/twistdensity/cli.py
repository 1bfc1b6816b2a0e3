"""Command-line interface: config parsing, run orchestration, report emission.

Subcommands:
  density   family one-level density per X (term-by-term CSV/JSON)
  predict   theorem main terms, optionally the ratios-conjecture route
  compare   density + prediction + residuals + exponent-target series
  zeros     critical-line zeros for configured twists
  verify    character-sum / Mellin lemma suite (pass-fail table)

Config files are line-oriented `key = value` under [section] headers; see
README for the exact grammar.  All floats serialize with repr (shortest
round-trip, <= 17 significant digits).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import charsum, density, predict, zeros
from .curve import ApCache, CurveSpec, validate_curve
from .errors import ConfigError, TwistDensityError
from .ntkit import shared_sieve
from .testfn import build_testfn, build_weight

EXIT_CONFIG = 2
EXIT_ERROR = 1


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Parse the [section] / key = value grammar.

    Repeated keys accumulate into lists (used by bad_prime and X).  Values
    keep their raw string form; numeric coercion happens at load time.
    """
    sections: dict[str, dict] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            sections.setdefault(current, {})
            continue
        if "=" not in line or current is None:
            raise ConfigError(f"config line {lineno}: expected 'key = value' "
                              f"inside a [section], got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        bucket = sections[current]
        if key in bucket:
            if not isinstance(bucket[key], list):
                bucket[key] = [bucket[key]]
            bucket[key].append(val)
        else:
            bucket[key] = val
    return sections


def _as_int(sections, sec, key, default=None):
    v = sections.get(sec, {}).get(key)
    if v is None:
        if default is None:
            raise ConfigError(f"missing [{sec}] {key}")
        return default
    try:
        return int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"[{sec}] {key} must be an integer, got {v!r}")


def _as_float(sections, sec, key, default=None):
    v = sections.get(sec, {}).get(key)
    if v is None:
        if default is None:
            raise ConfigError(f"missing [{sec}] {key}")
        return default
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"[{sec}] {key} must be a number, got {v!r}")


class RunConfig:
    """Validated run configuration (curve, family, compute, output blocks)."""

    def __init__(self, sections: dict):
        curve = sections.get("curve", {})
        a = _as_int(sections, "curve", "a")
        b = _as_int(sections, "curve", "b")
        conductor = _as_int(sections, "curve", "conductor")
        root_number = _as_int(sections, "curve", "root_number")
        bad = {}
        raw_bad = curve.get("bad_prime", [])
        if isinstance(raw_bad, str):
            raw_bad = [raw_bad]
        for entry in raw_bad:
            parts = entry.split()
            if len(parts) != 2:
                raise ConfigError(f"bad_prime entry {entry!r}: want 'p type'")
            bad[int(parts[0])] = parts[1]
        overrides = {}
        for p in (2, 3):
            if f"a{p}" in curve:
                overrides[p] = _as_int(sections, "curve", f"a{p}")
        self.curve: CurveSpec = validate_curve(a, b, conductor, root_number,
                                               bad, overrides)

        fam = sections.get("family", {})
        raw_x = fam.get("x", "1000")
        if isinstance(raw_x, str):
            raw_x = raw_x.split()
        else:
            raw_x = [tok for entry in raw_x for tok in entry.split()]
        try:
            self.X_list = [float(x) for x in raw_x]
        except ValueError:
            raise ConfigError(f"[family] X values must be numeric: {raw_x!r}")
        if any(x2 <= x1 for x1, x2 in zip(self.X_list, self.X_list[1:])):
            raise ConfigError("[family] X list must be strictly increasing")
        if any(x > 1_000_000 for x in self.X_list):
            raise ConfigError("[family] X values capped at 1e6")
        self.sigma = _as_float(sections, "family", "sigma", 0.3)
        self.testfn_kind = fam.get("testfn", "fejer")
        self.weight_kind = fam.get("weight", "gaussian")
        self.squarefree_only = fam.get("squarefree_only", "false").lower() in (
            "true", "1", "yes")
        self.twists = [int(t) for t in fam.get("twists", "1 -3").split()]

        comp = sections.get("compute", {})
        self.workers = _as_int(sections, "compute", "workers", 1)
        # family prime sums derive their cutoff from sigma (single source of
        # truth); the override applies to the ratios-route Euler products
        self.prime_cutoff = _as_int(sections, "compute", "prime_cutoff", 0)
        self.ratios_P = _as_int(sections, "compute", "ratios_prime_cutoff",
                                self.prime_cutoff or 100_000)
        self.zeros_T = _as_float(sections, "compute", "zeros_height", 20.0)

        out = sections.get("output", {})
        self.out_dir = out.get("directory", "out")
        self.formats = out.get("formats", "csv json").split()
        weight_file = fam.get("weight_samples")
        self.weight_samples = None
        if weight_file:
            if not os.path.exists(weight_file):
                raise ConfigError(f"weight_samples file not found: {weight_file}")
            rows = []
            with open(weight_file) as fh:
                for line in fh:
                    line = line.strip()
                    if line and not line.startswith("#"):
                        xs, ws = line.split()
                        rows.append((float(xs), float(ws)))
            self.weight_samples = rows


def load_config(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        return RunConfig(parse_config_text(fh.read()))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

DENSITY_COLUMNS = ["X", "sigma", "kind", "term_log", "term_integral", "s_even",
                   "s_odd", "total", "predict_total", "predict_uncertainty",
                   "residual", "eta_or_theta_target"]


def emit(rows: list[dict], out_dir: str, basename: str, formats,
         columns=None) -> list[str]:
    """Write a row set as CSV and/or JSON; returns the created paths.

    An empty row set still produces a header-only CSV.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise TwistDensityError(f"cannot create output dir {out_dir}: {exc}")
    paths = []
    cols = columns or (list(rows[0].keys()) if rows else DENSITY_COLUMNS)
    if "csv" in formats:
        path = os.path.join(out_dir, basename + ".csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for row in rows:
                writer.writerow([_fmt(row.get(c)) for c in cols])
        paths.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, basename + ".json")
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=1, default=_jsonable)
            fh.write("\n")
        paths.append(path)
    return paths


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return str(v)


def exponent_rows(sigma_grid) -> list[dict]:
    """Figure-style series: the three error exponents plus the square-root
    reference line, on a sigma grid."""
    rows = []
    for s in sigma_grid:
        rows.append({
            "sigma": float(s),
            "eta": predict.eta(s) if 0 < s < 0.5 else "",
            "theta": predict.theta(s) if 0 < s < 1 else "",
            "star": predict.star_exponent(s) if 0 < s < 1 else "",
            "ratios_reference": -0.5,
        })
    return rows


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _prepare(cfg: RunConfig):
    wf = build_weight(cfg.weight_kind, cfg.curve.conductor,
                      samples=cfg.weight_samples)
    tf = build_testfn(cfg.testfn_kind, cfg.sigma)
    d_max = int(wf.support * max(cfg.X_list)) + 1
    table = shared_sieve(max(d_max, 10_000))
    cache = ApCache(cfg.curve)
    cache.load()
    return wf, tf, table, cache


def cmd_density(cfg: RunConfig, args) -> list[dict]:
    wf, tf, table, cache = _prepare(cfg)
    rows = []
    for X in cfg.X_list:
        rep = density.family_density(cfg.curve, tf, wf, X,
                                     squarefree_only=cfg.squarefree_only,
                                     table=table, cache=cache,
                                     workers=cfg.workers)
        rows.append(rep.as_dict())
    cache.save()
    return rows


def cmd_predict(cfg: RunConfig, args) -> list[dict]:
    wf, tf, table, cache = _prepare(cfg)
    rows = []
    for X in cfg.X_list:
        tm = predict.theorem_main_terms(cfg.curve, tf, wf, X,
                                        squarefree_only=cfg.squarefree_only,
                                        table=table, cache=cache)
        row = {"X": X, "sigma": tf.sigma, "kind": tf.kind, "route": "main_terms"}
        row.update(tm)
        rows.append(row)
        if getattr(args, "ratios", False):
            rd = predict.ratios_density(cfg.curve, tf, wf, X, P=cfg.ratios_P,
                                        table=table, cache=cache)
            rrow = {"X": X, "sigma": tf.sigma, "kind": tf.kind,
                    "route": "ratios"}
            rrow.update(rd)
            rows.append(rrow)
    cache.save()
    return rows


def cmd_compare(cfg: RunConfig, args) -> list[dict]:
    wf, tf, table, cache = _prepare(cfg)
    rows = []
    for X in cfg.X_list:
        rep = density.family_density(cfg.curve, tf, wf, X,
                                     squarefree_only=cfg.squarefree_only,
                                     table=table, cache=cache,
                                     workers=cfg.workers)
        tm = predict.theorem_main_terms(cfg.curve, tf, wf, X,
                                        squarefree_only=cfg.squarefree_only,
                                        table=table, cache=cache)
        rows.append({
            "X": X, "sigma": tf.sigma, "kind": tf.kind,
            "term_log": rep.term_log, "term_integral": rep.term_integral,
            "s_even": rep.s_even, "s_odd": rep.s_odd, "total": rep.total,
            "predict_total": tm["total"], "predict_uncertainty": 0.0,
            "residual": rep.total - tm["total"],
            "eta_or_theta_target": tm["error_exponent"],
        })
    cache.save()
    return rows


def cmd_zeros(cfg: RunConfig, args) -> list[dict]:
    _wf, _tf, table, cache = _prepare(cfg)
    rows = []
    for d in cfg.twists:
        zl = zeros.find_zeros(cfg.curve, d, cfg.zeros_T, table, cache)
        for g in zl.gammas:
            rows.append({"d": d, "gamma": float(g),
                         "refinement_error": 1e-8, "summary": ""})
        rows.append({"d": d, "gamma": "", "refinement_error": "",
                     "summary": f"count={zl.gammas.size} "
                                f"estimate={zl.count_estimate:.2f} "
                                f"complete={zl.complete}"})
    return rows


def cmd_verify(cfg: RunConfig, args) -> list[dict]:
    """Lemma suite at a fast scale; one row per check."""
    wf, tf, table, cache = _prepare(cfg)
    N = cfg.curve.conductor
    X = min(10_000.0, max(cfg.X_list))
    rows = []

    def check(lemma, params, gap, threshold):
        rows.append({"lemma": lemma, "params": params, "gap": gap,
                     "threshold": threshold,
                     "verdict": "pass" if gap < threshold else "FAIL"})

    fam = charsum.family_table(wf, N, X, True, table)
    main = charsum.char_sum_main_term(wf, N, X, 1, True)
    check("weighted-char-sum n=1", f"N={N} X={X}",
          abs(fam.W / main - 1.0), 0.01)
    s4 = charsum.weighted_char_sum(wf, N, X, 4, True, table, fam)
    check("weighted-char-sum square n", "n=4",
          abs(s4 / fam.W / (charsum.char_sum_main_term(wf, N, X, 4, True) / main)
              - 1.0), 0.03)
    for n in (2, 3, 5):
        sn = charsum.weighted_char_sum(wf, N, X, n, True, table, fam)
        check("weighted-char-sum nonsquare", f"n={n}", abs(sn) / X, 0.01)
    d_, a_, gap = charsum.logd_sum(wf, N, X, table)
    check("log-average expansion", f"X={X}", abs(gap), 0.02)
    for p in (3, 7):
        if N % p:
            ratio, target = charsum.p_divides_d_sum(wf, N, X, p, table, fam)
            check("p-divides-d share", f"p={p}", abs(ratio - target), 0.01)
    for (p, ell, b, Y) in [(5, 1, 2, 100.0), (7, 3, 4, 50.0), (13, 2, 9, 80.0)]:
        _l, _r, g = charsum.poisson_check(wf, p, ell, b, Y)
        check("poisson-summation", f"p={p} l={ell} b={b} Y={Y}", g, 1e-8)
    for (p, Y) in [(7, 100.0), (13, 60.0)]:
        if N % p:
            g = charsum.gauss_expansion_check(wf, N, p, Y)
            check("gauss-sum expansion", f"p={p} Y={Y}", g, 1e-8)
    mw1 = wf.mellin_w(1.0)
    check("mellin at 1 vs half what(0)", "s=1",
          abs(mw1 - 0.5 * float(wf.what(0.0))), 1e-12)
    prod = wf.mellin_wtilde(2.0)
    direct = _mellin_wtilde_quadrature(wf, 2.0 + 0.0j)
    check("folded-weight mellin product", "s=2", abs(prod - direct), 1e-8)
    return rows


def _mellin_wtilde_quadrature(wf, s: complex) -> complex:
    from scipy.integrate import quad
    re = quad(lambda u: math.exp(u * s.real) * math.cos(s.imag * u)
              * wf.wtilde(math.exp(u)), -46, 3, epsabs=1e-13, limit=800)[0]
    im = quad(lambda u: math.exp(u * s.real) * math.sin(s.imag * u)
              * wf.wtilde(math.exp(u)), -46, 3, epsabs=1e-13, limit=800)[0]
    return complex(re, im)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="twistdensity",
        description="One-level density of low-lying zeros for quadratic "
                    "twist families of an elliptic curve.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("density", "predict", "compare", "zeros", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--format", choices=["csv", "json", "both"],
                       default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--X", type=float, action="append", default=None)
        if name == "predict":
            p.add_argument("--ratios", action="store_true")
    return ap


_COMMANDS = {"density": cmd_density, "predict": cmd_predict,
             "compare": cmd_compare, "zeros": cmd_zeros, "verify": cmd_verify}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.sigma is not None:
            cfg.sigma = args.sigma
        if args.X:
            cfg.X_list = sorted(args.X)
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out_dir = args.out
        if args.format is not None:
            cfg.formats = (["csv", "json"] if args.format == "both"
                           else [args.format])
        rows = _COMMANDS[args.command](cfg, args)
        basename = args.command + "_report"
        paths = emit(rows, cfg.out_dir, basename, cfg.formats,
                     columns=DENSITY_COLUMNS if args.command == "compare"
                     else None)
        if args.command == "compare":
            grid = [round(0.02 * k, 2) for k in range(1, 50)]
            paths += emit(exponent_rows(grid), cfg.out_dir, "exponents",
                          cfg.formats,
                          columns=["sigma", "eta", "theta", "star",
                                   "ratios_reference"])
        for row in rows:
            if row.get("verdict") == "FAIL":
                print(json.dumps({"error": {"code": "VERIFY_FAIL",
                                            "rows": paths}}))
                return EXIT_ERROR
        print(json.dumps({"ok": True, "command": args.command,
                          "rows": len(rows), "paths": paths}))
        return 0
    except ConfigError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return EXIT_CONFIG
    except TwistDensityError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
