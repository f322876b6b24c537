"""Command-line front end: ``oyldp compute | simulate | verify``.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 numeric-domain error, 4 a warning escalated by ``--strict``.
"""

import argparse
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, mc, rates, sim
from . import specfun as sf
from .convex import SampledFunction, legendre_transform
from .errors import (BracketError, CensoredWarning, DomainError,
                     HeavyTailWarning, IterationError, TruncationWarning,
                     WindowError)
from .reports import VerificationReport, config_digest

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN, EXIT_STRICT = 0, 1, 2, 3, 4

CURVES = ("free-energy", "lyapunov", "lyapunov-dual", "rate", "U", "R",
          "U-star", "R-star", "j-gue")
ESTIMATORS = ("first-moment", "lyapunov", "moment-bound", "tail", "burke",
              "gue-lpp")
SUITES = ("analytic", "burke", "gue", "stationary")

DEFAULTS = {
    "s": 1.0, "t": 1.0, "theta": 1.0, "xi": None, "x": None, "lines": 3,
    "horizon": 2.0, "n": "2,3,4", "step": None, "trunc_T": None,
    "replicates": 10_000, "seed": None, "threads": 1, "out": "-",
    "format": "csv", "strict": False,
}

# grid step when --step is not given; the GUE suite needs a finer grid
# because grid maxima are biased low by a term of order sqrt(step)
STEP_DEFAULT = 1e-3
GUE_SUITE_STEP = 2e-5
# two-sample KS distance accepted by the GUE suite
GUE_SUITE_DISTANCE = 0.05

_WARNINGS = (HeavyTailWarning, TruncationWarning, CensoredWarning)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_grid(text, field):
    """``"a:b:n"`` -> ``linspace(a, b, n)``; a bare number -> one point."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--{field}: expected 'min:max:count' or a number,"
                          f" got {text!r}") from None
    if not (a < b and n >= 2):
        raise ConfigError(f"--{field}: need min < max and count >= 2, "
                          f"got {text!r}")
    return np.linspace(a, b, n)


def parse_int_list(text, field):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{field}: expected comma-separated integers, "
                          f"got {text!r}") from None
    if not vals:
        raise ConfigError(f"--{field}: empty list")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="oyldp", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--s", type=float)
        sp.add_argument("--t", type=float)
        sp.add_argument("--theta", type=float)
        sp.add_argument("--xi")
        sp.add_argument("--x")
        sp.add_argument("--out", help="output path, '-' for stdout")
        sp.add_argument("--format", choices=("csv", "json"))

    def simparams(sp):
        sp.add_argument("--lines", type=int)
        sp.add_argument("--horizon", type=float)
        sp.add_argument("--n", help="comma-separated n values")
        sp.add_argument("--step", type=float)
        sp.add_argument("--trunc-T", dest="trunc_T", type=float)
        sp.add_argument("--replicates", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--strict", action="store_true", default=None)

    c = sub.add_parser("compute", help="evaluate analytic curves")
    c.add_argument("--curve", required=True, choices=CURVES)
    common(c)
    s = sub.add_parser("simulate", help="Monte Carlo estimators")
    s.add_argument("--estimator", required=True, choices=ESTIMATORS)
    common(s)
    simparams(s)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=SUITES)
    common(v)
    simparams(v)
    return p


def resolve_config(args):
    """Merge defaults, the optional JSON file and explicit flags."""
    cfg = dict(DEFAULTS)
    if os.environ.get("OYLDP_SEED"):
        try:
            cfg["seed"] = int(os.environ["OYLDP_SEED"])
        except ValueError:
            raise ConfigError("OYLDP_SEED must be an integer") from None
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                filecfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: {exc}") from None
        unknown = set(filecfg) - set(DEFAULTS) - {"curve", "estimator",
                                                  "suite", "command"}
        if unknown:
            raise ConfigError(f"--config: unknown keys {sorted(unknown)}")
        cfg.update({k: v for k, v in filecfg.items() if k in DEFAULTS})
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    for k in ("curve", "estimator", "suite"):
        if hasattr(args, k):
            cfg[k] = getattr(args, k)
    if args.command in ("simulate", "verify") and cfg["seed"] is None:
        cfg["seed"] = 0
    if cfg["step"] is None:
        cfg["step"] = (GUE_SUITE_STEP if cfg.get("suite") == "gue"
                       else STEP_DEFAULT)
    if not (isinstance(cfg["step"], (int, float)) and cfg["step"] > 0):
        raise ConfigError("--step: must be a positive number")
    for k in ("s", "t", "theta"):
        if not (isinstance(cfg[k], (int, float)) and cfg[k] > 0):
            raise ConfigError(f"--{k}: must be a positive number")
    return cfg


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _provenance(cfg):
    # threads never change results, so they stay out of the provenance
    keep = {k: v for k, v in cfg.items()
            if k not in ("out", "format", "threads")}
    return {"package": "oyldp", "version": __version__,
            "config": keep, "config_digest": config_digest(keep)}


def write_table(cfg, columns, rows, extra=None):
    prov = _provenance(cfg)
    if extra:
        prov.update(extra)
    if cfg["format"] == "json":
        text = json.dumps({"provenance": prov, "columns": list(columns),
                           "rows": [[_fmt(v) for v in r] for r in rows]},
                          indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(prov, sort_keys=True, default=str) + "\n")
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
        text = buf.getvalue()
    _emit(cfg, text)


def _emit(cfg, text):
    if cfg["out"] in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg["out"], "w") as fh:
            fh.write(text)


def _need(cfg, key, field=None):
    if cfg.get(key) is None:
        raise ConfigError(f"--{field or key}: required for this command")
    return cfg[key]


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------

def cmd_compute(cfg):
    curve, s, t, th = cfg["curve"], cfg["s"], cfg["t"], cfg["theta"]
    if curve == "free-energy":
        write_table(cfg, ["s", "t", "free_energy"],
                    [[s, t, rates.free_energy(s, t)]])
        return EXIT_OK
    if curve == "j-gue":
        r = parse_grid(_need(cfg, "x"), "x")
        write_table(cfg, ["r", "j_gue"], zip(r, rates.j_gue(r)))
        return EXIT_OK
    if curve in ("lyapunov", "lyapunov-dual", "U-star", "R-star"):
        xi = parse_grid(_need(cfg, "xi"), "xi")
        if curve == "lyapunov":
            vals = rates.lyapunov(s, t, xi)
        elif curve == "lyapunov-dual":
            vals = [rates.lyapunov_dual_form(s, t, v) for v in xi]
        elif curve == "U-star":
            vals = rates.dual_U_star(s, th, xi)
        else:
            vals = rates.dual_R_star(t, th, xi)
        write_table(cfg, ["xi", curve.replace("-", "_")],
                    zip(xi, np.atleast_1d(vals)))
        return EXIT_OK
    x = parse_grid(_need(cfg, "x"), "x")
    if curve == "rate":
        vals = [rates.rate_function(s, t, v) for v in x]
    elif curve == "U":
        vals = rates.stationary_rate_U(s, th, x)
    else:
        vals = rates.brownian_rate_R(t, th, x)
    write_table(cfg, ["x", curve], zip(x, np.atleast_1d(vals)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_SUMMARY_COLS = ["n", "estimate", "se", "ci_low", "ci_high", "censored"]


def _summary_row(n, m):
    return [n, m.mean, m.std_error, m.ci_low, m.ci_high, m.censored]


def cmd_simulate(cfg):
    est = cfg["estimator"]
    s, t = cfg["s"], cfg["t"]
    seed, reps, step = cfg["seed"], cfg["replicates"], cfg["step"]
    thr = cfg["threads"]
    if reps < mc.MIN_REPLICATES:
        raise ConfigError(f"--replicates: need at least {mc.MIN_REPLICATES}")
    if est == "first-moment":
        m = mc.mc_log_first_moment((cfg["lines"], cfg["horizon"]), 1, step,
                                   reps, seed, thr)
        write_table(cfg, ["lines", "horizon", "log_mean", "se", "ci_low",
                          "ci_high", "analytic"],
                    [[cfg["lines"], cfg["horizon"], m.mean, m.std_error,
                      m.ci_low, m.ci_high, m.analytic]],
                    {"config_digest_mc": m.config_digest})
        return EXIT_OK
    ns = parse_int_list(cfg["n"], "n")
    if est == "lyapunov":
        xi = float(parse_grid(_need(cfg, "xi"), "xi")[0])
        out = mc.mc_lyapunov((s, t), xi, ns, step, reps, seed, thr)
        rows = []
        for n, m in zip(ns, out):
            N, T = m.extra["n_lines"], m.extra["horizon"]
            fin = (mc.log_first_moment_exact(N, T) / n if xi == 1.0
                   else 0.0 if xi == 0.0 else math.nan)
            rows.append([n, m.mean, m.std_error, fin, m.analytic])
        write_table(cfg, ["n", "estimate", "se", "analytic_finite_n",
                          "analytic_limit"], rows)
        return EXIT_OK
    if est == "moment-bound":
        xi = float(parse_grid(_need(cfg, "xi"), "xi")[0])
        reps_ = [mc.check_moment_bound((s, t), xi, n, step, reps, seed, thr)
                 for n in ns]
        rows = [[n, r.checks[0].details["log_empirical"],
                 r.checks[0].details["log_bound"], r.passed]
                for n, r in zip(ns, reps_)]
        write_table(cfg, ["n", "log_empirical", "log_bound", "holds"], rows)
        return EXIT_OK
    if est == "tail":
        r = float(parse_grid(_need(cfg, "x"), "x")[0])
        out = mc.mc_tail_probability((s, t), r, ns, step, reps, seed, thr)
        write_table(cfg, _SUMMARY_COLS,
                    [_summary_row(n, m) for n, m in zip(ns, out)])
        return EXIT_OK
    if est == "burke":
        th = cfg["theta"]
        r = mc.sample_stationary_r(th, 2, reps, step, cfg["trunc_T"], seed,
                                   thr)
        write_table(cfg, ["replicate", "r1", "r2"],
                    [[i, a, b] for i, (a, b) in enumerate(r)])
        return EXIT_OK
    rows = []
    for n in ns:
        rep = mc.gue_identity_test(n, reps, step, seed, thr)
        c = rep.checks[0]
        rows.append([n, c.residual, c.tolerance, c.details["gue_mean"],
                     c.details["lpp_mean"]])
    write_table(cfg, ["n", "ks_distance", "critical_1pct", "gue_mean",
                      "lpp_mean"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_SHAPES = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7), (3.0, 3.0)]


def suite_analytic(cfg):
    rep = VerificationReport("analytic", provenance={"shapes": _SHAPES})
    for s, t in _SHAPES:
        tag = f"s={s:g},t={t:g}"
        d = max(abs(rates.lyapunov(s, t, x) - rates.lyapunov_dual_form(s, t, x))
                for x in (0.25, 0.5, 1.0, 2.0, 3.0))
        rep.add(f"duality[{tag}]", d, 1e-10)
        c = 3.5
        h = max(abs(rates.lyapunov(c * s, c * t, x) - c * rates.lyapunov(s, t, x))
                for x in (-1.0, 0.5, 2.0))
        rep.add(f"homogeneity[{tag}]", h, 1e-9)
        e = 1e-4
        slope = (rates.lyapunov(s, t, e) - rates.lyapunov(s, t, -e)) / (2 * e)
        rep.add(f"slope_at_0[{tag}]", abs(slope - rates.free_energy(s, t)),
                1e-3)
        rep.add(f"first_moment[{tag}]",
                abs(rates.lyapunov(s, t, 1.0)
                    - rates.first_moment_exponent(s, t)), 1e-9)
    rho = rates.free_energy(1, 1)
    xi = np.linspace(0, 20, 20001)
    conj = legendre_transform(SampledFunction(0, 20, rates.lyapunov(1, 1, xi)),
                              rho, rho + 5, 11)
    diff = max(abs(v - rates.rate_function(1, 1, x))
               for x, v in zip(conj.grid, conj.values))
    rep.add("legendre[s=1,t=1]", diff, 1e-4)
    s, t, th = cfg["s"], cfg["t"], cfg["theta"]
    x0 = -s * sf.digamma(th)
    vi = rates.verify_variational_identity(s, t, th,
                                           np.linspace(x0 - 1, x0 + 3, 21))
    rep.add(f"variational_identity[s={s:g},t={t:g},theta={th:g}]",
            vi.max_residual, 5e-3)
    return rep


def suite_burke(cfg):
    reps, seed, step = cfg["replicates"], cfg["seed"], 0.01
    rep = VerificationReport("burke", provenance={
        "seed": seed, "replicates": reps, "step": step})
    for th in (0.7, 1.0, 2.0):
        T = cfg["trunc_T"] or 30.0 / th
        r = mc.sample_stationary_r(th, 2, reps, step, T, seed,
                                   cfg["threads"])
        d, crit = mc.ks_test(np.exp(-r[:, 0]),
                               lambda x: sf.gamma_cdf(x, th))
        rep.add(f"ks[theta={th:g}]", d, crit[0.01], passed=d < crit[0.01])
        corr = float(np.corrcoef(r[:, 0], r[:, 1])[0, 1])
        rep.add(f"corr_r1_r2[theta={th:g}]", abs(corr), 3 / math.sqrt(reps))
    return rep


def suite_gue(cfg):
    ns = parse_int_list(cfg["n"], "n") if cfg["n"] != DEFAULTS["n"] else [2, 5]
    rep = VerificationReport("gue", provenance={"seed": cfg["seed"],
                                                "step": cfg["step"]})
    for n in ns:
        r = mc.gue_identity_test(n, cfg["replicates"], cfg["step"],
                                 cfg["seed"], cfg["threads"],
                                 max_distance=GUE_SUITE_DISTANCE)
        c = r.checks[0]
        rep.add(f"ks[n={n}]", c.residual, c.tolerance, passed=c.passed)
    return rep


def suite_stationary(cfg):
    rep = VerificationReport("stationary", provenance={"seed": cfg["seed"]})
    T = cfg["trunc_T"] or sim.default_trunc_T(cfg["theta"])
    for r in range(5):
        env = sim.sample_environment(4, 1.0, cfg["step"], T, cfg["seed"], r)
        v = sim.verify_stationary_decomposition(env, cfg["theta"], 3, 1.0)
        for c in v.checks:
            rep.add(f"{c.name}[replicate={r}]", c.residual, c.tolerance)
    return rep


def cmd_verify(cfg):
    if cfg["suite"] == "burke" and cfg["replicates"] < mc.MIN_REPLICATES:
        raise ConfigError(f"--replicates: need at least {mc.MIN_REPLICATES}")
    fn = {"analytic": suite_analytic, "burke": suite_burke, "gue": suite_gue,
          "stationary": suite_stationary}[cfg["suite"]]
    report = fn(cfg)
    report.provenance.update(_provenance(cfg))
    if cfg["format"] == "json" or cfg["out"] not in (None, "-"):
        _emit(cfg, report.to_json() + "\n")
    else:
        sys.stdout.write(report.to_json() + "\n")
    sys.stderr.write(report.to_text() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = {"compute": cmd_compute, "simulate": cmd_simulate,
                    "verify": cmd_verify}[cfg["command"]](cfg)
    except ConfigError as exc:
        sys.stderr.write(f"oyldp: configuration error: {exc}\n")
        return EXIT_CONFIG
    except (DomainError, IterationError, BracketError, WindowError) as exc:
        sys.stderr.write(f"oyldp: numeric domain error: {exc}\n")
        return EXIT_DOMAIN
    flagged = [w for w in caught if issubclass(w.category, _WARNINGS)]
    for w in caught:
        sys.stderr.write(f"oyldp: warning: {w.message}\n")
    if flagged and cfg["strict"]:
        return EXIT_STRICT
    return code


if __name__ == "__main__":
    sys.exit(main())
