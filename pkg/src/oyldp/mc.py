"""Monte Carlo estimators and distribution tests.

Replicate ``r`` of every estimator uses exactly the environment returned by
``sim.sample_environment(..., seed=seed, replicate=r)``.  Replicates are
processed in batches of a size fixed by the problem dimensions alone, and
results are reduced in replicate order, so outputs do not depend on
``threads``.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import rates, sim
from .errors import CensoredWarning, DomainError, HeavyTailWarning
from .reports import McSummary, VerificationReport, config_digest

__all__ = [
    "sample_log_partition", "sample_lpp_max", "sample_gue_top",
    "sample_stationary_r", "log_mean_exp", "mc_log_first_moment",
    "mc_lyapunov", "check_moment_bound", "mc_tail_probability", "ks_test",
    "ks_2samp", "gue_identity_test", "wilson_interval",
    "KS_CRITICAL_CONSTANTS", "HEAVY_TAIL_SHARE",
]

HEAVY_TAIL_SHARE = 0.5
MIN_REPLICATES = 100
KS_CRITICAL_CONSTANTS = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628}
_Z95 = 1.959963984540054
_BATCH_FLOATS = 2 ** 22


def _batch_size(floats_per_replicate):
    return int(max(1, min(1024, _BATCH_FLOATS // max(1, floats_per_replicate))))


def _run_batches(fn, replicates, batch, threads):
    """Apply ``fn(list_of_replicate_indices)`` to consecutive batches and
    concatenate in replicate order."""
    chunks = [list(range(a, min(a + batch, replicates)))
              for a in range(0, replicates, batch)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return np.concatenate(parts, axis=0)


def _check_replicates(replicates, minimum=1):
    if int(replicates) != replicates or replicates < minimum:
        raise DomainError(f"need at least {minimum} replicates")
    return int(replicates)


def _positive_paths(n_lines, horizon, step, seed, reps, zero_env=False):
    envs = [sim.sample_environment(n_lines, horizon, step, 0.0, seed, r,
                                   boundary=False) for r in reps]
    inc = np.stack([e.increments for e in envs])
    if zero_env:
        inc = np.zeros_like(inc)
    zero = np.zeros(inc.shape[:-1] + (1,))
    return np.concatenate([zero, np.cumsum(inc, axis=-1)], axis=-1), envs[0]


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_log_partition(n_lines, horizon, step, replicates, seed=0,
                         threads=1, zero_env=False):
    """``log Z_{0, n_lines-1}(0, horizon)`` for each replicate."""
    replicates = _check_replicates(replicates)
    n_nodes = int(round(horizon / step)) + 1

    def one(reps):
        W, env = _positive_paths(n_lines, horizon, step, seed, reps,
                                 zero_env)
        return sim._log_partition_batch(W, env.step)

    return _run_batches(one, replicates, _batch_size(4 * n_lines * n_nodes),
                        threads)


def sample_lpp_max(n_lines, horizon, step, replicates, seed=0, threads=1):
    """Brownian last-passage maximum over ``n_lines`` lines on
    ``[0, horizon]`` for each replicate."""
    replicates = _check_replicates(replicates)
    n_nodes = int(round(horizon / step)) + 1

    def one(reps):
        W, _ = _positive_paths(n_lines, horizon, step, seed, reps)
        return sim._lpp_batch(W)

    return _run_batches(one, replicates, _batch_size(3 * n_lines * n_nodes),
                        threads)


def sample_gue_top(n, replicates, seed=0, threads=1):
    """Top eigenvalues of ``replicates`` independent GUE matrices."""
    replicates = _check_replicates(replicates)
    if int(n) != n or not 1 <= n <= 64:
        raise DomainError("need 1 <= n <= 64")
    return _run_batches(lambda reps: sim._gue_top_batch(int(n), seed, reps),
                        replicates, _batch_size(8 * n * n), threads)


def sample_stationary_r(theta, k_max, replicates, step=0.01, trunc_T=None,
                        seed=0, threads=1):
    """``(r_1^theta(0), ..., r_{k_max}^theta(0))`` per replicate.

    Returns an array of shape ``(replicates, k_max)``.  A single
    :class:`TruncationWarning` reports the fraction of replicates whose
    tail-mass estimate exceeds the tolerance.
    """
    replicates = _check_replicates(replicates)
    if not theta > 0:
        raise DomainError("theta must be positive")
    if trunc_T is None:
        trunc_T = sim.default_trunc_T(theta)
    T = step * math.ceil(trunc_T / step - 1e-9)
    horizon = 4 * step
    n_nodes = int(round(T / step)) + 1
    k_max = int(k_max)

    def one(reps):
        envs = [sim.sample_environment(k_max + 1, horizon, step, T, seed, r)
                for r in reps]
        o = envs[0].origin
        B = np.stack([e.boundary_path()[:o + 1] for e in envs])
        L = np.stack([e.line_paths(slice(1, k_max + 1))[:, :o + 1]
                      for e in envs])
        r, rem = sim._stationary_r_batch(B, L, theta, step, o, o)
        return np.concatenate([r, rem[:, None]], axis=1)

    out = _run_batches(one, replicates, _batch_size(6 * (k_max + 1) * n_nodes),
                       threads)
    bad = np.mean(out[:, -1] > sim.TRUNCATION_RTOL)
    if bad > 0:
        warnings.warn(f"{bad:.2%} of replicates have truncation remainder "
                      f"above {sim.TRUNCATION_RTOL:g} (trunc_T={T:g})",
                      sim.TruncationWarning, stacklevel=2)
    return out[:, :-1]


# ---------------------------------------------------------------------------
# moment estimators
# ---------------------------------------------------------------------------

def log_mean_exp(values):
    """``(log mean exp(values), delta-method SE, top-replicate share)``."""
    v = np.asarray(values, dtype=float)
    top = np.max(v)
    w = np.exp(v - top)
    mean = np.mean(w)
    se = np.std(w, ddof=1) / (mean * math.sqrt(v.size)) if v.size > 1 else 0.0
    return top + math.log(mean), float(se), float(np.max(w) / np.sum(w))


def _lines_horizon(shape, n):
    s, t = shape
    rates._shape(s, t)
    n_lines = int(math.floor(n * s + 1e-9))
    if n_lines < 1:
        raise DomainError("n * s must be at least 1")
    return n_lines, n * t


def _heavy(share, what):
    if share > HEAVY_TAIL_SHARE:
        warnings.warn(f"{what}: top replicate carries {share:.0%} of the "
                      "empirical mean; the estimate is unreliable",
                      HeavyTailWarning, stacklevel=3)
        return True
    return False


def log_first_moment_exact(n_lines, horizon):
    """``log E Z_{1,N}(0,T) = log(T^(N-1)/(N-1)!) + T/2``."""
    return _log_chamber(n_lines, horizon) + 0.5 * horizon


def _log_chamber(n_lines, horizon):
    return (n_lines - 1) * math.log(horizon) - math.lgamma(n_lines)


def _moment(shape, xi, n, step, replicates, seed, threads, zero_env, config):
    n_lines, horizon = _lines_horizon(shape, n)
    logz = sample_log_partition(n_lines, horizon, step, replicates, seed,
                                threads, zero_env)
    lm, se, share = log_mean_exp(xi * logz)
    config = dict(config, n_lines=n_lines, horizon=horizon, step=step,
                  replicates=replicates, xi=xi, zero_env=zero_env)
    return lm, se, share, n_lines, horizon, config


def mc_log_first_moment(shape, n, step=1e-3, replicates=10_000, seed=0,
                        threads=1, zero_env=False):
    """``(1/n) log`` of the empirical mean of ``Z_{1,N}(0, T)`` with
    ``N = floor(n s)`` lines and ``T = n t``.

    ``analytic`` holds the exact finite-``n`` value; ``extra`` holds the
    unnormalized ``log_mean`` and its standard error.
    """
    replicates = _check_replicates(replicates, MIN_REPLICATES)
    cfg = {"op": "log_first_moment", "shape": list(shape), "n": n}
    lm, se, share, N, T, cfg = _moment(shape, 1.0, n, step, replicates, seed,
                                       threads, zero_env, cfg)
    heavy = _heavy(share, "first moment")
    exact = log_first_moment_exact(N, T)
    return McSummary.from_estimate(
        lm / n, se / n, replicates, seed, config_digest(cfg),
        analytic=exact / n,
        extra={"log_mean": lm, "log_mean_se": se, "log_mean_exact": exact,
               "n_lines": N, "horizon": T, "step": step,
               "top_share": share, "heavy_tail": heavy})


def mc_lyapunov(shape, xi, n_list, step=1e-3, replicates=10_000, seed=0,
                threads=1):
    """``(1/n) log`` of the empirical mean of ``Z^xi`` for each ``n``.

    ``analytic`` is the limit ``lyapunov(s, t, xi)``; finite ``n`` values
    are not expected to match it.
    """
    replicates = _check_replicates(replicates, MIN_REPLICATES)
    s, t = shape
    limit = rates.lyapunov(s, t, xi)
    out = []
    for n in n_list:
        cfg = {"op": "lyapunov", "shape": [s, t], "n": n}
        lm, se, share, N, T, cfg = _moment(shape, xi, n, step, replicates,
                                           seed, threads, False, cfg)
        heavy = _heavy(share, f"xi={xi} moment at n={n}")
        out.append(McSummary.from_estimate(
            lm / n, se / n, replicates, seed, config_digest(cfg),
            analytic=limit,
            extra={"n": n, "n_lines": N, "horizon": T, "step": step,
                   "xi": xi, "top_share": share, "heavy_tail": heavy}))
    return out


def check_moment_bound(shape, xi, n, step=1e-3, replicates=10_000, seed=0,
                       threads=1, zero_env=False, n_se=3.0):
    """Check ``E Z^xi <= |A_{N,T}|^xi exp(xi^2 T / 2)`` empirically.

    ``|A_{N,T}| = T^(N-1)/(N-1)!`` is the chamber volume.  Passes when the
    empirical moment minus ``n_se`` standard errors stays below the bound.
    """
    if not abs(xi) > 1:
        raise DomainError("the moment bound is checked for |xi| > 1")
    replicates = _check_replicates(replicates, MIN_REPLICATES)
    cfg = {"op": "moment_bound", "shape": list(shape), "n": n}
    lm, se, share, N, T, cfg = _moment(shape, xi, n, step, replicates, seed,
                                       threads, zero_env, cfg)
    heavy = _heavy(share, f"xi={xi} moment")
    log_bound = xi * _log_chamber(N, T) + 0.5 * xi * xi * T
    ratio = math.exp(lm - log_bound)        # empirical / bound
    excess = ratio * (1.0 - n_se * se) - 1.0
    report = VerificationReport(
        "moment_bound",
        provenance={"seed": seed, "step": step, "replicates": replicates,
                    "n_lines": N, "horizon": T, "xi": xi,
                    "config_digest": config_digest(cfg)})
    report.add("empirical_minus_3se_over_bound", max(excess, 0.0), 0.0,
               passed=excess <= 0.0, log_empirical=lm, log_bound=log_bound,
               relative_se=se, ratio=ratio, top_share=share,
               heavy_tail=heavy)
    return report


# ---------------------------------------------------------------------------
# tail probabilities
# ---------------------------------------------------------------------------

def wilson_interval(hits, trials, z=_Z95):
    """Wilson score interval for a binomial proportion."""
    p = hits / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials
                         + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, centre - half)
    hi = 1.0 if hits == trials else min(1.0, centre + half)
    return lo, hi


def mc_tail_probability(shape, r, n_list, step=1e-2, replicates=100_000,
                        seed=0, threads=1):
    """``-(1/n) log`` of the frequency of ``{log Z >= n r}`` for each ``n``.

    Confidence limits come from the Wilson interval.  With no hits the
    summary is ``censored``: ``mean`` and ``ci_low`` are the lower bound
    implied by the Wilson upper limit, ``std_error`` and ``ci_high`` are
    infinite.
    """
    replicates = _check_replicates(replicates, MIN_REPLICATES)
    s, t = shape
    out = []
    for n in n_list:
        N, T = _lines_horizon(shape, n)
        logz = sample_log_partition(N, T, step, replicates, seed, threads)
        hits = int(np.sum(logz >= n * r))
        p = hits / replicates
        lo, hi = wilson_interval(hits, replicates)
        cfg = {"op": "tail", "shape": [s, t], "r": r, "n": n, "step": step,
               "replicates": replicates}
        extra = {"n": n, "n_lines": N, "horizon": T, "hits": hits,
                 "frequency": p, "wilson": [lo, hi], "step": step}
        rate_hi = math.inf if lo == 0 else -math.log(lo) / n
        rate_lo = -math.log(hi) / n if hi > 0 else math.inf
        if hits == 0:
            out.append(McSummary(replicates, rate_lo, math.inf, rate_lo,
                                 math.inf, seed, config_digest(cfg),
                                 censored=True, extra=extra))
            continue
        est = -math.log(p) / n + 0.0
        se = math.sqrt((1 - p) / (p * replicates)) / n
        out.append(McSummary(replicates, est, se, min(rate_lo, est),
                             max(rate_hi, est), seed, config_digest(cfg),
                             extra=extra))
    if out and all(m.censored for m in out):
        warnings.warn("no replicate reached the tail level at any n",
                      CensoredWarning, stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# distribution tests
# ---------------------------------------------------------------------------

def _critical(scale):
    return {lvl: c * scale for lvl, c in KS_CRITICAL_CONSTANTS.items()}


def ks_test(samples, cdf):
    """One-sample Kolmogorov-Smirnov statistic against ``cdf``.

    Returns ``(statistic, critical_values)`` with asymptotic critical values
    at levels 0.10, 0.05 and 0.01.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < MIN_REPLICATES:
        raise DomainError(f"need at least {MIN_REPLICATES} samples")
    if x[0] == x[-1]:
        raise DomainError("degenerate sample: all values are equal")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    return float(d), _critical(1.0 / math.sqrt(n))


def ks_2samp(a, b):
    """Two-sample Kolmogorov-Smirnov distance with asymptotic critical
    values."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = a.size, b.size
    if min(n, m) < MIN_REPLICATES:
        raise DomainError(f"need at least {MIN_REPLICATES} samples each")
    allx = np.concatenate([a, b])
    d = np.max(np.abs(np.searchsorted(a, allx, side="right") / n
                      - np.searchsorted(b, allx, side="right") / m))
    return float(d), _critical(math.sqrt((n + m) / (n * m)))


def gue_identity_test(n, replicates=5000, step=1e-3, seed=0, threads=1,
                      scaled=True, level=0.01, max_distance=None):
    """Two-sample KS between GUE top eigenvalues and scaled Brownian
    last-passage maxima on ``[0, 1]`` with ``n`` lines.

    ``scaled=False`` drops the ``1/(2 sqrt(n))`` factor (a negative
    control).  Passes when the distance is below the critical value at
    ``level``, or below ``max_distance`` when that is given.
    """
    if int(n) != n or not 2 <= n <= 10:
        raise DomainError("need 2 <= n <= 10")
    n = int(n)
    gue = sample_gue_top(n, replicates, seed, threads)
    lpp = sample_lpp_max(n, 1.0, step, replicates, seed, threads)
    if scaled:
        lpp = lpp / (2.0 * math.sqrt(n))
    d, crit = ks_2samp(gue, lpp)
    thr = crit[level] if max_distance is None else max_distance
    cfg = {"op": "gue_identity", "n": n, "replicates": replicates,
           "step": step, "scaled": scaled}
    report = VerificationReport(
        "gue_identity",
        provenance={"seed": seed, "step": step, "replicates": replicates,
                    "n": n, "scaled": scaled,
                    "config_digest": config_digest(cfg)})
    report.add("ks_distance", d, thr, passed=d < thr,
               critical_values={str(k): v for k, v in crit.items()},
               gue_mean=float(np.mean(gue)), lpp_mean=float(np.mean(lpp)))
    return report
