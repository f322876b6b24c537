"""Closed-form large-deviation quantities for the semi-discrete polymer.

Conventions: ``s`` is the space rate (lines per unit ``n``), ``t`` the time
rate, ``theta`` the boundary parameter of the stationary model and ``xi`` the
moment exponent.  Functions of ``xi`` or ``x`` accept numpy arrays; shape
parameters are scalars.

Main entry points
-----------------
free_energy            almost-sure growth rate of ``log Z``
lyapunov               moment Lyapunov exponent, any real ``xi``
lyapunov_dual_form     the same for ``xi > 0`` in the ``theta`` parameterization
rate_function          large deviation rate function of ``(1/n) log Z``
stationary_rate_U      right-tail rate of the stationary increments
brownian_rate_R        right-tail rate of the boundary Brownian term
rate_G, rate_H         infimal convolutions built from the pieces above
solve_variational      minimizer of ``x h + y g`` over an interval
j_gue                  right-tail rate of the scaled top GUE eigenvalue
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from ._solvers import minimize_convex, solve_monotone_positive
from .convex import SampledFunction, inf_convolution_at, legendre_transform
from .errors import DomainError
from .reports import VerificationReport

__all__ = [
    "Shape", "VariationalSpec", "free_energy", "free_energy_minimizer",
    "lyapunov", "lyapunov_minimizer", "lyapunov_derivative",
    "lyapunov_dual_form", "rate_function", "stationary_rate_U",
    "brownian_rate_R", "dual_U_star", "dual_R_star", "right_tail_rate",
    "rate_G", "rate_H", "j_gue", "gue_tail_bound", "solve_variational",
    "verify_variational_identity", "first_moment_exponent",
]


@dataclass(frozen=True)
class Shape:
    """Direction ``(s, t)``: space rate and time rate, both positive."""

    s: float
    t: float

    def __post_init__(self):
        if not (self.s > 0 and self.t > 0):
            raise DomainError("shape needs s > 0 and t > 0")

    def __iter__(self):
        return iter((self.s, self.t))

    def scaled(self, c):
        return Shape(c * self.s, c * self.t)


def _shape(s, t):
    if not (s > 0 and t > 0):
        raise DomainError("shape needs s > 0 and t > 0")
    return float(s), float(t)


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


# ---------------------------------------------------------------------------
# free energy and Lyapunov exponents
# ---------------------------------------------------------------------------

def free_energy_minimizer(s, t):
    """The ``theta`` minimizing ``theta t - s digamma(theta)``."""
    s, t = _shape(s, t)
    return sf.inv_trigamma(t / s)


def free_energy(s, t):
    """``rho(s, t) = min_{theta > 0} {theta t - s digamma(theta)}``."""
    s, t = _shape(s, t)
    th = sf.inv_trigamma(t / s)
    return t * th - s * sf.digamma(th)


def first_moment_exponent(s, t):
    """``t/2 + s + s log(t/s)``: growth rate of the first moment."""
    s, t = _shape(s, t)
    return t / 2 + s + s * math.log(t / s)


def lyapunov_minimizer(s, t, xi):
    """Minimizing ``mu`` in the ``xi > 0`` branch of ``lyapunov``.

    Solves ``t xi = s (digamma(mu + xi) - digamma(mu))``; the left side of
    that difference is decreasing in ``mu``, from ``+inf`` down to ``0``.
    """
    s, t = _shape(s, t)
    if _is_scalar(xi):
        return _mu_star_s(s, t, float(xi))
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("the minimizer is defined for xi > 0")
    base = sf.inv_trigamma(t / s)
    out = base - 0.5 * xi
    big = xi >= _SMALL_XI
    if not np.any(big):
        return _out(out)
    xb = xi[big]
    # for large xi the root sits near s / (t xi - s log xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        alt = s / (t * xb - s * np.log(xb))
    mu0 = np.where((xb > 4) & (alt > 0) & (alt < base), alt, base)

    def func(mu):
        return s * (sf.digamma(mu + xb) - sf.digamma(mu))

    def dfunc(mu):
        return s * (sf.trigamma(mu + xb) - sf.trigamma(mu))

    out[big] = solve_monotone_positive(func, dfunc, t * xb, mu0,
                                       increasing=False)
    return _out(out)


# below this the minimizer and the log-gamma ratio use their expansions
# mu = inv_trigamma(t/s) - xi/2 + O(xi^2) and xi digamma(mu + xi/2) + O(xi^3)
_SMALL_XI = 1e-6


def _is_scalar(v):
    return np.ndim(v) == 0 and not isinstance(v, np.ndarray)


def _mu_star_s(s, t, xi):
    if not xi > 0:
        raise DomainError("the minimizer is defined for xi > 0")
    mu0 = sf.inv_trigamma(t / s)
    if xi < _SMALL_XI:
        return mu0 - 0.5 * xi
    if xi > 4:
        alt = s / (t * xi - s * math.log(xi))
        if 0 < alt < mu0:
            mu0 = alt
    dg, tg = sf.digamma, sf.trigamma
    return solve_monotone_positive(
        lambda mu: s * (dg(mu + xi) - dg(mu)),
        lambda mu: s * (tg(mu + xi) - tg(mu)),
        t * xi, mu0, increasing=False)


def _log_gamma_ratio(mu, xi):
    """``log(Gamma(mu + xi) / Gamma(mu))`` without cancellation at tiny xi."""
    if _is_scalar(xi):
        if xi < _SMALL_XI:
            return xi * sf.digamma(mu + 0.5 * xi)
        return sf.log_gamma(mu + xi) - sf.log_gamma(mu)
    mu, xi = np.broadcast_arrays(np.asarray(mu, float), np.asarray(xi, float))
    mid = xi * sf.digamma(np.atleast_1d(mu + 0.5 * xi)).reshape(xi.shape)
    diff = (sf.log_gamma(np.atleast_1d(mu + xi))
            - sf.log_gamma(np.atleast_1d(mu))).reshape(xi.shape)
    return np.where(xi < _SMALL_XI, mid, diff)


def _lyap_pos(s, t, xi, mu):
    return t * (0.5 * xi * xi + xi * mu) - s * _log_gamma_ratio(mu, xi)


def lyapunov(s, t, xi):
    """Moment Lyapunov exponent ``Lambda_{s,t}(xi)`` for real ``xi``.

    Equal to ``xi rho(s,t)`` for ``xi <= 0`` and to
    ``min_{mu > 0} {t (xi^2/2 + xi mu) - s log(Gamma(mu+xi)/Gamma(mu))}``
    for ``xi > 0``.
    """
    s, t = _shape(s, t)
    if _is_scalar(xi):
        xi = float(xi)
        if xi <= 0:
            return xi * free_energy(s, t)
        return _lyap_pos(s, t, xi, _mu_star_s(s, t, xi))
    xi = np.asarray(xi, dtype=float)
    out = xi * free_energy(s, t)
    pos = xi > 0
    if np.any(pos):
        xp = xi[pos] if xi.ndim else xi
        mu = np.asarray(lyapunov_minimizer(s, t, xp))
        val = _lyap_pos(s, t, xp, mu)
        if xi.ndim:
            out[pos] = val
        else:
            out = val
    return _out(out)


def lyapunov_derivative(s, t, xi):
    """``Lambda'(xi)``; equals ``rho`` for ``xi <= 0`` (envelope theorem for
    ``xi > 0``)."""
    s, t = _shape(s, t)
    if _is_scalar(xi) and xi > 0:
        xi = float(xi)
        mu = _mu_star_s(s, t, xi)
        return t * (xi + mu) - s * sf.digamma(mu + xi)
    xi = np.asarray(xi, dtype=float)
    out = np.full(xi.shape, free_energy(s, t))
    pos = xi > 0
    if np.any(pos):
        xp = xi[pos] if xi.ndim else xi
        mu = np.asarray(lyapunov_minimizer(s, t, xp))
        val = t * (xp + mu) - s * sf.digamma(mu + xp)
        if xi.ndim:
            out[pos] = val
        else:
            out = val
    return _out(out)


def _lyapunov_second_derivative(s, t, xi):
    mu = lyapunov_minimizer(s, t, xi)
    p1, q1 = sf.trigamma(mu), sf.trigamma(mu + xi)
    dmu = -(t - s * q1) / (s * (p1 - q1))
    return t * (1 + dmu) - s * q1 * (1 + dmu)


def lyapunov_dual_form(s, t, xi, return_minimizer=False):
    """``min_{theta > xi} {t(theta xi - xi^2/2) + s log(Gamma(theta-xi)/Gamma(theta))}``.

    Computed with :func:`solve_variational`, independently of
    :func:`lyapunov`; the two agree through ``mu = theta - xi``.
    """
    s, t = _shape(s, t)
    xi = float(xi)
    if not xi > 0:
        raise DomainError("the dual form needs xi > 0")
    lg, dg, tg = sf.log_gamma, sf.digamma, sf.trigamma
    spec = VariationalSpec(
        h=lambda th: th * xi - 0.5 * xi * xi,
        g=lambda th: lg(th - xi) - lg(th),
        lower=xi, upper=math.inf, x=t, y=s,
        dh=lambda th: xi, dg=lambda th: dg(th - xi) - dg(th),
        d2h=lambda th: 0.0, d2g=lambda th: tg(th - xi) - tg(th),
        theta0=xi + 1.0,
    )
    theta, value = solve_variational(spec, check=False)
    return (value, theta) if return_minimizer else value


# ---------------------------------------------------------------------------
# generic variational solver
# ---------------------------------------------------------------------------

@dataclass
class VariationalSpec:
    """Objective ``f(theta) = x h(theta) + y g(theta)`` on ``(lower, upper)``.

    ``h`` must be increasing and ``g`` decreasing with ``f`` strictly convex.
    Derivatives are optional; central differences stand in when missing.
    """

    h: object
    g: object
    lower: float
    upper: float
    x: float
    y: float
    dh: object = None
    dg: object = None
    d2h: object = None
    d2g: object = None
    theta0: float = None

    def objective(self, theta):
        return self.x * self.h(theta) + self.y * self.g(theta)

    def _start(self):
        if self.theta0 is not None:
            return float(self.theta0)
        lo, hi = self.lower, self.upper
        if math.isfinite(lo) and math.isfinite(hi):
            return 0.5 * (lo + hi)
        if math.isfinite(lo):
            return lo + 1.0
        if math.isfinite(hi):
            return hi - 1.0
        return 0.0

    def _deriv(self, fn, d, theta, order):
        if d is not None:
            return d(theta)
        e = 1e-4 * max(1.0, abs(theta))
        if order == 1:
            return (fn(theta + e) - fn(theta - e)) / (2 * e)
        return (fn(theta + e) - 2 * fn(theta) + fn(theta - e)) / (e * e)

    def derivative(self, theta):
        return (self.x * self._deriv(self.h, self.dh, theta, 1)
                + self.y * self._deriv(self.g, self.dg, theta, 1))

    def second_derivative(self, theta):
        return (self.x * self._deriv(self.h, self.d2h, theta, 2)
                + self.y * self._deriv(self.g, self.d2g, theta, 2))

    def check(self, n_samples=25):
        """Verify monotonicity of ``h``, ``g`` and convexity of ``f`` at
        sample points; raises ``ValueError`` on violation."""
        if not (self.x > 0 and self.y > 0):
            raise DomainError("x and y must be positive")
        lo, hi = self.lower, self.upper
        a = lo if math.isfinite(lo) else -50.0
        b = hi if math.isfinite(hi) else (a + 50.0 if math.isfinite(lo)
                                          else 50.0)
        pts = np.linspace(a, b, n_samples + 2)[1:-1]
        for th in pts:
            th = float(th)
            e = 1e-5 * max(1.0, abs(th), (b - a) / 1e3)
            e = min(e, 0.25 * (th - a), 0.25 * (b - th))
            dh = (self.h(th + e) - self.h(th - e)) / (2 * e)
            dg = (self.g(th + e) - self.g(th - e)) / (2 * e)
            f0, fp, fm = (self.objective(th), self.objective(th + e),
                          self.objective(th - e))
            if not dh > 0:
                raise ValueError(f"h is not increasing at {th:g}")
            if not dg < 0:
                raise ValueError(f"g is not decreasing at {th:g}")
            if fp - 2 * f0 + fm < -1e-9 * max(1.0, abs(f0)):
                raise ValueError(f"objective is not convex at {th:g}")


def solve_variational(spec, check=True):
    """Return ``(theta_star, value)`` for ``min_{theta in I} spec.objective``.

    Bracketing plus golden section to a ``1e-12`` interval, then one Newton
    step on ``x h' + y g' = 0``.  Raises ``BracketError`` if the objective
    does not rise toward both ends of the window.
    """
    if check:
        spec.check()
    x0 = spec._start()
    lo, hi = spec.lower, spec.upper
    step = 0.5 * min(1.0, (x0 - lo) if math.isfinite(lo) else 1.0,
                     (hi - x0) if math.isfinite(hi) else 1.0)
    theta, value = minimize_convex(
        spec.objective, x0, step, lo, hi,
        df=spec.derivative, d2f=spec.second_derivative)
    return theta, value


# ---------------------------------------------------------------------------
# rate function
# ---------------------------------------------------------------------------

def rate_function(s, t, x):
    """``I_{s,t}(x)``: ``+inf`` below ``rho(s,t)``, else
    ``sup_{xi >= 0} {xi x - Lambda_{s,t}(xi)}``."""
    s, t = _shape(s, t)
    x = float(x)
    rho = free_energy(s, t)
    if x < rho:
        return math.inf
    if x == rho:
        return 0.0

    def neg(xi):
        if xi <= 0:
            return -xi * (x - rho)
        return lyapunov(s, t, xi) - xi * x

    def dneg(xi):
        return lyapunov_derivative(s, t, xi) - x

    def d2neg(xi):
        return _lyapunov_second_derivative(s, t, xi)

    xi, val = minimize_convex(neg, 1.0, 0.5, lower=0.0, df=dneg, d2f=d2neg)
    return max(0.0, -val)


def right_tail_rate(s, t, x_min, x_max, n_points, n_xi=1000):
    """Right-tail rate ``J_{s,t}`` sampled on a uniform grid.

    ``J`` is zero up to ``rho(s,t)`` and equals the conjugate of the
    Lyapunov exponent above it.  The slope window ``[0, Xi]`` is doubled
    until the maximizing slope at ``x_max`` sits below ``0.9 Xi``.
    """
    s, t = _shape(s, t)
    rho = free_energy(s, t)
    xi_max = 2.0
    for _ in range(60):
        if lyapunov_derivative(s, t, 0.9 * xi_max) > x_max:
            break
        xi_max *= 2.0
    xi = np.linspace(0.0, xi_max, n_xi)
    lam = SampledFunction(0.0, xi_max, lyapunov(s, t, xi))
    conj = legendre_transform(lam, x_min, x_max, n_points)
    grid = conj.grid
    vals = np.where(grid <= rho, 0.0, np.maximum(conj.values, 0.0))
    # the lower end xi = 0 is the true edge of the domain, not a truncation
    flags = np.where(conj.flags > 0, 1, 0)
    return SampledFunction(x_min, x_max, vals, flags)


# ---------------------------------------------------------------------------
# stationary-model rate functions
# ---------------------------------------------------------------------------

def stationary_rate_U(s, theta, x):
    """``U_s^theta(x)``: right-tail Cramer rate of ``r_1 + ... + r_{ns}``.

    Zero for ``x <= -s digamma(theta)``; for ``s = 0`` it is
    ``theta max(x, 0)``.
    """
    if not (s >= 0 and theta > 0):
        raise DomainError("need s >= 0 and theta > 0")
    x = np.asarray(x, dtype=float)
    if s == 0:
        return _out(theta * np.maximum(x, 0.0))
    x0 = -s * sf.digamma(float(theta))
    out = np.zeros(x.shape)
    m = x > x0
    if np.any(m):
        xm = x[m] if x.ndim else x
        y = np.asarray(sf.inv_digamma(-xm / s))
        val = (xm * (theta - y)
               + s * (sf.log_gamma(float(theta)) - sf.log_gamma(y)))
        if x.ndim:
            out[m] = val
        else:
            out = val
    return _out(np.maximum(out, 0.0))


def brownian_rate_R(t, theta, x):
    """``R_t^theta(x) = (x + theta t)^2 / (2t)`` above ``-theta t``, else 0."""
    if not (t > 0 and theta > 0):
        raise DomainError("need t > 0 and theta > 0")
    x = np.asarray(x, dtype=float)
    z = np.maximum(x + theta * t, 0.0)
    return _out(0.5 * z * z / t)


def dual_U_star(s, theta, xi):
    """Conjugate of ``U_s^theta``: ``s log(Gamma(theta-xi)/Gamma(theta))`` on
    ``[0, theta)``, ``+inf`` elsewhere."""
    if not (s >= 0 and theta > 0):
        raise DomainError("need s >= 0 and theta > 0")
    xi = np.asarray(xi, dtype=float)
    ok = (xi >= 0) & (xi < theta)
    arg = np.where(ok, theta - xi, 1.0)
    val = s * (sf.log_gamma(np.atleast_1d(arg))
               - sf.log_gamma(float(theta)))
    val = val.reshape(xi.shape)
    return _out(np.where(ok, val, np.inf))


def dual_R_star(t, theta, xi):
    """Conjugate of ``R_t^theta``: ``t(xi^2/2 - theta xi)`` for ``xi >= 0``."""
    if not (t > 0 and theta > 0):
        raise DomainError("need t > 0 and theta > 0")
    xi = np.asarray(xi, dtype=float)
    return _out(np.where(xi >= 0, t * (0.5 * xi * xi - theta * xi), np.inf))


# ---------------------------------------------------------------------------
# infimal convolutions G and H
# ---------------------------------------------------------------------------

_PAD = 1.0
_STEP = 0.01


def _n(lo, hi, step):
    return max(3, int(math.ceil((hi - lo) / step)) + 1)


def rate_G(a, s, t, theta, x, step=_STEP):
    """``G_a = R_{t-a}^theta □ J_{s,t-a}`` at the points ``x``, ``0 <= a < t``.

    Computed on grids of spacing ``step``; returns an array shaped like
    ``x``.
    """
    s, t = _shape(s, t)
    if not 0 <= a < t:
        raise DomainError("need 0 <= a < t")
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    tau = t - a
    rho = free_energy(s, tau)
    r0 = -theta * tau
    hi = float(xs.max())
    if hi <= rho + r0:
        return _out(np.zeros(x.shape))
    y_lo, y_hi = rho - _PAD, hi - r0 + _PAD
    J = right_tail_rate(s, tau, y_lo, y_hi, _n(y_lo, y_hi, step))
    z_lo, z_hi = r0 - _PAD, hi - y_lo + _PAD
    R = SampledFunction.from_callable(
        lambda z: brownian_rate_R(tau, theta, z), z_lo, z_hi,
        _n(z_lo, z_hi, step))
    vals, _, _ = inf_convolution_at(R, J, xs)
    return _out(np.where(xs <= rho + r0, 0.0, vals).reshape(x.shape))


def rate_H(u, v, s, t, theta, x, step=_STEP):
    """``H_{u,v} = R_t^theta □ U_u^theta □ J_{s-v,t}`` at the points ``x``.

    Requires ``0 <= u <= s`` and ``0 <= v < s``.
    """
    s, t = _shape(s, t)
    if not (0 <= u <= s and 0 <= v < s):
        raise DomainError("need 0 <= u <= s and 0 <= v < s")
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    sv = s - v
    rho = free_energy(sv, t)
    r0 = -theta * t
    u0 = -u * sf.digamma(float(theta)) if u > 0 else 0.0
    hi = float(xs.max())
    zero_below = rho + r0 + u0
    if hi <= zero_below:
        return _out(np.zeros(x.shape))
    j_lo, j_hi = rho - _PAD, hi - r0 - u0 + 2 * _PAD
    J = right_tail_rate(sv, t, j_lo, j_hi, _n(j_lo, j_hi, step))
    u_lo, u_hi = u0 - _PAD, hi - r0 - j_lo + _PAD
    U = SampledFunction.from_callable(
        lambda z: stationary_rate_U(u, theta, z), u_lo, u_hi,
        _n(u_lo, u_hi, step))
    w_lo, w_hi = u0 + rho - _PAD, hi - r0 + _PAD
    W = U_J = inf_convolution_at(U, J, np.linspace(w_lo, w_hi,
                                                   _n(w_lo, w_hi, step)))
    W = SampledFunction(w_lo, w_hi, U_J[0])
    z_lo, z_hi = r0 - _PAD, hi - w_lo + _PAD
    R = SampledFunction.from_callable(
        lambda z: brownian_rate_R(t, theta, z), z_lo, z_hi,
        _n(z_lo, z_hi, step))
    vals, _, _ = inf_convolution_at(R, W, xs)
    return _out(np.where(xs <= zero_below, 0.0, vals).reshape(x.shape))


def verify_variational_identity(s, t, theta, x_grid, n_a=200, margin=1 / 50,
                                tol=5e-3, step=_STEP):
    """Compare ``U_s^theta`` with ``min(inf_a G_a, inf_a H_{a,a})``.

    The infima run over uniform ``a``-grids of ``n_a`` points on
    ``[0, t(1 - margin)]`` and ``[0, s(1 - margin)]``.
    """
    s, t = _shape(s, t)
    x = np.asarray(x_grid, dtype=float)
    lhs = np.asarray(stationary_rate_U(s, theta, x), dtype=float)
    best_g = np.full(x.shape, np.inf)
    best_h = np.full(x.shape, np.inf)
    arg_g = np.zeros(x.shape)
    arg_h = np.zeros(x.shape)
    for a in np.linspace(0.0, t * (1 - margin), n_a):
        g = np.asarray(rate_G(a, s, t, theta, x, step=step))
        better = g < best_g
        best_g = np.where(better, g, best_g)
        arg_g = np.where(better, a, arg_g)
    for a in np.linspace(0.0, s * (1 - margin), n_a):
        h = np.asarray(rate_H(a, a, s, t, theta, x, step=step))
        better = h < best_h
        best_h = np.where(better, h, best_h)
        arg_h = np.where(better, a, arg_h)
    rhs = np.minimum(best_g, best_h)
    resid = np.abs(lhs - rhs)
    report = VerificationReport(
        "variational_identity",
        provenance={"s": s, "t": t, "theta": theta, "n_a": n_a,
                    "margin": margin, "grid_step": step,
                    "x_min": float(x.min()), "x_max": float(x.max()),
                    "n_x": int(x.size)})
    for xi, r, l, rr, ag, ah, bg, bh in zip(x, resid, lhs, rhs, arg_g,
                                            arg_h, best_g, best_h):
        side = "G" if bg <= bh else "H"
        report.add(f"x={xi:.6g}", r, tol, U=float(l), min_GH=float(rr),
                   side=side, argmin_a=float(ag if side == "G" else ah))
    return report


# ---------------------------------------------------------------------------
# GUE tail
# ---------------------------------------------------------------------------

def j_gue(r):
    """``4 * integral_0^r sqrt(x (x + 2)) dx`` in closed form."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("j_gue needs r >= 0")
    q = np.sqrt(r * (r + 2.0))
    return _out(2.0 * ((r + 1.0) * q - np.log1p(r + q)))


def gue_tail_bound(s, t, r):
    """Lower bound ``s J_GUE(...)`` on the right-tail rate at level ``r``.

    Returns ``None`` when the hypothesis
    ``r - s log t - s + s log s > 2 sqrt(ts)`` fails.
    """
    s, t = _shape(s, t)
    lead = r - s * math.log(t) - s + s * math.log(s)
    root = 2.0 * math.sqrt(t * s)
    if not lead > root:
        return None
    return s * j_gue(lead / root - 1.0)
