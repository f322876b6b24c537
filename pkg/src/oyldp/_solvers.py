"""Bracketed one-dimensional solvers.

Two tools live here: a vectorized safeguarded Newton iteration for monotone
equations on the positive half-line, and a scalar golden-section minimizer
with geometric bracket expansion.
"""

import math

import numpy as np

from .errors import BracketError, IterationError

MAX_ITER = 200
_EPS = np.finfo(float).eps
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def solve_monotone_positive(func, dfunc, target, x0, increasing=True,
                            max_iter=MAX_ITER):
    """Solve ``func(x) = target`` for ``x > 0`` elementwise.

    ``func`` must be strictly monotone on ``(0, inf)`` with the root inside.
    The bracket is grown geometrically from ``x0``; inside it Newton steps
    are accepted when they stay in the bracket, otherwise the geometric
    midpoint is taken.
    """
    if np.ndim(target) == 0 and np.ndim(x0) == 0:
        return _solve_scalar(func, dfunc, float(target), float(x0),
                             increasing, max_iter)
    target = np.asarray(target, dtype=float)
    x = np.broadcast_to(np.asarray(x0, dtype=float), target.shape).copy()
    sign = 1.0 if increasing else -1.0

    def resid(z):
        return sign * (func(z) - target)

    lo = x.copy()
    hi = x.copy()
    budget = max_iter
    r_lo = resid(lo)
    while np.any(r_lo > 0):
        m = r_lo > 0
        lo[m] *= 0.5
        r_lo = resid(lo)
        budget -= 1
        if budget <= 0:
            raise IterationError("could not bracket root from below")
    r_hi = resid(hi)
    while np.any(r_hi < 0):
        m = r_hi < 0
        hi[m] *= 2.0
        r_hi = resid(hi)
        budget -= 1
        if budget <= 0:
            raise IterationError("could not bracket root from above")

    x = np.clip(x, lo, hi)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        r = resid(x)
        done |= r == 0.0
        lo = np.where(r < 0, x, lo)
        hi = np.where(r > 0, x, hi)
        d = sign * dfunc(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - r / d
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        x_new = np.where(inside, step, np.sqrt(lo * hi))
        conv = np.abs(x_new - x) <= 4.0 * _EPS * np.abs(x)
        conv |= (hi - lo) <= 4.0 * _EPS * hi
        x = np.where(done, x, x_new)
        done |= conv
        if np.all(done):
            return x if x.ndim else float(x)
    raise IterationError(f"no convergence in {max_iter} iterations")


def _solve_scalar(func, dfunc, target, x, increasing, max_iter):
    """Scalar twin of :func:`solve_monotone_positive` on Python floats."""
    sign = 1.0 if increasing else -1.0
    lo = hi = x
    budget = max_iter
    while sign * (func(lo) - target) > 0:
        lo *= 0.5
        budget -= 1
        if budget <= 0:
            raise IterationError("could not bracket root from below")
    while sign * (func(hi) - target) < 0:
        hi *= 2.0
        budget -= 1
        if budget <= 0:
            raise IterationError("could not bracket root from above")
    x = min(max(x, lo), hi)
    for _ in range(max_iter):
        r = sign * (func(x) - target)
        if r == 0.0:
            return x
        if r < 0:
            lo = x
        else:
            hi = x
        d = sign * dfunc(x)
        step = x - r / d if d != 0 else math.nan
        x_new = step if lo < step < hi else math.sqrt(lo * hi)
        if (abs(x_new - x) <= 4.0 * _EPS * abs(x)
                or hi - lo <= 4.0 * _EPS * hi):
            return x_new
        x = x_new
    raise IterationError(f"no convergence in {max_iter} iterations")


def bracket_minimum(f, x0, step, lower=-math.inf, upper=math.inf,
                    max_iter=MAX_ITER):
    """Grow a bracket ``(a, b, c)`` with ``f(b) <= min(f(a), f(c))``.

    Points are kept strictly inside ``(lower, upper)``; approaching an open
    end is done by halving the distance to it.
    """

    def move(x, direction, h):
        y = x + direction * h
        if direction > 0 and y >= upper:
            y = x + 0.5 * (upper - x)
        if direction < 0 and y <= lower:
            y = x - 0.5 * (x - lower)
        return y

    b = x0
    fb = f(b)
    a = move(b, -1, step)
    c = move(b, 1, step)
    fa, fc = f(a), f(c)
    h = step
    for _ in range(max_iter):
        if fb <= fa and fb <= fc:
            return a, b, c
        h *= 2.0
        if fa < fb:
            c, fc = b, fb
            b, fb = a, fa
            a = move(b, -1, h)
            fa = f(a)
        else:
            a, fa = b, fb
            b, fb = c, fc
            c = move(b, 1, h)
            fc = f(c)
        if a == b or b == c:
            break
    raise BracketError("function does not increase toward both ends of "
                       "the search window")


def golden_section(f, a, c, tol=1e-12, max_iter=MAX_ITER):
    """Golden-section search for the minimum of ``f`` on ``[a, c]``."""
    x1 = c - _INVPHI * (c - a)
    x2 = a + _INVPHI * (c - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(c - a) <= tol * max(1.0, abs(x1) + abs(x2)):
            break
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - _INVPHI * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (c - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def minimize_convex(f, x0, step, lower=-math.inf, upper=math.inf,
                    df=None, d2f=None, tol=1e-12, newton_steps=4):
    """Minimize a strictly convex scalar function.

    Bracketing and golden section down to a ``tol`` interval, then a few
    safeguarded Newton steps on ``df = 0`` when derivatives are available.
    Function values cannot locate a flat minimum better than about
    ``sqrt(eps)``, so a Newton step is kept when it stays inside the bracket
    and shrinks ``|df|``.
    """
    a, _, c = bracket_minimum(f, x0, step, lower, upper)
    x, fx = golden_section(f, a, c, tol=tol)
    if df is None or d2f is None:
        return x, fx
    g = df(x)
    for _ in range(newton_steps):
        curv = d2f(x)
        if not (curv > 0 and math.isfinite(curv)) or g == 0:
            break
        y = x - g / curv
        if not (a < y < c and lower < y < upper):
            break
        gy = df(y)
        if not abs(gy) < abs(g):
            break
        x, g = y, gy
    return x, f(x)
