"""Real-argument gamma-family functions.

All functions accept floats or numpy arrays of strictly positive reals and
return the same shape.  Small arguments are shifted upward with the
recurrences until they reach ``SHIFT_TO``; the asymptotic series then take
over.  No external special-function library is used.
"""

import math

import numpy as np

from ._solvers import solve_monotone_positive
from .errors import DomainError

__all__ = [
    "log_gamma", "digamma", "trigamma", "tetragamma",
    "inv_digamma", "inv_trigamma", "gamma_cdf", "EULER_GAMMA",
]

EULER_GAMMA = 0.57721566490153286061
SHIFT_TO = 10.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Bernoulli numbers B_2 .. B_16.
_B2K = np.array([1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730,
                 7 / 6, -3617 / 510])
_K2 = 2.0 * np.arange(1, 9)

# Series coefficients in powers of 1/x^2 for each function.
_LGAMMA_C = _B2K / (_K2 * (_K2 - 1.0))       # times x^-(2k-1)
_DIGAMMA_C = _B2K / _K2                      # times x^-2k
_TRIGAMMA_C = _B2K                           # times x^-(2k+1)
_TETRAGAMMA_C = (_K2 + 1.0) * _B2K           # times x^-(2k+2)
_LGAMMA_C_S, _DIGAMMA_C_S, _TRIGAMMA_C_S, _TETRAGAMMA_C_S = (
    c.tolist() for c in (_LGAMMA_C, _DIGAMMA_C, _TRIGAMMA_C, _TETRAGAMMA_C))


def _positive(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):   # also rejects nan
        raise DomainError("argument must be strictly positive")
    return arr


def _poly_inv_sq(coef, z):
    """Evaluate sum_k coef[k] * z^(-2k) for k = 1..len(coef) (Horner)."""
    w = 1.0 / (z * z)
    acc = coef[-1] * w
    for c in coef[-2::-1]:
        acc = (acc + c) * w
    return acc


def _shift(x):
    """Shift counts bringing every entry to at least ``SHIFT_TO``."""
    n = np.maximum(np.ceil(SHIFT_TO - x), 0.0)
    return n, x + n


def _shift_sum(x, n, term):
    """sum_{i < n} term(x + i), elementwise, with n varying per entry."""
    acc = np.zeros_like(x)
    for i in range(int(n.max(initial=0.0))):
        m = i < n
        acc = acc + np.where(m, term(x + i), 0.0)
    return acc


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


# Scalar fast paths: the same algorithms on Python floats, used by the
# scalar minimizers where numpy call overhead would dominate.

def _check_scalar(x):
    x = float(x)
    if not x > 0:
        raise DomainError("argument must be strictly positive")
    return x


def _series_s(coef, z):
    w = 1.0 / (z * z)
    acc = 0.0
    for c in coef[::-1]:
        acc = (acc + c) * w
    return acc


def _log_gamma_s(x):
    prod = 1.0
    logprod = 0.0
    while x < SHIFT_TO:
        prod *= x
        x += 1.0
        if prod > 1e200:
            logprod += math.log(prod)
            prod = 1.0
    logprod += math.log(prod)
    series = _series_s(_LGAMMA_C_S, x) * x
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series - logprod


def _digamma_s(x):
    acc = 0.0
    while x < SHIFT_TO:
        acc += 1.0 / x
        x += 1.0
    return math.log(x) - 0.5 / x - _series_s(_DIGAMMA_C_S, x) - acc


def _trigamma_s(x):
    acc = 0.0
    while x < SHIFT_TO:
        acc += 1.0 / (x * x)
        x += 1.0
    return 1.0 / x + 0.5 / (x * x) + _series_s(_TRIGAMMA_C_S, x) / x + acc


def _tetragamma_s(x):
    acc = 0.0
    while x < SHIFT_TO:
        acc += 2.0 / (x * x * x)
        x += 1.0
    z2 = x * x
    return -1.0 / z2 - 1.0 / (z2 * x) - _series_s(_TETRAGAMMA_C_S, x) / z2 - acc


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    if np.ndim(x) == 0 and not isinstance(x, np.ndarray):
        return _log_gamma_s(_check_scalar(x))
    x = _positive(x)
    n, z = _shift(x)
    # log of the rising product x (x+1) ... (x+n-1), accumulated as a product
    # in chunks to stay clear of overflow while keeping one rounding per log.
    logprod = np.zeros_like(x)
    prod = np.ones_like(x)
    for i in range(int(n.max(initial=0.0))):
        m = i < n
        prod = np.where(m, prod * (x + i), prod)
        if i % 8 == 7:
            logprod += np.log(prod)
            prod = np.ones_like(x)
    logprod += np.log(prod)
    series = _poly_inv_sq(_LGAMMA_C, z) * z
    big = (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series
    return _out(big - logprod)


def digamma(x):
    """Digamma function, the derivative of ``log_gamma``."""
    if np.ndim(x) == 0 and not isinstance(x, np.ndarray):
        return _digamma_s(_check_scalar(x))
    x = _positive(x)
    n, z = _shift(x)
    small = _shift_sum(x, n, lambda y: 1.0 / y)
    big = np.log(z) - 0.5 / z - _poly_inv_sq(_DIGAMMA_C, z)
    return _out(big - small)


def trigamma(x):
    """Trigamma function, the derivative of ``digamma``; always positive."""
    if np.ndim(x) == 0 and not isinstance(x, np.ndarray):
        return _trigamma_s(_check_scalar(x))
    x = _positive(x)
    n, z = _shift(x)
    small = _shift_sum(x, n, lambda y: 1.0 / (y * y))
    big = 1.0 / z + 0.5 / (z * z) + _poly_inv_sq(_TRIGAMMA_C, z) / z
    return _out(big + small)


def tetragamma(x):
    """Tetragamma function, the derivative of ``trigamma``; always negative."""
    if np.ndim(x) == 0 and not isinstance(x, np.ndarray):
        return _tetragamma_s(_check_scalar(x))
    x = _positive(x)
    n, z = _shift(x)
    small = _shift_sum(x, n, lambda y: 2.0 / (y * y * y))
    z2 = z * z
    big = -1.0 / z2 - 1.0 / (z2 * z) - _poly_inv_sq(_TETRAGAMMA_C, z) / z2
    return _out(big - small)


def inv_digamma(y):
    """Inverse of ``digamma`` on ``(0, inf)``; defined for every real ``y``.

    Raises ``IterationError`` if the bracketed Newton iteration fails to
    converge within its budget.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("inv_digamma needs a finite argument")
    with np.errstate(over="ignore", divide="ignore"):
        x0 = np.where(y >= -2.0, np.exp(np.minimum(y, 700.0)) + 0.5,
                      -1.0 / (y + EULER_GAMMA))
    x = solve_monotone_positive(digamma, trigamma, y, x0, increasing=True)
    return _out(np.asarray(x))


def inv_trigamma(y):
    """Inverse of ``trigamma``; requires ``y > 0``."""
    y = _positive(y)
    # trigamma(x) ~ 1/x + 1/(2x^2) for large x, ~ 1/x^2 for small x
    x0 = np.where(y <= 1.0, 1.0 / y + 0.5, 1.0 / np.sqrt(y))
    x = solve_monotone_positive(trigamma, tetragamma, y, x0, increasing=False)
    return _out(np.asarray(x))


def _gamma_p_s(a, x):
    if x <= 0.0:
        return 0.0
    log_pref = a * math.log(x) - x - _log_gamma_s(a)
    if x < a + 1.0:
        # power series
        term = total = 1.0 / a
        ap = a
        for _ in range(1000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, total * math.exp(log_pref))
    # continued fraction for the upper tail (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(log_pref) * h)


def gamma_cdf(x, shape):
    """CDF of the Gamma(``shape``, 1) law (regularized lower incomplete
    gamma function)."""
    shape = _check_scalar(shape)
    x = np.asarray(x, dtype=float)
    out = np.array([_gamma_p_s(shape, float(v)) for v in x.ravel()])
    return _out(out.reshape(x.shape))
