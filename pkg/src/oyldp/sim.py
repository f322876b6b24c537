"""Brownian environments on a time grid and the partition functions built
on them.

An :class:`EnvGrid` holds the increments of the line Brownian motions
``B_0, B_1, ...`` on ``[0, horizon]`` and on a negative-time segment
``[-trunc_T, 0]``, plus the boundary Brownian motion ``B`` used by the
stationary model.  Every random stream is a Philox generator keyed by the
seed and addressed by ``(kind, block, line, replicate)``, so a line's path
does not depend on how many other lines, replicates or threads exist.

Nested integrals are evaluated by a streaming log-domain trapezoid rule: one
cumulative log-sum-exp sweep per line, linear in the number of grid nodes.
The ``_*_batch`` helpers operate on stacks of replicates and are shared with
:mod:`oyldp.mc`.
"""

import json
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationWarning
from .reports import VerificationReport

__all__ = [
    "EnvGrid", "sample_environment", "zero_environment", "log_partition",
    "log_partition_curve", "stationary_r_sequence", "stationary_log_partition",
    "verify_stationary_decomposition", "brownian_lpp_max",
    "sample_gue_top_eigenvalue", "sample_gue_matrix", "default_trunc_T",
    "TRUNCATION_RTOL",
]

TRUNCATION_RTOL = 1e-8
_LOG2 = math.log(2.0)
_MAGIC = b"OYENV\0"
_VERSION = 1
_HEADER = struct.Struct("<6sIQQIQQdddB")

# stream kinds
_LINE, _BOUNDARY, _GUE = 0, 1, 2
# time blocks
_POS, _NEG = 0, 1


def _generator(seed, kind, block, line, replicate):
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    key = [seed, (kind << 32) | block]
    return np.random.Generator(
        np.random.Philox(key=key, counter=[0, 0, line, int(replicate)]))


def default_trunc_T(theta):
    """Default truncation ``max(30/theta, 10)`` of the stationary integral."""
    return max(30.0 / theta, 10.0)


def _n_steps(length, step, what):
    n = int(round(length / step))
    if abs(n * step - length) > 1e-9 * max(1.0, length):
        raise DomainError(f"{what} must be a multiple of step")
    return n


@dataclass(frozen=True, eq=False)
class EnvGrid:
    """Increments of ``n_lines`` Brownian lines and a boundary motion.

    ``increments[k, i]`` is ``B_k`` over ``[i step, (i+1) step]``;
    ``neg_increments[k, i]`` covers ``[-trunc_T + i step, -trunc_T +
    (i+1) step]``; ``boundary_increments`` runs over the whole grid
    ``[-trunc_T, horizon]`` in time order, or is ``None``.
    """

    n_lines: int
    horizon: float
    step: float
    trunc_T: float
    increments: np.ndarray
    neg_increments: np.ndarray
    boundary_increments: np.ndarray
    seed: int
    replicate: int = 0

    def __post_init__(self):
        for name in ("increments", "neg_increments", "boundary_increments"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.increments.shape != (self.n_lines, self.n_steps):
            raise DomainError("increments do not match n_lines/horizon/step")
        if self.neg_increments.shape != (self.n_lines, self.n_neg):
            raise DomainError("neg_increments do not match trunc_T/step")
        b = self.boundary_increments
        if b is not None and b.shape != (self.n_neg + self.n_steps,):
            raise DomainError("boundary_increments have the wrong length")

    @property
    def n_steps(self):
        return int(round(self.horizon / self.step))

    @property
    def n_neg(self):
        return int(round(self.trunc_T / self.step))

    @property
    def origin(self):
        """Index of time 0 in :attr:`times`."""
        return self.n_neg

    @property
    def times(self):
        return self.step * np.arange(-self.n_neg, self.n_steps + 1)

    def node(self, time):
        """Grid index of ``time``; raises ``DomainError`` off the grid."""
        p = time / self.step
        i = int(round(p))
        if abs(i - p) > 1e-7 or not -self.n_neg <= i <= self.n_steps:
            raise DomainError(f"time {time!r} is not a grid node")
        return i + self.n_neg

    def line_paths(self, lines=None):
        """Paths ``B_k`` on :attr:`times`, pinned to ``0`` at time ``0``."""
        lines = slice(None) if lines is None else lines
        return _paths(self.neg_increments[lines], self.increments[lines])

    def boundary_path(self):
        if self.boundary_increments is None:
            raise DomainError("environment has no boundary motion")
        b = self.boundary_increments
        return _paths(b[:self.n_neg], b[self.n_neg:])

    def coarsen(self, factor):
        """The same Brownian paths sampled on a grid ``factor`` times
        coarser."""
        factor = int(factor)
        if factor < 1 or self.n_steps % factor or self.n_neg % factor:
            raise DomainError("grid sizes must be divisible by factor")

        def agg(a):
            return a.reshape(a.shape[:-1] + (-1, factor)).sum(axis=-1)

        b = self.boundary_increments
        return EnvGrid(self.n_lines, self.horizon, self.step * factor,
                       self.trunc_T, agg(self.increments),
                       agg(self.neg_increments),
                       None if b is None else agg(b), self.seed,
                       self.replicate)

    # -- serialization -----------------------------------------------------

    def manifest(self):
        return {"format": "oyldp-envgrid", "version": _VERSION,
                "seed": self.seed, "replicate": self.replicate,
                "n_lines": self.n_lines, "n_steps": self.n_steps,
                "n_neg": self.n_neg, "step": self.step,
                "horizon": self.horizon, "trunc_T": self.trunc_T,
                "boundary": self.boundary_increments is not None,
                "byte_order": "little", "dtype": "float64",
                "layout": ["increments", "neg_increments",
                           "boundary_increments"]}

    def to_bytes(self):
        b = self.boundary_increments
        head = _HEADER.pack(_MAGIC, _VERSION, self.seed, self.replicate,
                            self.n_lines, self.n_steps, self.n_neg,
                            self.step, self.horizon, self.trunc_T,
                            b is not None)
        parts = [self.increments, self.neg_increments]
        if b is not None:
            parts.append(b)
        body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes()
                        for p in parts)
        return head + body

    @classmethod
    def from_bytes(cls, data):
        (magic, version, seed, rep, n_lines, n_steps, n_neg, step, horizon,
         trunc_T, has_b) = _HEADER.unpack_from(data)
        if magic != _MAGIC or version != _VERSION:
            raise ValueError("not an environment container of this version")
        pay = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        n_pos, n_nb = n_lines * n_steps, n_lines * n_neg
        want = n_pos + n_nb + (n_neg + n_steps if has_b else 0)
        if pay.size != want:
            raise ValueError("payload size does not match header")
        inc = pay[:n_pos].reshape(n_lines, n_steps)
        neg = pay[n_pos:n_pos + n_nb].reshape(n_lines, n_neg)
        b = pay[n_pos + n_nb:] if has_b else None
        return cls(n_lines, horizon, step, trunc_T, inc, neg, b, seed, rep)

    def save(self, path):
        """Write ``path`` (binary) and ``path + '.json'`` (manifest)."""
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())
        with open(str(path) + ".json", "w") as fh:
            json.dump(self.manifest(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _paths(neg, pos):
    """Cumulative paths over ``[-T, horizon]`` with value 0 at time 0."""
    left = -np.cumsum(neg[..., ::-1], axis=-1)[..., ::-1]
    zero = np.zeros(pos.shape[:-1] + (1,))
    return np.concatenate([left, zero, np.cumsum(pos, axis=-1)], axis=-1)


def sample_environment(n_lines, horizon, step, trunc_T=0.0, seed=0,
                       replicate=0, boundary=True):
    """Draw an :class:`EnvGrid` from the counter-based streams.

    Each line, the boundary motion, and the positive and negative time
    blocks have their own stream; negative-time increments are drawn
    outward from time 0, so enlarging ``trunc_T`` or ``horizon`` extends the
    same paths.
    """
    if int(n_lines) != n_lines or n_lines < 1:
        raise DomainError("n_lines must be a positive integer")
    if not (horizon > 0 and step > 0 and step <= horizon / 4):
        raise DomainError("need horizon > 0 and 0 < step <= horizon/4")
    if not trunc_T >= 0:
        raise DomainError("trunc_T must be nonnegative")
    n_lines = int(n_lines)
    n_pos = _n_steps(horizon, step, "horizon")
    n_neg = _n_steps(trunc_T, step, "trunc_T")
    sd = math.sqrt(step)
    inc = np.empty((n_lines, n_pos))
    neg = np.empty((n_lines, n_neg))
    for k in range(n_lines):
        inc[k] = _generator(seed, _LINE, _POS, k, replicate).standard_normal(
            n_pos)
        if n_neg:
            neg[k] = _generator(seed, _LINE, _NEG, k,
                                replicate).standard_normal(n_neg)[::-1]
    b = None
    if boundary:
        bpos = _generator(seed, _BOUNDARY, _POS, 0,
                          replicate).standard_normal(n_pos)
        bneg = (_generator(seed, _BOUNDARY, _NEG, 0,
                           replicate).standard_normal(n_neg)[::-1]
                if n_neg else np.empty(0))
        b = np.concatenate([bneg, bpos]) * sd
    return EnvGrid(n_lines, n_pos * step, float(step), n_neg * step,
                   inc * sd, neg * sd, b, int(seed), int(replicate))


def zero_environment(n_lines, horizon, step, trunc_T=0.0):
    """Environment with every increment equal to zero."""
    n_pos = _n_steps(horizon, step, "horizon")
    n_neg = _n_steps(trunc_T, step, "trunc_T")
    return EnvGrid(int(n_lines), n_pos * step, float(step), n_neg * step,
                   np.zeros((n_lines, n_pos)), np.zeros((n_lines, n_neg)),
                   np.zeros(n_neg + n_pos), 0, 0)


# ---------------------------------------------------------------------------
# log-domain quadrature kernels (batched over leading axes)
# ---------------------------------------------------------------------------

def _log_cumtrap(a, step):
    """``log`` of the cumulative trapezoid integral of ``exp(a)``.

    Entry ``m`` integrates over nodes ``0..m``; entry 0 is ``-inf``.
    """
    lead = a[..., :1] - _LOG2
    acc = np.logaddexp.accumulate(
        np.concatenate([lead, a[..., 1:]], axis=-1), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = acc + np.log1p(-0.5 * np.exp(a - acc)) + math.log(step)
    out[..., 0] = -np.inf
    return np.where(acc == -np.inf, -np.inf, out)


def _log_rev_cumtrap(a, step):
    """Reverse cumulative version: entry ``m`` integrates nodes ``m..end``."""
    return _log_cumtrap(a[..., ::-1], step)[..., ::-1]


def _forward_batch(W, step, log_init=None):
    """Forward sweep of the nested integral.

    ``W[..., k, i]`` is line ``k`` relative to the start node.  Returns
    ``log f`` for the last line at every node, where ``f_0 = exp(W_0)`` (or
    ``exp(log_init)`` times nothing when ``log_init`` is given, in which case
    every line of ``W`` is integrated) and
    ``f_k(m) = int_0^m f_{k-1}(v) exp(W_k(m) - W_k(v)) dv``.
    """
    if log_init is None:
        ell, rest = W[..., 0, :], range(1, W.shape[-2])
    else:
        ell, rest = log_init, range(W.shape[-2])
    for k in rest:
        wk = W[..., k, :]
        ell = wk + _log_cumtrap(ell - wk, step)
    return ell


def _backward_batch(W, step):
    """``log Z_{k,n}(u, end)`` as a function of the start node ``u`` for
    every line ``k`` (returned with the same shape as ``W``)."""
    out = np.empty_like(W)
    n = W.shape[-2]
    last = W[..., n - 1, :]
    ell = last[..., -1:] - last
    out[..., n - 1, :] = ell
    for k in range(n - 2, -1, -1):
        wk = W[..., k, :]
        ell = -wk + _log_rev_cumtrap(wk + ell, step)
        out[..., k, :] = ell
    return out


def _log_partition_batch(W, step):
    """``log Z_{0, L-1}(0, end)`` for paths ``W[..., L, nodes]`` pinned at
    the first node."""
    W = W - W[..., :1]
    if W.shape[-2] == 1:
        return W[..., 0, -1]
    return _forward_batch(W, step)[..., -1]


def _lpp_batch(W):
    """Brownian last-passage value over ``W[..., L, nodes]`` (pinned at the
    first node), maximizing over grid split points."""
    W = W - W[..., :1]
    m = W[..., 0, :]
    for k in range(1, W.shape[-2]):
        wk = W[..., k, :]
        m = wk + np.maximum.accumulate(m - wk, axis=-1)
    return m[..., -1]


def _stationary_r_batch(B, L, theta, step, origin, at):
    """Queue recursion on stacked paths.

    ``B[..., i]`` is the boundary path and ``L[..., k, i]`` lines
    ``1..k_max`` on a grid starting at ``-T``; ``origin`` indexes time 0 and
    ``at`` the evaluation node.  Returns ``(r, remainder)`` with ``r[..., k]``
    the value of ``r_{k+1}`` at ``at`` and ``remainder`` the largest relative
    tail-mass estimate over lines.
    """
    v = step * (np.arange(B.shape[-1]) - origin)
    Y = B
    r_out = []
    rem = np.zeros(B.shape[:-1])
    for k in range(L.shape[-2]):
        bk = L[..., k, :]
        a = -Y + theta * v - bk
        lt = _log_cumtrap(a, step)
        with np.errstate(invalid="ignore"):
            r = np.where(lt == -np.inf, -np.inf, Y - theta * v + bk + lt)
        # mass beyond -T, with the integrand decaying like exp(theta v)
        first = np.argmax(np.isfinite(a), axis=-1)
        a_first = np.take_along_axis(a, first[..., None], axis=-1)[..., 0]
        with np.errstate(invalid="ignore"):
            rem = np.maximum(rem, np.exp(a_first - lt[..., at]) / theta)
        r_out.append(r[..., at])
        with np.errstate(invalid="ignore"):
            Y = np.where(r == -np.inf, np.inf, Y + r[..., origin:origin + 1] - r)
    return np.stack(r_out, axis=-1), rem


def _warn_truncation(rem):
    worst = float(np.max(rem))
    if worst > TRUNCATION_RTOL:
        warnings.warn(f"truncation remainder estimate {worst:.3g} exceeds "
                      f"{TRUNCATION_RTOL:g}; increase trunc_T",
                      TruncationWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# public single-environment operations
# ---------------------------------------------------------------------------

def _check_lines(env, j, n):
    if int(j) != j or int(n) != n or not 0 <= j <= n < env.n_lines:
        raise DomainError(f"need 0 <= j <= n < n_lines={env.n_lines}")
    return int(j), int(n)


def log_partition_curve(env, j, n, u, t):
    """``log Z_{j,n}(u, v)`` for every grid node ``v`` in ``[u, t]``."""
    j, n = _check_lines(env, j, n)
    iu, it = env.node(u), env.node(t)
    if not iu < it:
        raise DomainError("need u < t")
    W = env.line_paths(slice(j, n + 1))[:, iu:it + 1]
    W = W - W[:, :1]
    if n == j:
        return W[0]
    return _forward_batch(W, env.step)


def log_partition(env, j, n, u, t):
    """``log Z_{j,n}(u,t)`` on the grid (row ``k`` of ``env`` is line ``k``).

    For ``j == n`` this is the exact increment ``B_j(u,t)``; otherwise the
    nested integral over ``u < u_j < ... < u_{n-1} < t`` by the streaming
    trapezoid sweep.
    """
    return float(log_partition_curve(env, j, n, u, t)[-1])


def _stationary_inputs(env, k):
    if env.boundary_increments is None:
        raise DomainError("stationary model needs boundary increments")
    if not env.trunc_T > 0:
        raise DomainError("stationary model needs trunc_T > 0")
    if k + 1 > env.n_lines:
        raise DomainError(f"need n_lines > {k} (lines 1..{k} are used)")
    return env.boundary_path(), env.line_paths(slice(1, k + 1))


def stationary_r_sequence(env, theta, k_max, at_time=0.0,
                          return_remainder=False):
    """``(r_1^theta, ..., r_{k_max}^theta)`` at ``at_time``.

    Uses the boundary motion and rows ``1..k_max``; the integral from
    ``-inf`` is truncated at ``-trunc_T``.  Emits :class:`TruncationWarning`
    when the estimated tail mass exceeds ``1e-8`` of the total.
    """
    if not theta > 0:
        raise DomainError("theta must be positive")
    B, L = _stationary_inputs(env, int(k_max))
    r, rem = _stationary_r_batch(B, L, theta, env.step, env.origin,
                                 env.node(at_time))
    _warn_truncation(rem)
    return (r, float(rem)) if return_remainder else r


def stationary_log_partition(env, theta, n, at_time):
    """``log Z_n^theta`` at ``at_time`` (``n = 0`` gives
    ``theta t - B(t)``)."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    i = env.node(at_time)
    if n == 0:
        return float(theta * at_time - env.boundary_path()[i])
    B, L = _stationary_inputs(env, int(n))
    v = env.times[:i + 1]
    ell = _forward_batch(L[:, :i + 1], env.step,
                         log_init=theta * v - B[:i + 1])
    return float(ell[-1])


def _coupling_rhs(env, theta, n, at_time):
    """Right side of the boundary decomposition of ``Z_n^theta`` at
    ``at_time``: the ``[0, t]`` integral plus the sum over exit lines."""
    o, i = env.origin, env.node(at_time)
    B, L = _stationary_inputs(env, n)
    v = env.times
    step = env.step
    log_z0 = theta * v - B
    # Z_j^theta(0) for j = 1..n: forward sweep up to time 0, line by line
    ell = log_z0[:o + 1]
    zj0 = []
    for k in range(n):
        wk = L[k, :o + 1]
        ell = wk + _log_cumtrap(ell - wk, step)
        zj0.append(ell[-1])
    # Z_{j,n}(u, t) for u in [0, t] via the backward sweep
    W = L[:, o:i + 1]
    back = _backward_batch(W - W[:, :1], step)
    integral = _log_cumtrap(log_z0[o:i + 1] + back[0], step)[-1]
    terms = np.array([integral] + [zj0[k] + back[k, 0] for k in range(n)])
    top = terms.max()
    return float(top + np.log(np.sum(np.exp(terms - top))))


def verify_stationary_decomposition(env, theta, n, at_time, tol=1e-6,
                                    coupling_tol=1e-3):
    """Check the queue-sum identity and the boundary decomposition.

    ``statdecomp``: ``sum_k r_k(t) = B(t) - theta t + log Z_n^theta(t)`` with
    the left side from the queue recursion and ``log Z_n^theta`` from the
    direct sweep; absolute residual.  ``coupling``: ``Z_n^theta(t)`` against
    the sum of the ``[0, t]`` integral term and the exit-line terms;
    relative residual (quadrature error of order ``step``).
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    r = stationary_r_sequence(env, theta, n, at_time)
    i = env.node(at_time)
    lz = stationary_log_partition(env, theta, n, at_time)
    rhs = env.boundary_path()[i] - theta * at_time + lz
    report = VerificationReport(
        "stationary_decomposition",
        provenance={"seed": env.seed, "replicate": env.replicate,
                    "theta": theta, "n": n, "t": at_time, "step": env.step,
                    "trunc_T": env.trunc_T})
    report.add("statdecomp", abs(float(r.sum()) - rhs), tol,
               lhs=float(r.sum()), rhs=float(rhs))
    lc = _coupling_rhs(env, theta, n, at_time)
    report.add("coupling", abs(math.expm1(lc - lz)), coupling_tol,
               log_Z=lz, log_rhs=lc)
    return report


def brownian_lpp_max(env, n, t):
    """``max over 0 = u_0 < ... < u_n = t`` of ``sum_i B_i(u_{i-1}, u_i)``
    with split points on grid nodes, using rows ``0..n-1``."""
    if int(n) != n or not 1 <= n <= env.n_lines:
        raise DomainError(f"need 1 <= n <= n_lines={env.n_lines}")
    i0, it = env.origin, env.node(t)
    if not it > i0:
        raise DomainError("need t > 0")
    W = env.line_paths(slice(0, int(n)))[:, i0:it + 1]
    return float(_lpp_batch(W))


# ---------------------------------------------------------------------------
# GUE
# ---------------------------------------------------------------------------

def sample_gue_matrix(n, seed=0, replicate=0):
    """Hermitian ``n x n`` matrix with ``E|H_ij|^2 = 1/(4n)``.

    Off-diagonal entries have independent real and imaginary parts of
    variance ``1/(8n)``; the diagonal is real with variance ``1/(4n)``.
    """
    if int(n) != n or not 1 <= n <= 64:
        raise DomainError("need 1 <= n <= 64")
    return _gue_batch(int(n), seed, [replicate])[0]


def _gue_batch(n, seed, replicates):
    H = np.zeros((len(replicates), n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    m = iu[0].size
    sd_d = math.sqrt(1.0 / (4 * n))
    sd_o = math.sqrt(1.0 / (8 * n))
    for b, rep in enumerate(replicates):
        z = _generator(seed, _GUE, 0, n, rep).standard_normal(n + 2 * m)
        H[b][np.diag_indices(n)] = sd_d * z[:n]
        H[b][iu] = sd_o * (z[n:n + m] + 1j * z[n + m:])
    H = H + np.conj(np.swapaxes(np.triu(H, 1), -1, -2))
    return H


def _tridiagonalize(H):
    """Householder reduction of Hermitian ``H[b]`` to a real symmetric
    tridiagonal matrix; returns ``(diag, offdiag)``."""
    A = np.array(H, dtype=complex)
    n = A.shape[-1]
    for k in range(n - 2):
        x = A[:, k + 1:, k]
        norm = np.linalg.norm(x, axis=-1)
        x0 = x[:, 0]
        phase = np.where(np.abs(x0) > 0, x0 / np.where(x0 == 0, 1, np.abs(x0)),
                         1.0)
        alpha = -phase * norm
        v = x.copy()
        v[:, 0] -= alpha
        vn = np.linalg.norm(v, axis=-1)
        ok = vn > 0
        v = np.where(ok[:, None], v / np.where(ok, vn, 1.0)[:, None], 0.0)
        sub = A[:, k + 1:, :]
        A[:, k + 1:, :] = sub - 2 * v[:, :, None] * np.einsum(
            "bi,bij->bj", np.conj(v), sub)[:, None, :]
        sub = A[:, :, k + 1:]
        A[:, :, k + 1:] = sub - 2 * np.einsum(
            "bij,bj->bi", sub, v)[:, :, None] * np.conj(v)[:, None, :]
    d = np.real(np.diagonal(A, axis1=-2, axis2=-1)).copy()
    e = np.abs(np.diagonal(A, offset=-1, axis1=-2, axis2=-1))
    return d, e


def _top_eigenvalue_tridiagonal(d, e, tol=1e-12):
    """Largest eigenvalue by Sturm-count bisection, batched over rows."""
    n = d.shape[-1]
    rad = np.zeros_like(d)
    rad[:, :-1] += e
    rad[:, 1:] += e
    lo = np.min(d - rad, axis=-1)
    hi = np.max(d + rad, axis=-1)
    e2 = e * e
    tiny = np.finfo(float).tiny
    while np.any(hi - lo > tol * np.maximum(1.0, np.abs(hi))):
        mid = 0.5 * (lo + hi)
        # number of eigenvalues below mid
        q = d[:, 0] - mid
        count = (q < 0).astype(int)
        for i in range(1, n):
            q = np.where(q == 0, tiny, q)
            q = d[:, i] - mid - e2[:, i - 1] / q
            count += q < 0
        top_above = count < n
        lo = np.where(top_above, mid, lo)
        hi = np.where(top_above, hi, mid)
    return 0.5 * (lo + hi)


def _gue_top_batch(n, seed, replicates):
    H = _gue_batch(n, seed, replicates)
    if n == 1:
        return np.real(H[:, 0, 0])
    d, e = _tridiagonalize(H)
    return _top_eigenvalue_tridiagonal(d, e)


def sample_gue_top_eigenvalue(n, seed=0, replicate=0):
    """Largest eigenvalue of :func:`sample_gue_matrix` ``(n, seed,
    replicate)``, via tridiagonalization and Sturm bisection."""
    if int(n) != n or not 1 <= n <= 64:
        raise DomainError("need 1 <= n <= 64")
    return float(_gue_top_batch(int(n), seed, [replicate])[0])
