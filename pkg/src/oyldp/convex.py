"""Convex analysis on functions sampled over uniform grids.

A :class:`SampledFunction` stores extended-real values on a uniform grid,
with ``+inf`` marking points outside the effective domain.  The operations
here are the discrete Legendre-Fenchel transform (an exact maximum over the
grid nodes), the infimal convolution (minimum over the nodes of one input,
linear interpolation of the other) and the biconjugate.

Results carry an integer ``flags`` array: ``-1`` or ``+1`` where the optimum
was attained at the lower or upper end of an input grid, which usually means
the window was too narrow for that point; ``0`` elsewhere.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import WindowError

__all__ = [
    "SampledFunction", "legendre_transform", "inf_convolution",
    "inf_convolution_at", "biconjugate", "CONVEXITY_TOL",
]

CONVEXITY_TOL = 1e-9
_CHUNK = 2 ** 22


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Extended-real function on the grid ``linspace(x_min, x_max, n)``."""

    x_min: float
    x_max: float
    values: np.ndarray
    flags: np.ndarray = field(default=None)
    convex: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if not self.x_min < self.x_max:
            raise ValueError("need x_min < x_max")
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need a 1-d array of at least two values")
        if np.any(np.isnan(vals)) or np.any(vals == -np.inf):
            raise ValueError("values must be finite or +inf")
        fin = np.flatnonzero(np.isfinite(vals))
        if fin.size and fin[-1] - fin[0] + 1 != fin.size:
            raise ValueError("finite values must occupy a contiguous range")
        flags = (np.zeros(vals.size, dtype=np.int8) if self.flags is None
                 else np.array(self.flags, dtype=np.int8))
        if flags.shape != vals.shape:
            raise ValueError("flags must match values")
        vals.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "flags", flags)
        if self.convex and not self.is_convex():
            raise ValueError("values are not convex on the grid")

    @classmethod
    def from_callable(cls, func, x_min, x_max, n_points, convex=False):
        grid = np.linspace(x_min, x_max, n_points)
        return cls(x_min, x_max, np.asarray(func(grid), dtype=float),
                   convex=convex)

    @property
    def n_points(self):
        return self.values.size

    @property
    def step(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def grid(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def finite_slice(self):
        fin = np.flatnonzero(np.isfinite(self.values))
        if fin.size == 0:
            raise WindowError("function is identically +inf")
        return slice(fin[0], fin[-1] + 1)

    def is_convex(self, tol=CONVEXITY_TOL):
        v = self.values[self.finite_slice()]
        if v.size < 3:
            return True
        scale = max(1.0, float(np.max(np.abs(v))))
        return bool(np.all(np.diff(v, 2) >= -tol * scale))

    def __call__(self, x):
        """Piecewise-linear interpolant; ``+inf`` off the grid window."""
        vals, _ = _interp(self, np.asarray(x, dtype=float))
        return float(vals) if np.ndim(vals) == 0 else vals

    def with_values(self, values, flags=None, convex=False):
        return SampledFunction(self.x_min, self.x_max, values, flags, convex)

    # -- serialization -----------------------------------------------------

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value", "flag"])
        for x, v, f in zip(self.grid, self.values, self.flags):
            writer.writerow([_fmt(x), _fmt(v), int(f)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        head, body = rows[0], [r for r in rows[1:] if r]
        if head[:2] != ["x", "value"]:
            raise ValueError("expected columns x,value")
        xs = np.array([float(r[0]) for r in body])
        vals = np.array([float(r[1]) for r in body])
        flags = (np.array([int(r[2]) for r in body]) if len(head) > 2
                 else None)
        return cls(float(xs[0]), float(xs[-1]), vals, flags)

    def to_json(self):
        return json.dumps({
            "x_min": self.x_min, "x_max": self.x_max,
            "n_points": self.n_points,
            "values": [_fmt(v) for v in self.values],
            "flags": self.flags.tolist(), "convex": self.convex,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        vals = np.array([float(v) for v in d["values"]])
        if vals.size != d["n_points"]:
            raise ValueError("n_points does not match values")
        return cls(d["x_min"], d["x_max"], vals, d.get("flags"),
                   d.get("convex", False))


def _fmt(v):
    v = float(v)
    return "inf" if v == np.inf else f"{v:.17g}"


def _interp(f, x):
    """Linear interpolation of ``f`` at ``x`` with saturating ``+inf``.

    Returns the values and a flag array marking points that sit on a grid
    end where ``f`` is not locally flat.
    """
    n = f.n_points
    p = (x - f.x_min) / f.step
    tol = 1e-9
    inside = (p >= -tol) & (p <= n - 1 + tol)
    pc = np.clip(p, 0.0, n - 1.0)
    i = np.minimum(np.floor(pc).astype(np.intp), n - 2)
    w = pc - i
    v0 = f.values[i]
    v1 = f.values[i + 1]
    with np.errstate(invalid="ignore"):
        val = np.where(w <= tol, v0,
                       np.where(w >= 1 - tol, v1, (1 - w) * v0 + w * v1))
    val = np.where(np.isnan(val), np.inf, val)
    val = np.where(inside, val, np.inf)
    flag = np.zeros(np.shape(x), dtype=np.int8)
    if f.values[0] != f.values[1]:
        flag = np.where(inside & (p <= tol), -1, flag)
    if f.values[-1] != f.values[-2]:
        flag = np.where(inside & (p >= n - 1 - tol), 1, flag)
    return val, flag


def _lower_hull(x, y):
    """Indices of the lower convex hull of points sorted by ``x``."""
    hull = []
    for k in range(x.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j when it lies on or above the chord from i to k
            if (y[j] - y[i]) * (x[k] - x[i]) >= (y[k] - y[i]) * (x[j] - x[i]):
                hull.pop()
            else:
                break
        hull.append(k)
    return np.array(hull, dtype=np.intp)


def legendre_transform(f, xi_min, xi_max, n_xi):
    """Discrete conjugate ``g(xi) = max_x {x xi - f(x)}`` over grid nodes.

    The result is convex.  ``flags`` marks slopes whose maximizer is an end
    node of ``f``'s grid (``-1`` lower, ``+1`` upper).
    """
    if not xi_min < xi_max:
        raise ValueError("need xi_min < xi_max")
    sl = f.finite_slice()
    x = f.grid[sl]
    y = f.values[sl]
    idx = np.arange(f.n_points)[sl]
    d2 = np.diff(y, 2)
    if d2.size and np.any(d2 < 0):
        keep = _lower_hull(x, y)
        x, y, idx = x[keep], y[keep], idx[keep]
    xi = np.linspace(xi_min, xi_max, n_xi)
    if x.size == 1:
        k = np.zeros(n_xi, dtype=np.intp)
    else:
        slopes = np.diff(y) / np.diff(x)
        k = np.searchsorted(slopes, xi, side="left")
    vals = xi * x[k] - y[k]
    node = idx[k]
    flags = np.where(node == 0, -1, np.where(node == f.n_points - 1, 1, 0))
    return SampledFunction(xi_min, xi_max, vals, flags.astype(np.int8))


def inf_convolution_at(f, g, x):
    """Evaluate ``min_y {f(x - y) + g(y)}`` at the points ``x``.

    ``y`` ranges over the finite nodes of ``g``; ``f`` is interpolated
    linearly.  Returns ``(values, flags, argmin_y)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sl = g.finite_slice()
    f.finite_slice()
    y = g.grid[sl]
    gy = g.values[sl]
    gidx = np.arange(g.n_points)[sl]
    out = np.empty(x.size)
    flags = np.zeros(x.size, dtype=np.int8)
    arg = np.empty(x.size)
    rows = max(1, _CHUNK // y.size)
    g_lo_flat = g.values[0] == g.values[1]
    g_hi_flat = g.values[-1] == g.values[-2]
    for start in range(0, x.size, rows):
        xs = x[start:start + rows]
        fv, fflag = _interp(f, xs[:, None] - y[None, :])
        tot = fv + gy[None, :]
        j = np.argmin(tot, axis=1)
        r = np.arange(xs.size)
        out[start:start + rows] = tot[r, j]
        arg[start:start + rows] = y[j]
        fl = fflag[r, j].astype(np.int8)
        node = gidx[j]
        fl = np.where((node == 0) & ~g_lo_flat, -1, fl)
        fl = np.where((node == g.n_points - 1) & ~g_hi_flat, 1, fl)
        flags[start:start + rows] = fl
    if np.all(np.isinf(out)):
        raise WindowError("requested window misses dom f + dom g")
    return out, flags, arg


def inf_convolution(f, g, x_min, x_max, n_points):
    """Infimal convolution ``f □ g`` sampled on a uniform output grid."""
    grid = np.linspace(x_min, x_max, n_points)
    vals, flags, _ = inf_convolution_at(f, g, grid)
    fin = np.flatnonzero(np.isfinite(vals))
    # a convex result has a contiguous domain; gaps come from grid misses
    if fin.size and fin[-1] - fin[0] + 1 != fin.size:
        vals[fin[0]:fin[-1] + 1] = np.where(
            np.isfinite(vals[fin[0]:fin[-1] + 1]),
            vals[fin[0]:fin[-1] + 1],
            np.interp(grid[fin[0]:fin[-1] + 1], grid[fin], vals[fin]))
    return SampledFunction(x_min, x_max, vals, flags)


def biconjugate(f, xi_min, xi_max, n_xi):
    """``(f*)*`` on ``f``'s own grid, with the conjugate taken on the given
    slope window.  Equals ``f`` up to discretization when ``f`` is convex
    and its slopes stay inside the window."""
    conj = legendre_transform(f, xi_min, xi_max, n_xi)
    back = legendre_transform(conj, f.x_min, f.x_max, f.n_points)
    return back.with_values(back.values, back.flags)
