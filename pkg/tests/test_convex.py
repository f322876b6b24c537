import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oyldp import rates
from oyldp.convex import (SampledFunction, biconjugate, inf_convolution,
                          inf_convolution_at, legendre_transform)
from oyldp.errors import WindowError

INF = np.inf


def quad(lo=-10.0, hi=10.0, n=4001):
    return SampledFunction.from_callable(lambda x: 0.5 * x * x, lo, hi, n)


def indicator0(lo=-1.0, hi=1.0, n=201):
    vals = np.full(n, INF)
    vals[n // 2] = 0.0
    return SampledFunction(lo, hi, vals)


# -- SampledFunction ----------------------------------------------------------

def test_sampled_function_validation():
    with pytest.raises(ValueError):
        SampledFunction(1.0, 0.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        SampledFunction(0.0, 1.0, [0.0])
    with pytest.raises(ValueError):
        SampledFunction(0.0, 1.0, [0.0, INF, 1.0])
    with pytest.raises(ValueError):
        SampledFunction(0.0, 1.0, [0.0, np.nan])
    with pytest.raises(ValueError):
        SampledFunction(0.0, 1.0, [0.0, 1.0, 0.0], convex=True)
    f = SampledFunction(0.0, 1.0, [INF, 1.0, 0.5, 1.0, INF], convex=True)
    assert f.n_points == 5 and f.step == 0.25
    with pytest.raises(ValueError):
        f.values[1] = 3.0


def test_interpolation_and_inf_saturation():
    f = SampledFunction(0.0, 2.0, [0.0, 2.0, INF])
    assert f(0.5) == pytest.approx(1.0)
    assert f(1.0) == 2.0
    assert f(1.5) == INF
    assert f(-0.1) == INF


def test_serialization_roundtrip():
    f = SampledFunction(-1.0, 1.0, [INF, 0.1, 1 / 3, INF], [0, 1, -1, 0])
    g = SampledFunction.from_csv(f.to_csv())
    h = SampledFunction.from_json(f.to_json())
    for other in (g, h):
        assert other.x_min == f.x_min and other.x_max == f.x_max
        np.testing.assert_array_equal(other.values, f.values)
        np.testing.assert_array_equal(other.flags, f.flags)
    assert "inf" in f.to_csv().splitlines()[1]


def test_identically_infinite_is_rejected():
    f = SampledFunction(0.0, 1.0, [INF, INF])
    with pytest.raises(WindowError):
        legendre_transform(f, -1, 1, 5)


# -- Legendre transform -------------------------------------------------------

def test_quadratic_self_dual():
    g = legendre_transform(quad(), -3, 3, 601)
    assert g(1.0) == pytest.approx(0.5, abs=1e-5)
    np.testing.assert_allclose(g.values, 0.5 * g.grid ** 2, atol=1e-5)
    assert g.is_convex()


def test_indicator_conjugate_is_zero():
    g = legendre_transform(indicator0(), -5, 5, 101)
    np.testing.assert_array_equal(g.values, 0.0)


def test_brownian_rate_conjugate():
    t, th = 1.0, 1.0
    f = SampledFunction.from_callable(
        lambda x: rates.brownian_rate_R(t, th, x), -th * t - 5, 20, 25001)
    xi = np.linspace(0, 3, 31)
    g = legendre_transform(f, 0, 3, 31)
    np.testing.assert_allclose(g.values, rates.dual_R_star(t, th, xi),
                               atol=1e-4)


def test_boundary_flags():
    # slopes beyond the window are attained at the grid ends
    g = legendre_transform(quad(-1, 1, 201), -3, 3, 7)
    assert g.flags[0] == -1 and g.flags[-1] == 1
    assert g.flags[3] == 0


def test_nonconvex_input_uses_hull():
    f = SampledFunction.from_callable(
        lambda x: np.minimum(x * x, (x - 2) ** 2 + 1), -4, 6, 10001)
    g = legendre_transform(f, -10, 10, 2001)
    brute = np.max(f.grid[None, :] * g.grid[:, None] - f.values[None, :],
                   axis=1)
    np.testing.assert_allclose(g.values, brute, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=40),
       st.floats(-3, 3))
def test_fenchel_young(vals, xi):
    f = SampledFunction(-1.0, 1.0, vals)
    g = legendre_transform(f, -3, 3, 13)
    scale = max(1.0, max(abs(v) for v in vals))
    for x, fx in zip(f.grid, f.values):
        for z, gz in zip(g.grid, g.values):
            assert fx + gz >= x * z - 1e-9 * scale


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=30),
       st.lists(st.floats(0, 3), min_size=3, max_size=30))
def test_order_reversal(vals, bumps):
    n = min(len(vals), len(bumps))
    f = SampledFunction(-1.0, 1.0, vals[:n])
    g = SampledFunction(-1.0, 1.0, np.array(vals[:n]) + np.array(bumps[:n]))
    fs = legendre_transform(f, -4, 4, 17)
    gs = legendre_transform(g, -4, 4, 17)
    assert np.all(fs.values >= gs.values - 1e-12)


# -- infimal convolution ------------------------------------------------------

def test_quadratic_inf_convolution():
    h = inf_convolution(quad(), quad(), -4, 4, 81)
    assert h(2.0) == pytest.approx(1.0, abs=1e-5)
    np.testing.assert_allclose(h.values, 0.25 * h.grid ** 2, atol=1e-5)


def test_indicator_is_identity():
    f = SampledFunction.from_callable(lambda x: np.abs(x) + x ** 2, -1, 1, 201)
    h = inf_convolution(f, indicator0(), -1, 1, 201)
    np.testing.assert_allclose(h.values, f.values, atol=1e-12)


def test_R_U_inf_convolution_brute_force():
    R = SampledFunction.from_callable(
        lambda x: rates.brownian_rate_R(1, 1, x), -8, 8, 1601)
    U = SampledFunction.from_callable(
        lambda x: rates.stationary_rate_U(1, 1, x), -8, 8, 1601)
    val, _, _ = inf_convolution_at(R, U, [0.0])
    y = np.linspace(-8, 8, 16001)
    brute = np.min(rates.brownian_rate_R(1, 1, -y)
                   + rates.stationary_rate_U(1, 1, y))
    assert val[0] == pytest.approx(brute, abs=1e-4)


def test_window_error():
    f = SampledFunction(0.0, 1.0, [INF, 0.0, INF])
    g = SampledFunction(0.0, 1.0, [INF, 0.0, INF])
    with pytest.raises(WindowError):
        inf_convolution_at(f, g, [5.0, 6.0])


def test_inf_convolution_dual_to_addition():
    s, t, th = 1.0, 1.0, 1.0
    R = SampledFunction.from_callable(
        lambda x: rates.brownian_rate_R(t, th, x), -6, 12, 3601)
    U = SampledFunction.from_callable(
        lambda x: rates.stationary_rate_U(s, th, x), -6, 12, 3601)
    h = inf_convolution(R, U, -10, 20, 6001)
    xi = np.linspace(0.05, 0.85, 17)
    conj = legendre_transform(h, xi[0], xi[-1], xi.size)
    want = rates.dual_R_star(t, th, xi) + rates.dual_U_star(s, th, xi)
    assert np.all(conj.flags == 0)
    np.testing.assert_allclose(conj.values, want, atol=5e-4)


# -- biconjugate --------------------------------------------------------------

def test_biconjugate_abs():
    f = SampledFunction.from_callable(np.abs, -5, 5, 1001)
    b = biconjugate(f, -2, 2, 801)
    np.testing.assert_allclose(b.values, f.values, atol=1e-4)


def test_biconjugate_convex_hull():
    f = SampledFunction.from_callable(
        lambda x: np.minimum(x * x, (x - 2) ** 2 + 1), -3, 5, 8001)
    b = biconjugate(f, -12, 12, 24001)
    # supporting-line oracle: the hull bridges the two parabolas with the
    # common tangent of slope 1/2 touching at 1/4 and 9/4
    assert b(1.0) == pytest.approx(1.0 / 2 - 1.0 / 16, abs=1e-4)
    assert b(0.0) == pytest.approx(0.0, abs=1e-4)


def test_biconjugate_lyapunov():
    xi = np.linspace(-3, 3, 6001)
    lam = SampledFunction(-3, 3, rates.lyapunov(1, 1, xi))
    slopes = rates.lyapunov_derivative(1, 1, np.array([-3.0, 3.0]))
    b = biconjugate(lam, slopes[0] - 1, slopes[1] + 1, 20001)
    np.testing.assert_allclose(b.values, lam.values, atol=2e-3)
