import math

import numpy as np
import pytest
from scipy import integrate as spi

from layercast.numerics import (Bracket, DimensionError, DomainError, NoSignChangeError,
                                Tolerance, exp_E1, exp_integral_E1, find_root, integrate,
                                lambert_w0, maximize)


def newton_w(x, w=1.0):
    for _ in range(100):
        w -= (w * math.exp(w) - x) / (math.exp(w) * (1 + w))
    return w


def test_lambert_w0_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-12)
    assert lambert_w0(10.0) == pytest.approx(newton_w(10.0), abs=1e-12)
    assert lambert_w0(10.0) == pytest.approx(1.74553, abs=5e-6)


def test_lambert_w0_round_trip():
    for x in np.logspace(-6, 6, 100):
        w = lambert_w0(x)
        assert abs(w * math.exp(w) - x) <= 1e-9 * max(1.0, x)


def test_lambert_w0_domain():
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-6)
    with pytest.raises(DomainError):
        lambert_w0(-0.5)


def test_e1_against_quadrature():
    for x in (0.01, 0.1, 1.0, 5.0):
        ref = spi.quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
        assert exp_integral_E1(x) == pytest.approx(ref, rel=1e-8)
    assert exp_integral_E1(1.0) == pytest.approx(0.219384, abs=5e-7)
    vals = [exp_integral_E1(x) for x in (1, 5, 20, 50)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        exp_integral_E1(0.0)


def test_scaled_e1_matches_ergodic_integral():
    P = 10.0
    q = spi.quad(lambda u: math.exp(-u) * math.log1p(P * u), 0, np.inf, epsabs=1e-13)[0]
    assert exp_E1(1 / P) == pytest.approx(q, abs=1e-8)
    assert exp_E1(1e4) == pytest.approx(1e-4 * (1 - 1e-4 + 2e-8), rel=1e-8)


def test_find_root():
    assert find_root(lambda x: x - 2, (0, 5)) == pytest.approx(2.0, abs=1e-10)
    assert find_root(lambda x: x - 2, Bracket(0, 5)) == pytest.approx(2.0, abs=1e-10)
    P = 10.0
    r = find_root(lambda x: (1 - x) / x ** 2 - P, (1e-6, 1.0), Tolerance(1e-14, 1e-14))
    assert r == pytest.approx(2 / (1 + math.sqrt(41)), abs=1e-12)
    assert r == pytest.approx(0.27016, abs=5e-6)
    with pytest.raises(NoSignChangeError):
        find_root(lambda x: x * x + 1, (-1, 1))


def test_integrate():
    assert integrate(lambda u: math.exp(-u), 0, math.inf) == pytest.approx(1.0, abs=1e-10)
    assert integrate(lambda u: 1.0, 3.0, 3.0) == 0.0
    # independent Simpson oracle on a fine grid
    u = np.linspace(0, 60, 600001)
    ref = spi.simpson(np.exp(-u) * np.log1p(10 * u), x=u)
    val = integrate(lambda u: math.exp(-u) * math.log1p(10 * u), 0, math.inf)
    assert val == pytest.approx(ref, abs=1e-8)
    assert val == pytest.approx(2.0146425, abs=1e-7)


def test_maximize():
    x, v = maximize(lambda x: -(x - 3) ** 2, (0, 10))
    assert x == pytest.approx(3, abs=1e-6) and v == pytest.approx(0, abs=1e-10)
    x, v = maximize(lambda z: -np.sum((z - 0.3) ** 2), [(0, 1), (0, 1)])
    assert np.allclose(x, 0.3, atol=1e-5)
    x, v = maximize(lambda x: 4.0, (0, 1))
    assert v == 4.0 and 0 <= x <= 1
    with pytest.raises(DimensionError):
        maximize(lambda z: 0.0, [(0, 1)] * 9)


def test_outage_objective_maximum():
    P = 10.0
    s, v = maximize(lambda s: math.exp(-s) * math.log1p(s * P), (1e-6, 5.0))
    grid = np.linspace(1e-6, 5, 2_000_001)
    k = np.argmax(np.exp(-grid) * np.log1p(grid * P))
    assert s == pytest.approx(grid[k], abs=1e-5)
    assert s == pytest.approx(0.4728926, abs=1e-6)
