import math

import numpy as np
import pytest

from layercast import siso
from layercast.channels import chi2_simo, point_mass, rayleigh_power, sample
from layercast.numerics import exp_E1, lambert_w0
from oracles import rayleigh_closed_form, rayleigh_rate_samples

LAW = rayleigh_power(1.0)


def test_rayleigh_breakpoints():
    prof = siso.optimal_profile(LAW, 10.0)
    assert prof.s0 == pytest.approx(2 / (1 + math.sqrt(41)), abs=1e-12)
    assert prof.s0 == pytest.approx(0.27016, abs=5e-6)
    assert prof.s1 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("P", [0.1, 1.0, 10.0, 100.0, 1e4])
def test_numeric_profile_matches_closed_form(P):
    prof = siso.optimal_profile(LAW, P)
    I_ref, s0, rate = rayleigh_closed_form(P)
    s = np.linspace(s0, 1.0, 300)
    assert np.max(np.abs(prof.I(s) - I_ref(s))) <= 1e-6
    assert siso.expected_rate(prof, LAW) == pytest.approx(rate, abs=1e-9)
    assert prof.total_power() == pytest.approx(P, rel=1e-8)


def test_cumulative_rate():
    prof = siso.optimal_profile(LAW, 10.0)
    s0 = prof.s0
    assert siso.cumulative_rate(prof, 0.5 * s0) == 0.0
    top = -2 * math.log(s0) - (1 - s0)
    assert siso.cumulative_rate(prof, 1.0) == pytest.approx(top, abs=1e-9)
    assert siso.cumulative_rate(prof, 7.0) == pytest.approx(top, abs=1e-9)
    s = np.linspace(0, 3, 50)
    assert np.all(np.diff(siso.cumulative_rate(prof, s)) >= -1e-14)


def test_low_power_rate():
    r = siso.expected_rate(siso.optimal_profile(LAW, 0.01), LAW)
    assert r == pytest.approx(0.01 / math.e, rel=0.05)


def test_monte_carlo_expected_rate():
    prof = siso.optimal_profile(LAW, 10.0)
    mc = np.mean(rayleigh_rate_samples(10.0, 10 ** 6, 8))
    assert mc == pytest.approx(siso.expected_rate(prof, LAW), rel=5e-3)


def test_outage_capacity():
    sol = siso.outage_capacity(LAW, 10.0)
    grid = np.linspace(1e-4, 3, 3_000_001)
    obj = np.exp(-grid) * np.log1p(10 * grid)
    assert sol.s_th == pytest.approx(grid[np.argmax(obj)], abs=2e-6)
    assert sol.rate == pytest.approx(obj.max(), abs=1e-10)
    assert sol.s_th == pytest.approx(0.4728926, abs=1e-6)
    assert sol.rate == pytest.approx(1.0878079, abs=1e-6)
    for P in (10.0, 1e3, 1e6):
        w = lambert_w0(P)
        t = (P - w) / (w * P)
        sol = siso.outage_capacity(LAW, P)
        assert sol.s_th == pytest.approx(t, rel=1e-9)
        assert sol.rate == pytest.approx(math.exp(-t) * math.log(P / w), rel=1e-9)
    # the logarithmic asymptote holds in ratio only, and slowly
    P = 1e24
    assert siso.outage_capacity(LAW, P).rate / math.log(P / lambert_w0(P)) == pytest.approx(1, abs=0.02)
    pm = siso.outage_capacity(point_mass(1.0), 5.0)
    assert pm.s_th == 1.0 and pm.rate == pytest.approx(math.log(6.0))


def test_ergodic_capacity():
    assert siso.ergodic_capacity(LAW, 10.0) == pytest.approx(exp_E1(0.1), abs=1e-12)
    assert siso.ergodic_capacity(point_mass(1.0), 5.0) == pytest.approx(math.log(6.0))
    law = chi2_simo(2)
    c = siso.ergodic_capacity(law, 10.0)
    mc = np.mean(np.log1p(10.0 * sample(law, 10 ** 6, 3)))
    assert c == pytest.approx(mc, rel=3e-3)
    assert c > siso.ergodic_capacity(LAW, 10.0)


def test_rate_ordering_simo():
    law = chi2_simo(3)
    for P in (0.5, 5.0, 50.0):
        ro = siso.outage_capacity(law, P).rate
        rb = siso.expected_rate(siso.optimal_profile(law, P), law)
        ce = siso.ergodic_capacity(law, P)
        assert ro <= rb <= ce <= math.log1p(P * law.mean)


def test_finite_layers_approach_continuum():
    prof = siso.optimal_profile(LAW, 10.0)
    target = siso.expected_rate(prof, LAW)
    K = 60
    s = np.linspace(prof.s0, prof.s1, K)
    I = np.concatenate([[10.0], prof.I(s[1:])])
    b = -np.diff(np.concatenate([I, [0.0]])) / 10.0
    r = siso.finite_layer_expected_rate(LAW, s, b, 10.0)
    assert r <= target + 1e-12
    assert r == pytest.approx(target, rel=0.01)
    one = siso.finite_layer_expected_rate(LAW, [0.5], [1.0], 10.0)
    assert one == pytest.approx(math.exp(-0.5) * math.log1p(5.0))


def test_finite_layer_optimizer_improves_with_k():
    _, _, r1 = siso.optimize_finite_layers(LAW, 10.0, 1)
    s2, b2, r2 = siso.optimize_finite_layers(LAW, 10.0, 2, seed=1)
    assert r1 < r2 < siso.rayleigh_expected_rate(10.0)
    assert b2.sum() == pytest.approx(1.0)


def test_degenerate_inputs():
    with pytest.raises(siso.DegenerateLawError):
        siso.optimal_profile(point_mass(1.0), 10.0)
    with pytest.raises(ValueError):
        siso.optimal_profile(LAW, 0.0)
    with pytest.raises(ValueError):
        siso.finite_layer_rates([0.5, 0.2], [0.5, 0.5], 1.0)
