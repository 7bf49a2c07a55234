import math

import numpy as np
import pytest

from layercast import sr_distortion as sr
from layercast.channels import DiscreteStates, chi2_simo, rayleigh_power

LAW = rayleigh_power(1.0)


def test_rayleigh_upper_edge_is_mean():
    for m in (0.5, 1.0, 2.0):
        prof, _ = sr.continuous_min_distortion(sr.SrConfig(1.0, 10.0, rayleigh_power(m)))
        assert prof.s2 == pytest.approx(m, rel=1e-12)


def test_closed_form_and_general_solver_agree():
    cfg = sr.SrConfig(1.0, 10.0, LAW)
    p1, d1 = sr.continuous_min_distortion(cfg)
    p2 = sr.rayleigh_profile(cfg)
    assert p1.s1 == pytest.approx(p2.s1, rel=1e-9)
    assert d1 == pytest.approx(sr.expected_distortion(p2, cfg), rel=1e-9)
    assert abs(sr.power_residual(p1, LAW)) < 1e-9


def test_discrete_solver_near_continuum():
    cfg = sr.SrConfig(1.0, 10.0, LAW)
    prof, D = sr.continuous_min_distortion(cfg)
    states = sr.discretize(LAW, 200)
    powers, Dd = sr.discrete_min_distortion(states, 1.0, 10.0,
                                            starts=[sr.continuous_powers_on(states, prof)])
    assert powers.sum() == pytest.approx(10.0, rel=1e-12)
    # lower-edge cells are pessimistic
    assert Dd >= D - 1e-9
    assert Dd == pytest.approx(D, rel=0.01)


def test_discrete_brute_force_three_states():
    st = DiscreteStates((0.2, 1.0, 3.0), (0.3, 0.4, 0.3))
    P, b = 5.0, 1.0
    powers, D = sr.discrete_min_distortion(st, b, P)
    g = np.linspace(0, 1, 401)
    best = min(sr.discrete_distortion(st.levels, st.probs, [P * x, P * y * (1 - x), P * (1 - x) * (1 - y)], b)
               for x in g for y in g)
    assert D <= best + 1e-12
    assert D == pytest.approx(best, abs=1e-4)


def test_discrete_edge_cases():
    st = DiscreteStates((2.0,), (1.0,))
    powers, D = sr.discrete_min_distortion(st, 1.0, 4.0)
    assert powers[0] == 4.0 and D == pytest.approx(1 / 9)
    st = DiscreteStates((0.5, 2.0), (0.0, 1.0))
    powers, D = sr.discrete_min_distortion(st, 1.0, 4.0)
    assert powers[1] == pytest.approx(4.0, abs=1e-6)
    assert D == pytest.approx(1 / 9, rel=1e-6)


def test_expected_distortion_without_refinement():
    cfg = sr.SrConfig(1.0, 10.0, LAW)
    flat = sr.SrProfile(lambda s: np.ones_like(np.asarray(s, dtype=float)), 0.5, 1.0, 10.0, 1.0)
    assert sr.expected_distortion(flat, cfg) == pytest.approx(1.0)


def test_bandwidth_ordering_and_outage():
    for P in (0.1, 1.0, 10.0, 100.0):
        d = [sr.continuous_min_distortion(sr.SrConfig(b, P, LAW))[1] for b in (0.5, 1.0, 2.0)]
        assert d[0] > d[1] > d[2]
        for b, db in zip((0.5, 1.0, 2.0), d):
            _, do = sr.outage_min_distortion(sr.SrConfig(b, P, LAW))
            assert db <= do + 1e-12


def test_simo_law():
    law = chi2_simo(2)
    prof, D = sr.continuous_min_distortion(sr.SrConfig(1.0, 10.0, law))
    s = np.linspace(prof.s1, prof.s2, 50)
    assert np.all(np.diff(prof.I(s)) >= 0)
    assert D < sr.continuous_min_distortion(sr.SrConfig(1.0, 10.0, LAW))[1]
