import math

import numpy as np
import pytest

from layercast import bottleneck as bn
from layercast.channels import DiscreteStates, rayleigh_power
from layercast.siso import MultiIntervalError, cumulative_rate, ergodic_capacity

LAW = rayleigh_power(1.0)


def test_equivalent_gain_limits():
    s = np.array([0.0, 0.5, 3.0])
    assert np.allclose(bn.fpr_eq(s, 10.0, 40.0), s, rtol=1e-12)
    assert bn.fpr_eq(np.inf, 10.0, 2.0) == pytest.approx(math.expm1(4.0) / 10.0)
    assert bn.fpr_eq(1e12, 10.0, 2.0) == pytest.approx(math.expm1(4.0) / 10.0, rel=1e-9)
    assert np.allclose(bn.fpr_eq(s, 10.0, 1e-9), 2e-9 * s / (1 + 10.0 * s), rtol=1e-6, atol=0)


def test_ergodic_limits():
    P = 10.0
    big = bn.BottleneckConfig(P, LAW, C=40.0)
    half = 0.5 * ergodic_capacity(LAW, P)
    assert bn.oblivious_ergodic(big) == pytest.approx(half, rel=1e-8)
    assert bn.df_ergodic(big) == pytest.approx(half, rel=1e-8)
    assert bn.df_ergodic(bn.BottleneckConfig(1e12, LAW, C=1.0)) == pytest.approx(1.0, rel=1e-6)


def test_df_ergodic_frozen_and_sampled():
    cfg = bn.BottleneckConfig(10.0, LAW, C=4.0)
    assert bn.df_ergodic(cfg) == pytest.approx(1.0073212723542257, rel=1e-10)
    s = np.random.default_rng(3).exponential(1.0, 400_000)
    mc = np.minimum(4.0, 0.5 * np.log1p(10.0 * s)).mean()
    assert bn.df_ergodic(cfg) == pytest.approx(mc, rel=3e-3)


def test_oblivious_ergodic_sampled():
    cfg = bn.BottleneckConfig(10.0, LAW, C=1.0)
    s = np.random.default_rng(4).exponential(1.0, 400_000)
    mc = (0.5 * np.log1p(10.0 * bn.fpr_eq(s, 10.0, 1.0))).mean()
    assert bn.oblivious_ergodic(cfg) == pytest.approx(mc, rel=3e-3)
    assert bn.oblivious_ergodic(cfg) <= bn.df_ergodic(cfg)


@pytest.mark.parametrize("P,nonobl,obl", [(1.0, 0.133326, 0.133265),
                                          (10.0, 0.567417, 0.566801),
                                          (1e4, 3.50451, 3.20252)])
def test_broadcast_frozen(P, nonobl, obl):
    cfg = bn.BottleneckConfig(P, LAW, C=4.0)
    _, r_obl = bn.oblivious_broadcast(cfg)
    cp, r_non = bn.nonoblivious_broadcast(cfg)
    assert r_obl == pytest.approx(obl, rel=1e-5)
    assert r_non == pytest.approx(nonobl, rel=1e-5)
    assert r_obl <= r_non + 1e-12
    assert cp.total_rate <= cp.C + 1e-8


def test_cap_complementarity():
    slack = bn.nonoblivious_broadcast(bn.BottleneckConfig(10.0, LAW, C=4.0))[0]
    assert slack.lambda_opt == 0.0 and slack.slack >= 0.0
    tight = bn.nonoblivious_broadcast(bn.BottleneckConfig(1e4, LAW, C=4.0))[0]
    assert tight.lambda_opt == pytest.approx(0.13708, rel=1e-4)
    assert abs(tight.slack) < 1e-8
    assert tight.lambda_opt * tight.slack == pytest.approx(0.0, abs=1e-8)


def test_oblivious_broadcast_sampled():
    cfg = bn.BottleneckConfig(10.0, LAW, C=4.0)
    prof, rate = bn.oblivious_broadcast(cfg)
    u = bn.fpr_eq(np.random.default_rng(5).exponential(1.0, 400_000), 10.0, 4.0)
    mc = 0.5 * np.mean(cumulative_rate(prof, u))
    assert rate == pytest.approx(0.566801, rel=1e-5)
    assert mc == pytest.approx(rate, rel=5e-3)


def test_variable_capacity():
    st = DiscreteStates((1.0, 4.0), (0.5, 0.5))
    prof, rate, (x, R) = bn.variable_capacity_broadcast(bn.BottleneckConfig(1.0, LAW, capacity_states=st))
    assert rate == pytest.approx(0.1203334, rel=1e-6)
    assert np.all(np.diff(R) >= -1e-12)
    one = DiscreteStates((4.0,), (1.0,))
    _, r1, _ = bn.variable_capacity_broadcast(bn.BottleneckConfig(10.0, LAW, capacity_states=one))
    _, r2 = bn.oblivious_broadcast(bn.BottleneckConfig(10.0, LAW, C=4.0))
    assert r1 == pytest.approx(r2, rel=1e-10)
    with pytest.raises(MultiIntervalError):
        bn.variable_capacity_broadcast(bn.BottleneckConfig(10.0, LAW, capacity_states=st))


def test_config_checks():
    with pytest.raises(ValueError):
        bn.BottleneckConfig(1.0, LAW)
    with pytest.raises(ValueError):
        bn.BottleneckConfig(1.0, LAW, C=1.0, capacity_states=DiscreteStates((1.0,), (1.0,)))
    with pytest.raises(ValueError):
        bn.BottleneckConfig(0.0, LAW, C=1.0)
    with pytest.raises(ValueError):
        bn.BottleneckConfig(1.0, LAW, capacity_states=DiscreteStates((1.0, 2.0), (0.5, 0.5))).capacity
