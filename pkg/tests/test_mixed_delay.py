import math

import numpy as np
import pytest

from layercast import mixed_delay as md
from layercast import siso
from layercast.channels import rayleigh_power, sample
from layercast.numerics import exp_E1

LAW = rayleigh_power(1.0)


def test_dc_rate_edge_cases():
    cfg = md.DcNdcConfig(0.0, 10.0, LAW)
    assert md.dc_rate(md.outage_profile(0.5, 0.0), cfg) == 0.0
    cfg = md.DcNdcConfig(1.0, 10.0, LAW)
    prof = siso.optimal_profile(LAW, 10.0)
    assert md.dc_rate(prof, cfg) == pytest.approx(siso.expected_rate(prof, LAW), rel=1e-10)


def test_dc_rate_outage_closed_form():
    P, beta, s = 10.0, 0.5, 0.4
    cfg = md.DcNdcConfig(beta, P, LAW)
    r = md.dc_rate(md.outage_profile(s, beta * P), cfg)
    assert r == pytest.approx(math.exp(-s) * math.log((1 + P * s) / (1 + (1 - beta) * P * s)),
                              rel=1e-12)


def test_ndc_rate_edge_cases():
    cfg = md.DcNdcConfig(1.0, 10.0, LAW)
    assert md.ndc_rate(md.outage_profile(0.5, 10.0), cfg) == 0.0
    cfg = md.DcNdcConfig(0.0, 10.0, LAW)
    assert md.ndc_rate(md.outage_profile(0.0, 0.0), cfg) == pytest.approx(exp_E1(0.1), rel=1e-9)


def test_ndc_rate_against_sampling():
    P, beta, s = 10.0, 0.5, 0.4
    cfg = md.DcNdcConfig(beta, P, LAW)
    u = sample(LAW, 10 ** 6, 9)
    Q = (1 - beta) * P
    noise = np.where(u < s, 1 + beta * P * u, 1.0)
    mc = np.mean(np.log1p(Q * u / noise))
    assert md.ndc_rate(md.outage_profile(s, beta * P), cfg) == pytest.approx(mc, rel=3e-3)


def test_outage_joint():
    cfg = md.DcNdcConfig(0.0, 10.0, LAW)
    r = md.outage_joint(cfg)
    assert r.dc == 0.0 and r.ndc == pytest.approx(exp_E1(0.1))
    cfg = md.DcNdcConfig(0.5, 10.0, LAW)
    r = md.outage_joint(cfg)
    assert abs(md.outage_condition(cfg, r.s_th)) < 1e-10
    grid = np.linspace(0.05, 3.0, 300)
    best = max(md.dc_rate(md.outage_profile(s, 5.0), cfg) + md.ndc_rate(md.outage_profile(s, 5.0), cfg)
               for s in grid)
    assert r.total >= best - 1e-4


def test_broadcast_beta_one_is_single_stream():
    cfg = md.DcNdcConfig(1.0, 10.0, LAW)
    res = md.broadcast_joint(cfg)
    ref = siso.optimal_profile(LAW, 10.0)
    x = np.linspace(ref.s0 * 1.01, 0.99, 50)
    assert np.allclose(md.tilde_residual(cfg, x), ref.I(x), atol=1e-10)
    assert res.dc == pytest.approx(siso.expected_rate(ref, LAW), rel=1e-8)
    assert res.ndc == 0.0


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_broadcast_totals(beta):
    P = 10.0
    cfg = md.DcNdcConfig(beta, P, LAW)
    res = md.broadcast_joint(cfg)
    assert res.total <= siso.ergodic_capacity(LAW, P)
    assert res.total >= md.outage_joint(cfg).total - 1e-9
    assert res.profile.total_power() == pytest.approx(beta * P, rel=1e-6)


def test_high_snr_total_near_ergodic():
    cfg = md.DcNdcConfig(0.9, 1e3, LAW)
    assert md.broadcast_joint(cfg).total >= 0.95 * siso.ergodic_capacity(LAW, 1e3)


def test_config_checks():
    with pytest.raises(ValueError):
        md.DcNdcConfig(1.5, 10.0, LAW)
    cfg = md.DcNdcConfig(0.5, 10.0, LAW)
    with pytest.raises(ValueError):
        md.dc_rate(md.outage_profile(0.5, 10.0), cfg)
