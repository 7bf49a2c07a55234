import math

import numpy as np
import pytest

from layercast import parallel as par
from oracles import parallel_grid_optimum

CFG = par.TwoStateParallel(0.5, 2.0, 0.5, 10.0)


def test_decomposition_matches_state_sum():
    rng = np.random.default_rng(0)
    for _ in range(50):
        aa, bb = rng.dirichlet(np.ones(3))[:2]
        al = par.Alloc(float(rng.random()), aa, 1 - aa - bb, bb)
        assert par.extended_average_rate(CFG, al) == pytest.approx(
            par.average_rate_by_states(CFG, al), abs=1e-12)


def test_aa_only_allocation():
    al = par.Alloc(0.3, 1.0, 0.0, 0.0)
    expect = 2 * (CFG.P_A + CFG.P_B) ** 2 * math.log1p(CFG.nu_a * CFG.P)
    assert par.extended_average_rate(CFG, al) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("args", [(0.5, 2.0, 0.5, 10.0), (0.2, 1.0, 0.3, 5.0),
                                  (1.0, 3.0, 0.7, 20.0)])
def test_optimum_against_grid(args):
    cfg = par.TwoStateParallel(*args)
    alloc, v = par.optimal_sum_rate(cfg)
    rate = lambda a, aa, cr, b: par.average_rate_by_states(cfg, par.Alloc(a, aa, cr, b))
    z, vg, (v_coarse, _) = parallel_grid_optimum(rate)
    assert v == pytest.approx(vg, abs=1e-4)
    assert v >= v_coarse - 1e-12
    assert z[2] <= 1e-4 and alloc.alpha_BB == 0.0
    for _, r in par.suboptimal_schemes(cfg).values():
        assert r <= v + 1e-12


def test_only_weak_state():
    cfg = par.TwoStateParallel(0.5, 2.0, 1.0, 10.0)
    _, v = par.optimal_sum_rate(cfg)
    assert v == pytest.approx(2 * math.log1p(0.5 * 10.0), rel=1e-10)


def test_clamped_independent_split():
    # a weak state almost as good as the strong one pushes the split above 1
    cfg = par.TwoStateParallel(1.9, 2.0, 0.1, 10.0)
    assert par.suboptimal_schemes(cfg)["independent"][0]["alpha"] == 1.0
    # a rare, very weak state pushes it below 0
    cfg = par.TwoStateParallel(0.1, 10.0, 0.01, 1.0)
    assert par.suboptimal_schemes(cfg)["independent"][0]["alpha"] == 0.0


def test_alloc_checks():
    with pytest.raises(ValueError):
        par.Alloc(0.5, 0.5, 0.6, 0.0)
    with pytest.raises(ValueError):
        par.Alloc(1.5, 1.0, 0.0, 0.0)
