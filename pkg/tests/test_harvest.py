import numpy as np
import pytest

from layercast import harvest as hv
from layercast.channels import chi2_simo, rayleigh_power
from layercast.siso import expected_rate, optimal_profile
from oracles import harvest_grid_oracle, harvest_subset_oracle


@pytest.mark.parametrize("law", [rayleigh_power(1.0), rayleigh_power(2.5), chi2_simo(2)])
@pytest.mark.parametrize("p", [0.3, 3.0, 30.0])
def test_block_rate_matches_single_link(law, p):
    assert hv.block_rate(law, p) == pytest.approx(expected_rate(optimal_profile(law, p), law),
                                                  rel=1e-6)


@pytest.mark.parametrize("law", [rayleigh_power(1.0), chi2_simo(3)])
def test_marginal_is_derivative(law):
    ut = hv.block_utility(law)
    for p in (0.2, 2.0, 20.0):
        h = 1e-4 * p
        fd = (ut.w(p + h) - ut.w(p - h)) / (2 * h)
        assert ut.dw(p) == pytest.approx(fd, rel=1e-5)
        assert ut.inverse(ut.dw(p)) == pytest.approx(p, rel=1e-9)
    assert ut.concavity_gap(np.linspace(0.0, 10.0, 41)) < 0


def test_zero_power():
    law = rayleigh_power(1.0)
    assert hv.block_rate(law, 0.0) == 0.0
    assert hv.block_rate(law, 1e-8) < 1e-8
    with pytest.raises(ValueError):
        hv.block_rate(law, -1.0)


def test_three_blocks_against_grid():
    means = [0.5, 1.0, 2.0]
    uts = [hv.block_utility(rayleigh_power(m)) for m in means]
    y = hv.solve_subproblem(uts, 12.0)
    y_ref, v_ref = harvest_grid_oracle(means, 12.0)
    assert y.sum() == pytest.approx(12.0, rel=1e-14)
    assert np.max(np.abs(y - y_ref)) < 1e-4
    assert sum(u.w(float(x)) for u, x in zip(uts, y)) >= v_ref - 1e-10


def test_identical_blocks_split_evenly():
    ut = hv.block_utility(rayleigh_power(1.0))
    y = hv.solve_subproblem([ut] * 4, 6.0)
    assert np.allclose(y, 1.5, rtol=1e-9)
    # everything arrives up front, so the budget is shared evenly
    res = hv.allocate_over_time([ut] * 4, np.full(4, 6.0))
    assert np.allclose(res.p, 1.5, rtol=1e-9)
    assert res.u == (4,)


def test_uniform_harvest_spends_as_it_arrives():
    hp = hv.HarvestProfile(np.full((5, 2), 1.0))
    res, total = hv.end_to_end(rayleigh_power(1.0), hp)
    assert np.allclose(res.p, 2.0, rtol=1e-9)
    assert np.allclose(res.p, hv.equal_split(hp.gamma))
    assert total == pytest.approx(5 * hv.block_rate(rayleigh_power(1.0), 2.0), rel=1e-9)


def test_single_block():
    hp = hv.HarvestProfile([[1.0, 2.5]])
    res, total = hv.end_to_end(rayleigh_power(1.0), hp)
    assert res.p[0] == 3.5 and res.u == (1,)
    assert total == pytest.approx(hv.block_rate(rayleigh_power(1.0), 3.5))


@pytest.mark.parametrize("seed", range(6))
def test_staircase_against_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    B = 4
    means = rng.uniform(0.3, 3.0, B)
    hp = hv.HarvestProfile(rng.exponential(2.0, (B, 2)))
    res, total = hv.end_to_end([rayleigh_power(m) for m in means], hp)
    p_ref, v_ref = harvest_subset_oracle(means, hp.gamma)
    assert np.max(np.abs(res.p - p_ref)) < 1e-6
    assert total >= v_ref - 1e-9
    assert np.all(res.cumulative() <= hp.gamma + 1e-9)
    assert np.all(np.diff(res.v) < 0)
    for u in res.u:
        assert res.cumulative()[u - 1] == pytest.approx(hp.gamma[u - 1], abs=1e-8)
    assert sum(len(g) for g in res.groups) == B


def test_late_energy_cannot_be_borrowed():
    # all energy arrives in the last block
    hp = hv.HarvestProfile([[0.0], [0.0], [9.0]])
    res, _ = hv.end_to_end(rayleigh_power(1.0), hp)
    assert np.allclose(res.p, [0.0, 0.0, 9.0])


def test_input_checks():
    with pytest.raises(ValueError):
        hv.HarvestProfile([[-1.0]])
    ut = hv.block_utility(rayleigh_power(1.0))
    with pytest.raises(ValueError):
        hv.allocate_over_time([ut, ut], [2.0, 1.0])
    with pytest.raises(ValueError):
        hv.end_to_end([rayleigh_power(1.0)], hv.HarvestProfile(np.ones((2, 1))))
