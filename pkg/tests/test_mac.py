import math

import numpy as np
import pytest

from layercast import mac

CFG = mac.MacConfig.two_state(0.25, 1.0, 10.0)


def test_cap_convention():
    assert mac.cap(3.0, 0.0, 1.0) == pytest.approx(0.5 * math.log2(4.0))
    assert CFG.C(1.0, 0.9) == pytest.approx(0.5 * math.log2(2.0))


def test_su_region_endpoints_and_shape():
    reg = mac.su_region(0.25, 1.0, 10.0)
    S = np.array(reg.boundary_samples)
    assert S[-1, 0] == 0.0
    assert S[0, 0] == pytest.approx(mac.cap(0.5, 0.0, 10.0))
    # monotone trade-off with a concave boundary
    assert np.all(np.diff(S[:, 0]) <= 1e-15) and np.all(np.diff(S[:, 1]) >= -1e-15)
    slopes = np.diff(S[:, 1]) / np.diff(S[:, 0])
    # samples run from large to small R_w, so a concave boundary has rising slopes
    assert np.all(np.diff(slopes[np.isfinite(slopes)]) >= -1e-9)
    for pt in S:
        assert reg.contains(pt)
    with pytest.raises(ValueError):
        mac.su_region(1.0, 0.5, 10.0)


def test_full_region_only_top_layer():
    reg = mac.full_region(CFG, mac.PowerSplit.symmetric([[0, 0], [0, 1]]))
    assert reg.bound("R11") == 0 and reg.bound("R12") == 0 and reg.bound("R21") == 0
    assert reg.bound("R22") == pytest.approx(0.5 * mac.cap(2.0, 0.0, 10.0))


def test_full_region_projects_onto_reduction():
    x = 0.4
    red = mac.reduced_region(CFG, mac.PowerSplit.symmetric([[x, 1 - x], [0, 0]]))
    full = mac.full_region(CFG, mac.PowerSplit.symmetric([[x, 0], [0, 1 - x]]))
    rs = red.bound("R_s")
    _, best = full.max_weighted((2, 2, 2, 0), A_extra=(0, 0, 0, -2), b_extra=-rs)
    assert best >= red.bound("R_w") - 1e-12


def test_reduced_region_symmetry_and_checks():
    sp = mac.PowerSplit.symmetric([[0.3, 0.7], [0, 0]])
    a = mac._reduced_constants(CFG, sp)
    assert a["a4"] == pytest.approx(a["a8"]) and a["a6"] == pytest.approx(a["a9"])
    top = mac.reduced_region(CFG, mac.PowerSplit.symmetric([[1, 0], [0, 0]]))
    assert top.bound("R_s") == 0
    with pytest.raises(ValueError):
        mac.reduced_region(CFG, mac.PowerSplit.symmetric([[0.5, 0], [0, 0.5]]))


@pytest.mark.parametrize("P", [1.0, 5.0])
def test_full_inside_outer(P):
    cfg = mac.MacConfig.two_state(0.25, 1.0, P)
    rng = np.random.default_rng(int(P))
    for _ in range(50):
        sp = mac.PowerSplit.symmetric(rng.dirichlet(np.ones(4)).reshape(2, 2))
        assert mac.full_region(cfg, sp).excess_over(mac.outer_bound(cfg, sp)) <= 1e-9


def test_outer_bound_edge_cases():
    sp = mac.PowerSplit.symmetric([[0, 0], [0, 1]])
    full, outer = mac.full_region(CFG, sp), mac.outer_bound(CFG, sp)
    assert full.bound("R22") == pytest.approx(outer.bound("R22"))
    sp = mac.PowerSplit.symmetric([[0.5, 0.5], [0, 0]])
    assert mac.outer_bound(CFG, sp).bound("R22") == 0


def test_average_sum_rate():
    r = (0.1, 0.2, 0.3, 0.4)
    assert mac.average_sum_rate(r, 1.0) == pytest.approx(0.2)
    assert mac.average_sum_rate(r, 0.0) == pytest.approx(2.0)
    v = [mac.average_sum_rate(r, p) for p in np.linspace(0, 1, 11)]
    assert np.all(np.diff(v) <= 0)
    with pytest.raises(ValueError):
        mac.average_sum_rate(r, 1.5)


def test_optimized_average_rate_decreases_in_p():
    cfg = mac.MacConfig.two_state(0.25, 1.0, 5.0)
    vals = []
    for p in (0.1, 0.5, 0.9):
        w = 2.0 * np.array([1, 1 - p, 1 - p, (1 - p) ** 2])
        _, rates, v = mac.optimize_full_region(cfg, w, n_restarts=8)
        assert mac.average_sum_rate(rates, p) == pytest.approx(v, abs=1e-12)
        vals.append(v)
    assert vals[0] > vals[1] > vals[2]


def test_optimized_full_region_dominates_capacity_tradeoff():
    # optimized four-codebook trade-off reaches every weak/strong capacity point
    cfg = mac.MacConfig.two_state(0.25, 1.0, 10.0)
    su = mac.su_region(0.25, 1.0, 10.0)
    for th in np.linspace(0.05, 1.5, 5):
        w = np.array([math.cos(th), math.sin(th)])
        _, v_su = su.max_weighted(w)
        weights = (2 * w[0], 2 * w[0], 2 * w[0], 2 * w[1])
        _, _, v = mac.optimize_full_region(cfg, weights, n_restarts=8)
        assert v >= v_su - 1e-6


@pytest.mark.xfail(strict=True, reason="printed reduction constants leave a 0.02 gap to the "
                                       "capacity trade-off; see the decisions ledger")
def test_reduced_region_matches_capacity_tradeoff():
    su = mac.su_region(0.25, 1.0, 10.0)
    worst = 0.0
    for th in np.linspace(0.05, 1.5, 12):
        w = np.array([math.cos(th), math.sin(th)])
        _, v_su = su.max_weighted(w)
        _, _, v = mac.optimize_reduced_region(CFG, w)
        worst = max(worst, v_su - v)
    assert worst <= 1e-3


def test_multistate_reduces_to_two_state():
    rng = np.random.default_rng(3)
    for _ in range(5):
        sp = mac.PowerSplit.symmetric(rng.dirichlet(np.ones(4)).reshape(2, 2))
        two, multi = mac.full_region(CFG, sp), mac.multistate_region(CFG, sp)
        for w in rng.random((4, 4)):
            assert multi.max_weighted(w)[1] == pytest.approx(two.max_weighted(w)[1], abs=1e-9)


def test_multistate_three_states():
    cfg = mac.MacConfig((0.04, 0.25, 1.0), (0.3, 0.4, 0.3), (0.6, 0.1, 0.3), 10.0)
    sp = mac.PowerSplit.symmetric(np.full((3, 3), 1 / 9))
    consts = mac.multistate_constants(cfg, sp)
    for key, c in consts["b"].items():
        assert all(v >= 0 for v in c.values())
    B = consts["B"]
    beta = np.full((3, 3), 1 / 9)
    for u in range(1, 4):
        for v in range(u + 1, 4):
            # brute force: B8 is one minus the leading v-by-u block
            assert B["B8"](u, v) == pytest.approx(1 - beta[:v, :u].sum())
            for name in ("B3", "B4", "B5", "B8"):
                assert -1e-12 <= B[name](u, v) <= 1 + 1e-12
    top = np.zeros((3, 3))
    top[2, 2] = 1.0
    reg = mac.multistate_region(cfg, mac.PowerSplit.symmetric(top))
    nonzero = [reg.names[int(np.argmax(a))] for a, b in reg.constraints if b > 0]
    assert set(nonzero) == {"R33"}


def test_local_csit_equal_states_is_pentagon():
    cfg = mac.MacConfig.two_state(0.5, 0.5, 10.0)
    reg = mac.local_csit_region(cfg, mac.PowerSplit.local_two_state(0.0, 0.0))
    assert reg.bound("R_1") == pytest.approx(mac.cap(0.5, 0, 10.0))
    _, v = reg.max_weighted((1, 1))
    assert v == pytest.approx(mac.cap(1.0, 0, 10.0))


def test_local_csit_sum_reaches_full_csit():
    # with the strong-layer fraction s1/s2 the sum constraint is the full-CSIT sum
    for P in (0.01, 1.0, 1e2, 1e6):
        cfg = mac.MacConfig.two_state(0.25, 1.0, P)
        reg = mac.local_csit_region(cfg, mac.PowerSplit.local_two_state(0.25, 0.25))
        _, v = reg.max_weighted((1, 1))
        assert v == pytest.approx(mac.full_csit_sum_capacity(cfg), abs=1e-12)


def test_local_csit_multistate_matches_two_state():
    rng = np.random.default_rng(8)
    for _ in range(5):
        a, b = rng.random(2)
        sp = mac.PowerSplit.local_two_state(a, b)
        r2 = mac.local_csit_region(CFG, sp)
        rm = mac.local_csit_multistate(CFG, sp)
        for w in ((1, 0), (0, 1), (1, 1), (0.3, 0.7)):
            assert rm.max_weighted(w)[1] == pytest.approx(r2.max_weighted(w)[1], abs=1e-9)


def test_corner_points():
    cfg = mac.MacConfig.two_state(0.3, 1.0, 10.0)
    pts = mac.local_csit_corner_points(cfg)
    k = pts["constants"]
    assert k["b1"] == pytest.approx(0.5 * cfg.C(0.3, 0) + 0.5 * cfg.C(1.0, 0))
    assert pts["T"] == (0.0, k["b1"]) and pts["Z"] == (k["b5"], 0.0)
    tie = mac.local_csit_corner_points(mac.MacConfig.two_state(0.5, 0.5, 10.0))
    assert tie["constants"]["i_star"] == 1
