import numpy as np
import pytest

from layercast import queue, siso
from layercast.channels import rayleigh_power
from oracles import lindley_loop

LAW = rayleigh_power(1.0)


def test_simulation_matches_loop():
    svc = queue.QueueServiceLaw.from_layers([0.5, 0.4], [0.3, 0.5])
    draw = svc.sampler()
    rng = np.random.default_rng(4)
    r = draw(rng, 5000)
    w = lindley_loop(r, 0.3, warmup=50)
    q, d = queue.simulate_lindley(lambda rng, n: r, 0.3, 5000)
    assert q == pytest.approx(w.mean(), rel=1e-12)
    assert d == pytest.approx(q / 0.3)


def test_degenerate_services():
    q, _ = queue.simulate_lindley(lambda rng, n: np.full(n, 0.4), 0.4, 1000)
    assert q == pytest.approx(0.0, abs=1e-12)
    n, lam = 10000, 0.2
    q, _ = queue.simulate_lindley(lambda rng, n: np.zeros(n), lam, n)
    w = lam * np.arange(1, n + 1)[n // 100:]
    assert q == pytest.approx(w.mean(), rel=1e-12)
    assert q == pytest.approx(lam * n / 2, rel=0.02)


def test_k_layer_bounds_contain_simulation():
    rng = np.random.default_rng(5)
    for k in range(4):
        rates = rng.uniform(0.1, 1.5, 3)
        probs = rng.dirichlet(np.ones(4))[:3]
        svc = queue.QueueServiceLaw.from_layers(rates, probs)
        lam = 0.5 * svc.mean_rate
        b = queue.k_layer_queue_bounds(svc, lam)
        q, _ = queue.simulate_lindley(svc.sampler(), lam, 10 ** 6, seed=k)
        assert b.lower <= q <= b.upper


def test_bounds_at_small_arrivals():
    svc = queue.QueueServiceLaw.from_layers([0.5, 0.4], [0.3, 0.5])
    for lam in (1e-3, 1e-6, 1e-9):
        lo, hi = queue.k_layer_queue_bounds(svc, lam)
        assert 0 <= lo <= hi < np.inf


def test_zero_variance_delay():
    svc = queue.QueueServiceLaw((1.0,), (1.0,))
    assert queue.k_layer_delay_ub(svc, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_instability():
    svc = queue.QueueServiceLaw((1.0,), (0.5,))
    with pytest.raises(queue.InstabilityError):
        queue.k_layer_queue_bounds(svc, 0.5)
    with pytest.raises(ValueError):
        queue.QueueServiceLaw((1.0, 0.5), (0.2, 0.2))


def test_continuum_moments_two_routes():
    prof = siso.optimal_profile(LAW, 10.0)
    top, r_bs, (direct, parts), var = queue.continuum_moments(prof, LAW, check=True)
    assert direct == pytest.approx(parts, rel=1e-8)
    assert r_bs == pytest.approx(siso.rayleigh_expected_rate(10.0), rel=1e-10)
    r = queue.continuum_sampler(prof, LAW)(np.random.default_rng(2), 10 ** 6)
    assert r.var() == pytest.approx(var, rel=0.01)


def test_continuum_bounds_contain_simulation():
    prof = siso.optimal_profile(LAW, 10.0)
    for lam in (0.3, 0.6, 0.9):
        b = queue.continuum_queue_bounds(prof, LAW, lam)
        q, _ = queue.simulate_lindley(queue.continuum_sampler(prof, LAW), lam, 10 ** 6, seed=1)
        assert b.lower <= q <= b.upper
        assert queue.continuum_delay_ub(prof, LAW, lam) > 0
    lo, hi = queue.continuum_queue_bounds(prof, LAW, 1e-8)
    assert 0 <= lo <= hi < np.inf
