"""Reference computations that check the solvers by separate routes.

Each oracle reaches its value without calling the solver it checks:
closed forms written out directly, brute-force grids, discretized
dual problems, exhaustive enumeration or plain sampling.
"""
import math

import numpy as np
from scipy import optimize


def relay_layers_oracle(Pr, R, n_layers=200, lo=1e-3, hi=2.0):
    """Best expected rate of a finite relay layering carrying total rate R.

    Unit Rayleigh destination. Layer thresholds are fixed on a uniform
    grid. For a multiplier mu on the rate constraint the problem separates
    over the residual powers between consecutive layers; mu is then set by
    bisection so that the layer rates add up to R.
    """
    x = np.linspace(lo, hi, n_layers)
    w = np.exp(-x)
    a, b = x[1:], x[:-1]

    def layers(mu):
        c = w + mu
        ca, cb = c[1:], c[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            st = (ca * a - cb * b) / (a * b * (cb - ca))
        cand = [np.zeros_like(a), np.full_like(a, Pr),
                np.clip(np.nan_to_num(st, nan=0.0), 0.0, Pr)]
        vals = np.array([ca * np.log1p(a * I) - cb * np.log1p(b * I) for I in cand])
        I_mid = np.choose(np.argmax(vals, axis=0), cand)
        I = np.minimum.accumulate(np.concatenate([[Pr], I_mid, [0.0]]))
        return np.log1p(x * I[:-1]) - np.log1p(x * I[1:])

    lo_mu, hi_mu = -1.0 + 1e-9, 10.0
    if layers(hi_mu).sum() < R or layers(lo_mu).sum() > R:
        return -math.inf
    for _ in range(200):
        mid = 0.5 * (lo_mu + hi_mu)
        if layers(mid).sum() > R:
            hi_mu = mid
        else:
            lo_mu = mid
    r = layers(hi_mu)
    # trimming rates only frees power, so the budget still holds
    r = r * min(1.0, R / r.sum())
    return float(w @ r)


def relay_scheme1_oracle(Ps, Pr, n_layers=200):
    """Outer search over the source threshold around the discretized relay optimum."""
    def neg(s):
        v = relay_layers_oracle(Pr, math.log1p(Ps * s), n_layers)
        return -math.exp(-s) * v if np.isfinite(v) else 1.0
    res = optimize.minimize_scalar(neg, bounds=(0.02, 2.0), method="bounded",
                                   options={"xatol": 1e-5})
    return res.x, -res.fun


def rayleigh_block(m):
    """Rate, marginal and inverse marginal of optimal layering on an exponential
    gain of mean ``m``, written out independently of the library."""
    from scipy.special import exp1, lambertw

    def low(p):
        return 2.0 * m / (1.0 + math.sqrt(1.0 + 4.0 * p * m))

    def w(p):
        t = low(p) / m
        return 2 * exp1(t) - 2 * exp1(1.0) - (math.exp(-t) - math.exp(-1.0))

    def dw(p):
        x = low(p)
        return x * x * math.exp(-x / m) / m

    def inv(mu):
        if mu >= m * math.exp(-1.0):
            return 0.0
        x = float(np.real(-2.0 * m * lambertw(-0.5 * math.sqrt(mu / m))))
        return m / x ** 2 - 1.0 / x

    return w, dw, inv


def _equal_marginal(blocks, budget):
    if budget <= 0:
        return np.zeros(len(blocks))
    top = max(b[1](0.0) for b in blocks)
    g = lambda t: sum(b[2](math.exp(t)) for b in blocks) - budget
    lo = math.log(top)
    while g(lo) < 0:
        lo -= 1.0
    t = optimize.brentq(g, lo, math.log(top), xtol=1e-15, rtol=1e-15, maxiter=500)
    y = np.array([b[2](math.exp(t)) for b in blocks])
    return y * (budget / y.sum())


def harvest_subset_oracle(means, gamma):
    """Exhaustive search over which cumulative budgets are tight.

    Every subset containing the last block fixes a partition into segments;
    each segment spends its budget by equal marginals. The best feasible
    candidate is the optimum of the concave program.
    """
    blocks = [rayleigh_block(m) for m in means]
    B = len(blocks)
    gam = np.concatenate([[0.0], gamma])
    best = (-math.inf, None)
    for mask in range(1 << (B - 1)):
        tight = [k + 1 for k in range(B - 1) if mask >> k & 1] + [B]
        p = np.zeros(B)
        start = 0
        for t in tight:
            p[start:t] = _equal_marginal(blocks[start:t], gam[t] - gam[start])
            start = t
        if np.any(np.cumsum(p) > gam[1:] + 1e-12):
            continue
        val = sum(b[0](x) for b, x in zip(blocks, p))
        if val > best[0]:
            best = (val, p)
    return best[1], best[0]


def harvest_grid_oracle(means, budget, n=121):
    """Simplex grid over three block powers followed by a local polish."""
    blocks = [rayleigh_block(m) for m in means]
    obj = lambda y: sum(b[0](max(v, 0.0)) for b, v in zip(blocks, y))
    best = (-math.inf, None)
    for i in range(n):
        for j in range(n - i):
            y = np.array([i, j, n - 1 - i - j]) * budget / (n - 1)
            v = obj(y)
            if v > best[0]:
                best = (v, y)
    y0 = best[1][:2]
    f = lambda z: -obj([z[0], z[1], budget - z[0] - z[1]])
    res = optimize.minimize(f, y0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 20000})
    z = res.x
    return np.array([z[0], z[1], budget - z[0] - z[1]]), -res.fun


def rayleigh_closed_form(P):
    """Residual, lower breakpoint and expected rate of optimal layering on a
    unit exponential gain."""
    from scipy.special import exp1
    s0 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * P))
    I = lambda s: 1.0 / np.asarray(s) ** 2 - 1.0 / np.asarray(s)
    rate = 2 * exp1(s0) - 2 * exp1(1.0) - (math.exp(-s0) - math.exp(-1.0))
    return I, s0, float(rate)


def rayleigh_rate_samples(P, n, seed):
    """Decoded rate ``2 ln(s/s0) - (s - s0)`` clipped to ``[s0, 1]`` at ``n`` exponential draws."""
    s0 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * P))
    s = np.random.default_rng(seed).exponential(1.0, n)
    x = np.clip(s, s0, 1.0)
    return np.where(s < s0, 0.0, 2.0 * np.log(x / s0) - (x - s0))


def af_empirical_cdf(Ps, Pr, x, n, seed):
    """Empirical CDF of ``Pr a b / (Pr a + Ps b + 1)`` over exponential pairs, where
    ``b`` is the source-relay gain and ``a`` the relay-destination gain."""
    rng = np.random.default_rng(seed)
    b = rng.exponential(1.0, n)
    a = rng.exponential(1.0, n)
    g = np.sort(Pr * a * b / (Pr * a + Ps * b + 1.0))
    return np.searchsorted(g, np.asarray(x), side="right") / n


def lindley_loop(service, lam, warmup=0):
    """Queue sizes of ``w <- max(w + lam - r, 0)`` by direct iteration."""
    w, out = 0.0, np.empty(len(service))
    for k, r in enumerate(service):
        w = max(w + lam - r, 0.0)
        out[k] = w
    return out[warmup:]


def parallel_grid_optimum(rate, n=30):
    """Grid search over (alpha, alpha_AA, alpha_BB) with ``alpha_cr`` taking the
    rest, followed by a Nelder-Mead polish from the best grid point.

    ``rate(alpha, alpha_AA, alpha_cr, alpha_BB)`` is the objective.
    """
    g = np.linspace(0.0, 1.0, n)
    cand = []
    for a in g:
        for aa in g:
            for bb in g:
                cr = 1.0 - aa - bb
                if cr < -1e-12:
                    continue
                cand.append((rate(a, aa, max(cr, 0.0), bb), (a, aa, bb)))
    best = max(cand)
    grid_best = best[0], best[1]
    top = sorted(cand, reverse=True)[:8]

    def neg(z):
        a, aa, bb = np.clip(z, 0.0, 1.0)
        if aa + bb > 1.0:
            return 10.0 + aa + bb
        return -rate(a, aa, 1.0 - aa - bb, bb)
    polished = []
    for _, start in top:
        res = optimize.minimize(neg, start, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000,
                                         "initial_simplex": _simplex(start)})
        polished.append((-res.fun, tuple(np.clip(res.x, 0.0, 1.0))))
    v, z = max(polished)
    return z, v, grid_best


def _simplex(x, h=0.02):
    # small start simplex pointing into the box, so boundary optima stay reachable
    x = np.asarray(x, dtype=float)
    pts = [x]
    for k in range(x.size):
        y = x.copy()
        y[k] += h if y[k] + h <= 1.0 else -h
        pts.append(y)
    return np.array(pts)
