"""Layered transmission from an energy-harvesting transmitter over B blocks.

Within a block the layering is the single-link optimum for the block's
power ``p_b``; across blocks the powers obey the causal energy budget
``sum_{l<=b} p_l <= gamma_b``. The per-block average rate ``w_b(p)`` is
concave and increasing with marginal ``w_b'(p) = l^2 f(l)``, where ``l``
is the lowest gain that receives any layer at power ``p``.
"""
from dataclasses import dataclass
import math
from typing import Callable, Optional

import numpy as np

from .channels import FadingLaw
from .numerics import NumericsError, Tolerance, find_root, integrate
from .siso import upper_scan_limit

__all__ = ["HarvestProfile", "BlockUtility", "PartitionResult", "block_profile", "block_rate",
           "block_utility", "solve_subproblem", "allocate_over_time", "end_to_end",
           "equal_split"]

_RTOL = Tolerance(1e-15, 1e-14, 400)
_QTOL = Tolerance(1e-13, 1e-11, 400)


@dataclass(frozen=True)
class HarvestProfile:
    """Energy ``g[b][i]`` arriving in slot ``i`` of block ``b``."""
    g: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.g, dtype=float))
        if g.ndim != 2 or g.shape[0] < 1:
            raise ValueError("g must be a (B, n) array")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("harvested energy must be finite and nonnegative")
        object.__setattr__(self, "g", g)

    @property
    def B(self):
        return self.g.shape[0]

    @property
    def gamma(self):
        """Cumulative budgets ``gamma_b``."""
        return np.cumsum(self.g.sum(axis=1))


@dataclass
class BlockUtility:
    """Concave increasing utility ``w(p)`` with marginal ``dw`` and its inverse.

    Without ``inv_dw`` the inverse marginal is found by bisection on ``dw``.
    """
    w: Callable
    dw: Callable
    inv_dw: Optional[Callable] = None
    label: str = ""

    def inverse(self, mu):
        """Power at which the marginal equals ``mu``; zero if ``dw(0) <= mu``."""
        if self.inv_dw is not None:
            return float(self.inv_dw(mu))
        if self.dw(0.0) <= mu:
            return 0.0
        hi = 1.0
        while self.dw(hi) > mu:
            hi *= 2.0
            if hi > 1e300:
                raise NumericsError("marginal does not fall below mu")
        return find_root(lambda p: self.dw(p) - mu, (0.0, hi), _RTOL)

    def concavity_gap(self, grid):
        """Largest second difference of ``w`` over ``grid`` (should be < 0)."""
        v = np.array([self.w(float(p)) for p in grid])
        return float(np.max(v[2:] - 2 * v[1:-1] + v[:-2]))


@dataclass(frozen=True)
class PartitionResult:
    """Output of the staircase allocation.

    ``u`` are the 1-based dominant block indices, ``v`` the common marginal
    of each group, ``groups`` the 1-based blocks of each group.
    """
    u: tuple
    v: tuple
    groups: tuple
    p: np.ndarray
    diagnostics: tuple = ()

    def cumulative(self):
        return np.cumsum(self.p)


def _upper_end(law):
    # gain at which the stationary residual reaches zero: 1 - F(u) = u f(u)
    if law.name == "rayleigh":
        return float(law.mean)
    num = lambda s: 1.0 - float(law.cdf(s)) - s * float(law.pdf(s))
    top = upper_scan_limit(law)
    grid = np.geomspace(max(law.support[0], 1e-9), top, 4000)
    vals = np.array([num(x) for x in grid])
    k = np.flatnonzero((vals[:-1] > 0) & (vals[1:] <= 0))
    if k.size == 0:
        raise NumericsError("stationary residual has no zero")
    return find_root(num, (grid[k[0]], grid[k[0] + 1]), _RTOL)


def _residual(law, s):
    return (1.0 - float(law.cdf(s))) / (s * s * float(law.pdf(s))) - 1.0 / s


def block_profile(law, p, upper=None):
    """Lower and upper layering gains and the residual ``I`` at block power ``p``.

    Returns
    -------
    (float, float, callable)
    """
    if p < 0:
        raise ValueError("power must be nonnegative")
    u = _upper_end(law) if upper is None else upper
    if p == 0:
        return u, u, lambda s: np.zeros_like(np.asarray(s, dtype=float))
    if law.name == "rayleigh":
        m = law.mean
        lo = m * 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * p * m))
    else:
        a = u
        while _residual(law, a) < p:
            a *= 0.5
            if a < 1e-300:
                raise NumericsError("residual does not reach p")
        lo = find_root(lambda s: _residual(law, s) - p, (a, u), _RTOL)

    def I(s):
        s = np.asarray(s, dtype=float)
        inside = (s >= lo) & (s <= u)
        sc = np.where(inside, s, u)
        return np.where(inside, (1.0 - law.cdf(sc)) / (sc * sc * law.pdf(sc)) - 1.0 / sc, 0.0)

    return lo, u, I


def block_rate(law, p, upper=None):
    """Average rate ``ln(u^2 f(u) / (l^2 f(l))) - int_l^u (2/s + f'/f) F ds``."""
    lo, u, _ = block_profile(law, p, upper)
    if u <= lo:
        return 0.0
    f, F, df = law.pdf, law.cdf, law.pdf_derivative
    head = math.log(u * u * float(f(u)) / (lo * lo * float(f(lo))))
    tail = integrate(lambda s: (2.0 / s + float(df(s)) / float(f(s))) * float(F(s)), lo, u, _QTOL)
    return head - tail


def block_utility(law):
    """``BlockUtility`` of the optimal per-block layering over ``law``.

    The marginal is ``l(p)^2 f(l(p))``; its inverse solves ``s^2 f(s) = mu``
    for ``l`` below the upper gain and maps ``l`` back to power.
    """
    u = _upper_end(law)
    g = lambda s: s * s * float(law.pdf(s))
    g_top = g(u)

    def dw(p):
        lo, _, _ = block_profile(law, p, u)
        return g(lo)

    def inv_dw(mu):
        if mu >= g_top:
            return 0.0
        if mu <= 0:
            return math.inf
        a = u
        while g(a) > mu:
            a *= 0.5
            if a < 1e-300:
                raise NumericsError("marginal does not fall below mu")
        lo = find_root(lambda s: g(s) - mu, (a, u), _RTOL)
        return max(_residual(law, lo), 0.0)

    return BlockUtility(lambda p: block_rate(law, p, u), dw, inv_dw, law.name)


def solve_subproblem(utilities, budget):
    """Maximize ``sum w_b(y_b)`` subject to ``sum y_b = budget``, ``y >= 0``.

    The common marginal ``mu`` is found by bracketing in ``log mu``.

    Returns
    -------
    ndarray
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    n = len(utilities)
    if n == 1:
        return np.array([float(budget)])
    if budget == 0:
        return np.zeros(n)
    mu_hi = max(ut.dw(0.0) for ut in utilities)
    total = lambda mu: sum(ut.inverse(mu) for ut in utilities)
    lo = mu_hi
    while total(lo) < budget:
        lo *= 0.5
        if lo < 1e-300:
            raise NumericsError("budget exceeds what the marginals can absorb")
    x = find_root(lambda t: total(math.exp(t)) - budget, (math.log(lo), math.log(mu_hi)), _RTOL)
    y = np.array([ut.inverse(math.exp(x)) for ut in utilities])
    # absorb the residual of the root solve into the largest entry
    y[int(np.argmax(y))] += budget - y.sum()
    return y


def allocate_over_time(utilities, gamma, tie_tol=1e-12):
    """Staircase allocation of block powers under cumulative budgets.

    Stage ``d`` solves the equality-constrained problem from the last
    dominant block to every later block ``b``, scores it by the smallest
    marginal, and fixes the best-scoring ``b`` (earliest on ties) as the
    next dominant block.

    Returns
    -------
    PartitionResult
    """
    gamma = np.asarray(gamma, dtype=float)
    B = len(utilities)
    if gamma.shape != (B,):
        raise ValueError("gamma must have one entry per block")
    if np.any(gamma < 0) or np.any(np.diff(gamma) < 0):
        raise ValueError("gamma must be nonnegative and non-decreasing")
    gam = np.concatenate([[0.0], gamma])
    p = np.zeros(B)
    us, vs, groups, diag = [], [], [], []
    u_prev = 0
    while u_prev <= B - 1:
        ys, scores = [], []
        for b in range(u_prev + 1, B + 1):
            y = solve_subproblem(utilities[u_prev:b], gam[b] - gam[u_prev])
            ys.append(y)
            scores.append(min(ut.dw(float(yi)) for ut, yi in zip(utilities[u_prev:b], y)))
        top = max(scores)
        ties = [k for k, q in enumerate(scores) if top - q <= tie_tol * max(1.0, abs(top))]
        if len(ties) > 1:
            diag.append(f"stage {len(us) + 1}: tied marginals at blocks "
                        f"{[u_prev + 1 + k for k in ties]}")
        k = ties[0]
        best_b, best_q, best_y = u_prev + 1 + k, scores[k], ys[k]
        p[u_prev:best_b] = best_y
        us.append(best_b)
        vs.append(best_q)
        groups.append(tuple(range(u_prev + 1, best_b + 1)))
        u_prev = best_b
    return PartitionResult(tuple(us), tuple(vs), tuple(groups), p, tuple(diag))


def equal_split(gamma):
    """Spend each block's own harvest in that block."""
    gamma = np.asarray(gamma, dtype=float)
    return np.diff(np.concatenate([[0.0], gamma]))


def end_to_end(laws, harvest):
    """Optimal block powers and the summed average rate.

    Parameters
    ----------
    laws : FadingLaw or sequence of FadingLaw, one per block
    harvest : HarvestProfile

    Returns
    -------
    (PartitionResult, float)
    """
    B = harvest.B
    if isinstance(laws, FadingLaw):
        laws = [laws] * B
    if len(laws) != B:
        raise ValueError("need one fading law per block")
    cache = {}
    utilities = []
    for law in laws:
        key = id(law)
        if key not in cache:
            cache[key] = block_utility(law)
        utilities.append(cache[key])
    res = allocate_over_time(utilities, harvest.gamma)
    return res, float(sum(ut.w(float(pb)) for ut, pb in zip(utilities, res.p)))
