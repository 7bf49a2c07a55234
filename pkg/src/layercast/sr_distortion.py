"""Expected distortion of a Gaussian source sent by successive refinement.

Layer ``i`` carries rate ``R_i = 0.5 ln(1 + P_i / (1/s_i + sum_{k>i} P_k))``
and a receiver that decodes layers ``1..i`` reconstructs with distortion
``exp(-2 b sum_{j<=i} R_j)`` for a unit-variance source. ``b`` is the
number of channel uses per source sample. With a continuum of layers the
profile is described by ``I(s) = exp(2 R(s))``.
"""
from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .channels import DiscreteStates, FadingLaw, _numeric_ppf
from .numerics import NoSignChangeError, NumericsError, Tolerance, find_root, integrate, maximize

__all__ = ["SrConfig", "SrProfile", "MultiIntervalError", "continuous_min_distortion",
           "rayleigh_profile", "expected_distortion", "discrete_min_distortion",
           "discrete_distortion", "discretize", "outage_min_distortion", "power_residual",
           "continuous_powers_on"]

_QTOL = Tolerance(1e-13, 1e-12, 400)


class MultiIntervalError(NumericsError):
    """``f(s) s^2`` is not increasing on a single interval."""


@dataclass(frozen=True)
class SrConfig:
    b: float
    P: float
    law: object

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("bandwidth expansion b must be positive")
        if not self.P > 0:
            raise ValueError("P must be positive")
        if not isinstance(self.law, (FadingLaw, DiscreteStates)):
            raise TypeError("law must be a FadingLaw or DiscreteStates")


@dataclass(frozen=True)
class SrProfile:
    """``I(s) = exp(2 R(s))``: 1 below ``s1``, increasing on ``[s1, s2]``,
    constant above ``s2``."""
    I: Callable
    s1: float
    s2: float
    P: float
    b: float
    meta: dict = field(default_factory=dict)


def _gain_shape(law):
    return lambda s: float(law.pdf(s)) * s * s


def _increasing_interval(law, n=4000):
    # (0, t): the single interval on which f(s) s^2 increases
    lo = max(law.support[0], 1e-12)
    hi = law.support[1] if math.isfinite(law.support[1]) else 60.0 * law.mean
    s = np.geomspace(lo, hi, n)
    up = np.diff(law.pdf(s) * s * s) > 0
    if not up[0]:
        raise MultiIntervalError("f(s) s^2 is not increasing near zero gain")
    k = int(np.argmin(up)) if not up.all() else up.size
    if up[k:].any():
        raise MultiIntervalError("f(s) s^2 increases on more than one interval")
    return float(s[min(k, s.size - 1)])


def power_residual(profile, law):
    """``int_{s1}^{s2} I/s^2 ds + I(s2)/s2 - 1/s1 - P``."""
    s1, s2 = profile.s1, profile.s2
    body = integrate(lambda s: float(profile.I(s)) / (s * s), s1, s2, _QTOL) if s2 > s1 else 0.0
    return body + float(profile.I(s2)) / s2 - 1.0 / s1 - profile.P


def _shape_profile(law, b, s1, s2):
    g = _gain_shape(law)
    g1 = g(s1)

    def I(s):
        s = np.asarray(s, dtype=float)
        t = np.clip(s, s1, s2)
        out = (law.pdf(t) * t * t / g1) ** (1.0 / (b + 1.0))
        return float(out) if out.ndim == 0 else out
    return I


def continuous_min_distortion(cfg):
    """Optimal continuous layering for a density with one increasing interval.

    Returns
    -------
    (SrProfile, expected distortion)
    """
    law, b, P = cfg.law, cfg.b, cfg.P
    if not isinstance(law, FadingLaw):
        raise TypeError("continuous solution needs a FadingLaw")
    t = _increasing_interval(law)
    tol = Tolerance(1e-15, 1e-14, 400)
    lo = max(law.support[0], 1e-12)
    try:
        s2 = find_root(lambda s: 1.0 - float(law.cdf(s)) - float(law.pdf(s)) * s, (lo, t), tol)
    except NoSignChangeError as e:
        raise NoSignChangeError("no upper edge with 1 - F(s) = s f(s) on the increasing "
                                "interval") from e

    def resid(s1):
        prof = SrProfile(_shape_profile(law, b, s1, s2), s1, s2, P, b)
        return power_residual(prof, law)
    # the residual tends to -P at s1 = s2 and to +inf as s1 -> 0
    a = s2 * 0.5
    while resid(a) < 0:
        a *= 0.5
        if a < 1e-300:
            raise NoSignChangeError("power identity has no root below the upper edge")
    s1 = find_root(resid, (a, s2 * (1 - 1e-15)), tol)
    prof = SrProfile(_shape_profile(law, b, s1, s2), s1, s2, P, b,
                     {"lambda": b * _gain_shape(law)(s1)})
    return prof, expected_distortion(prof, cfg)


def rayleigh_profile(cfg):
    """Closed-form Rayleigh profile; the upper edge is the mean gain."""
    law, b, P = cfg.law, cfg.b, cfg.P
    if not isinstance(law, FadingLaw) or law.name != "rayleigh":
        raise ValueError("rayleigh_profile needs a Rayleigh law")
    m = law.mean
    s2 = m
    e = 1.0 / (b + 1.0)

    def shape(s1):
        def I(s):
            s = np.minimum(np.maximum(np.asarray(s, dtype=float), s1), s2)
            out = (s * s / (s1 * s1) * np.exp(-(s - s1) / m)) ** e
            return float(out) if out.ndim == 0 else out
        return I

    def resid(s1):
        return power_residual(SrProfile(shape(s1), s1, s2, P, b), law)
    a = 0.5 * s2
    while resid(a) < 0:
        a *= 0.5
    s1 = find_root(resid, (a, s2 * (1 - 1e-15)), Tolerance(1e-15, 1e-14, 400))
    return SrProfile(shape(s1), s1, s2, P, b, {"lambda": b * s1 * s1 * float(law.pdf(s1))})


def expected_distortion(profile, cfg):
    """``F(s1) + int_{s1}^{s2} f / I^b ds + (1 - F(s2)) / I(s2)^b``."""
    law, b = cfg.law, cfg.b
    s1, s2 = profile.s1, profile.s2
    F = lambda s: float(law.cdf(s))
    body = 0.0
    if s2 > s1:
        body = integrate(lambda s: float(law.pdf(s)) / float(profile.I(s)) ** b, s1, s2, _QTOL)
    return F(s1) + body + (1.0 - F(s2)) / float(profile.I(s2)) ** b


def outage_min_distortion(cfg):
    """Best single-layer (outage) transmission.

    Returns
    -------
    (threshold gain, distortion)
    """
    law, b, P = cfg.law, cfg.b, cfg.P
    if isinstance(law, DiscreteStates):
        vals = [(s, float(law.cdf(s)) - p + (1 - float(law.cdf(s)) + p) * (1 + s * P) ** (-b))
                for s, p in zip(law.levels, law.probs)]
        return min(vals, key=lambda t: t[1])
    hi = law.support[1] if math.isfinite(law.support[1]) else 40.0 * law.mean
    d = lambda s: float(law.cdf(s)) + (1.0 - float(law.cdf(s))) * (1.0 + s * P) ** (-b)
    s, v = maximize(lambda x: -d(x), (max(law.support[0], 1e-12), hi), grid=400)
    return s, -v


# ---------------------------------------------------------- discrete states


def discrete_distortion(levels, probs, powers, b):
    """Expected distortion of per-layer powers ``P_i`` on ascending levels."""
    n = 1.0 / np.asarray(levels, dtype=float)
    Pw = np.asarray(powers, dtype=float)
    T = np.append(np.cumsum(Pw[::-1])[::-1], 0.0)   # T[i] = sum_{k>=i} P_k
    logd = -b * np.cumsum(np.log(n + T[:-1]) - np.log(n + T[1:]))
    return float(np.dot(probs, np.exp(logd)))


def _objective(levels, probs, b, P):
    # variables: ratios z_j = T_j / T_{j-1} in [0, 1] for j = 2..M, where
    # T_j = sum_{k>=j} P_k, T_1 = P and T_{M+1} = 0; the box keeps T monotone
    n = 1.0 / np.asarray(levels, dtype=float)
    p = np.asarray(probs, dtype=float)

    def tails(z):
        return np.concatenate([[P], P * np.cumprod(z), [0.0]])

    def fg(z):
        T = tails(z)
        logd = -b * np.cumsum(np.log(n + T[:-1]) - np.log(n + T[1:]))
        pd = p * np.exp(logd)
        tail = np.cumsum(pd[::-1])[::-1]          # sum_{i>=j} p_i D_i
        j = np.arange(1, n.size)
        # dD/dT_j for j = 2..M (0-based 1..M-1)
        g = -b * tail[j] / (n[j] + T[j]) + b * tail[j - 1] / (n[j - 1] + T[j])
        # chain rule through T_k = T_{j-1} prod_{l=j..k} z_l
        H = np.empty_like(g)
        acc = 0.0
        for k in range(g.size - 1, -1, -1):
            acc = g[k] + (z[k + 1] * acc if k + 1 < g.size else 0.0)
            H[k] = acc
        return float(pd.sum()), T[j - 1] * H
    return fg, tails


def discretize(law, M):
    """M-state lower quantization of a continuous law.

    Cells hold equal probability and each is represented by its lower
    edge, so the discrete problem is a pessimistic version of the
    continuous one. Returns ``DiscreteStates``.
    """
    q = np.arange(M) / M
    ppf = law.ppf if law.ppf is not None else (lambda x: _numeric_ppf(law, x))
    edges = np.array([float(ppf(x)) for x in q])
    levels = np.maximum(edges, 1e-6 * float(edges[1]))
    return DiscreteStates(tuple(levels), tuple(np.full(M, 1.0 / M)))


def discrete_min_distortion(states, b, P, starts=None, tol=1e-14, maxiter=2000):
    """Optimal per-layer powers for finitely many gain states.

    The tail sums ``T_j = sum_{k>=j} P_k`` are written as running
    products of ratios in ``[0, 1]``, which turns the simplex into a box;
    L-BFGS-B with an analytic gradient then runs from several starts (all
    power on the top layer, equal powers, and any supplied power vectors).

    Returns
    -------
    (powers, distortion)
    """
    lv, pr = np.asarray(states.levels), np.asarray(states.probs)
    M = lv.size
    if M > 500:
        raise ValueError("at most 500 states are supported")
    if not (b > 0 and P > 0):
        raise ValueError("b and P must be positive")
    if M == 1:
        return np.array([P]), float(pr[0] * (1 + lv[0] * P) ** (-b))
    fg, tails_of = _objective(lv, pr, b, P)

    def ratios(powers):
        w = np.asarray(powers, dtype=float)
        T = np.cumsum((P * w / w.sum())[::-1])[::-1]
        with np.errstate(invalid="ignore", divide="ignore"):
            z = np.where(T[:-1] > 0, T[1:] / T[:-1], 0.0)
        return np.clip(z, 0.0, 1.0)
    z0s = [np.ones(M - 1), ratios(np.full(M, 1.0))] + [ratios(s) for s in (starts or [])]
    best = None
    for z0 in z0s:
        res = minimize(fg, z0, jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * (M - 1),
                       options={"ftol": tol, "gtol": 1e-12, "maxiter": maxiter})
        if best is None or res.fun < best[1]:
            best = (res.x, float(res.fun))
    T = tails_of(best[0])
    powers = np.maximum(T[:-1] - T[1:], 0.0)
    return powers, discrete_distortion(lv, pr, powers, b)


def continuous_powers_on(states, profile):
    """Per-state powers implied by a continuous profile (a warm start).

    The tail power above gain ``s`` is ``T(s) = int_s^inf I(r)/I(s) dr/r^2 - 1/s``.
    """
    lv = np.asarray(states.levels)
    s1, s2 = profile.s1, profile.s2

    def T(s):
        s = min(max(s, s1), s2)
        body = integrate(lambda r: float(profile.I(r)) / (r * r), s, s2, _QTOL) if s2 > s else 0.0
        return (body + float(profile.I(s2)) / s2) / float(profile.I(s)) - 1.0 / s
    tail = np.array([T(s) for s in lv])
    tail = np.minimum.accumulate(np.clip(tail, 0.0, profile.P))
    tail[0] = profile.P
    return np.maximum(tail - np.append(tail[1:], 0.0), 0.0) + 1e-300
