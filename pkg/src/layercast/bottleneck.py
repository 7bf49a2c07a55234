"""Fading hop followed by a reliable link of finite capacity ``C``.

An oblivious relay compresses its observation to rate ``C``; the
destination then sees an equivalent fading gain ``a s / (1 + b s)`` with
``a = 1 - exp(-2C)`` and ``b = P exp(-2C)``. A decoding relay forwards
whatever layers it decoded, up to ``C`` nats. Rates use the real-channel
``0.5 ln(1 + .)`` form throughout.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .channels import DiscreteStates, FadingLaw
from .numerics import NumericsError, Tolerance, find_root, integrate
from .siso import LayeringProfile, expected_rate, optimal_profile, upper_scan_limit

__all__ = ["BottleneckConfig", "ConstrainedProfile", "fpr_eq", "equivalent_law",
           "oblivious_ergodic", "df_ergodic", "oblivious_broadcast",
           "nonoblivious_broadcast", "variable_capacity_broadcast", "layered_total_rate"]

_QTOL = Tolerance(1e-13, 1e-11, 400)
_RTOL = Tolerance(1e-15, 1e-14, 400)


@dataclass(frozen=True)
class BottleneckConfig:
    """Either a fixed capacity ``C`` or a discrete law ``capacity_states``."""
    P: float
    law: FadingLaw
    C: float = None
    capacity_states: DiscreteStates = None

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("P must be positive")
        if (self.C is None) == (self.capacity_states is None):
            raise ValueError("give exactly one of C and capacity_states")
        if self.C is not None and not self.C > 0:
            raise ValueError("C must be positive")
        if self.capacity_states is not None and not isinstance(self.capacity_states,
                                                               DiscreteStates):
            raise TypeError("capacity_states must be DiscreteStates")

    @property
    def capacity(self):
        """The single capacity value; raises for a multi-state law."""
        if self.C is not None:
            return float(self.C)
        if self.capacity_states.size == 1:
            return self.capacity_states.levels[0]
        raise ValueError("configuration has several capacity states")

    @property
    def mean_capacity(self):
        if self.C is not None:
            return float(self.C)
        return self.capacity_states.mean


@dataclass(frozen=True)
class ConstrainedProfile:
    """Layering profile whose total rate is capped at ``C``.

    ``lambda_opt`` prices the cap; it is zero when the cap is slack.
    ``solutions`` lists every ``u1`` that met the boundary relation.
    """
    profile: LayeringProfile
    lambda_opt: float
    total_rate: float
    C: float
    solutions: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.C - self.total_rate


def fpr_eq(s, P, C):
    """Equivalent gain ``s (1 - e^{-2C}) / (1 + s P e^{-2C})``."""
    s = np.asarray(s, dtype=float)
    e = math.exp(-2.0 * C)
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(s), math.expm1(2.0 * C) / P,
                       s * -math.expm1(-2.0 * C) / (1.0 + s * P * e))
    return float(out) if out.ndim == 0 else out


def _inverse_parts(u, a, b):
    # s(u) = u / (a - b u) and its first two derivatives; s = inf past the support end
    u = np.asarray(u, dtype=float)
    d = a - b * u
    inside = (u >= 0) & (d > 0)
    dd = np.where(inside, d, 1.0)
    s = np.where(inside, u / dd, np.where(u < 0, 0.0, np.inf))
    ds = np.where(inside, a / dd ** 2, 0.0)
    d2s = np.where(inside, 2.0 * a * b / dd ** 3, 0.0)
    return s, ds, d2s, inside


def _mixture_law(law, P, caps, probs):
    """Law of ``fpr_eq(s, P, C_i)`` with ``C_i`` drawn from ``probs``."""
    pairs = [(-math.expm1(-2.0 * c), P * math.exp(-2.0 * c), p) for c, p in zip(caps, probs)]
    top = max(a / b for a, b, _ in pairs)

    def cdf(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for a, b, p in pairs:
            s, _, _, inside = _inverse_parts(u, a, b)
            out = out + p * np.where(inside, law.cdf(np.where(inside, s, 0.0)),
                                     np.where(u < 0, 0.0, 1.0))
        return float(out) if out.ndim == 0 else out

    def pdf(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for a, b, p in pairs:
            s, ds, _, inside = _inverse_parts(u, a, b)
            out = out + p * np.where(inside, law.pdf(np.where(inside, s, 0.0)) * ds, 0.0)
        return float(out) if out.ndim == 0 else out

    def dpdf(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for a, b, p in pairs:
            s, ds, d2s, inside = _inverse_parts(u, a, b)
            ss = np.where(inside, s, 0.0)
            out = out + p * np.where(
                inside, law.pdf_derivative(ss) * ds * ds + law.pdf(ss) * d2s, 0.0)
        return float(out) if out.ndim == 0 else out

    mean = sum(p * integrate(lambda s: float(law.pdf(s)) * a * s / (1.0 + b * s),
                             law.support[0], law.support[1], _QTOL) for a, b, p in pairs)
    return FadingLaw(cdf, pdf, dpdf, (0.0, top), mean, "bottleneck-equivalent",
                     {"P": P, "C": tuple(caps), "p": tuple(probs)})


def equivalent_law(cfg):
    """Law of the equivalent gain seen through the compressing relay."""
    if cfg.C is not None:
        return _mixture_law(cfg.law, cfg.P, (float(cfg.C),), (1.0,))
    st = cfg.capacity_states
    return _mixture_law(cfg.law, cfg.P, st.levels, st.probs)


def _expect(law, g):
    lo = law.support[0]
    hi = upper_scan_limit(law, 1e-16)
    return integrate(lambda s: float(law.pdf(s)) * g(s), lo, hi, _QTOL)


def oblivious_ergodic(cfg):
    """``E[0.5 ln(1 + P fpr_eq(s))]`` averaged over the capacity law if given."""
    P = cfg.P
    caps = (cfg.C,) if cfg.C is not None else cfg.capacity_states.levels
    probs = (1.0,) if cfg.C is not None else cfg.capacity_states.probs
    return sum(p * _expect(cfg.law, lambda s: 0.5 * math.log1p(P * fpr_eq(s, P, c)))
               for c, p in zip(caps, probs))


def df_ergodic(cfg):
    """``E[min(C, 0.5 ln(1 + s P))]`` for a decoding relay."""
    C, P, law = cfg.capacity, cfg.P, cfg.law
    s_sat = math.expm1(2.0 * C) / P
    lo = law.support[0]
    if s_sat <= lo:
        return C
    # past the scan limit the remaining probability is negligible
    hi = min(s_sat, upper_scan_limit(law, 1e-16))
    body = integrate(lambda s: float(law.pdf(s)) * 0.5 * math.log1p(s * P), lo, hi, _QTOL)
    return body + C * (1.0 - float(law.cdf(s_sat)))


def layered_total_rate(profile):
    """Rate of every layer together, ``0.5 ln(u1^2 f(u1) / (u0^2 f(u0)))`` for
    stationary profiles; atoms add their own terms."""
    if profile.s1 <= profile.s0:
        r = 0.0
    elif profile.rate_fn is not None:
        r = float(profile.rate_fn(profile.s1))
    else:
        r = integrate(lambda u: u * float(profile.rho(u)) / (1.0 + u * float(profile.I(u))),
                      profile.s0, profile.s1, _QTOL)
    for a, lo_, hi_ in profile.atoms:
        r += math.log((1.0 + a * lo_) / (1.0 + a * hi_))
    return 0.5 * r


def oblivious_broadcast(cfg):
    """Optimal layering against the equivalent gain of a compressing relay.

    Returns
    -------
    (LayeringProfile, float)
        Profile over the equivalent gain and its expected rate.
    """
    eq = equivalent_law(cfg)
    prof = optimal_profile(eq, cfg.P)
    return prof, 0.5 * expected_rate(prof, eq)


def _upper_end(law, lam, bracket):
    # 1 - F(u) - u f(u) = lam
    return find_root(lambda u: 1.0 - float(law.cdf(u)) - u * float(law.pdf(u)) - lam,
                     bracket, _RTOL)


def nonoblivious_broadcast(cfg, n_scan=400):
    """Layering for a decoding relay whose forward link carries at most ``C``.

    The residual is ``I(u) = (1 - F - lam - u f) / (u^2 f)`` on ``[u0, u1]``.
    ``lam = 1 - F(u1) - u1 f(u1)`` is zero when the uncapped profile already
    fits; otherwise ``u1`` is scanned for ``u1^2 f(u1) = e^{2C} u0^2 f(u0)``
    with ``u0`` fixed by ``I(u0) = P``.

    Returns
    -------
    (ConstrainedProfile, float)
    """
    C, P, law = cfg.capacity, cfg.P, cfg.law
    free = optimal_profile(law, P)
    total = layered_total_rate(free)
    if total <= C:
        cp = ConstrainedProfile(free, 0.0, total, C, (), {"active": False})
        return cp, 0.5 * expected_rate(free, law)

    u_top = free.s1
    g = lambda u: u * u * float(law.pdf(u))

    def lam_of(u1):
        return 1.0 - float(law.cdf(u1)) - u1 * float(law.pdf(u1))

    def gap(u1):
        prof = optimal_profile(law, P, level=-lam_of(u1))
        return math.log(g(prof.s1) / g(prof.s0)) - 2.0 * C

    # u1 -> u_top recovers the uncapped profile (gap > 0); small u1 squeezes it to nothing
    grid = free.s0 + (u_top - free.s0) * np.linspace(1.0, 0.0, n_scan + 1)[:-1] ** 2
    grid = np.unique(grid)
    vals = []
    for u in grid:
        try:
            vals.append(gap(float(u)))
        except NumericsError:
            vals.append(np.nan)
    vals = np.asarray(vals)
    roots = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if np.isfinite(v0) and np.isfinite(v1) and v0 * v1 < 0:
            roots.append(find_root(gap, (float(grid[i]), float(grid[i + 1])), _RTOL))
    if not roots:
        raise NumericsError("no bracket for the capacity boundary relation")
    best = None
    for u1 in roots:
        lam = lam_of(u1)
        prof = optimal_profile(law, P, level=-lam)
        r = 0.5 * expected_rate(prof, law)
        if best is None or r > best[2]:
            best = (prof, lam, r)
    prof, lam, r = best
    cp = ConstrainedProfile(prof, float(lam), layered_total_rate(prof), C, tuple(roots),
                            {"active": True, "multiple": len(roots) > 1})
    return cp, r


def variable_capacity_broadcast(cfg, n_curve=201):
    """Layering against the mixture of equivalent gains over capacity states.

    Returns
    -------
    (LayeringProfile, float, (ndarray, ndarray))
        Profile, expected rate and the cumulative rate curve ``R(x)`` on a
        grid of equivalent gains.
    """
    eq = equivalent_law(cfg)
    prof = optimal_profile(eq, cfg.P)
    rate = 0.5 * expected_rate(prof, eq)
    x = np.linspace(0.0, eq.support[1], n_curve)
    x0, x1 = prof.s0, prof.s1
    g = lambda u: u * u * eq.pdf(u)
    xc = np.clip(x, x0, x1)
    with np.errstate(divide="ignore"):
        R = np.where(x < x0, 0.0, 0.5 * np.log(g(xc) / g(x0)))
    return prof, rate, (x, R)
