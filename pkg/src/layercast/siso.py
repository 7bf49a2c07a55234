"""Single-user layered transmission over a slowly fading channel.

The transmitter superimposes a continuum of layers indexed by the fading
gain ``s``; a receiver with gain ``s`` decodes every layer up to ``s``.
``I(s)`` is the power of the undecoded layers above ``s`` and
``rho = -dI/ds`` the layer power density. All rates are in nats.
"""
from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np

from .channels import DiscreteStates, FadingLaw
from .numerics import (Tolerance, exp_integral_E1, exp_E1, find_root, integrate,
                       lambert_w0, maximize, NumericsError)

__all__ = [
    "LayeringProfile", "OutageSolution", "MultiIntervalError", "DegenerateLawError",
    "optimal_profile", "rayleigh_profile", "cumulative_rate", "expected_rate",
    "rayleigh_expected_rate", "outage_capacity", "ergodic_capacity",
    "finite_layer_rates", "finite_layer_expected_rate", "optimize_finite_layers",
    "prob_at_least", "upper_scan_limit",
]

_QTOL = Tolerance(1e-13, 1e-11, 400)


class MultiIntervalError(NumericsError):
    """The optimal profile would occupy more than one gain interval."""


class DegenerateLawError(ValueError):
    """Point-mass laws have no continuum profile; use the outage solution."""


@dataclass(frozen=True)
class LayeringProfile:
    """Residual interference ``I(s)`` of a layered code with total power P.

    ``I`` and ``rho`` are only consulted on ``[s0, s1]``; below ``s0`` the
    residual is ``P`` and above ``s1`` it is zero. ``atoms`` lists
    ``(s, I_minus, I_plus)`` jumps, i.e. finite power on a single layer.
    ``rate_fn`` optionally gives ``R(s)`` in closed form.
    """
    P: float
    s0: float
    s1: float
    I: Callable
    rho: Callable
    atoms: tuple = ()
    rate_fn: Optional[Callable] = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def residual(self, s):
        s = np.asarray(s, dtype=float)
        inner = np.clip(s, self.s0, self.s1) if self.s1 > self.s0 else s
        val = np.where(s < self.s0, self.P,
                       np.where(s > self.s1, 0.0, self.I(inner)))
        for a, lo_, hi_ in self.atoms:
            val = np.where(s == a, lo_, val)
        return float(val) if val.ndim == 0 else val

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inner = np.clip(s, self.s0, self.s1) if self.s1 > self.s0 else s
        val = np.where((s >= self.s0) & (s <= self.s1), self.rho(inner), 0.0)
        return float(val) if val.ndim == 0 else val

    def total_power(self):
        cont = integrate(lambda u: float(self.rho(u)), self.s0, self.s1, _QTOL) \
            if self.s1 > self.s0 else 0.0
        return cont + sum(lo_ - hi_ for _, lo_, hi_ in self.atoms)


@dataclass(frozen=True)
class OutageSolution:
    s_th: float
    rate: float


def prob_at_least(law, s):
    """P(gain >= s)."""
    if isinstance(law, DiscreteStates):
        lv, pr = np.asarray(law.levels), np.asarray(law.probs)
        s = np.asarray(s, dtype=float)
        out = (pr[None, :] * (lv[None, :] >= s.reshape(-1, 1) * (1 - 1e-12))).sum(axis=1)
        return float(out[0]) if s.ndim == 0 else out.reshape(s.shape)
    return 1.0 - law.cdf(s)


def upper_scan_limit(law, eps=1e-13):
    """Finite upper end for scans: the support end or a far quantile."""
    lo, hi = law.support
    if np.isfinite(hi):
        return float(hi)
    x = max(1.0, law.mean)
    while 1.0 - float(law.cdf(x)) > eps and x < 1e8:
        x *= 1.5
    return x


def _scan_grid(law, n=4000):
    lo, _ = law.support
    top = upper_scan_limit(law)
    start = lo if lo > 0 else min(1e-6, top * 1e-6)
    grid = np.geomspace(start, top, n)
    if lo > 0:
        grid = np.concatenate([[lo], grid[grid > lo]])
    return grid


def optimal_profile(law, P, level=0.0):
    """Maximizer of the expected rate over a continuous fading law.

    The residual interference follows the stationarity condition
    ``I(x) = (1 - F(x) + level - x f(x)) / (x^2 f(x))`` clipped to
    ``[0, P]``; ``level`` is a Lagrange term used by constrained variants
    (zero for the plain problem).

    Parameters
    ----------
    law : FadingLaw
    P : float
        Total transmit power (SNR).

    Returns
    -------
    LayeringProfile
    """
    if isinstance(law, DiscreteStates):
        raise DegenerateLawError("discrete law: use outage_capacity or finite layering")
    if not P > 0:
        raise ValueError("P must be positive")
    f, F, df = law.pdf, law.cdf, law.pdf_derivative

    def num(x):
        return 1.0 - F(x) + level - x * f(x)

    def J(x):
        x = np.asarray(x, dtype=float)
        fx = f(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (1.0 - F(x) + level - x * fx) / (x * x * fx)

    def rho(x):
        x = np.asarray(x, dtype=float)
        fx = f(x)
        g = x * x * fx
        dg = 2 * x * fx + x * x * df(x)
        return (1.0 - F(x) + level) * dg / (g * g)

    grid = _scan_grid(law)
    with np.errstate(divide="ignore", invalid="ignore"):
        Jg = J(grid)
        # at high power the lower breakpoint sits below the default grid
        while law.support[0] == 0 and np.isfinite(Jg[0]) and 0 < Jg[0] < P and grid[0] > 1e-150:
            ext = np.geomspace(grid[0] * 1e-4, grid[0], 401)[:-1]
            grid = np.concatenate([ext, grid])
            Jg = np.concatenate([J(ext), Jg])
    Jg = np.where(np.isfinite(Jg), Jg, np.where(grid < law.mean, np.inf, -np.inf))
    pos = Jg > 0
    if not pos.any():
        raise NumericsError("stationary residual is never positive; no layering possible")
    # contiguous positive runs
    edges = np.flatnonzero(np.diff(pos.astype(int)))
    runs = []
    start = 0 if pos[0] else None
    for e in edges:
        if pos[e]:
            runs.append((start, e))
            start = None
        else:
            start = e + 1
    if start is not None:
        runs.append((start, len(grid) - 1))
    if len(runs) > 1:
        raise MultiIntervalError("stationary residual is positive on disjoint intervals")
    i0, i1 = runs[0]

    # upper breakpoint: I(s1) = 0
    if i1 >= len(grid) - 1:
        s1 = float(grid[-1])
    else:
        s1 = find_root(num, (grid[i1], grid[i1 + 1]), Tolerance(1e-15, 1e-14, 400))
    # lower breakpoint: first crossing of P inside the positive run
    above = Jg[i0:i1 + 1] >= P
    atoms = ()
    if not above.any():
        if not (law.support[0] > 0 and i0 == 0):
            raise NumericsError("stationary residual never reaches P")
        # residual starts below P at the support edge: lump the excess there
        s0 = float(law.support[0])
        atoms = ((s0, float(P), float(J(s0))),)
    else:
        k = i0 + int(np.flatnonzero(above)[-1])
        if k >= i1:
            raise NumericsError("stationary residual exceeds P up to its zero")
        s0 = find_root(lambda x: num(x) - P * x * x * f(x), (grid[k], grid[k + 1]),
                       Tolerance(1e-15, 1e-14, 400))
    # the active branch must be non-increasing
    inner = grid[(grid > s0) & (grid < s1)]
    if inner.size > 2:
        Ji = J(inner)
        if np.any(np.diff(Ji) > 1e-9 * np.maximum(1.0, np.abs(Ji[:-1]))):
            raise MultiIntervalError("stationary residual is not monotone on its active range")

    g0 = s0 * s0 * float(f(s0))

    def rate_fn(s):
        s = np.asarray(s, dtype=float)
        x = np.clip(s, s0, s1)
        with np.errstate(divide="ignore"):
            r = np.log(x * x * f(x) / g0)
        return np.where(s < s0, 0.0, r)

    return LayeringProfile(float(P), float(s0), float(s1), J, rho, atoms,
                           rate_fn if not atoms else None, "optimal",
                           {"law": law.name, "level": level})


def rayleigh_profile(P, mean=1.0):
    """Closed-form optimum for exponential gain with the given mean.

    For unit mean ``I(s) = 1/s^2 - 1/s`` on ``[s0, 1]`` with
    ``s0 = 2 / (1 + sqrt(1 + 4P))``.
    """
    m = float(mean)
    Pm = P * m
    t0 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * Pm))

    def I(s):
        t = np.asarray(s, dtype=float) / m
        return (1.0 / t ** 2 - 1.0 / t) / m

    def rho(s):
        t = np.asarray(s, dtype=float) / m
        return (2.0 / t ** 3 - 1.0 / t ** 2) / m ** 2

    def rate_fn(s):
        t = np.asarray(s, dtype=float) / m
        x = np.clip(t, t0, 1.0)
        return np.where(t < t0, 0.0, 2.0 * np.log(x / t0) - (x - t0))

    return LayeringProfile(float(P), t0 * m, m, I, rho, (), rate_fn, "rayleigh-closed-form",
                           {"mean": m})


def rayleigh_expected_rate(P, mean=1.0):
    """``2 E1(s0) - 2 E1(1) - (exp(-s0) - exp(-1))`` at SNR ``P * mean``."""
    s0 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * P * mean))
    return 2 * exp_integral_E1(s0) - 2 * exp_integral_E1(1.0) - (math.exp(-s0) - math.exp(-1.0))


def _rate_integrand(profile):
    def g(u):
        I = float(profile.I(u))
        return u * float(profile.rho(u)) / (1.0 + u * I)
    return g


def _atom_rate(profile, a, lo_, hi_):
    return math.log((1.0 + a * lo_) / (1.0 + a * hi_))


def cumulative_rate(profile, s):
    """Total decodable rate ``R(s)`` for a receiver with gain ``s``.

    Accepts scalars or arrays; arrays are served from a fine tabulation
    when no closed form is attached to the profile.
    """
    s_arr = np.asarray(s, dtype=float)
    if profile.rate_fn is not None:
        out = profile.rate_fn(s_arr)
        return float(out) if np.ndim(out) == 0 else out
    if s_arr.ndim == 0:
        x = float(s_arr)
        hi = min(x, profile.s1)
        r = integrate(_rate_integrand(profile), profile.s0, hi, _QTOL) if hi > profile.s0 else 0.0
        for a, lo_, hi_ in profile.atoms:
            if a <= x:
                r += _atom_rate(profile, a, lo_, hi_)
        return r
    grid, cum = _rate_table(profile)
    out = np.interp(np.clip(s_arr, profile.s0, profile.s1), grid, cum)
    out = np.where(s_arr < profile.s0, 0.0, out)
    for a, lo_, hi_ in profile.atoms:
        out = out + np.where(s_arr >= a, _atom_rate(profile, a, lo_, hi_), 0.0)
    return out


def _rate_table(profile, n=20001):
    from scipy.integrate import cumulative_trapezoid
    if profile.s1 <= profile.s0:
        return np.array([profile.s0, profile.s0 + 1e-300]), np.zeros(2)
    grid = np.linspace(profile.s0, profile.s1, n)
    vals = grid * profile.rho(grid) / (1.0 + grid * profile.I(grid))
    return grid, cumulative_trapezoid(vals, grid, initial=0.0)


def expected_rate(profile, law):
    """``int (1 - F(u)) u rho(u) / (1 + u I(u)) du`` plus atom terms."""
    r = 0.0
    if profile.s1 > profile.s0:
        g = _rate_integrand(profile)
        r = integrate(lambda u: float(prob_at_least(law, u)) * g(u),
                      profile.s0, profile.s1, _QTOL)
    for a, lo_, hi_ in profile.atoms:
        r += float(prob_at_least(law, a)) * _atom_rate(profile, a, lo_, hi_)
    return r


def outage_capacity(law, P):
    """Best single-layer expected rate ``max_s P(gain >= s) ln(1 + s P)``."""
    if isinstance(law, DiscreteStates):
        vals = [prob_at_least(law, s) * math.log1p(s * P) for s in law.levels]
        k = int(np.argmax(vals))
        return OutageSolution(law.levels[k], float(vals[k]))
    if law.name == "rayleigh":
        m = law.mean
        Pm = P * m
        w = lambert_w0(Pm)
        t = (Pm - w) / (w * Pm)
        return OutageSolution(t * m, math.exp(-t) * math.log1p(t * Pm))
    top = upper_scan_limit(law, 1e-10)
    obj = lambda s: float(law.sf(s)) * math.log1p(s * P)
    s, v = maximize(obj, [(law.support[0], top)], grid=2048)
    return OutageSolution(float(s), float(v))


def ergodic_capacity(law, P):
    """``E[ln(1 + s P)]``."""
    if isinstance(law, DiscreteStates):
        return float(np.dot(law.probs, np.log1p(np.asarray(law.levels) * P)))
    if law.name == "rayleigh":
        return exp_E1(1.0 / (P * law.mean))
    lo, hi = law.support
    return integrate(lambda u: float(law.pdf(u)) * math.log1p(u * P), lo, hi, _QTOL)


def finite_layer_rates(thresholds, fractions, P):
    """Per-layer rates of a K-layer superposition code."""
    s = np.asarray(thresholds, dtype=float)
    b = np.asarray(fractions, dtype=float)
    if s.shape != b.shape or s.ndim != 1:
        raise ValueError("thresholds and power fractions must have equal length")
    if np.any(np.diff(s) < 0):
        raise ValueError("thresholds must be ascending")
    if np.any(b < -1e-15) or abs(b.sum() - 1.0) > 1e-9:
        raise ValueError("power fractions must be nonnegative and sum to 1")
    above = np.concatenate([np.cumsum(b[::-1])[::-1][1:], [0.0]])
    return np.log1p(s * b * P / (1.0 + s * P * above))


def finite_layer_expected_rate(law, thresholds, fractions, P):
    """``sum_i P(gain >= s_i) R_i`` for a K-layer code."""
    R = finite_layer_rates(thresholds, fractions, P)
    q = np.asarray(prob_at_least(law, np.asarray(thresholds, dtype=float)))
    return float(np.dot(q, R))


def _stick(z):
    z = np.clip(z, 0.0, 1.0)
    out, rest = [], 1.0
    for v in z:
        out.append(rest * v)
        rest -= rest * v
    out.append(rest)
    return np.asarray(out)


def _unstick(b):
    z, rest = [], 1.0
    for v in b[:-1]:
        z.append(v / rest if rest > 1e-15 else 0.0)
        rest -= v
    return np.asarray(z)


def optimize_finite_layers(law, P, K, init=None, n_starts=8, seed=0):
    """Numerically best K-layer code.

    ``init`` is an optional ``(thresholds, fractions)`` pair used as an
    extra start; passing a coarser optimum padded with zero-power layers
    makes the result at least as good as that code.

    Returns
    -------
    (thresholds, fractions, rate)
    """
    top = min(upper_scan_limit(law, 1e-8), 50.0 * law.mean)

    def unpack(x):
        s = np.sort(np.asarray(x[:K]))
        return s, _stick(x[K:])

    def obj(x):
        s, b = unpack(x)
        return finite_layer_expected_rate(law, s, b, P)

    if K == 1:
        sol = outage_capacity(law, P)
        return np.array([sol.s_th]), np.array([1.0]), sol.rate
    box = [(0.0, top)] * K + [(0.0, 1.0)] * (K - 1)
    starts = []
    if init is not None:
        s_i, b_i = (np.asarray(v, dtype=float) for v in init)
        order = np.argsort(s_i)
        starts.append(np.concatenate([s_i[order], _unstick(b_i[order])]))
    x, v = maximize(obj, box, n_starts=n_starts, seed=seed, starts=starts)
    s, b = unpack(x)
    return s, b, float(v)
