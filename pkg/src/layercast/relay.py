"""Two-hop source -> relay -> destination transmission over fading links.

The source gain ``nu`` is known at the relay, the relay gain ``mu`` at the
destination; neither transmitter knows the gain of its own link. Covers
cut-set style upper bounds, decode-and-forward with one or two source
levels, outage at the source with continuous layering at the relay,
amplify-and-forward with layering matched to the equivalent gain, and
amplify-quantize with layering at the source. Rates in nats.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .channels import FadingLaw, custom_law, rayleigh_power, sample
from .numerics import (NoSignChangeError, NumericsError, Tolerance, exp_E1,
                       exp_integral_E1, find_root, golden_section, integrate,
                       lambert_w0, maximize)
from .siso import ergodic_capacity, expected_rate, optimal_profile, rayleigh_expected_rate

__all__ = ["RelayConfig", "LagrangeProfile", "InfeasibleRateError", "fcsi_upper",
           "fcsi_upper_quad", "ergodic_cutset", "broadcast_cutset", "df_single_level",
           "df_two_one_rate", "df_two_one", "scheme1_profile", "scheme1_rate_at",
           "scheme1_outage_broadcast", "af_equivalent_gain", "af_equivalent_cdf",
           "af_equivalent_pdf", "af_equivalent_pdf_derivative", "af_law",
           "af_broadcast_rate", "af_broadcast_rate_explicit", "baq_rate_at", "baq_rate"]

_QTOL = Tolerance(1e-12, 1e-10, 400)
_LAM_MAX = math.exp(-2.0)


class InfeasibleRateError(NumericsError):
    """No Lagrange multiplier meets both the power and the rate condition."""


@dataclass(frozen=True)
class RelayConfig:
    Ps: float
    Pr: float
    source_law: FadingLaw = field(default_factory=rayleigh_power)
    relay_law: FadingLaw = field(default_factory=rayleigh_power)

    def __post_init__(self):
        if not (self.Ps > 0 and self.Pr > 0):
            raise ValueError("Ps and Pr must be positive")

    @property
    def unit_rayleigh(self):
        return all(l.name == "rayleigh" and l.mean == 1.0
                   for l in (self.source_law, self.relay_law))


# ---------------------------------------------------------------- bounds

def fcsi_upper(cfg):
    """Ergodic rate with full channel knowledge: ``E ln(1 + min(Ps nu, Pr mu))``."""
    if cfg.unit_rayleigh:
        a = (cfg.Ps + cfg.Pr) / (cfg.Ps * cfg.Pr)
        return float(exp_E1(a))
    return fcsi_upper_quad(cfg)


def fcsi_upper_quad(cfg):
    """The same expectation split at ``Pr mu = Ps nu`` and integrated numerically."""
    Ps, Pr = cfg.Ps, cfg.Pr
    fs, Fs = cfg.source_law.pdf, cfg.source_law.cdf
    fr, Fr = cfg.relay_law.pdf, cfg.relay_law.cdf
    k = Ps / Pr
    a = integrate(lambda v: float(fs(v)) * (1.0 - float(Fr(k * v))) * math.log1p(Ps * v),
                  0.0, math.inf, _QTOL)
    b = integrate(lambda v: (1.0 - float(Fs(v))) * float(fr(k * v)) * math.log1p(Ps * v),
                  0.0, math.inf, _QTOL)
    return a + k * b


def ergodic_cutset(cfg):
    """Smaller of the two single-link ergodic capacities."""
    return min(ergodic_capacity(cfg.source_law, cfg.Ps),
               ergodic_capacity(cfg.relay_law, cfg.Pr))


def _bs_rate(law, P):
    if law.name == "rayleigh" and law.mean == 1.0:
        return rayleigh_expected_rate(P)
    return expected_rate(optimal_profile(law, P), law)


def broadcast_cutset(cfg):
    """Smaller of the two single-link layered expected rates."""
    return min(_bs_rate(cfg.source_law, cfg.Ps), _bs_rate(cfg.relay_law, cfg.Pr))


# ---------------------------------------------------------------- decode-and-forward

def _sf(law, x):
    return 1.0 - float(law.cdf(x))


def df_single_level(cfg):
    """Single-level code at the source, re-encoded at the same rate by the relay.

    Returns
    -------
    (s_s, rate)
    """
    k = cfg.Ps / cfg.Pr

    def obj(s):
        return _sf(cfg.source_law, s) * _sf(cfg.relay_law, k * s) * math.log1p(cfg.Ps * s)
    hi = 20.0 * cfg.source_law.mean
    s, v = maximize(obj, [(0.0, hi)], Tolerance(1e-12, 1e-12, 300), grid=400)
    return float(s), float(v)


def df_two_one_rate(cfg, s1, s2, alpha):
    """Expected rate of two source levels, each re-encoded as one relay level.

    ``alpha`` is the power share of the first source level.
    """
    if not s1 < s2:
        raise ValueError("need s1 < s2")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    Ps, Pr = cfg.Ps, cfg.Pr
    R1 = math.log1p(Ps * s1) - math.log1p((1.0 - alpha) * Ps * s1)
    R2 = math.log1p((1.0 - alpha) * Ps * s2)
    sr1 = math.expm1(R1) / Pr
    sr2 = math.expm1(R1 + R2) / Pr
    Fs = cfg.source_law.cdf
    return ((float(Fs(s2)) - float(Fs(s1))) * _sf(cfg.relay_law, sr1) * R1
            + _sf(cfg.source_law, s2) * _sf(cfg.relay_law, sr2) * (R1 + R2))


def df_two_one(cfg, n_starts=8, seed=0):
    """Best two-level source code with level-matched relay re-encoding.

    Returns
    -------
    ((s1, s2, alpha), rate)
    """
    hi = 10.0 * cfg.source_law.mean
    s_one, _ = df_single_level(cfg)

    def obj(z):
        s1, gap, a = z
        return df_two_one_rate(cfg, s1, s1 + max(gap, 1e-12), a)
    box = [(0.0, hi), (0.0, hi), (0.0, 1.0)]
    starts = [(s_one, 0.5, 1.0), (0.5 * s_one, s_one, 0.5), (s_one, 1.0, 0.8)]
    z, v = maximize(obj, box, Tolerance(1e-12, 1e-12, 300), n_starts=n_starts, seed=seed,
                    starts=starts)
    s1, gap, a = (float(t) for t in z)
    return (s1, s1 + max(gap, 1e-12), a), float(v)


# ---------------------------------------------------------------- outage source, layered relay

@dataclass(frozen=True)
class LagrangeProfile:
    """Relay residual interference ``I_r`` under a total-rate constraint."""
    lam: float
    x0: float
    x1: float
    P: float

    def I(self, x):
        x = np.asarray(x, dtype=float)
        inner = (self.lam * np.exp(x) + 1.0 - x) / (x * x)
        out = np.where(x <= self.x0, self.P, np.where(x >= self.x1, 0.0, inner))
        return float(out) if out.ndim == 0 else out

    def rho(self, x):
        x = np.asarray(x, dtype=float)
        inner = (2.0 - x) * (self.lam * np.exp(x) + 1.0) / x ** 3
        out = np.where((x > self.x0) & (x < self.x1), inner, 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def total_rate(self):
        g = lambda x: 2.0 * math.log(x) - x
        return g(self.x1) - g(self.x0)

    @property
    def expected_rate(self):
        """Expected rate at a unit-mean Rayleigh destination."""
        x0, x1 = self.x0, self.x1
        return (2.0 * (exp_integral_E1(x0) - exp_integral_E1(x1))
                - (math.exp(-x0) - math.exp(-x1)))


def _breakpoints(lam, R):
    x1 = 1.0 - lambert_w0(-lam * math.e)
    arg = -0.5 * math.exp(math.log(x1) - 0.5 * x1 - 0.5 * R)
    x0 = -2.0 * lambert_w0(arg)
    return x0, x1


def scheme1_profile(Pr, R):
    """Relay layering that carries total rate ``R`` with power ``Pr``.

    The multiplier is found on ``(-1, e^-2]`` so that the residual at the
    lower breakpoint equals ``Pr``; the rate condition holds by
    construction of the breakpoints.

    Raises
    ------
    InfeasibleRateError
    """
    if not (R > 0 and Pr > 0):
        raise ValueError("need R > 0 and Pr > 0")

    def h(lam):
        x0, x1 = _breakpoints(lam, R)
        if not x0 < x1:
            return math.nan
        return (lam * math.exp(x0) + 1.0 - x0) / (x0 * x0) - Pr

    # bracket: grow away from 0 towards the side with a sign change
    hi = _LAM_MAX * (1.0 - 1e-12)
    h0 = h(0.0)
    if h0 == 0.0:
        lam = 0.0
    elif h0 > 0:
        if not h(hi) < 0:
            raise InfeasibleRateError(f"rate {R:g} needs more than power {Pr:g}")
        lam = find_root(h, (0.0, hi), Tolerance(1e-15, 1e-14, 400))
    else:
        lo, step = 0.0, 1e-3
        while True:
            cand = max(-step, -1.0 + 1e-12)
            hc = h(cand)
            if hc > 0:
                break
            if not (cand > -1.0 + 1e-12 and np.isfinite(hc)):
                raise InfeasibleRateError(f"no multiplier for rate {R:g}, power {Pr:g}")
            lo, step = cand, step * 2.0
        lam = find_root(h, (cand, lo), Tolerance(1e-15, 1e-14, 400))
    x0, x1 = _breakpoints(lam, R)
    return LagrangeProfile(float(lam), float(x0), float(x1), float(Pr))


def scheme1_rate_at(cfg, s_s):
    """Expected rate for a fixed source threshold ``s_s``; -inf if infeasible."""
    R = math.log1p(cfg.Ps * s_s)
    try:
        prof = scheme1_profile(cfg.Pr, R)
    except InfeasibleRateError:
        return -math.inf, None
    return _sf(cfg.source_law, s_s) * prof.expected_rate, prof


def scheme1_outage_broadcast(cfg, s_max=5.0):
    """Single-level source with continuous relay layering.

    Requires a unit-mean Rayleigh relay link (closed-form residual).

    Returns
    -------
    (s_s, LagrangeProfile, rate)
    """
    law = cfg.relay_law
    if not (law.name == "rayleigh" and law.mean == 1.0):
        raise NotImplementedError("closed-form relay layering needs a unit Rayleigh relay link")
    obj = lambda s: scheme1_rate_at(cfg, s)[0]
    s, v = maximize(obj, [(1e-9, s_max)], Tolerance(1e-12, 1e-12, 300), grid=200)
    if not np.isfinite(v):
        raise InfeasibleRateError("no feasible source threshold")
    _, prof = scheme1_rate_at(cfg, s)
    return float(s), prof, float(v)


# ---------------------------------------------------------------- amplify-and-forward

def af_equivalent_gain(cfg, s_s, s_r):
    """Gain of the end-to-end channel seen through an amplifying relay."""
    s_s, s_r = np.asarray(s_s, dtype=float), np.asarray(s_r, dtype=float)
    return cfg.Pr * s_r * s_s / (cfg.Pr * s_r + cfg.Ps * s_s + 1.0)


def _af_parts(cfg, x, v):
    # relay gain x_r = Ps x / Pr + v; source gain threshold t and its x-derivatives
    Ps, Pr = cfg.Ps, cfg.Pr
    xr = Ps * x / Pr + v
    d = Pr * v
    t = x * (1.0 + Pr * xr) / d
    tx = (1.0 + Pr * xr) * xr * Pr / (d * d)
    txx = 2.0 * Ps * (1.0 + Pr * xr) * xr * Pr / d ** 3
    return xr, t, tx, txx


def _af_integrand(cfg, x, v, kind):
    xr, t, tx, txx = _af_parts(cfg, x, v)
    w = cfg.relay_law.pdf(xr)
    ls = cfg.source_law
    if kind == 0:
        return w * (1.0 - ls.cdf(t))
    if kind == 1:
        return w * ls.pdf(t) * tx
    return w * (ls.pdf_derivative(t) * tx * tx + ls.pdf(t) * txx)


def _af_quad(cfg, x, kind):
    g = lambda v: float(_af_integrand(cfg, x, v, kind)) if v > 0 else 0.0
    return integrate(g, 0.0, math.inf, Tolerance(1e-14, 1e-11, 400), limit=400)


def _af_trapz(cfg, x, kind):
    # trapezoid rule in z = ln v; the integrands vanish doubly-exponentially at both ends
    x = np.atleast_1d(np.asarray(x, dtype=float))
    top = 5.0 + math.log(max(1.0, 10.0 * cfg.relay_law.mean))
    z = np.linspace(-45.0, top, 1201)
    v = np.exp(z)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        vals = _af_integrand(cfg, x[:, None], v[None, :], kind) * v[None, :]
    vals = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    return (z[1] - z[0]) * (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1]))


def _af_eval(cfg, x, kind, method):
    _check_x(x)
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    if method == "quad":
        out = np.array([_af_quad(cfg, u, kind) if u > 0 or kind else 1.0 for u in flat])
    else:
        out = _af_trapz(cfg, flat, kind)
        if kind == 0:
            out = np.where(flat == 0, 1.0, out)
    if kind == 0:
        out = 1.0 - out
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def _check_x(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("gain must be nonnegative")


def af_equivalent_cdf(cfg, x, method="trapz"):
    """CDF of the equivalent gain, by a single numerical integral.

    ``method="quad"`` uses adaptive quadrature per point instead of the
    vectorized trapezoid rule in log-coordinates.
    """
    return _af_eval(cfg, x, 0, method)


def af_equivalent_pdf(cfg, x, method="trapz"):
    """Density of the equivalent gain."""
    return _af_eval(cfg, x, 1, method)


def af_equivalent_pdf_derivative(cfg, x, method="trapz"):
    """Derivative of the equivalent-gain density."""
    return _af_eval(cfg, x, 2, method)


def af_law(cfg, n_mc=200000, seed=0):
    """The equivalent gain as a FadingLaw.

    The mean, used only to size scan ranges, is estimated from samples.
    """
    ss = sample(cfg.source_law, n_mc, seed)
    sr = sample(cfg.relay_law, n_mc, seed + 1)
    mean = float(np.mean(af_equivalent_gain(cfg, ss, sr)))

    def cdf(u):
        u = np.asarray(u, dtype=float)
        return af_equivalent_cdf(cfg, np.maximum(u, 0.0))

    def pdf(u):
        u = np.asarray(u, dtype=float)
        return af_equivalent_pdf(cfg, np.maximum(u, 0.0))

    def dpdf(u):
        u = np.asarray(u, dtype=float)
        return af_equivalent_pdf_derivative(cfg, np.maximum(u, 0.0))

    return custom_law(cdf, pdf, (0.0, math.inf), mean, dpdf, "af-equivalent")


def af_broadcast_rate(cfg, law=None):
    """Expected rate of layering matched to the equivalent gain.

    Returns
    -------
    (LayeringProfile, rate)
    """
    law = law or af_law(cfg)
    prof = optimal_profile(law, cfg.Ps)
    return prof, expected_rate(prof, law)


def af_broadcast_rate_explicit(cfg, x0, x1, law=None):
    """``int (1 - F)(2 / x + f' / f)`` between given breakpoints."""
    law = law or af_law(cfg)

    def g(x):
        sf = 1.0 - float(law.cdf(x))
        return sf * (2.0 / x + float(law.pdf_derivative(x)) / float(law.pdf(x)))
    return integrate(g, x0, x1, _QTOL)


# ---------------------------------------------------------------- amplify-quantize

def baq_rate_at(cfg, D):
    """Rate of relay quantization at distortion ``D`` with source layering."""
    Ps, Pr = cfg.Ps, cfg.Pr
    if not 0.0 < D < Pr:
        raise ValueError("distortion must lie in (0, Pr)")
    r = D / Pr
    Db = r / (1.0 - r)
    nu0 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * Ps))
    nu1 = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * Ps * Db / (1.0 + Db)))
    inner = (2.0 * (exp_integral_E1(nu0) - exp_integral_E1(nu1))
             - (math.exp(-nu0) - math.exp(-nu1)))
    return math.exp(-1.0 / D + 1.0 / Pr) * inner


def baq_rate(cfg):
    """Best distortion level for amplify-quantize relaying (unit Rayleigh links).

    Returns
    -------
    (D, rate)
    """
    if not cfg.unit_rayleigh:
        raise NotImplementedError("closed-form quantize-and-forward needs unit Rayleigh links")
    Pr = cfg.Pr
    lo, hi = Pr * 1e-6, Pr * (1.0 - 1e-9)
    D, v = maximize(lambda d: baq_rate_at(cfg, d), [(lo, hi)], Tolerance(1e-13, 1e-12, 300),
                    grid=400)
    return float(D), float(v)
