"""Delay-constrained (DC) layers sharing a channel with a single ergodic stream.

A fraction ``beta`` of the power carries DC layers decoded block by block;
the remaining ``(1 - beta) P`` carries a non-delay-constrained (NDC)
codeword spread over many blocks. DC layers see the NDC signal as noise;
the NDC decoder first strips every DC layer decodable in that block.
"""
from dataclasses import dataclass
import math

import numpy as np

from .channels import FadingLaw
from .numerics import (NoSignChangeError, NumericsError, Tolerance, find_root,
                       integrate, maximize)
from .siso import LayeringProfile, ergodic_capacity, upper_scan_limit

__all__ = ["DcNdcConfig", "JointResult", "dc_rate", "ndc_rate", "outage_profile",
           "outage_joint", "outage_condition", "tilde_residual", "broadcast_joint"]

_QTOL = Tolerance(1e-13, 1e-11, 400)


@dataclass(frozen=True)
class DcNdcConfig:
    beta: float
    P: float
    law: FadingLaw

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not self.P > 0:
            raise ValueError("P must be positive")

    @property
    def Q(self):
        """NDC power."""
        return (1.0 - self.beta) * self.P


@dataclass(frozen=True)
class JointResult:
    profile: LayeringProfile
    dc: float
    ndc: float
    s_th: float = float("nan")
    note: str = ""

    @property
    def total(self):
        return self.dc + self.ndc


def _check_power(profile, cfg):
    if abs(profile.P - cfg.beta * cfg.P) > 1e-9 * max(1.0, cfg.P):
        raise ValueError(f"DC residual at zero gain is {profile.P:g}, expected beta*P = "
                         f"{cfg.beta * cfg.P:g}")


def dc_rate(profile, cfg, ndc_power=None):
    """Expected DC rate with the NDC signal treated as noise.

    ``ndc_power`` overrides the interfering NDC power ``(1 - beta) P``.
    """
    _check_power(profile, cfg)
    Q = cfg.Q if ndc_power is None else float(ndc_power)
    sf = lambda u: 1.0 - float(cfg.law.cdf(u))
    r = 0.0
    if profile.s1 > profile.s0:
        def g(u):
            return sf(u) * u * float(profile.rho(u)) / (1.0 + u * float(profile.I(u)) + Q * u)
        r = integrate(g, profile.s0, profile.s1, _QTOL)
    for a, lo_, hi_ in profile.atoms:
        r += sf(a) * math.log((1.0 + a * lo_ + Q * a) / (1.0 + a * hi_ + Q * a))
    return r


def ndc_rate(profile, cfg):
    """Expected NDC rate after removing the DC layers decodable in each block."""
    _check_power(profile, cfg)
    Q = cfg.Q
    if Q == 0.0:
        return 0.0
    f = cfg.law.pdf
    lo = cfg.law.support[0]
    top = upper_scan_limit(cfg.law, 1e-16)
    s0, s1 = max(profile.s0, lo), max(profile.s1, lo)
    r = 0.0
    if s0 > lo:
        bP = profile.P
        r += integrate(lambda u: float(f(u)) * math.log1p(Q * u / (1.0 + bP * u)), lo, s0, _QTOL)
    if s1 > s0:
        r += integrate(lambda u: float(f(u)) * math.log1p(Q * u / (1.0 + u * float(profile.I(u)))),
                       s0, s1, _QTOL)
    r += integrate(lambda u: float(f(u)) * math.log1p(Q * u), s1, top, _QTOL)
    return r


def outage_profile(s_th, beta_P):
    """Single DC layer at gain threshold ``s_th`` carrying all DC power."""
    return LayeringProfile(float(beta_P), float(s_th), float(s_th),
                           lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                           lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                           ((float(s_th), float(beta_P), 0.0),) if beta_P > 0 else (),
                           None, "outage")


def outage_condition(cfg, s):
    """Stationarity residual of the single-layer threshold."""
    law, P, bP, Q = cfg.law, cfg.P, cfg.beta * cfg.P, cfg.Q
    return (float(law.pdf(s)) * math.log1p(bP * s)
            - (1.0 - float(law.cdf(s))) * bP / ((1.0 + P * s) * (1.0 + Q * s)))


def outage_joint(cfg):
    """Best single-layer DC threshold together with the resulting rates.

    Returns
    -------
    JointResult with ``s_th`` set
    """
    if cfg.beta == 0.0:
        prof = outage_profile(0.0, 0.0)
        return JointResult(prof, 0.0, ergodic_capacity(cfg.law, cfg.P), 0.0, "no DC power")
    lo, hi = 1e-6, 20.0 * cfg.law.mean
    note = ""
    try:
        s = find_root(lambda x: outage_condition(cfg, x), (lo, hi), Tolerance(1e-14, 1e-13, 400))
    except NoSignChangeError:
        s, note = max((lo, hi), key=lambda x: _outage_total(cfg, x)), "boundary optimum"
    prof = outage_profile(s, cfg.beta * cfg.P)
    return JointResult(prof, dc_rate(prof, cfg), ndc_rate(prof, cfg), s, note)


def _outage_total(cfg, s):
    prof = outage_profile(s, cfg.beta * cfg.P)
    return dc_rate(prof, cfg) + ndc_rate(prof, cfg)


def _quad_coeffs(cfg, x):
    law, Q = cfg.law, cfg.Q
    f, F = law.pdf(x), law.cdf(x)
    a = x * f
    b = 2.0 * Q * f * x * x - (1.0 - F)
    c = Q * Q * f * x ** 3
    return a, b, c


def tilde_residual(cfg, x):
    """Unclamped stationary DC residual; NaN where the discriminant is negative."""
    x = np.asarray(x, dtype=float)
    a, b, c = _quad_coeffs(cfg, x)
    disc = b * b - 4.0 * a * c
    with np.errstate(invalid="ignore", divide="ignore"):
        y = (-b + np.sqrt(disc)) / (2.0 * a)
        out = np.where(disc >= 0, (y - 1.0) / x, np.nan)
    return float(out) if out.ndim == 0 else out


def _tilde_slope(cfg, x):
    # implicit derivative of the quadratic a y^2 + b y + c = 0 in y = 1 + x I
    law, Q = cfg.law, cfg.Q
    x = np.asarray(x, dtype=float)
    f, df = law.pdf(x), law.pdf_derivative(x)
    a, b, c = _quad_coeffs(cfg, x)
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    y = (-b + np.sqrt(disc)) / (2.0 * a)
    da = f + x * df
    db = 2.0 * Q * (df * x * x + 2.0 * f * x) + f
    dc = Q * Q * (df * x ** 3 + 3.0 * f * x * x)
    dy = -(da * y * y + db * y + dc) / (2.0 * a * y + b)
    return dy / x - (y - 1.0) / (x * x)


def broadcast_joint(cfg, n_grid=6000):
    """Continuous DC layering that maximizes the DC + NDC sum rate.

    The stationary residual is clamped to ``[0, beta P]``: full DC power
    below the first crossing of ``beta P``, the stationary branch after
    it, and zero once the branch reaches zero or ceases to exist. A jump
    to zero at the upper end becomes a single layer of finite power.

    Returns
    -------
    JointResult
    """
    bP = cfg.beta * cfg.P
    if bP == 0.0:
        return outage_joint(cfg)
    law = cfg.law
    lo = max(law.support[0], 1e-9)
    top = upper_scan_limit(law, 1e-14)
    grid = np.geomspace(lo, top, n_grid)
    It = tilde_residual(cfg, grid)
    valid = np.isfinite(It)
    tol = Tolerance(1e-15, 1e-14, 400)

    ok = valid & (np.nan_to_num(It, nan=-1.0) > 0)
    if not ok[0]:
        raise NumericsError("stationary DC residual is not positive near zero gain")
    # end of the branch: zero crossing or loss of a real root
    j = int(np.argmin(ok)) if not ok.all() else n_grid
    if j == n_grid:
        s1 = float(grid[-1])
    elif not valid[j]:
        disc = lambda x: (lambda a, b, c: b * b - 4 * a * c)(*_quad_coeffs(cfg, x))
        s1 = find_root(disc, (grid[j - 1], grid[j]), tol)
        # stay on the real side of the boundary
        while disc(s1) < 0:
            s1 = math.nextafter(s1, 0.0)
    else:
        s1 = find_root(lambda x: tilde_residual(cfg, x), (grid[j - 1], grid[j]), tol)
    # first crossing of beta P, possibly between the last grid point and s1
    below = It[:j] < bP
    note = ""
    if below.any():
        k = int(np.argmax(below))
        s0 = float(grid[0]) if k == 0 else find_root(
            lambda x: tilde_residual(cfg, x) - bP, (grid[k - 1], grid[k]), tol)
    elif float(tilde_residual(cfg, s1)) < bP:
        s0 = find_root(lambda x: tilde_residual(cfg, x) - bP, (grid[j - 1], s1), tol)
    else:
        # the branch never enters [0, beta P]: pure single layer at its end
        s0 = s1
    if s1 > s0 and abs(float(tilde_residual(cfg, s1))) <= 1e-9 * bP:
        # the branch decays to zero: continuous end, no free boundary
        prof = _truncated(cfg, s0, s1)
    else:
        # the branch ends with a jump; place the jump where the sum rate peaks
        total = lambda t: _sum_rate(cfg, _truncated(cfg, s0, t))
        t, _ = maximize(total, [(grid[0], s1)], grid=32)
        prof = _truncated(cfg, s0, float(t))
        note = note or "jump location optimized"
    return JointResult(prof, dc_rate(prof, cfg), ndc_rate(prof, cfg), note=note)


def _sum_rate(cfg, prof):
    return dc_rate(prof, cfg) + ndc_rate(prof, cfg)


def _truncated(cfg, s0, t):
    # clamped stationary residual on [s0, t], full power below, zero above
    bP = cfg.beta * cfg.P
    lo = min(s0, t)
    I_end = bP if t <= s0 else min(max(float(tilde_residual(cfg, t)), 0.0), bP)
    if not np.isfinite(I_end):
        I_end = 0.0
    atoms = ((float(t), I_end, 0.0),) if I_end > 1e-12 * bP else ()

    def I(x):
        return np.clip(tilde_residual(cfg, x), 0.0, bP)

    def rho(x):
        return -_tilde_slope(cfg, x)

    return LayeringProfile(bP, float(lo), float(t), I, rho, atoms, None, "dc-broadcast",
                           {"beta": cfg.beta})
