"""Two parallel sub-channels, each in a weak (A) or strong (B) state.

The four joint states AA, AB, BA, BB are served by five streams: AA,
a common stream 0 plus private AB/BA streams in the crossed states, and
BB. Power fractions ``alpha_AA + alpha_cr + alpha_BB = 1`` split the
per-sub-channel power; ``alpha`` splits the crossed share between the
common and the private streams. Natural logarithms throughout.
"""
from dataclasses import dataclass
import math

import numpy as np

from .numerics import golden_section, Tolerance

__all__ = ["TwoStateParallel", "Alloc", "state_rates", "extended_average_rate",
           "average_rate_by_states", "decomposition", "optimal_sum_rate",
           "alpha_given_aa", "suboptimal_schemes"]


@dataclass(frozen=True)
class TwoStateParallel:
    nu_a: float
    nu_b: float
    P_A: float
    P: float

    def __post_init__(self):
        if not 0 < self.nu_a < self.nu_b:
            raise ValueError("need 0 < nu_a < nu_b")
        if not 0 <= self.P_A <= 1:
            raise ValueError("P_A must be a probability")
        if not self.P > 0:
            raise ValueError("P must be positive")

    @property
    def P_B(self):
        return 1.0 - self.P_A


@dataclass(frozen=True)
class Alloc:
    alpha: float
    alpha_AA: float
    alpha_cr: float
    alpha_BB: float

    def __post_init__(self):
        v = np.array([self.alpha, self.alpha_AA, self.alpha_cr, self.alpha_BB])
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise ValueError("allocation fractions must lie in [0, 1]")
        if abs(self.alpha_AA + self.alpha_cr + self.alpha_BB - 1.0) > 1e-9:
            raise ValueError("alpha_AA + alpha_cr + alpha_BB must equal 1")

    @property
    def arguments(self):
        """(alpha_0, alpha_1, alpha_2) residual-power arguments."""
        a0 = 1.0 - self.alpha_AA
        a1 = 1.0 - self.alpha_AA - self.alpha * self.alpha_cr
        return max(a0, 0.0), max(a1, 0.0), max(self.alpha_BB, 0.0)


def state_rates(cfg, alloc):
    """Per-stream rates (R_AA, R_0, R_AB, R_BA, R_BB) under successive decoding."""
    a0, a1, a2 = alloc.arguments
    P, na, nb = cfg.P, cfg.nu_a, cfg.nu_b
    l = math.log1p
    R_AA = 2.0 * (l(na * P) - l(na * a0 * P))
    R_0 = l(nb * a0 * P) - l(nb * a1 * P) + l(na * a0 * P) - l(na * a1 * P)
    R_X = l(nb * a1 * P) - l(nb * a2 * P)
    R_BB = 2.0 * l(nb * a2 * P)
    return R_AA, R_0, R_X, R_X, R_BB


def average_rate_by_states(cfg, alloc):
    """Expected rate as a probability-weighted sum over the four states."""
    R_AA, R_0, R_AB, R_BA, R_BB = state_rates(cfg, alloc)
    pa, pb = cfg.P_A, cfg.P_B
    return (pa * pa * R_AA + pa * pb * (R_AA + R_0 + R_AB) + pb * pa * (R_AA + R_0 + R_BA)
            + pb * pb * (R_AA + R_0 + R_BA + R_AB + R_BB))


def decomposition(cfg):
    """The three single-argument terms R0, R1, R2 of the expected rate."""
    pa, pb, P, na, nb = cfg.P_A, cfg.P_B, cfg.P, cfg.nu_a, cfg.nu_b
    tot = (pa + pb) ** 2

    def R0(x):
        return (tot - pa * pa) * math.log1p(nb * x * P) - (tot + pa * pa) * math.log1p(na * x * P)

    def R1(x):
        return pb * pb * math.log1p(nb * x * P) - (tot - pa * pa) * math.log1p(na * x * P)

    def R2(x):
        return -2.0 * pa * pb * math.log1p(nb * x * P)
    return R0, R1, R2


def extended_average_rate(cfg, alloc):
    """Expected rate through the R0/R1/R2 decomposition."""
    R0, R1, R2 = decomposition(cfg)
    a0, a1, a2 = alloc.arguments
    base = 2.0 * (cfg.P_A + cfg.P_B) ** 2 * math.log1p(cfg.nu_a * cfg.P)
    return base + R0(a0) + R1(a1) + R2(a2)


def alpha_given_aa(cfg, alpha_AA):
    """Optimal common/private split for a given AA share (BB share zero)."""
    pa, pb, P, na, nb = cfg.P_A, cfg.P_B, cfg.P, cfg.nu_a, cfg.nu_b
    rest = 1.0 - alpha_AA
    if rest <= 0:
        return 1.0
    den = 2.0 * pa * pb * na * nb * P * rest
    if den == 0:
        # degenerate state law; R1 is monotone so the split is at an end
        slope = pb * pb * nb - ((pa + pb) ** 2 - pa * pa) * na
        return 0.0 if slope > 0 else 1.0
    a = 1.0 - (pb * pb * nb - ((pa + pb) ** 2 - pa * pa) * na) / den
    return min(1.0, max(0.0, a))


def optimal_sum_rate(cfg, restarts=8, tol=Tolerance(1e-12, 1e-12, 300)):
    """Maximal expected rate; scalar search over the AA share.

    Returns
    -------
    (Alloc, rate)
    """
    def alloc_of(aa):
        aa = min(max(aa, 0.0), 1.0)
        return Alloc(alpha_given_aa(cfg, aa), aa, 1.0 - aa, 0.0)

    def obj(aa):
        return extended_average_rate(cfg, alloc_of(aa))

    edges = np.linspace(0.0, 1.0, restarts + 1)
    best = (obj(0.0), 0.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, v = golden_section(obj, lo, hi, tol)
        if v > best[0]:
            best = (v, x)
    for x in (1.0,):
        if obj(x) > best[0]:
            best = (obj(x), x)
    return alloc_of(best[1]), best[0]


def _clip01(x):
    return min(1.0, max(0.0, x))


def suboptimal_schemes(cfg):
    """Rates of independent, private-only and common-only broadcasting.

    Each scheme uses its closed-form allocation; the private-only and
    common-only rates are the expected rate evaluated at that allocation.

    Returns
    -------
    dict of name -> (allocation info, rate)
    """
    pa, pb, P, na, nb = cfg.P_A, cfg.P_B, cfg.P, cfg.nu_a, cfg.nu_b
    out = {}

    den = pa * na * nb * P
    a_ind = _clip01(1.0 - (pb * nb - (pa + pb) * na) / den) if den > 0 else \
        (0.0 if pb * nb > (pa + pb) * na else 1.0)
    r_ind = (2.0 * (pa + pb) * math.log((1 + na * P) / (1 + na * (1 - a_ind) * P))
             + 2.0 * pb * math.log1p(nb * (1 - a_ind) * P))
    out["independent"] = ({"alpha": a_ind}, r_ind)

    den = 2.0 * pa * na * nb * P
    aa_prv = _clip01(1.0 - ((pb - pa) * nb - (pb + pa) * na) / den) if den > 0 else 0.0
    al = Alloc(0.0, aa_prv, 1.0 - aa_prv, 0.0)
    out["private_only"] = ({"alpha": 0.0, "alpha_AA": aa_prv}, extended_average_rate(cfg, al))

    den = 2.0 * pa * pa * na * nb * P
    num = ((pa + pb) ** 2 - pa * pa) * nb - ((pa + pb) ** 2 + pa * pa) * na
    aa_cmn = _clip01(1.0 - num / den) if den > 0 else 0.0
    al = Alloc(1.0, aa_cmn, 1.0 - aa_cmn, 0.0)
    out["common_only"] = ({"alpha": 1.0, "alpha_AA": aa_cmn}, extended_average_rate(cfg, al))
    return out
