"""Zero-padding block queue fed at a constant rate and served by layered codes.

Each slot the queue receives ``lam`` nats and releases whatever the
decoded layers carry. The queue evolves by the Lindley recursion
``w[n+1] = max(0, w[n] + lam - R[n])``. Bounds on the stationary mean are
given for K-layer codes and for continuous layering. Delays are queue
sizes divided by ``lam``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .channels import sample
from .numerics import Tolerance, integrate
from .siso import cumulative_rate, expected_rate

__all__ = ["QueueServiceLaw", "ArrivalSpec", "Bounds", "InstabilityError",
           "k_layer_queue_bounds", "k_layer_delay_ub", "k_layer_moments",
           "continuum_moments", "continuum_queue_bounds", "continuum_delay_ub",
           "simulate_lindley", "continuum_sampler"]

_QTOL = Tolerance(1e-13, 1e-11, 400)


class InstabilityError(ValueError):
    """Arrival rate at or above the mean service rate."""


@dataclass(frozen=True)
class QueueServiceLaw:
    """Service per slot of a K-layer code.

    ``cumulative_rates[k]`` is the rate carried by the first ``k + 1``
    layers and ``layer_probs[k]`` the probability that exactly those
    layers decode. The remaining mass is the outage probability.
    """
    cumulative_rates: tuple
    layer_probs: tuple

    def __post_init__(self):
        re = np.asarray(self.cumulative_rates, dtype=float)
        p = np.asarray(self.layer_probs, dtype=float)
        if re.ndim != 1 or re.size == 0 or re.shape != p.shape:
            raise ValueError("need matching non-empty rate and probability vectors")
        if np.any(re < 0) or np.any(np.diff(re) < 0):
            raise ValueError("cumulative rates must be nonnegative and ascending")
        if np.any(p < 0) or p.sum() > 1 + 1e-12:
            raise ValueError("layer probabilities must be nonnegative and sum to at most 1")
        object.__setattr__(self, "cumulative_rates", tuple(re.tolist()))
        object.__setattr__(self, "layer_probs", tuple(p.tolist()))

    @classmethod
    def from_layers(cls, rates, probs):
        """Build from per-layer rates ``R_j`` instead of cumulative ones."""
        return cls(tuple(np.cumsum(rates)), tuple(probs))

    @property
    def outage_prob(self):
        return max(0.0, 1.0 - sum(self.layer_probs))

    @property
    def mean_rate(self):
        return float(np.dot(self.layer_probs, self.cumulative_rates))

    def sampler(self):
        vals = np.append(0.0, self.cumulative_rates)
        probs = np.append(self.outage_prob, self.layer_probs)
        probs = probs / probs.sum()

        def draw(rng, n):
            return vals[rng.choice(vals.size, size=n, p=probs)]
        return draw


@dataclass(frozen=True)
class ArrivalSpec:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("arrival rate must be positive")


@dataclass(frozen=True)
class Bounds:
    """Lower/upper bounds; ``clamped`` marks a negative lower bound raised to 0."""
    lower: float
    upper: float
    clamped: bool = False

    def __iter__(self):
        return iter((self.lower, self.upper))

    def scaled(self, c):
        return Bounds(self.lower * c, self.upper * c, self.clamped)


def _bounds(top, mean, spread, lam):
    # top: rate when every layer decodes; spread: E[(top - R)^2]
    if not lam > 0:
        raise ValueError("arrival rate must be positive")
    if lam >= mean:
        raise InstabilityError(f"arrival rate {lam:g} >= mean service rate {mean:g}")
    d = mean - lam
    lo = (top - lam) / 2.0 + (spread - (top - lam) ** 2) / (2.0 * d)
    hi = (top - lam) + (spread - (top - lam) ** 2) / (2.0 * d)
    return Bounds(float(max(lo, 0.0)), float(hi), bool(lo < 0))


def _variance_ub(mean, var, lam):
    if not lam > 0:
        raise ValueError("arrival rate must be positive")
    if lam >= mean:
        raise InstabilityError(f"arrival rate {lam:g} >= mean service rate {mean:g}")
    return var / (2.0 * (mean - lam)) - (1.0 - lam / mean) * var / (2.0 * mean)


def k_layer_moments(svc):
    """(top rate, mean rate, E[(top - R)^2], Var[R]) of the service law."""
    re = np.asarray(svc.cumulative_rates)
    p = np.asarray(svc.layer_probs)
    top, mean = re[-1], float(np.dot(p, re))
    spread = float(np.dot(p, (top - re) ** 2) + svc.outage_prob * top ** 2)
    var = float(np.dot(p, re ** 2)) - mean ** 2
    return top, mean, spread, max(var, 0.0)


def k_layer_queue_bounds(svc, lam):
    """Lower and upper bounds on the stationary mean queue size."""
    top, mean, spread, _ = k_layer_moments(svc)
    return _bounds(top, mean, spread, lam)


def k_layer_delay_ub(svc, lam):
    """Variance-based upper bound on the mean delay (in slots)."""
    _, mean, _, var = k_layer_moments(svc)
    return _variance_ub(mean, var, lam) / lam


def continuum_moments(profile, law, check=False):
    """(R_T, R_bs, E[(R_T - R)^2], Var[R]) of continuous-layering service.

    With ``check=True`` the spread is also computed by partial integration
    and both values are returned as a pair in the third slot.
    """
    s0, s1 = profile.s0, profile.s1
    R = lambda u: float(cumulative_rate(profile, u))
    top = R(s1)
    r_bs = expected_rate(profile, law)
    F = lambda u: float(law.cdf(u))
    f = lambda u: float(law.pdf(u))
    pts = [a for a, _, _ in profile.atoms]

    # direct: E[(R_T - R(s))^2]; zero above s1, R_T^2 below s0
    spread = F(s0) * top ** 2
    second = 0.0
    if s1 > s0:
        spread += integrate(lambda u: f(u) * (top - R(u)) ** 2, s0, s1, _QTOL, points=pts or None)
        second = integrate(lambda u: f(u) * R(u) ** 2, s0, s1, _QTOL, points=pts or None)
    second += (1.0 - F(s1)) * top ** 2
    var = max(second - r_bs ** 2, 0.0)
    if not check:
        return top, r_bs, spread, var

    # partial integration: 2 int F(u) R'(u) (R_T - R(u)) du plus atom jumps
    def dens(u):
        I = float(profile.I(u))
        return u * float(profile.rho(u)) / (1.0 + u * I)
    alt = 0.0
    if s1 > s0:
        alt = 2.0 * integrate(lambda u: F(u) * dens(u) * (top - R(u)), s0, s1, _QTOL,
                              points=pts or None)
    for a, lo_, hi_ in profile.atoms:
        jump = math.log((1.0 + a * lo_) / (1.0 + a * hi_))
        r_minus = R(a) - jump
        alt += F(a) * ((top - r_minus) ** 2 - (top - r_minus - jump) ** 2)
    return top, r_bs, (spread, alt), var


def continuum_queue_bounds(profile, law, lam):
    """Lower and upper bounds on the mean queue size under continuous layering."""
    top, r_bs, spread, _ = continuum_moments(profile, law)
    return _bounds(top, r_bs, spread, lam)


def continuum_delay_ub(profile, law, lam):
    """Variance-based upper bound on the mean delay under continuous layering."""
    _, r_bs, _, var = continuum_moments(profile, law)
    return _variance_ub(r_bs, var, lam) / lam


def continuum_sampler(profile, law):
    """Service sampler drawing a gain from ``law`` and returning ``R(s)``."""
    def draw(rng, n):
        s = sample(law, n, rng)
        return np.asarray(cumulative_rate(profile, s), dtype=float)
    return draw


def simulate_lindley(sampler, lam, n_steps, seed=0):
    """Time-averaged queue size and delay of the Lindley recursion.

    Parameters
    ----------
    sampler : callable
        ``sampler(rng, n)`` returns ``n`` service draws.
    lam : float
        Arrivals per slot.
    n_steps : int
        Number of slots; the first 1% is discarded as warm-up.

    Returns
    -------
    (mean queue, mean delay)
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    rng = np.random.default_rng(seed)
    x = lam - np.asarray(sampler(rng, n_steps), dtype=float)
    # closed form of the reflected walk started empty
    S = np.cumsum(x)
    w = S - np.minimum(np.minimum.accumulate(S), 0.0)
    w = w[n_steps // 100:]
    q = float(w.mean())
    return q, q / lam
