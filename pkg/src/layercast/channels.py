"""Fading-power laws and discrete state models."""
from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .numerics import integrate, Tolerance

__all__ = ["FadingLaw", "DiscreteStates", "ChannelConfig", "LawReport",
           "rayleigh_power", "chi2_simo", "point_mass", "custom_law",
           "sample", "validate"]


@dataclass(frozen=True)
class FadingLaw:
    """Distribution of the fading power gain ``s = |h|^2``.

    ``cdf``, ``pdf`` and ``pdf_derivative`` accept scalars or arrays.
    ``ppf`` is optional; without it sampling inverts the cdf numerically.
    """
    cdf: Callable
    pdf: Callable
    pdf_derivative: Callable
    support: tuple
    mean: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    ppf: Optional[Callable] = None

    def sf(self, u):
        return 1.0 - self.cdf(u)


@dataclass(frozen=True)
class DiscreteStates:
    levels: tuple
    probs: tuple

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        pr = np.asarray(self.probs, dtype=float)
        if lv.ndim != 1 or lv.size < 1 or lv.shape != pr.shape:
            raise ValueError("levels and probs must be equal-length 1-D sequences")
        if np.any(lv <= 0) or np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be positive and strictly ascending")
        if np.any(pr < 0) or abs(pr.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        object.__setattr__(self, "levels", tuple(float(v) for v in lv))
        object.__setattr__(self, "probs", tuple(float(p) for p in pr))

    @property
    def size(self):
        return len(self.levels)

    @property
    def mean(self):
        return float(np.dot(self.levels, self.probs))

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        lv, pr = np.asarray(self.levels), np.asarray(self.probs)
        out = (pr[None, :] * (lv[None, :] <= u.reshape(-1, 1))).sum(axis=1)
        return float(out[0]) if u.ndim == 0 else out.reshape(u.shape)


@dataclass(frozen=True)
class ChannelConfig:
    P: float

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("P must be positive")


def _central_diff(pdf):
    def d(u):
        u = np.asarray(u, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(u))
        return (pdf(u + h) - pdf(u - h)) / (2 * h)
    return d


def rayleigh_power(mean=1.0):
    """Exponential power gain (Rayleigh amplitude) with the given mean."""
    if not mean > 0:
        raise ValueError("mean must be positive")
    m = float(mean)

    def cdf(u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 0, -np.expm1(-np.maximum(u, 0) / m), 0.0)

    def pdf(u):
        u = np.asarray(u, dtype=float)
        return np.where(u >= 0, np.exp(-np.maximum(u, 0) / m) / m, 0.0)

    def dpdf(u):
        return -pdf(u) / m

    def ppf(q):
        return -m * np.log1p(-np.asarray(q, dtype=float))

    return FadingLaw(cdf, pdf, dpdf, (0.0, math.inf), m, "rayleigh", {"mean": m}, ppf)


def chi2_simo(N):
    """Total power of ``N`` i.i.d. unit-mean Rayleigh branches (Gamma(N, 1))."""
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    N = int(N)
    g = stats.gamma(N)

    def cdf(u):
        return g.cdf(np.maximum(np.asarray(u, dtype=float), 0.0))

    def pdf(u):
        return g.pdf(np.asarray(u, dtype=float))

    def dpdf(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, pdf(u) * ((N - 1) / u - 1.0), 0.0 if N > 1 else -1.0)

    return FadingLaw(cdf, pdf, dpdf, (0.0, math.inf), float(N), "chi2", {"N": N}, g.ppf)


def point_mass(s):
    """Deterministic gain, as a one-state discrete model."""
    return DiscreteStates((float(s),), (1.0,))


def custom_law(cdf, pdf, support, mean=None, pdf_derivative=None, name="custom", ppf=None):
    """Wrap user-supplied cdf/pdf callables; f' by central differences if absent."""
    if pdf_derivative is None:
        pdf_derivative = _central_diff(pdf)
    lo, hi = support
    if mean is None:
        mean = integrate(lambda u: u * float(pdf(u)), lo, hi, Tolerance(1e-12, 1e-10))
    return FadingLaw(cdf, pdf, pdf_derivative, (float(lo), float(hi)), float(mean), name, {}, ppf)


def sample(law, count, seed):
    """Inverse-cdf sampling of ``count`` gains, reproducible for a given seed."""
    rng = np.random.default_rng(seed)
    q = rng.random(int(count))
    if isinstance(law, DiscreteStates):
        lv = np.asarray(law.levels)
        idx = np.searchsorted(np.cumsum(law.probs), q, side="right")
        return lv[np.minimum(idx, lv.size - 1)]
    if law.ppf is not None:
        return np.asarray(law.ppf(q), dtype=float)
    return _numeric_ppf(law, q)


def _numeric_ppf(law, q):
    lo, hi = law.support
    if not np.isfinite(hi):
        hi = max(1.0, law.mean)
        while law.cdf(hi) < 1 - 1e-13:
            hi *= 2.0
    grid = np.linspace(lo, hi, 20001)
    F = np.maximum.accumulate(np.asarray(law.cdf(grid), dtype=float))
    return np.interp(q, F, grid)


@dataclass
class LawReport:
    ok: bool
    messages: list

    def __bool__(self):
        return self.ok


def validate(law, n_points=20):
    """Check the invariants of a fading law; never raises."""
    msgs = []
    if isinstance(law, DiscreteStates):
        return LawReport(True, [])
    lo, hi = law.support
    top = hi if np.isfinite(hi) else max(law.mean, 1.0) * 60.0
    grid = np.linspace(lo, top, 2001)
    F = np.asarray(law.cdf(grid), dtype=float)
    f = np.asarray(law.pdf(grid), dtype=float)
    if np.any(np.diff(F) < -1e-12):
        msgs.append("monotonicity: cdf decreases somewhere on the support")
    if abs(float(law.cdf(lo))) > 1e-9:
        msgs.append(f"cdf at lower support end is {float(law.cdf(lo)):.3g}, expected 0")
    if abs(float(law.cdf(top)) - 1.0) > 1e-6:
        msgs.append(f"cdf at upper end is {float(law.cdf(top)):.6g}, expected 1")
    if np.any(f < 0):
        msgs.append("pdf is negative somewhere")
    tol = Tolerance(1e-12, 1e-10, 400)
    try:
        total = integrate(lambda u: float(law.pdf(u)), lo, hi, tol)
    except ArithmeticError as exc:
        total = math.nan
        msgs.append(f"normalization integral failed: {exc}")
    if not abs(total - 1.0) <= 1e-6:
        msgs.append(f"normalization: integral of pdf is {total:.9g}")
    pts = np.linspace(lo, top / 3.0, n_points + 1)[1:]
    for u in pts:
        Fi = integrate(lambda t: float(law.pdf(t)), lo, u, tol)
        if abs(Fi - float(law.cdf(u))) > 1e-6:
            msgs.append(f"cdf/pdf mismatch at u={u:.4g}: {Fi:.9g} vs {float(law.cdf(u)):.9g}")
            break
    fd = _central_diff(law.pdf)
    for u in pts:
        a, b = float(law.pdf_derivative(u)), float(fd(u))
        if abs(a - b) > 1e-4 * max(abs(b), 1e-3 * float(law.pdf(u)), 1e-12):
            msgs.append(f"pdf derivative inconsistent at u={u:.4g}: {a:.6g} vs {b:.6g}")
            break
    return LawReport(not msgs, msgs)
