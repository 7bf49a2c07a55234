"""Special functions, root finding, quadrature and maximization.

Everything here is a thin, checked layer over scipy so that the model
modules get uniform error types and tolerance handling.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo
from scipy import special as _sps

__all__ = [
    "Tolerance", "Bracket", "NumericsError", "DomainError", "NoSignChangeError",
    "MaxIterationError", "NonConvergenceError", "DimensionError",
    "lambert_w0", "exp_integral_E1", "find_root", "integrate", "maximize",
    "golden_section", "exp_E1",
]

_INV_E = math.exp(-1.0)


class NumericsError(ArithmeticError):
    """Base class for numerical failures."""


class DomainError(NumericsError, ValueError):
    pass


class NoSignChangeError(NumericsError):
    pass


class MaxIterationError(NumericsError):
    pass


class NonConvergenceError(NumericsError):
    pass


class DimensionError(NumericsError, ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")


DEFAULT_TOL = Tolerance()


def lambert_w0(x):
    """Principal branch of the Lambert W function.

    Parameters
    ----------
    x : float or array_like
        Argument, ``x >= -1/e``.

    Returns
    -------
    w : float or ndarray
        Solution of ``w * exp(w) = x`` with ``w >= -1``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -_INV_E - 1e-15) or np.any(np.isnan(xa)):
        raise DomainError("lambert_w0 defined for x >= -1/e")
    xc = np.maximum(xa, -_INV_E)
    w = _sps.lambertw(xc, 0).real
    # scipy returns nan at the branch point itself
    w = np.where(xc <= -_INV_E, -1.0, w)
    return float(w) if w.ndim == 0 else w


def exp_integral_E1(x):
    """Exponential integral ``E1(x) = int_x^inf exp(-t)/t dt`` for x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("E1 defined for x > 0")
    v = _sps.exp1(xa)
    return float(v) if v.ndim == 0 else v


def exp_E1(x):
    """``exp(x) * E1(x)``, evaluated stably for large x."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("E1 defined for x > 0")
    # scaled continued fraction for large x, direct product otherwise
    small = xa < 50.0
    out = np.empty_like(xa)
    out[small] = np.exp(xa[small]) * _sps.exp1(xa[small])
    if np.any(~small):
        out[~small] = _large_exp_E1(xa[~small])
    return float(out) if out.ndim == 0 else out


def _large_exp_E1(x):
    # Lentz continued fraction for e^x E1(x); converges fast for x >= 50
    b = x + 1.0
    c = 1.0 / 1e-300
    d = 1.0 / b
    h = d
    for i in range(1, 60):
        a = -i * i
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        h = h * c * d
    return h


def find_root(f, bracket, tol=DEFAULT_TOL):
    """Root of a scalar function inside a sign-changing bracket (Brent)."""
    if not isinstance(bracket, Bracket):
        bracket = Bracket(*bracket)
    flo, fhi = f(bracket.lo), f(bracket.hi)
    if flo == 0.0:
        return float(bracket.lo)
    if fhi == 0.0:
        return float(bracket.hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise NoSignChangeError(
            f"no sign change on [{bracket.lo:g}, {bracket.hi:g}]: f={flo:g}, {fhi:g}")
    try:
        return float(_spo.brentq(f, bracket.lo, bracket.hi, xtol=tol.abs_tol,
                                 rtol=max(tol.rel_tol * 1e-3, 4 * np.finfo(float).eps),
                                 maxiter=tol.max_iter))
    except RuntimeError as exc:
        raise MaxIterationError(str(exc)) from exc


def integrate(f, a, b, tol=DEFAULT_TOL, points=None, limit=200):
    """Adaptive quadrature of ``f`` over ``[a, b]``; ``b`` may be ``inf``.

    Semi-infinite ranges are mapped to ``[0, 1)`` through
    ``t = a + u / (1 - u)``.
    """
    if a == b:
        return 0.0
    if np.isinf(b):
        def g(u):
            if u >= 1.0:
                return 0.0
            t = a + u / (1.0 - u)
            return f(t) / (1.0 - u) ** 2
        lo, hi, fun = 0.0, 1.0, g
        if points is not None:
            points = [(p - a) / (1.0 + p - a) for p in points if a < p < np.inf]
    else:
        lo, hi, fun = a, b, f
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = _spi.quad(fun, lo, hi, epsabs=tol.abs_tol, epsrel=tol.rel_tol,
                        limit=limit, points=points, full_output=1)
    val, err = res[0], res[1]
    if len(res) > 3 and err > 10 * max(tol.abs_tol, tol.rel_tol * abs(val), 1e-9):
        raise NonConvergenceError(f"quadrature error estimate {err:.3g} for value {val:.6g}")
    return float(val)


_GR = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo, hi, tol=DEFAULT_TOL):
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - _GR * (b - a)
    d = a + _GR * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(tol.max_iter):
        if b - a <= max(tol.abs_tol, tol.rel_tol * (abs(a) + abs(b))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GR * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GR * (b - a)
            fd = f(d)
    cands = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    best = max(cands, key=lambda t: t[0])
    return best[1], best[0]


def maximize(f, box, tol=DEFAULT_TOL, n_starts=8, seed=0, grid=64, starts=None):
    """Maximize ``f`` over a box.

    One dimension: coarse scan followed by golden-section refinement
    around the best scan point. Higher dimensions: Nelder-Mead from
    several starting points, with the objective clipped to the box.

    Parameters
    ----------
    f : callable
        Scalar objective; takes a float in 1-D, an ndarray otherwise.
    box : sequence of (lo, hi)
        Bounds per coordinate. A single pair is treated as 1-D.
    starts : sequence of points, optional
        Extra starting points for the n-D search (in box coordinates).

    Returns
    -------
    (argmax, max)
    """
    box = np.atleast_2d(np.asarray(box, dtype=float))
    dim = box.shape[0]
    if dim < 1 or dim > 8 or box.shape[1] != 2:
        raise DimensionError("maximize supports 1 to 8 dimensions")
    if np.any(box[:, 0] > box[:, 1]):
        raise ValueError("box lower bounds exceed upper bounds")
    if dim == 1:
        lo, hi = box[0]
        if lo == hi:
            return float(lo), float(f(lo))
        xs = np.linspace(lo, hi, grid + 1)
        fs = np.array([f(x) for x in xs])
        k = int(np.argmax(fs))
        a, b = xs[max(k - 1, 0)], xs[min(k + 1, grid)]
        x, v = golden_section(f, a, b, tol)
        if v < fs[k]:
            x, v = xs[k], fs[k]
        return float(x), float(v)

    lo, hi = box[:, 0], box[:, 1]

    def neg(z):
        x = lo + np.clip(z, 0.0, 1.0) * (hi - lo)
        return -f(x)

    rng = np.random.default_rng(seed)
    span = np.where(hi > lo, hi - lo, 1.0)
    z_starts = [(np.asarray(x, dtype=float) - lo) / span for x in (starts or [])]
    z_starts += [np.full(dim, 0.5)] + [rng.random(dim) for _ in range(max(n_starts - 1, 0))]
    best_z, best_v = None, -np.inf
    for z0 in z_starts:
        res = _spo.minimize(neg, z0, method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": tol.abs_tol,
                                     "maxiter": 400 * dim, "adaptive": dim > 2})
        if -res.fun > best_v:
            best_z, best_v = np.clip(res.x, 0.0, 1.0), -res.fun
    return lo + best_z * (hi - lo), float(best_v)
