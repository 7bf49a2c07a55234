"""Two-user multiple-access channel with finitely many fading states.

Both users see gains from the same ascending level set. Without CSIT each
user splits its power over codebooks ``W_uv`` adapted to the combined
state; with local CSIT each user layers according to its own state.
Rates use ``C(x, y) = 0.5 * log2(1 + x / (y + 1/P))`` (half-bits per
real dimension); everything else in the package is in nats.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import linprog

from .numerics import NumericsError, Tolerance, maximize

__all__ = ["MacConfig", "PowerSplit", "RateRegion", "cap", "su_region", "full_region",
           "reduced_region", "outer_bound", "average_sum_rate", "multistate_region",
           "multistate_constants", "local_csit_region", "local_csit_multistate",
           "local_csit_corner_points", "full_csit_sum_capacity", "optimize_full_region",
           "optimize_local_csit", "optimize_reduced_region", "trace_boundary",
           "full_weighted_max", "to_weak_strong"]

_TOL = 1e-12


def cap(x, y, P):
    """0.5 * log2(1 + x / (y + 1/P))."""
    return 0.5 * math.log2(1.0 + x / (y + 1.0 / P))


@dataclass(frozen=True)
class MacConfig:
    """Shared gain levels, per-user state probabilities and per-user SNR.

    ``q`` is the state law of user 1 and ``p`` that of user 2. The joint
    law defaults to independent users; pass ``joint[m][n] =
    P(h1 = s_m, h2 = s_n)`` to override it.
    """
    levels: tuple
    q: tuple
    p: tuple
    P: float
    joint: tuple = None

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise ValueError("need at least two gain levels")
        if np.any(lv <= 0) or np.any(np.diff(lv) < 0):
            raise ValueError("gain levels must be positive and ascending")
        for name in ("q", "p"):
            pr = np.asarray(getattr(self, name), dtype=float)
            if pr.shape != lv.shape or np.any(pr < 0) or abs(pr.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a probability vector over the levels")
            object.__setattr__(self, name, tuple(pr.tolist()))
        if not self.P > 0:
            raise ValueError("P must be positive")
        if self.joint is None:
            J = np.outer(self.q, self.p)
        else:
            J = np.asarray(self.joint, dtype=float)
            if J.shape != (lv.size, lv.size) or np.any(J < 0) or abs(J.sum() - 1) > 1e-12:
                raise ValueError("joint must be an l x l probability matrix")
            if (np.abs(J.sum(axis=1) - self.q).max() > 1e-12
                    or np.abs(J.sum(axis=0) - self.p).max() > 1e-12):
                raise ValueError("joint marginals disagree with q and p")
        object.__setattr__(self, "levels", tuple(lv.tolist()))
        object.__setattr__(self, "joint", tuple(map(tuple, J.tolist())))

    @classmethod
    def two_state(cls, s1, s2, P, q1=0.5, p1=None):
        p1 = q1 if p1 is None else p1
        return cls((s1, s2), (q1, 1 - q1), (p1, 1 - p1), P)

    @property
    def size(self):
        return len(self.levels)

    def C(self, x, y):
        return cap(x, y, self.P)


@dataclass(frozen=True)
class PowerSplit:
    """Per-user power fractions ``beta[i][u][v]`` (0-based indices).

    ``kind="joint"``: codebooks ``W_uv`` over all ``l*l`` state pairs, the
    fractions of each user summing to 1. ``kind="local"``: user ``i`` in
    state ``v`` spreads its power over layers ``u <= v``, so each column
    of the upper triangle sums to 1.
    """
    beta: tuple
    kind: str = "joint"

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if b.ndim != 3 or b.shape[0] != 2 or b.shape[1] != b.shape[2]:
            raise ValueError("beta must have shape (2, l, l)")
        if np.any(b < -_TOL):
            raise ValueError("power fractions must be nonnegative")
        b = np.maximum(b, 0.0)
        if self.kind == "joint":
            if np.abs(b.sum(axis=(1, 2)) - 1.0).max() > _TOL:
                raise ValueError("each user's fractions must sum to 1")
        elif self.kind == "local":
            if np.abs(np.tril(b, -1)).max() > _TOL:
                raise ValueError("local split has layers above the user's own state")
            if np.abs(b.sum(axis=1) - 1.0).max() > _TOL:
                raise ValueError("each state's layer fractions must sum to 1")
        else:
            raise ValueError(f"unknown split kind {self.kind!r}")
        object.__setattr__(self, "beta", tuple(tuple(map(tuple, m)) for m in b.tolist()))

    @classmethod
    def symmetric(cls, matrix):
        m = np.asarray(matrix, dtype=float)
        return cls((m, m), "joint")

    @classmethod
    def local(cls, beta1, beta2=None):
        b1 = np.asarray(beta1, dtype=float)
        b2 = b1 if beta2 is None else np.asarray(beta2, dtype=float)
        return cls((b1, b2), "local")

    @classmethod
    def local_two_state(cls, b1_22, b2_22=None):
        """Two-state local split from the strong-layer fractions."""
        b2_22 = b1_22 if b2_22 is None else b2_22
        m = lambda t: [[1.0, 1.0 - t], [0.0, t]]
        return cls.local(m(b1_22), m(b2_22))

    def user(self, i):
        return np.asarray(self.beta[i])

    @property
    def common(self):
        """The shared matrix of a symmetric split."""
        b1, b2 = self.user(0), self.user(1)
        if np.abs(b1 - b2).max() > _TOL:
            raise ValueError("this region assumes both users use the same split")
        return b1


@dataclass(frozen=True)
class RateRegion:
    """Polytope ``{R >= 0 : A R <= b}`` over named rates.

    ``constraints`` holds ``(coefficients, bound)`` pairs with coefficients
    aligned to ``names``.
    """
    names: tuple
    constraints: tuple
    boundary_samples: tuple = ()

    def __post_init__(self):
        cons = tuple((tuple(float(c) for c in a), float(max(b, 0.0))) for a, b in self.constraints)
        if any(len(a) != len(self.names) for a, _ in cons):
            raise ValueError("coefficient vectors must match the rate names")
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "boundary_samples",
                           tuple(tuple(float(x) for x in s) for s in self.boundary_samples))

    @property
    def A(self):
        return np.array([a for a, _ in self.constraints]).reshape(-1, len(self.names))

    @property
    def b(self):
        return np.array([b for _, b in self.constraints])

    def bound(self, name):
        """Tightest single-rate bound on ``name``."""
        k = self.names.index(name)
        out = math.inf
        for a, b in self.constraints:
            if a[k] > 0 and all(c == 0 for j, c in enumerate(a) if j != k):
                out = min(out, b / a[k])
        return out

    def violation(self, point):
        """Largest constraint excess of ``point`` (negative rates count too)."""
        x = np.asarray(point, dtype=float)
        v = float(np.max(self.A @ x - self.b)) if self.constraints else -math.inf
        return max(v, float(np.max(-x)))

    def contains(self, point, tol=1e-9):
        return self.violation(point) <= tol

    def max_weighted(self, weights, A_extra=None, b_extra=None):
        """Maximize ``weights . R`` over the region.

        Returns
        -------
        (argmax, value)
        """
        w = np.asarray(weights, dtype=float)
        A, b = self.A, self.b
        if A_extra is not None:
            A = np.vstack([A, np.atleast_2d(A_extra)])
            b = np.concatenate([b, np.atleast_1d(b_extra)])
        if len(self.names) == 2 and A_extra is None:
            return _lp2(A, b, w)
        res = linprog(-w, A_ub=A, b_ub=b, bounds=[(0, None)] * len(self.names), method="highs")
        if res.status != 0:
            raise NumericsError(f"rate LP failed: {res.message}")
        return res.x, float(-res.fun)

    def excess_over(self, other):
        """How far this region sticks out of ``other`` (same rate names).

        Maximizes each of ``other``'s constraints over this region; a value
        <= 0 means inclusion.
        """
        if tuple(other.names) != tuple(self.names):
            raise ValueError("regions are over different rates")
        worst = -math.inf
        for a, b in other.constraints:
            _, v = self.max_weighted(a)
            worst = max(worst, v - b)
        return worst


def _lp2(A, b, w):
    # two-variable LP over R >= 0 by vertex enumeration (plain floats: this
    # sits inside the split searches)
    rows = [tuple(map(float, a)) for a in np.asarray(A)] + [(-1.0, 0.0), (0.0, -1.0)]
    rhs = [float(x) for x in np.asarray(b)] + [0.0, 0.0]
    w0, w1 = float(w[0]), float(w[1])
    n = len(rows)
    best = (0.0, 0.0, 0.0)
    for i in range(n):
        a0, a1 = rows[i]
        for j in range(i + 1, n):
            c0, c1 = rows[j]
            det = a0 * c1 - a1 * c0
            if abs(det) < 1e-14:
                continue
            x0 = (rhs[i] * c1 - a1 * rhs[j]) / det
            x1 = (a0 * rhs[j] - rhs[i] * c0) / det
            v = w0 * x0 + w1 * x1
            if v <= best[2]:
                continue
            if all(r0 * x0 + r1 * x1 <= h + 1e-12 for (r0, r1), h in zip(rows, rhs)):
                best = (x0, x1, v)
    return np.array(best[:2]), best[2]


def _hull_region(names, samples, n_dirs=181):
    # convex outer description of a sampled 2-D boundary via supporting lines
    S = np.asarray(samples, dtype=float)
    cons = [((1.0, 0.0), S[:, 0].max()), ((0.0, 1.0), S[:, 1].max())]
    for th in np.linspace(0.0, 0.5 * np.pi, n_dirs)[1:-1]:
        w = (math.cos(th), math.sin(th))
        cons.append((w, float((S @ np.asarray(w)).max())))
    return RateRegion(tuple(names), tuple(cons), tuple(map(tuple, S)))


# ---------------------------------------------------------------- no CSIT


def su_region(s1, s2, P, n_beta=101):
    """Weak/strong sum-rate trade-off of per-user two-stream superposition.

    The boundary ``(C(2 s1 (1-b), 2 s1 b), C(2 s2 b, 0))`` is sampled on a
    grid of ``n_beta`` strong-stream fractions ``b``.
    """
    if not 0 < s1 < s2:
        raise ValueError("need 0 < s1 < s2")
    pts = [(cap(2 * s1 * (1 - t), 2 * s1 * t, P), cap(2 * s2 * t, 0.0, P))
           for t in np.linspace(0.0, 1.0, n_beta)]
    return _hull_region(("R_w", "R_s"), pts)


def _full_quantities(cfg, b):
    s1, s2 = cfg.levels[0], cfg.levels[-1]
    C = cfg.C
    b11, b12, b21, b22 = b[0, 0], b[0, 1], b[1, 0], b[1, 1]
    nb11 = 1.0 - b11
    inter = s1 * (b12 + b22) + s2 * (b21 + b22)
    return {
        "r11": min(0.5 * C(2 * s1 * b11, 2 * s1 * nb11), C(s1 * b11, (s1 + s2) * nb11)),
        "r12": min(0.5 * C(2 * s2 * b12, 2 * s2 * b22), C(s2 * b12, inter)),
        "r21": min(0.5 * C(2 * s2 * b21, 2 * s2 * b22), C(s1 * b21, inter)),
        "r1": min(0.5 * C(2 * s2 * (b12 + b21), 2 * s2 * b22), C(s1 * b21 + s2 * b12, inter)),
        "r12p": C(s2 * (2 * b12 + b21), 2 * s2 * b22),
        "r21p": C(s2 * (b12 + 2 * b21), 2 * s2 * b22),
        "r22": 0.5 * C(2 * s2 * b22, 0.0),
    }


def _two_state(cfg):
    if cfg.size != 2:
        raise ValueError("this region is defined for two-state channels")


def full_region(cfg, split):
    """Symmetric rates (R11, R12, R21, R22) of state-adapted codebooks."""
    _two_state(cfg)
    r = _full_quantities(cfg, split.common)
    cons = [((1, 0, 0, 0), r["r11"]), ((0, 1, 0, 0), r["r12"]), ((0, 0, 1, 0), r["r21"]),
            ((0, 1, 1, 0), r["r1"]), ((0, 2, 1, 0), r["r12p"]), ((0, 1, 2, 0), r["r21p"]),
            ((0, 0, 0, 1), r["r22"])]
    return RateRegion(("R11", "R12", "R21", "R22"), tuple(cons))


def full_weighted_max(cfg, beta, weights):
    """Fast ``max w . R`` over ``full_region`` for a symmetric split matrix."""
    r = _full_quantities(cfg, np.asarray(beta))
    w11, w12, w21, w22 = weights
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
    b = np.array([r["r12"], r["r21"], r["r1"], r["r12p"], r["r21p"]])
    x, v = _lp2(A, b, np.array([w12, w21]))
    rates = np.array([r["r11"] if w11 > 0 else 0.0, x[0], x[1], r["r22"] if w22 > 0 else 0.0])
    return rates, float(v + max(w11, 0.0) * r["r11"] + max(w22, 0.0) * r["r22"])


def to_weak_strong(rates):
    """(R11, R12, R21, R22) -> sums over both users of the layers decoded
    with a weak channel present and of the both-strong layers."""
    R11, R12, R21, R22 = rates
    return 2.0 * (R11 + R12 + R21), 2.0 * R22


def _reduced_constants(cfg, split):
    s1, s2 = cfg.levels[0], cfg.levels[-1]
    C = cfg.C
    b1, b2 = split.user(0), split.user(1)
    x1, x2 = b1[0, 0], b2[0, 0]
    n1, n2 = 1.0 - x1, 1.0 - x2
    return {
        "a3": C(s1 * (x1 + x2), s1 * (n1 + n2)),
        "a4": C(s1 * x1, s1 * n1 + s2 * n2),
        "a6": C(s1 * x1 + s2 * x2, s1 * n1 + s2 * n2),
        "a8": C(s1 * x2, s2 * n1 + s1 * n2),
        "a9": C(s2 * x1 + s1 * x2, s2 * n1 + s1 * n2),
        "strong": C(s2 * b1[0, 1] + s2 * b2[0, 1], 0.0),
    }


def reduced_region(cfg, split):
    """(R_w, R_s) region when only the W11 and W12 codebooks carry power."""
    _two_state(cfg)
    for i in (0, 1):
        b = split.user(i)
        if b[1, 0] > _TOL or b[1, 1] > _TOL:
            raise ValueError("reduced region needs zero power on codebooks 21 and 22")
    a = _reduced_constants(cfg, split)
    rw = min(a["a3"], a["a6"], a["a9"], a["a4"] + a["a8"])
    return RateRegion(("R_w", "R_s"), (((1, 0), rw), ((0, 1), a["strong"])))


def outer_bound(cfg, split):
    """Per-codebook outer bound on (R11, R12, R21, R22) for a given split."""
    _two_state(cfg)
    s1, s2 = cfg.levels[0], cfg.levels[-1]
    C = cfg.C
    b1, b2 = split.user(0), split.user(1)
    a3 = C(s1 * (b1[0, 0] + b2[0, 0]), s1 * (2.0 - b1[0, 0] - b2[0, 0]))
    strong = s2 * b1[1, 1] + s2 * b2[1, 1]
    a24 = C(s2 * b1[0, 1] + s2 * b2[0, 1], strong)
    a27 = C(s2 * b1[1, 0] + s2 * b2[1, 0], strong)
    r22 = 0.5 * C(strong, 0.0)
    cons = [((1, 0, 0, 0), a3 / 2), ((0, 1, 0, 0), a24 / 2), ((0, 0, 1, 0), a27 / 2),
            ((0, 0, 0, 1), r22)]
    return RateRegion(("R11", "R12", "R21", "R22"), tuple(cons))


def average_sum_rate(rates, p):
    """Long-run sum rate of symmetric codebook rates when each user is weak
    with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    R11, R12, R21, R22 = rates
    return 2.0 * (R11 + (1 - p) * (R12 + R21) + (1 - p) ** 2 * R22)


def _stick(z, k):
    # map [0,1]^(k-1) onto the k-simplex by stick breaking
    out, rest = [], 1.0
    for t in z[:k - 1]:
        out.append(rest * t)
        rest -= rest * t
    out.append(rest)
    return np.maximum(np.asarray(out), 0.0)


def _unstick(x):
    x = np.asarray(x, dtype=float)
    z, rest = [], 1.0
    for v in x[:-1]:
        z.append(v / rest if rest > 1e-15 else 0.0)
        rest -= v
    return np.clip(z, 0.0, 1.0)


_CORNERS4 = [np.eye(4)[k] for k in range(4)] + [np.full(4, 0.25)]


def optimize_full_region(cfg, weights, n_restarts=64, seed=0):
    """Best symmetric split for a weighted sum of (R11, R12, R21, R22).

    Nelder-Mead over the split simplex from the simplex corners, its
    centre and ``n_restarts`` random points, followed by a restart from
    the incumbent.

    Returns
    -------
    (PowerSplit, rates, value)
    """
    _two_state(cfg)
    w = tuple(float(x) for x in weights)

    def obj(z):
        return full_weighted_max(cfg, _stick(z, 4).reshape(2, 2), w)[1]

    starts = [_unstick(c) for c in _CORNERS4]
    z, _ = maximize(obj, [(0.0, 1.0)] * 3, Tolerance(1e-14, 1e-14, 400),
                    n_starts=n_restarts, seed=seed, starts=starts)
    z, v = maximize(obj, [(0.0, 1.0)] * 3, Tolerance(1e-15, 1e-15, 400), n_starts=1,
                    seed=seed, starts=[z])
    beta = _stick(z, 4).reshape(2, 2)
    rates, v = full_weighted_max(cfg, beta, w)
    return PowerSplit.symmetric(beta), rates, v


def optimize_reduced_region(cfg, weights, n_restarts=16, seed=0):
    """Best (possibly asymmetric) W11/W12 split for ``w . (R_w, R_s)``.

    Returns
    -------
    (PowerSplit, (R_w, R_s), value)
    """
    _two_state(cfg)

    def split_of(x):
        m = lambda t: [[t, 1 - t], [0.0, 0.0]]
        return PowerSplit((m(x[0]), m(x[1])))

    def obj(x):
        return reduced_region(cfg, split_of(x)).max_weighted(weights)[1]
    g = np.linspace(0.0, 1.0, 21)
    cand = sorted(((obj((a, b)), (a, b)) for a in g for b in g), reverse=True)
    x, _ = maximize(obj, [(0.0, 1.0)] * 2, Tolerance(1e-14, 1e-14, 400), n_starts=n_restarts,
                    seed=seed, starts=[c for _, c in cand[:4]])
    sp = split_of(x)
    pt, v = reduced_region(cfg, sp).max_weighted(weights)
    return sp, tuple(pt), v


def trace_boundary(solve, n_dirs=33):
    """Sample an optimized 2-D boundary by weighted-sum maximization.

    ``solve(w)`` returns a point maximizing ``w . R`` over the union of
    per-split regions. Directions sweep the quarter circle.

    Returns
    -------
    RateRegion with ``boundary_samples`` set
    """
    pts = []
    for th in np.linspace(0.0, 0.5 * np.pi, n_dirs):
        w = np.array([math.cos(th), math.sin(th)])
        w[np.abs(w) < 1e-15] = 0.0
        pts.append(tuple(np.asarray(solve(w), dtype=float)))
    pts = sorted(set(pts))
    return _hull_region(("R_1", "R_2"), pts)


# ---------------------------------------------------------- l-state no CSIT


def _bsums(beta):
    # cumulative power sums; indices 1-based as (j, u, v), beta[m-1][n-1] = beta_mn
    B = np.asarray(beta)

    def S(m_hi, n_hi, transpose=False):
        # sum over m <= m_hi, n <= n_hi of beta_mn (beta_nm when transposed)
        M = B.T if transpose else B
        return float(M[:max(m_hi, 0), :max(n_hi, 0)].sum())

    def row(v, u):   # sum_{n<=u} beta_vn
        return float(B[v - 1, :u].sum())

    def col(v, u):   # sum_{n<=u} beta_nv
        return float(B[:u, v - 1].sum())

    return {
        "B1": lambda j, u, v: 1 - S(v - 1, j) - row(v, u),
        "B2": lambda j, u, v: 1 - S(j, v - 1) - col(v, u),
        "B3": lambda u, v: 1 - S(v - 1, v - 1) - row(v, u) - col(v, u),
        "B4": lambda u, v: 1 - S(u, v - 1) - col(v, u),
        "B5": lambda u, v: 1 - S(v - 1, u) - row(v, u),
        "B6": lambda j, u, v: 1 - S(v - 1, j) - row(v, u),
        "B7": lambda j, u, v: 1 - S(v - 1, j, transpose=True) - col(v, u),
        "B8": lambda u, v: 1 - S(v, u),
    }


def multistate_constants(cfg, split):
    """Cumulative power sums and rate constants of the l-state region.

    Returns
    -------
    dict with ``"B"`` (name -> callable) and ``"b"`` mapping ``(u, v)``
    (1-based, ``u < v``) or ``u`` to a dict of constants.
    """
    beta = split.common
    s = (None,) + tuple(cfg.levels)   # 1-based gains
    L = cfg.size
    C = cfg.C
    B = _bsums(beta)
    bt = lambda u, v: float(beta[u - 1, v - 1])
    out = {}
    for u in range(1, L + 1):
        for v in range(u + 1, L + 1):
            B3 = B["B3"](u, v)
            c = {}
            c["b1"] = min(C(s[v] * bt(u, v), s[j] * B["B1"](j, u, v) + s[v] * B["B2"](j, u, v))
                          for j in range(u, v))
            c["b2"] = C(s[v] * bt(u, v), (s[v] + s[L]) * B3)
            c["b3"] = C(2 * s[v] * bt(u, v), 2 * s[v] * B3)
            c["b4"] = C(s[u] * bt(v, u), s[L] * B["B4"](u, v) + s[u] * B["B5"](u, v))
            c["b5"] = C(2 * s[v] * bt(v, u), 2 * s[v] * B3)
            c["b6"] = min(C(s[j] * bt(v, u) + s[v] * bt(u, v),
                            s[j] * B["B6"](j, u, v) + s[v] * B["B7"](j, u, v))
                          for j in range(u, v))
            c["b7"] = C(s[v] * (bt(u, v) + bt(v, u)), (s[v] + s[L]) * B3)
            c["b8"] = C(2 * s[v] * (bt(u, v) + bt(v, u)), 2 * s[v] * B3)
            pairs = [(j, k) for j in range(v, L + 1) for k in range(v, L + 1)]
            c["b9"] = min(C(s[j] * (bt(u, v) + bt(v, u)) + s[k] * bt(u, v), (s[j] + s[k]) * B3)
                          for j, k in pairs)
            c["b10"] = min(C(s[j] * (bt(u, v) + bt(v, u)) + s[k] * bt(v, u), (s[j] + s[k]) * B3)
                           for j, k in pairs)
            out[(u, v)] = c
        B8 = B["B8"](u, u)
        out[u] = {"b11": C(s[u] * bt(u, u), (s[u] + s[L]) * B8),
                  "b12": C(2 * s[u] * bt(u, u), 2 * s[u] * B8)}
    return {"B": B, "b": out}


def multistate_region(cfg, split):
    """Symmetric codebook rates ``R_uv`` of the l-state channel."""
    L = cfg.size
    if L < 2:
        raise ValueError("need at least two states")
    consts = multistate_constants(cfg, split)["b"]
    names = tuple(f"R{u}{v}" for u in range(1, L + 1) for v in range(1, L + 1))
    idx = {n: k for k, n in enumerate(names)}

    def row(**coef):
        a = [0.0] * len(names)
        for n, c in coef.items():
            a[idx[n]] = c
        return tuple(a)

    cons = []
    for u in range(1, L + 1):
        for v in range(u + 1, L + 1):
            c, uv, vu = consts[(u, v)], f"R{u}{v}", f"R{v}{u}"
            cons.append((row(**{uv: 1}), min(c["b1"], c["b2"], c["b3"] / 2)))
            cons.append((row(**{vu: 1}), min(c["b4"], c["b5"] / 2)))
            cons.append((row(**{uv: 1, vu: 1}), min(c["b6"], c["b7"], c["b8"] / 2)))
            cons.append((row(**{uv: 2, vu: 1}), c["b9"]))
            cons.append((row(**{uv: 1, vu: 2}), c["b10"]))
        c = consts[u]
        cons.append((row(**{f"R{u}{u}": 1}), min(c["b11"], c["b12"] / 2)))
    return RateRegion(names, tuple(cons))


# ------------------------------------------------------------- local CSIT


def full_csit_sum_capacity(cfg):
    """Average sum capacity when both transmitters know both gains."""
    s, J = cfg.levels, cfg.joint
    return sum(J[m][n] * cfg.C(s[m] + s[n], 0.0)
               for m in range(cfg.size) for n in range(cfg.size))


def local_csit_region(cfg, split):
    """Average (R1, R2) region of state-dependent layering, two states."""
    _two_state(cfg)
    if split.kind != "local":
        raise ValueError("local CSIT regions need a local split")
    s1, s2 = cfg.levels
    C = cfg.C
    (q1, q2), (p1, p2) = cfg.q, cfg.p
    J = cfg.joint
    b1, b2 = split.user(0), split.user(1)
    x12, x22, y12, y22 = b1[0, 1], b1[1, 1], b2[0, 1], b2[1, 1]
    r1 = q1 * C(s1, s2 * y22) + q2 * (C(s2 * x12, s2 * x22 + s2 * y22) + C(s2 * x22, 0.0))
    r2 = p1 * C(s1, s2 * x22) + p2 * (C(s2 * y12, s2 * x22 + s2 * y22) + C(s2 * y22, 0.0))
    rs = (J[0][0] * C(2 * s1, 0.0) + J[0][1] * C(s1 + s2 * y12 + s2 * y22, 0.0)
          + J[1][0] * C(s1 + s2 * x12 + s2 * x22, 0.0)
          + J[1][1] * C(s2 * (x12 + y12 + x22 + y22), 0.0))
    return RateRegion(("R_1", "R_2"), (((1, 0), r1), ((0, 1), r2), ((1, 1), rs)))


def _layer_caps(cfg, mine, other, own_probs):
    # individual cap of layer k of a user in state q, worst case over the
    # other user's state p; stage k decodes layer k of both users jointly
    s, L, C = cfg.levels, cfg.size, cfg.C
    total = 0.0
    for q in range(L):
        for k in range(q + 1):
            worst = math.inf
            for p in range(L):
                inter = s[q] * mine[k + 1:q + 1, q].sum() + s[p] * other[k + 1:p + 1, p].sum()
                worst = min(worst, C(s[q] * mine[k, q], inter))
            total += own_probs[q] * worst
    return total


def local_csit_multistate(cfg, split):
    """Average (R1, R2) region of state-dependent layering with l states.

    In state ``(s_q, s_p)`` user 1 sends layers ``1..q`` and user 2
    layers ``1..p``; stage ``k`` jointly decodes the ``k``-th layer of
    each user. Every layer rate must survive all states of the other
    user, and the stage sum rates telescope to ``C(s_q + s_p, 0)``.
    """
    if split.kind != "local":
        raise ValueError("local CSIT regions need a local split")
    b1, b2 = split.user(0), split.user(1)
    if b1.shape[0] != cfg.size:
        raise ValueError("split size does not match the number of states")
    r1 = _layer_caps(cfg, b1, b2, cfg.q)
    r2 = _layer_caps(cfg, b2, b1, cfg.p)
    rs = full_csit_sum_capacity(cfg)
    return RateRegion(("R_1", "R_2"), (((1, 0), r1), ((0, 1), r2), ((1, 1), rs)))


def optimize_local_csit(cfg, weights, n_restarts=16, seed=0):
    """Best two-state local split for ``w . (R1, R2)``.

    Returns
    -------
    (PowerSplit, (R1, R2), value)
    """
    _two_state(cfg)

    def obj(x):
        return local_csit_region(cfg, PowerSplit.local_two_state(x[0], x[1])).max_weighted(weights)[1]
    x, _ = maximize(obj, [(0.0, 1.0)] * 2, Tolerance(1e-14, 1e-14, 400), n_starts=n_restarts,
                    seed=seed, starts=[(0, 0), (1, 1), (0, 1), (1, 0)])
    sp = PowerSplit.local_two_state(*x)
    pt, v = local_csit_region(cfg, sp).max_weighted(weights)
    return sp, tuple(pt), v


def local_csit_corner_points(cfg, b1_22=None):
    """Corner points T..Z of the regions with one fully informed user.

    ``b1_22`` is the strong-layer fraction of the locally informed user
    (default ``s1 / s2``). Ties in the argmax choices go to the smaller
    index.

    Returns
    -------
    dict label -> (R1, R2), plus ``"constants"`` with the scalars used
    """
    _two_state(cfg)
    s1, s2 = cfg.levels
    C = cfg.C
    (q1, q2), (p1, p2) = cfg.q, cfg.p
    J = cfg.joint
    p11, p12, p21, p22 = J[0][0], J[0][1], J[1][0], J[1][1]
    x22 = s1 / s2 if b1_22 is None else float(b1_22)
    x12 = 1.0 - x22
    mu = (p1 * C(s1, 0) + p2 * (C(s1 + s2, 2 * s1) + C(s1, 0)),
          p1 * (C(2 * s1, s1 + s2) + C(s2, 0)) + p2 * C(s2, 0))
    mu_h = (p1 * C(s1, 0) + p2 * (C(2 * s2, s1 + s2) + C(s1, 0)),
            p1 * (C(s1 + s2, 2 * s2) + C(s2, 0)) + p2 * C(s2, 0))
    rho = (C(s1, s1), C(s1, s2))
    rho_h = (C(s2, s1), C(s2, s2))
    i = int(np.argmax(mu))      # first index on ties
    j = int(np.argmax(mu_h))
    k = {
        "b1": p1 * C(s1, 0) + p2 * C(s2, 0),
        "b2": q1 * C(s1, s2) + q2 * C(s2, s2),
        "b3": q1 * rho[i] + q2 * rho_h[j],
        "b4": p1 * mu[i] + p2 * mu_h[j],
        "b5": q1 * C(s1, 0) + q2 * C(s2, 0),
        "b6": p11 * C(s1, s1) + p12 * C(s2, s1) + p21 * C(s1, s2) + p22 * C(s2, s2),
        "b7": p11 * C(s1, s1) + p21 * C(s2, s1) + p12 * C(s1, s2) + p22 * C(s2, s2),
    }
    k["f1"] = q1 * C(s1, 0) + q2 * (C(s2 * x12, s1 + s2 * x22) + C(s2 * x22, 0))
    k["f2"] = (p11 * C(2 * s1, 0) + (p12 + p21) * C(s1 + s2, 0) + p22 * C(2 * s2, 0) - k["f1"])
    k.update(i_star=i + 1, j_star=j + 1, mu=mu, mu_hat=mu_h, rho=rho, rho_hat=rho_h)
    return {"T": (0.0, k["b1"]), "U": (k["b2"], k["b1"]), "V": (k["b7"], k["b1"]),
            "W": (k["b3"], k["b4"]), "X": (k["f1"], k["f2"]), "Y": (k["b5"], k["b6"]),
            "Z": (k["b5"], 0.0), "constants": k}
