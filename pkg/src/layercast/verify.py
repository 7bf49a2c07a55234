"""Verification suites: solver outputs checked against reference oracles.

Each suite returns a ``Check`` with the measured quantities, the limits
they were held to and the elapsed time. ``layercast verify <suite>`` and
the acceptance tests run the same functions.
"""
from dataclasses import dataclass, field
import math
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from . import bottleneck, harvest, mac, mixed_delay, parallel, queue, reference, relay, siso
from . import sr_distortion as sr
from .channels import rayleigh_power, sample

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    measured: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)
    elapsed: float = 0.0
    time_limit: float = math.inf
    notes: list = field(default_factory=list)

    def failures(self):
        """Names of measured values outside their limits (a limit is ``("<=", x)``,
        ``(">=", x)`` or ``("==", x)``)."""
        bad = []
        for k, (op, lim) in self.limits.items():
            v = self.measured[k]
            ok = {"<=": v <= lim, ">=": v >= lim, "==": v == lim}[op]
            if not ok:
                bad.append(k)
        if self.elapsed >= self.time_limit:
            bad.append("runtime")
        return bad

    @property
    def ok(self):
        return not self.failures()

    def line(self):
        parts = [f"{k}={self.measured[k]:.3g} ({op} {lim:g})"
                 for k, (op, lim) in self.limits.items()]
        tl = f", limit {self.time_limit:g}s" if np.isfinite(self.time_limit) else ""
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: " + "; ".join(parts) + f" [{self.elapsed:.2f}s{tl}]"


def _timed(name, time_limit=math.inf):
    def wrap(fn):
        def run():
            t = time.perf_counter()
            chk = fn()
            chk.elapsed = time.perf_counter() - t
            chk.name, chk.time_limit = name, time_limit
            return chk
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


LAW = rayleigh_power()


@_timed("siso-closed-form", 1.0)
def siso_closed_form():
    """Numeric optimal profile against the exponential-gain closed form."""
    dI = dR = 0.0
    for P in (0.1, 1.0, 10.0, 100.0):
        prof = siso.optimal_profile(LAW, P)
        I_ref, s0, r_ref = reference.rayleigh_closed_form(P)
        s = np.linspace(s0, 1.0, 200)
        dI = max(dI, float(np.max(np.abs(prof.I(s) - I_ref(s)))), abs(prof.s0 - s0))
        dR = max(dR, abs(siso.expected_rate(prof, LAW) - r_ref))
    return Check("", {"max_dI": dI, "max_dR": dR}, {"max_dI": ("<=", 1e-6), "max_dR": ("<=", 1e-6)})


@_timed("siso-asymptotes", 1.0)
def siso_asymptotes():
    """High-SNR layered and ergodic rates against their logarithmic asymptotes."""
    r_bs = siso.expected_rate(siso.optimal_profile(LAW, 100.0), LAW)
    c = siso.ergodic_capacity(LAW, 100.0)
    e1 = abs(r_bs / math.log(100 / 9.256) - 1)
    e2 = abs(c / math.log(100 / 1.78) - 1)
    return Check("", {"R_bs_rel": e1, "C_erg_rel": e2},
                 {"R_bs_rel": ("<=", 0.02), "C_erg_rel": ("<=", 0.02)})


@_timed("rate-ordering")
def rate_ordering():
    """Outage <= layered <= ergodic <= unfaded capacity across SNR."""
    bad = 0
    for P in np.logspace(-2, 3, 20):
        ro = siso.outage_capacity(LAW, P).rate
        rb = siso.rayleigh_expected_rate(P)
        ce = siso.ergodic_capacity(LAW, P)
        bad += not (ro <= rb <= ce <= math.log1p(P))
    return Check("", {"violations": bad}, {"violations": ("==", 0)})


@_timed("siso-montecarlo", 10.0)
def siso_montecarlo():
    """Sampled mean of the decoded rate against the expected rate."""
    prof = siso.optimal_profile(LAW, 10.0)
    s = sample(LAW, 10 ** 6, 12345)
    mc = float(np.mean(siso.cumulative_rate(prof, s)))
    r = siso.expected_rate(prof, LAW)
    return Check("", {"rel_err": abs(mc / r - 1)}, {"rel_err": ("<=", 0.005)})


@_timed("mac-inclusion", 30.0)
def mac_inclusion():
    """Reduced region inside the four-codebook region inside the outer bound."""
    cfg = mac.MacConfig.two_state(0.25, 1.0, 10.0)
    rng = np.random.default_rng(2024)
    worst_rf = worst_fo = -math.inf
    for _ in range(100):
        x = float(rng.random())
        red = mac.reduced_region(cfg, mac.PowerSplit.symmetric([[x, 1 - x], [0.0, 0.0]]))
        rw, rs = red.bound("R_w"), red.bound("R_s")
        full = mac.full_region(cfg, mac.PowerSplit.symmetric([[x, 0.0], [0.0, 1 - x]]))
        _, best = full.max_weighted((2, 2, 2, 0), A_extra=(0, 0, 0, -2), b_extra=-rs)
        worst_rf = max(worst_rf, rw - best)
        beta = rng.dirichlet(np.ones(4)).reshape(2, 2)
        sp = mac.PowerSplit.symmetric(beta)
        worst_fo = max(worst_fo, mac.full_region(cfg, sp).excess_over(mac.outer_bound(cfg, sp)))
    return Check("", {"reduced_excess": worst_rf, "full_excess": worst_fo},
                 {"reduced_excess": ("<=", 1e-9), "full_excess": ("<=", 1e-9)})


@_timed("mac-average-rate")
def mac_average_rate():
    """Average sum rate with a vanishing weak-state probability against twice the sum."""
    cfg = mac.MacConfig.two_state(0.25, 1.0, 10.0)
    p = 1e-9
    _, _, v = mac.optimize_full_region(cfg, (1, 1, 1, 1))
    w = 2.0 * np.array([1, 1 - p, 1 - p, (1 - p) ** 2])
    _, rates, _ = mac.optimize_full_region(cfg, w)
    avg = mac.average_sum_rate(rates, p)
    return Check("", {"gap": abs(avg - 2 * v)}, {"gap": ("<=", 1e-6)})


@_timed("relay-scheme1", 60.0)
def relay_scheme1():
    """Outage source with layered relay: rate condition and discretized oracle."""
    cond = rel = 0.0
    for P in (1.0, 10.0):
        cfg = relay.RelayConfig(P, P)
        s, prof, r = relay.scheme1_outage_broadcast(cfg)
        cond = max(cond, abs(prof.total_rate - math.log1p(P * s)))
        _, r_or = reference.relay_scheme1_oracle(P, P)
        rel = max(rel, abs(r / r_or - 1))
    return Check("", {"rate_condition": cond, "oracle_rel": rel},
                 {"rate_condition": ("<=", 1e-6), "oracle_rel": ("<=", 0.005)})


@_timed("af-law", 30.0)
def af_law():
    """Integrated CDF of the amplify-and-forward gain against sampled pairs."""
    worst = 0.0
    for P in (1.0, 10.0):
        cfg = relay.RelayConfig(P, P)
        x = np.quantile(np.random.default_rng(5).exponential(1.0, 4000) * P / (2 * P + 1),
                        np.linspace(0.002, 0.998, 200))
        emp = reference.af_empirical_cdf(P, P, x, 10 ** 6, 77)
        worst = max(worst, float(np.max(np.abs(relay.af_equivalent_cdf(cfg, x) - emp))))
    return Check("", {"sup_norm": worst}, {"sup_norm": ("<=", 0.003)})


def random_service(rng):
    """A K-layer service law with K in 1..4 and a stable arrival rate."""
    K = int(rng.integers(1, 5))
    rates = rng.uniform(0.1, 1.5, K)
    probs = rng.dirichlet(np.ones(K + 1))[:K]
    svc = queue.QueueServiceLaw.from_layers(rates, probs)
    lam = float(rng.uniform(0.2, 0.8)) * svc.mean_rate
    return svc, lam


@_timed("queue-bounds", 60.0)
def queue_bounds():
    """Simulated mean queue inside the analytic bounds."""
    rng = np.random.default_rng(99)
    miss, margin = 0, math.inf
    for k in range(10):
        svc, lam = random_service(rng)
        b = queue.k_layer_queue_bounds(svc, lam)
        q, _ = queue.simulate_lindley(svc.sampler(), lam, 10 ** 6, seed=k)
        miss += not (b.lower <= q <= b.upper)
        margin = min(margin, q - b.lower, b.upper - q)
    return Check("", {"outside": miss, "min_margin": margin}, {"outside": ("==", 0)})


@_timed("mixed-delay")
def mixed_delay_check():
    """Full delay-constrained share reduces to the single-stream optimum; totals stay
    below the ergodic capacity; near-ergodic total at high SNR."""
    P = 10.0
    res = mixed_delay.broadcast_joint(mixed_delay.DcNdcConfig(1.0, P, LAW))
    ref = siso.optimal_profile(LAW, P)
    s = np.linspace(ref.s0, ref.s1, 400)
    dI = max(float(np.max(np.abs(res.profile.residual(s) - ref.I(s)))),
             abs(res.profile.s0 - ref.s0), abs(res.profile.s1 - ref.s1))
    excess = -math.inf
    for Pv in (1.0, 10.0, 100.0, 1000.0):
        ce = siso.ergodic_capacity(LAW, Pv)
        for beta in (0.1, 0.5, 0.9):
            r = mixed_delay.broadcast_joint(mixed_delay.DcNdcConfig(beta, Pv, LAW))
            excess = max(excess, r.total - ce)
    r = mixed_delay.broadcast_joint(mixed_delay.DcNdcConfig(0.9, 1000.0, LAW))
    gap = 1.0 - r.total / siso.ergodic_capacity(LAW, 1000.0)
    return Check("", {"beta1_dI": dI, "excess_over_Cerg": excess, "gap_P1e3": gap},
                 {"beta1_dI": ("<=", 1e-8), "excess_over_Cerg": ("<=", 0.0),
                  "gap_P1e3": ("<=", 0.05)})


@_timed("parallel-grid", 60.0)
def parallel_grid():
    """Closed-form optimum against a brute-force grid; sub-optimal schemes below it."""
    dv, bb, excess = 0.0, 0.0, -math.inf
    for args in ((0.5, 2.0, 0.5, 10.0), (0.2, 1.0, 0.3, 5.0), (1.0, 3.0, 0.7, 20.0)):
        cfg = parallel.TwoStateParallel(*args)
        _, v = parallel.optimal_sum_rate(cfg)
        rate = lambda a, aa, cr, b: parallel.average_rate_by_states(
            cfg, parallel.Alloc(a, aa, cr, b))
        z, vg, _ = reference.parallel_grid_optimum(rate)
        dv = max(dv, abs(v - vg))
        bb = max(bb, z[2])
        for _, r in parallel.suboptimal_schemes(cfg).values():
            excess = max(excess, r - v)
    return Check("", {"opt_vs_grid": dv, "argmax_alpha_BB": bb, "suboptimal_excess": excess},
                 {"opt_vs_grid": ("<=", 1e-4), "argmax_alpha_BB": ("<=", 1e-4),
                  "suboptimal_excess": ("<=", 0.0)})


@_timed("sr-distortion", 120.0)
def sr_distortion():
    """Upper boundary at the mean gain; discrete solver near the continuum; b ordering."""
    cfg = sr.SrConfig(1.0, 10.0, LAW)
    prof, D = sr.continuous_min_distortion(cfg)
    ds2 = abs(prof.s2 - LAW.mean)
    states = sr.discretize(LAW, 200)
    _, Dd = sr.discrete_min_distortion(states, 1.0, 10.0,
                                       starts=[sr.continuous_powers_on(states, prof)])
    disorder = 0
    for P in np.logspace(-1, 3, 9):
        d = [sr.continuous_min_distortion(sr.SrConfig(b, P, LAW))[1] for b in (0.5, 1.0, 2.0)]
        disorder += not (d[0] > d[1] > d[2])
    return Check("", {"s2_err": ds2, "discrete_rel": abs(Dd / D - 1), "disordered": disorder},
                 {"s2_err": ("<=", 1e-12), "discrete_rel": ("<=", 0.01), "disordered": ("==", 0)})


@_timed("bottleneck")
def bottleneck_check():
    """Complementary slackness, the infinite-capacity limit, decoding beats compressing."""
    comp, worse = 0.0, -math.inf
    for P in np.logspace(0, 5, 11):
        cfg = bottleneck.BottleneckConfig(float(P), LAW, C=4.0)
        cp, rn = bottleneck.nonoblivious_broadcast(cfg)
        _, ro = bottleneck.oblivious_broadcast(cfg)
        comp = max(comp, abs(cp.lambda_opt * (cp.C - cp.total_rate)))
        worse = max(worse, ro - rn)
    lim = 0.0
    for P in (1.0, 10.0, 100.0):
        cfg = bottleneck.BottleneckConfig(P, LAW, C=30.0)
        half_bs = 0.5 * siso.rayleigh_expected_rate(P)
        half_erg = 0.5 * siso.ergodic_capacity(LAW, P)
        lim = max(lim, abs(bottleneck.nonoblivious_broadcast(cfg)[1] - half_bs),
                  abs(bottleneck.oblivious_broadcast(cfg)[1] - half_bs),
                  abs(bottleneck.oblivious_ergodic(cfg) - half_erg),
                  abs(bottleneck.df_ergodic(cfg) - half_erg))
    return Check("", {"complementarity": comp, "limit_err": lim, "oblivious_excess": worse},
                 {"complementarity": ("<=", 1e-8), "limit_err": ("<=", 1e-6),
                  "oblivious_excess": ("<=", 0.0)})


@_timed("harvest-bruteforce", 30.0)
def harvest_bruteforce():
    """Staircase allocation against exhaustive enumeration of tight budgets."""
    rng = np.random.default_rng(31)
    err, dv, tight = 0.0, math.inf, 0.0
    for _ in range(20):
        B = int(rng.integers(1, 6))
        means = rng.uniform(0.3, 3.0, B)
        hp = harvest.HarvestProfile(rng.exponential(2.0, (B, 2)))
        res, _ = harvest.end_to_end([rayleigh_power(m) for m in means], hp)
        p_ref, _ = reference.harvest_subset_oracle(means, hp.gamma)
        err = max(err, float(np.max(np.abs(res.p - p_ref))))
        if len(res.v) > 1:
            dv = min(dv, float(np.min(-np.diff(res.v))))
        cum = res.cumulative()
        tight = max(tight, max(abs(cum[u - 1] - hp.gamma[u - 1]) for u in res.u))
    return Check("", {"max_dp": err, "min_v_drop": dv, "dominant_slack": tight},
                 {"max_dp": ("<=", 1e-5), "min_v_drop": (">=", 1e-9),
                  "dominant_slack": ("<=", 1e-8)})


DETERMINISM_CONFIG = """\
model: queue
seed: 7
parameters:
  law: {name: rayleigh, mean: 1.0}
  P: 10.0
  n_steps: 20000
sweep:
  parameter: lam
  grid: [0.1, 0.2, 0.3]
output:
  csv: out.csv
  json: out.json
"""


@_timed("determinism")
def determinism():
    """Two runs of the same seeded scenario write identical CSV bytes."""
    blobs = []
    with tempfile.TemporaryDirectory() as d:
        cfg = os.path.join(d, "scenario.yaml")
        with open(cfg, "w") as fh:
            fh.write(DETERMINISM_CONFIG)
        for _ in range(2):
            subprocess.run([sys.executable, "-m", "layercast", "run", cfg], check=True,
                           capture_output=True, cwd=d)
            with open(os.path.join(d, "out.csv"), "rb") as fh:
                blobs.append(fh.read())
    return Check("", {"identical": float(blobs[0] == blobs[1])}, {"identical": ("==", 1.0)})


SUITES = {
    "siso-closed-form": siso_closed_form,
    "siso-asymptotes": siso_asymptotes,
    "rate-ordering": rate_ordering,
    "siso-montecarlo": siso_montecarlo,
    "mac-inclusion": mac_inclusion,
    "mac-average-rate": mac_average_rate,
    "relay-scheme1": relay_scheme1,
    "af-law": af_law,
    "queue-bounds": queue_bounds,
    "mixed-delay": mixed_delay_check,
    "parallel-grid": parallel_grid,
    "sr-distortion": sr_distortion,
    "bottleneck": bottleneck_check,
    "harvest-bruteforce": harvest_bruteforce,
    "determinism": determinism,
}


def run_suite(name):
    """Run one suite, or every suite for ``"all"``; returns a list of ``Check``."""
    if name == "all":
        return [fn() for fn in SUITES.values()]
    if name not in SUITES:
        raise KeyError(name)
    return [SUITES[name]()]
