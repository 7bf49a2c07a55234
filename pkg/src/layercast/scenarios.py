"""Scenario runners behind ``layercast run``.

A scenario names a model, its parameters and an optional sweep over one
parameter. Each model declares its parameter defaults and output columns;
``evaluate`` computes one row of the curve table.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import bottleneck, harvest, mac, mixed_delay, parallel, queue, relay, siso
from . import sr_distortion as sr
from .channels import chi2_simo, rayleigh_power

__all__ = ["ConfigError", "Model", "MODELS", "make_law", "evaluate", "sweep_values"]


class ConfigError(ValueError):
    """Scenario parameters fail validation."""


def make_law(spec):
    """FadingLaw from ``{name: rayleigh, mean: m}`` or ``{name: chi2, N: n}``."""
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("law must be a map with a 'name' key")
    spec = dict(spec)
    name = spec.pop("name")
    allowed = {"rayleigh": {"mean"}, "chi2": {"N"}}
    if name not in allowed:
        raise ConfigError(f"unknown law {name!r}; expected one of {sorted(allowed)}")
    extra = set(spec) - allowed[name]
    if extra:
        raise ConfigError(f"unknown law keys {sorted(extra)} for {name}")
    if name == "rayleigh":
        return rayleigh_power(float(spec.get("mean", 1.0)))
    return chi2_simo(int(spec.get("N", 1)))


@dataclass(frozen=True)
class Model:
    name: str
    module: str
    defaults: dict
    columns: tuple
    quantities: tuple
    sweepable: tuple
    help: str


def _siso(p, seed):
    law, P = make_law(p["law"]), p["P"]
    prof = siso.optimal_profile(law, P)
    return {"R_bs": siso.expected_rate(prof, law), "R_outage": siso.outage_capacity(law, P).rate,
            "C_erg": siso.ergodic_capacity(law, P), "C_awgn": math.log1p(P * law.mean)}


def _relay(p, seed):
    cfg = relay.RelayConfig(p["Ps"], p["Pr"])
    out = {"DF1": relay.df_single_level(cfg)[1], "DF21": relay.df_two_one(cfg, seed=seed)[1],
           "Scheme1": relay.scheme1_outage_broadcast(cfg)[2]}
    out["AF"] = relay.af_broadcast_rate(cfg, relay.af_law(cfg, seed=seed))[1]
    out["BAQ"] = relay.baq_rate(cfg)[1]
    out["FCSI"] = relay.fcsi_upper(cfg)
    out["ergodic_cutset"] = relay.ergodic_cutset(cfg)
    out["broadcast_cutset"] = relay.broadcast_cutset(cfg)
    return out


def _mac(p, seed):
    cfg = mac.MacConfig.two_state(p["s1"], p["s2"], p["P"], p["q1"])
    q = p["p_weak"]
    _, _, total = mac.optimize_full_region(cfg, (1, 1, 1, 1), seed=seed)
    w = 2.0 * np.array([1.0, 1 - q, 1 - q, (1 - q) ** 2])
    _, rates, _ = mac.optimize_full_region(cfg, w, seed=seed)
    _, _, loc = mac.optimize_local_csit(cfg, (1, 1), seed=seed)
    return {"sum_rate": 2.0 * total, "average_sum_rate": mac.average_sum_rate(rates, q),
            "local_csit_sum": loc, "full_csit_sum": mac.full_csit_sum_capacity(cfg)}


def _queue(p, seed):
    law, lam = make_law(p["law"]), p["lam"]
    prof = siso.optimal_profile(law, p["P"])
    b = queue.continuum_queue_bounds(prof, law, lam)
    q, _ = queue.simulate_lindley(queue.continuum_sampler(prof, law), lam, int(p["n_steps"]),
                                  seed=seed)
    return {"lower": b.lower, "upper": b.upper, "simulated": q,
            "delay_ub": queue.continuum_delay_ub(prof, law, lam), "lower_clamped": float(b.clamped)}


def _mixed(p, seed):
    law = make_law(p["law"])
    cfg = mixed_delay.DcNdcConfig(p["beta"], p["P"], law)
    r = mixed_delay.broadcast_joint(cfg)
    o = mixed_delay.outage_joint(cfg)
    return {"DC": r.dc, "NDC": r.ndc, "total": r.total, "outage_total": o.total,
            "C_erg": siso.ergodic_capacity(law, p["P"])}


def _parallel(p, seed):
    cfg = parallel.TwoStateParallel(p["nu_a"], p["nu_b"], p["P_A"], p["P"])
    _, v = parallel.optimal_sum_rate(cfg)
    sub = parallel.suboptimal_schemes(cfg)
    return {"optimum": v, "independent": sub["independent"][1],
            "private_only": sub["private_only"][1], "common_only": sub["common_only"][1]}


def _sr(p, seed):
    cfg = sr.SrConfig(p["b"], p["P"], make_law(p["law"]))
    _, D = sr.continuous_min_distortion(cfg)
    return {"D_broadcast": D, "D_outage": sr.outage_min_distortion(cfg)[1]}


def _bottleneck(p, seed):
    law = make_law(p["law"])
    cfg = bottleneck.BottleneckConfig(p["P"], law, C=p["C"])
    cp, rn = bottleneck.nonoblivious_broadcast(cfg)
    return {"oblivious_ergodic": bottleneck.oblivious_ergodic(cfg),
            "df_ergodic": bottleneck.df_ergodic(cfg),
            "oblivious_bs": bottleneck.oblivious_broadcast(cfg)[1],
            "nonoblivious_bs": rn, "lambda": cp.lambda_opt}


def _harvest_rows(p, seed):
    # one row per block; the harvest is drawn from the seed unless given
    if p["g"] is not None:
        g = np.asarray(p["g"], dtype=float)
    else:
        rng = np.random.default_rng(seed)
        g = rng.exponential(p["harvest_mean"], (int(p["B"]), int(p["slots"])))
    hp = harvest.HarvestProfile(g)
    means = p["means"] if p["means"] is not None else [1.0] * hp.B
    if len(means) != hp.B:
        raise ConfigError("means must list one gain mean per block")
    laws = [rayleigh_power(float(m)) for m in means]
    res, _ = harvest.end_to_end(laws, hp)
    utils = [harvest.block_utility(l) for l in laws]
    group = {b: k + 1 for k, grp in enumerate(res.groups) for b in grp}
    rows = []
    for b in range(hp.B):
        rows.append({"block": b + 1, "gamma": hp.gamma[b], "power": res.p[b],
                     "rate": utils[b].w(float(res.p[b])), "marginal": utils[b].dw(float(res.p[b])),
                     "group": group[b + 1]})
    return rows


MODELS = {
    "siso": Model("siso", "layercast.siso", {"law": {"name": "rayleigh", "mean": 1.0}, "P": 10.0},
                  ("R_bs", "R_outage", "C_erg", "C_awgn"),
                  ("optimal_profile", "expected_rate", "outage_capacity", "ergodic_capacity"),
                  ("P", "P_dB"), "single-link layered, outage and ergodic rates"),
    "relay": Model("relay", "layercast.relay", {"Ps": 10.0, "Pr": 10.0},
                   ("DF1", "DF21", "Scheme1", "AF", "BAQ", "FCSI", "ergodic_cutset",
                    "broadcast_cutset"),
                   ("df_single_level", "df_two_one", "scheme1_outage_broadcast",
                    "af_broadcast_rate", "baq_rate", "fcsi_upper", "ergodic_cutset",
                    "broadcast_cutset"),
                   ("Ps", "Pr", "P", "P_dB"), "two-hop relaying, unit Rayleigh links"),
    "mac": Model("mac", "layercast.mac",
                 {"s1": 0.25, "s2": 1.0, "q1": 0.5, "P": 10.0, "p_weak": 0.5},
                 ("sum_rate", "average_sum_rate", "local_csit_sum", "full_csit_sum"),
                 ("optimize_full_region", "average_sum_rate", "optimize_local_csit",
                  "full_csit_sum_capacity"),
                 ("P", "P_dB", "p_weak", "q1"), "two-user two-state multiple access"),
    "queue": Model("queue", "layercast.queue",
                   {"law": {"name": "rayleigh", "mean": 1.0}, "P": 10.0, "lam": 0.3,
                    "n_steps": 100000},
                   ("lower", "upper", "simulated", "delay_ub", "lower_clamped"),
                   ("continuum_queue_bounds", "continuum_delay_ub", "simulate_lindley"),
                   ("lam", "P", "P_dB"), "queue size bounds and simulation for layered service"),
    "mixed-delay": Model("mixed-delay", "layercast.mixed_delay",
                         {"law": {"name": "rayleigh", "mean": 1.0}, "P": 10.0, "beta": 0.5},
                         ("DC", "NDC", "total", "outage_total", "C_erg"),
                         ("broadcast_joint", "outage_joint", "ergodic_capacity"),
                         ("P", "P_dB", "beta"), "delay-constrained layers plus an ergodic stream"),
    "parallel": Model("parallel", "layercast.parallel",
                      {"nu_a": 0.5, "nu_b": 2.0, "P_A": 0.5, "P": 10.0},
                      ("optimum", "independent", "private_only", "common_only"),
                      ("optimal_sum_rate", "suboptimal_schemes"),
                      ("P", "P_dB", "P_A"), "two parallel two-state channels"),
    "sr": Model("sr", "layercast.sr_distortion",
                {"law": {"name": "rayleigh", "mean": 1.0}, "P": 10.0, "b": 1.0},
                ("D_broadcast", "D_outage"),
                ("continuous_min_distortion", "outage_min_distortion"),
                ("P", "P_dB", "b"), "expected distortion of successive refinement"),
    "bottleneck": Model("bottleneck", "layercast.bottleneck",
                        {"law": {"name": "rayleigh", "mean": 1.0}, "P": 10.0, "C": 4.0},
                        ("oblivious_ergodic", "df_ergodic", "oblivious_bs", "nonoblivious_bs",
                         "lambda"),
                        ("oblivious_ergodic", "df_ergodic", "oblivious_broadcast",
                         "nonoblivious_broadcast"),
                        ("P", "P_dB", "C"), "fading hop into a finite-capacity link"),
    "harvest": Model("harvest", "layercast.harvest",
                     {"B": 5, "slots": 2, "harvest_mean": 2.0, "means": None, "g": None},
                     ("gamma", "power", "rate", "marginal", "group"),
                     ("block_utility", "allocate_over_time", "end_to_end"),
                     (), "block powers of an energy-harvesting transmitter"),
}

_RUNNERS = {"siso": _siso, "relay": _relay, "mac": _mac, "queue": _queue, "mixed-delay": _mixed,
            "parallel": _parallel, "sr": _sr, "bottleneck": _bottleneck}


def resolve(model, params):
    """Defaults merged with ``params``; unknown keys raise ``ConfigError``."""
    m = MODELS[model]
    extra = set(params) - set(m.defaults)
    if extra:
        raise ConfigError(f"unknown parameters for {model}: {sorted(extra)}")
    out = dict(m.defaults)
    out.update(params)
    for k, v in out.items():
        if k in ("law", "g", "means") or v is None:
            continue
        if isinstance(v, str):
            # YAML 1.1 reads exponents without a sign or dot (1e3) as strings
            try:
                v = float(v)
            except ValueError:
                pass
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"parameter {k} must be a number, got {v!r}")
        out[k] = float(v)
    if "law" in out:
        make_law(out["law"])
    return out


def _apply_sweep(model, params, name, value):
    p = dict(params)
    if name == "P_dB":
        P = 10.0 ** (value / 10.0)
        if model == "relay":
            p["Ps"] = p["Pr"] = P
        else:
            p["P"] = P
    elif name == "P" and model == "relay":
        p["Ps"] = p["Pr"] = value
    else:
        p[name] = value
    return p


def sweep_values(sweep):
    """Grid of a sweep spec: an explicit ``grid`` or ``start``/``stop``/``num``."""
    if "grid" in sweep:
        extra = set(sweep) - {"parameter", "grid"}
        if extra:
            raise ConfigError(f"unknown sweep keys {sorted(extra)}")
        vals = sweep["grid"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep grid must be a non-empty list")
        return [float(v) for v in vals]
    extra = set(sweep) - {"parameter", "start", "stop", "num", "scale"}
    if extra:
        raise ConfigError(f"unknown sweep keys {sorted(extra)}")
    try:
        a, b, n = float(sweep["start"]), float(sweep["stop"]), int(sweep["num"])
    except KeyError as e:
        raise ConfigError(f"sweep needs a grid or start/stop/num (missing {e})") from None
    if n < 1:
        raise ConfigError("sweep num must be >= 1")
    scale = sweep.get("scale", "linear")
    if scale == "linear":
        return np.linspace(a, b, n).tolist()
    if scale == "log":
        if a <= 0 or b <= 0:
            raise ConfigError("log sweep needs positive ends")
        return np.geomspace(a, b, n).tolist()
    raise ConfigError(f"unknown sweep scale {scale!r}")


def evaluate(task):
    """One sweep point: ``(model, params, sweep name, value, seed)`` -> list of rows."""
    model, params, name, value, seed = task
    if model == "harvest":
        return _harvest_rows(params, seed)
    p = _apply_sweep(model, params, name, value) if name else params
    row = _RUNNERS[model](p, seed)
    return [row]
