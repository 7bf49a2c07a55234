"""Command-line entry point.

``layercast run <config>`` evaluates a YAML scenario and writes a CSV curve
table plus a JSON provenance file; ``layercast verify <suite>`` runs an
acceptance check; ``layercast list-models`` prints the available models.

Exit codes: 0 success, 1 failed check, 2 parse error, 3 validation error
or unknown suite, 4 numeric failure.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import math
import os
import sys

import numpy as np
import yaml

from . import __version__, scenarios
from .numerics import NumericsError

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3, 4
_TOP_KEYS = {"model", "seed", "parameters", "sweep", "output"}
_FMT = "%.12g"


def thread_cap():
    """Worker count from ``LAYERCAST_THREADS`` (default 1)."""
    raw = os.environ.get("LAYERCAST_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise scenarios.ConfigError(f"LAYERCAST_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise scenarios.ConfigError("LAYERCAST_THREADS must be >= 1")
    return n


def load_config(path):
    """Parse and validate a scenario file.

    Raises ``yaml.YAMLError`` on malformed YAML and ``ConfigError`` on
    schema problems.
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise scenarios.ConfigError("config must be a YAML map")
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise scenarios.ConfigError(f"unknown top-level keys {sorted(extra)}")
    model = raw.get("model")
    if model not in scenarios.MODELS:
        raise scenarios.ConfigError(
            f"unknown model {model!r}; run 'layercast list-models'")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise scenarios.ConfigError("seed must be a nonnegative integer")
    params = raw.get("parameters") or {}
    if not isinstance(params, dict):
        raise scenarios.ConfigError("parameters must be a map")
    params = scenarios.resolve(model, params)
    sweep = raw.get("sweep")
    name, grid = None, [None]
    if sweep is not None:
        if not isinstance(sweep, dict) or "parameter" not in sweep:
            raise scenarios.ConfigError("sweep must be a map with a 'parameter' key")
        name = sweep["parameter"]
        allowed = scenarios.MODELS[model].sweepable
        if name not in allowed:
            raise scenarios.ConfigError(
                f"cannot sweep {name!r} for {model}; sweepable: {list(allowed)}")
        grid = scenarios.sweep_values(sweep)
    output = raw.get("output") or {}
    if not isinstance(output, dict) or set(output) - {"csv", "json"}:
        raise scenarios.ConfigError("output takes only 'csv' and 'json' paths")
    base = os.path.splitext(os.path.basename(path))[0]
    out = {"csv": output.get("csv", base + ".csv"), "json": output.get("json", base + ".json")}
    return {"model": model, "seed": seed, "parameters": params, "sweep": name, "grid": grid,
            "output": out}


def _point_seeds(seed, n):
    # independent per-point streams so results do not depend on worker count
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def run_scenario(cfg):
    """Evaluate every sweep point; rows come back in sweep order."""
    model, grid = cfg["model"], cfg["grid"]
    seeds = _point_seeds(cfg["seed"], len(grid))
    tasks = [(model, cfg["parameters"], cfg["sweep"], v, s) for v, s in zip(grid, seeds)]
    workers = min(thread_cap(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(scenarios.evaluate, tasks))
    else:
        results = [scenarios.evaluate(t) for t in tasks]
    m = scenarios.MODELS[model]
    rows = []
    for v, res in zip(grid, results):
        for r in res:
            vals = [float(r[c]) for c in m.columns]
            if not all(math.isfinite(x) for x in vals):
                bad = [c for c, x in zip(m.columns, vals) if not math.isfinite(x)]
                where = f" at {cfg['sweep']}={v}" if cfg["sweep"] else ""
                raise NumericsError(f"non-finite {bad}{where}")
            key = r["block"] if model == "harvest" else v
            rows.append((key, vals))
    return rows


def _key_column(cfg):
    if cfg["model"] == "harvest":
        return "block"
    return cfg["sweep"] or "point"


def write_csv(path, cfg, rows):
    m = scenarios.MODELS[cfg["model"]]
    lines = [f"# layercast {__version__}", f"# model {m.name} ({m.module})",
             f"# seed {cfg['seed']}", "# rates in nats"]
    lines.append(",".join((_key_column(cfg),) + m.columns))
    for k, vals in rows:
        k = 0 if k is None else k
        lines.append(",".join([_FMT % k] + [_FMT % x for x in vals]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, cfg, rows):
    m = scenarios.MODELS[cfg["model"]]
    doc = {"version": __version__, "model": m.name, "module": m.module,
           "quantities": list(m.quantities), "units": "nats", "seed": cfg["seed"],
           "parameters": cfg["parameters"], "sweep": cfg["sweep"],
           "columns": [_key_column(cfg)] + list(m.columns),
           "rows": [[0 if k is None else k] + vals for k, vals in rows]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _yaml_diagnostic(path, err):
    mark = getattr(err, "problem_mark", None)
    problem = getattr(err, "problem", None) or str(err)
    if mark is None:
        return f"{path}: parse error: {problem}"
    return f"{path}:{mark.line + 1}:{mark.column + 1}: parse error: {problem}"


def cmd_run(args):
    try:
        cfg = load_config(args.config)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except yaml.YAMLError as e:
        print(_yaml_diagnostic(args.config, e), file=sys.stderr)
        return EXIT_PARSE
    except scenarios.ConfigError as e:
        print(f"{args.config}: invalid config: {e}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rows = run_scenario(cfg)
    except NumericsError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_INVALID
    write_csv(cfg["output"]["csv"], cfg, rows)
    write_json(cfg["output"]["json"], cfg, rows)
    print(f"wrote {len(rows)} rows to {cfg['output']['csv']}")
    return EXIT_OK


def cmd_verify(args):
    from . import verify
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    if any(n not in verify.SUITES for n in names):
        print(f"unknown suite {args.suite!r}; available: all, {', '.join(verify.SUITES)}",
              file=sys.stderr)
        return EXIT_INVALID
    ok = True
    for n in names:
        try:
            chk = verify.SUITES[n]()
        except NumericsError as e:
            print(f"FAIL {n}: numeric failure: {e}")
            return EXIT_NUMERIC
        print(chk.line(), flush=True)
        ok &= chk.ok
    return EXIT_OK if ok else EXIT_CHECK


def cmd_list_models(args):
    for m in scenarios.MODELS.values():
        print(f"{m.name:12s} {m.help}")
        for k, v in m.defaults.items():
            print(f"    {k} = {v}")
        if m.sweepable:
            print(f"    sweepable: {', '.join(m.sweepable)}")
        print(f"    columns: {', '.join(m.columns)}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="layercast", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"layercast {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="evaluate a YAML scenario")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", help="run an acceptance suite ('all' for every suite)")
    p.add_argument("suite")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("list-models", help="print models and their parameters")
    p.set_defaults(func=cmd_list_models)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except scenarios.ConfigError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
