import json
import os
import subprocess
import sys

import pytest

from layercast import cli


def _cli(args, cwd, threads=None):
    env = dict(os.environ)
    if threads is not None:
        env["LAYERCAST_THREADS"] = str(threads)
    return subprocess.run([sys.executable, "-m", "layercast"] + args, cwd=cwd, env=env,
                          capture_output=True, text=True, timeout=300)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SWEEP = """model: siso
seed: 7
parameters:
  law: {name: rayleigh, mean: 1.0}
sweep: {parameter: P_dB, start: 0, stop: 30, num: 4}
output: {csv: out.csv, json: out.json}
"""


def test_run_writes_csv_and_json(tmp_path):
    cfg = _write(tmp_path, "a.yaml", SWEEP)
    r = _cli(["run", cfg], tmp_path)
    assert r.returncode == 0, r.stderr
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0].startswith("# layercast")
    assert "# rates in nats" in lines
    assert lines[4] == "P_dB,R_bs,R_outage,C_erg,C_awgn"
    rows = [list(map(float, l.split(","))) for l in lines[5:]]
    assert [r_[0] for r_ in rows] == [0.0, 10.0, 20.0, 30.0]
    for _, bs, out, erg, awgn in rows:
        assert out <= bs <= erg <= awgn
    doc = json.loads((tmp_path / "out.json").read_text())
    assert doc["units"] == "nats" and doc["seed"] == 7
    assert doc["columns"][0] == "P_dB" and len(doc["rows"]) == 4
    assert doc["parameters"]["law"] == {"name": "rayleigh", "mean": 1.0}


def test_output_independent_of_threads(tmp_path):
    text = SWEEP.replace("model: siso", "model: queue").replace(
        "sweep: {parameter: P_dB, start: 0, stop: 30, num: 4}",
        "sweep: {parameter: lam, grid: [0.1, 0.2, 0.3]}").replace(
        "  law: {name: rayleigh, mean: 1.0}", "  n_steps: 20000")
    cfg = _write(tmp_path, "q.yaml", text)
    outs = []
    for t in (1, 3, 1):
        r = _cli(["run", cfg], tmp_path, threads=t)
        assert r.returncode == 0, r.stderr
        outs.append((tmp_path / "out.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_parse_error_reports_position(tmp_path):
    cfg = _write(tmp_path, "bad.yaml", "model: siso\nparameters: {P: [1, 2\n")
    r = _cli(["run", cfg], tmp_path)
    assert r.returncode == 2
    assert "bad.yaml:" in r.stderr and "parse error" in r.stderr
    loc = r.stderr.split("bad.yaml:")[1].split(":")[:2]
    assert all(x.isdigit() for x in loc)


@pytest.mark.parametrize("text", [
    "model: siso\nparameters: {P: -1}\n",
    "model: siso\nparameters: {Q: 1}\n",
    "model: nope\n",
    "model: siso\nextra: 1\n",
    "model: queue\nparameters: {lam: 5.0}\n",
    "model: siso\nsweep: {parameter: lam, grid: [1]}\n",
])
def test_validation_errors(tmp_path, text):
    r = _cli(["run", _write(tmp_path, "v.yaml", text)], tmp_path)
    assert r.returncode == 3, r.stderr


def test_numeric_failure(tmp_path):
    r = _cli(["run", _write(tmp_path, "n.yaml", "model: siso\nparameters: {P: 1.0e300}\n")],
             tmp_path)
    assert r.returncode == 4
    assert "numeric failure" in r.stderr


def test_verify_unknown_suite_and_pass(tmp_path):
    assert _cli(["verify", "no-such-suite"], tmp_path).returncode == 3
    r = _cli(["verify", "siso-closed-form"], tmp_path)
    assert r.returncode == 0 and r.stdout.startswith("PASS siso-closed-form")


def test_list_models(capsys):
    assert cli.main(["list-models"]) == 0
    out = capsys.readouterr().out
    for name in ("siso", "relay", "mac", "queue", "mixed-delay", "parallel", "sr",
                 "bottleneck", "harvest"):
        assert name in out


def test_harvest_rows(tmp_path):
    cfg = _write(tmp_path, "h.yaml",
                 "model: harvest\nseed: 3\nparameters: {B: 4}\noutput: {csv: h.csv, json: h.json}\n")
    r = _cli(["run", cfg], tmp_path)
    assert r.returncode == 0, r.stderr
    doc = json.loads((tmp_path / "h.json").read_text())
    assert [row[0] for row in doc["rows"]] == [1, 2, 3, 4]
    cols = doc["columns"]
    power = [row[cols.index("power")] for row in doc["rows"]]
    gamma = [row[cols.index("gamma")] for row in doc["rows"]]
    cum = 0.0
    for p, g in zip(power, gamma):
        cum += p
        assert cum <= g + 1e-9
    assert cum == pytest.approx(gamma[-1], rel=1e-9)


def test_thread_cap_validation(monkeypatch):
    monkeypatch.setenv("LAYERCAST_THREADS", "0")
    with pytest.raises(ValueError):
        cli.thread_cap()
    monkeypatch.setenv("LAYERCAST_THREADS", "4")
    assert cli.thread_cap() == 4
