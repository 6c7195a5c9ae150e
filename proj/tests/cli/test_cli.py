import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

AOI_PG = os.environ.get("AOI_PG", "aoi-pg")
CONFIGS = Path(__file__).resolve().parents[2] / "configs"

SMALL = {
    "channel": {"kind": "gilbert_elliot", "p": 0.1, "q": 0.9, "y0": 1.0, "y1": 10.0},
    "cost": {"kind": "penalty", "penalty": {"kind": "identity"}, "f": 4.0},
    "agent": {"algorithm": "discard", "x_min": 2.0, "x_max": 10.0, "y_max": 10.0},
    "sim": {"horizon": 2000, "replications": 2, "master_seed": 3},
}


def run(*args):
    return subprocess.run([AOI_PG, *map(str, args)], capture_output=True, text=True)


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_missing_config_exits_2_and_names_path(tmp_path):
    missing = tmp_path / "nope.json"
    r = run("run", "--config", missing, "--out", tmp_path / "out")
    assert r.returncode == 2
    assert str(missing) in r.stderr


def test_run_writes_csvs(tmp_path):
    out = tmp_path / "out"
    r = run("run", "--config", write_config(tmp_path, SMALL), "--out", out)
    assert r.returncode == 0, r.stderr
    for name in ("runs.csv", "policy.csv", "summary.csv", "config.resolved.json"):
        assert (out / name).is_file()
    assert len(read_rows(out / "summary.csv")) == 1
    assert not (tmp_path / "out.staging").exists()


def test_seed_override_is_byte_reproducible(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    assert run("run", "--config", cfg, "--seed", 42, "--out", tmp_path / "a").returncode == 0
    assert run("run", "--config", cfg, "--seed", 42, "--out", tmp_path / "b").returncode == 0
    a = (tmp_path / "a" / "runs.csv").read_bytes()
    assert a == (tmp_path / "b" / "runs.csv").read_bytes()
    assert run("run", "--config", cfg, "--seed", 43, "--out", tmp_path / "c").returncode == 0
    assert a != (tmp_path / "c" / "runs.csv").read_bytes()


def test_existing_output_needs_force(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "out"
    out.mkdir()
    (out / "keep.txt").write_text("x")
    r = run("run", "--config", cfg, "--out", out)
    assert r.returncode == 2
    assert (out / "keep.txt").exists()
    assert run("run", "--config", cfg, "--out", out, "--force").returncode == 0
    assert not (out / "keep.txt").exists()
    assert (out / "runs.csv").is_file()


@pytest.mark.parametrize(
    "mutate, key",
    [
        (lambda d: d["channel"].update(kind="rayleigh"), "channel.kind"),
        (lambda d: d["cost"].update(bogus=1), "cost.bogus"),
        (lambda d: d["sim"].update(replications=0), "sim.replications"),
    ],
)
def test_invalid_config_exits_2_with_key(tmp_path, mutate, key):
    doc = json.loads(json.dumps(SMALL))
    mutate(doc)
    r = run("run", "--config", write_config(tmp_path, doc), "--out", tmp_path / "out")
    assert r.returncode == 2
    assert key in r.stderr


def test_empty_sweep_exits_2(tmp_path):
    doc = dict(SMALL, sweep={"axis": "f", "values": []})
    r = run("sweep", "--config", write_config(tmp_path, doc), "--out", tmp_path / "out")
    assert r.returncode == 2
    assert not (tmp_path / "out").exists()


def test_rho_sweep_has_one_row_per_value(tmp_path):
    doc = json.loads((CONFIGS / "sweep_rho.json").read_text())
    doc["sim"] = {"horizon": 500, "replications": 2, "master_seed": 1}
    out = tmp_path / "out"
    r = run("sweep", "--config", write_config(tmp_path, doc), "--out", out, "--emit-plots")
    assert r.returncode == 0, r.stderr
    rows = read_rows(out / "sweep.csv")
    assert [float(row["axis_value"]) for row in rows] == pytest.approx([0.1 * i for i in range(1, 10)])
    assert all(row["oracle_beta"] == "" for row in rows)
    assert (out / "sweep.gp").is_file()


def test_discard_sweep_reports_oracle(tmp_path):
    doc = dict(SMALL, sweep={"axis": "f", "values": [2, 4]})
    out = tmp_path / "out"
    assert run("sweep", "--config", write_config(tmp_path, doc), "--out", out).returncode == 0
    rows = read_rows(out / "sweep.csv")
    assert float(rows[1]["oracle_beta"]) == pytest.approx(5.4145, rel=5e-3)


def test_oracle_deterministic_channel():
    r = run("oracle", "ge-wait", "--config", CONFIGS / "deterministic.json")
    assert r.returncode == 0, r.stderr
    row = list(csv.DictReader(r.stdout.splitlines()))[0]
    assert float(row["z0"]) == pytest.approx(2**0.5 - 1, abs=1e-4)
    assert float(row["beta"]) == pytest.approx(1 + 2**0.5, abs=1e-6)


def test_oracle_discard(tmp_path):
    r = run("oracle", "ge-discard", "--config", CONFIGS / "ge_discard.json", "--attempts", 1000000,
            "--out", tmp_path / "o.csv")
    assert r.returncode == 0, r.stderr
    row = read_rows(tmp_path / "o.csv")[0]
    assert float(row["beta"]) == pytest.approx(5.4145, rel=5e-3)
    assert float(row["x0"]) == pytest.approx(2.794, abs=0.15)


def test_oracle_rejects_lognormal():
    r = run("oracle", "ge-wait", "--config", CONFIGS / "lognormal_wait.json")
    assert r.returncode == 2


def test_unknown_subcommand_exits_2():
    assert run("frobnicate").returncode == 2


def test_check_passes():
    r = run("check")
    assert r.returncode == 0, r.stdout + r.stderr
    assert "FAIL" not in r.stdout


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_example_configs_validate(tmp_path, name):
    doc = json.loads((CONFIGS / name).read_text())
    doc["sim"].update(horizon=100, replications=1)
    sub = "sweep" if "sweep" in doc else "run"
    r = run(sub, "--config", write_config(tmp_path, doc), "--out", tmp_path / "out")
    assert r.returncode == 0, r.stderr
