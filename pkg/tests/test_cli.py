import json
import math
import subprocess
import sys

import pytest

from seqnw import bandwidth as bw
from seqnw.cli import dispatch

SMALL_TOML = """
schema_version = 1
experiment = "cli-small"
kind = "consistency"
seed = 7
n_grid = [100, 300]
replicates = 3

[design]
process = "gaussian_ma"
ma_ratio = 0.5
tau = 10
noise_sigma = 0.5

[kernel]
kind = "epanechnikov"

[bandwidth]
p = 2.0
rule = "balance"
beta = 1.0
scale = 2.0
"""


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_exp(capsys):
    code, out, _ = run(capsys, "constants", "--dist", "exp:1", "--p", "2")
    data = json.loads(out)
    assert code == 0
    assert data["rho"] == -1.0 and data["C_ell"] == 1.0
    assert data["zeta"] == pytest.approx(math.pi / math.sin(math.pi / 4), rel=1e-15)


def test_constants_gaussian_variant(capsys):
    code, out, _ = run(capsys, "constants", "--variant", "gaussian", "--ma-ratio", "0.5")
    assert code == 0 and json.loads(out)["C_A"] > 1


def test_constants_absent_zeta_is_runtime_error(capsys):
    code, _, err = run(capsys, "constants", "--dist", "uniform_sq:3")
    assert code == 1 and json.loads(err)["error"] == "ZetaAbsent"


def test_bandwidth_matches_library(capsys):
    code, out, _ = run(capsys, "bandwidth", "--p", "2", "--beta", "1", "--n", "1000000")
    row = json.loads(out)["rows"][0]
    assert code == 0
    assert row["a_opt_pointwise"] == bw.a_opt_pointwise(1e6, 1.0, 2.0)
    assert row["h_opt_pointwise"] == bw.h_opt(1e6, row["a_opt_pointwise"])
    assert row["a_opt_uniform"] == bw.a_opt_uniform(1e6, 1.0, 2.0)


def test_usage_errors_exit_two(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and json.loads(err)["error"] == "ConfigError"
    code, _, err = run(capsys, "bandwidth", "--n", "2")
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_config_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL_TOML.replace("[kernel]", "[kernel]\nwidth = 3"))
    assert run(capsys, "consistency", "--config", str(bad))[0] == 2
    bad.write_text("schema_version = 1\nexperiment = ")
    assert run(capsys, "consistency", "--config", str(bad))[0] == 2
    assert run(capsys, "consistency", "--config", str(tmp_path / "missing.toml"))[0] == 2
    good = tmp_path / "good.toml"
    good.write_text(SMALL_TOML)
    code, _, err = run(capsys, "clt", "--config", str(good))
    assert code == 2 and "not 'clt'" in err


def test_runtime_failure_exit_one(tmp_path, capsys):
    cfg = tmp_path / "sb.toml"
    cfg.write_text(
        'schema_version = 1\nexperiment = "sb"\nkind = "smallball"\nreplicates = 2\n'
        '[design]\nprocess = "iid"\ntau = 10\n'
        "[smallball]\nh_grid = [0.001, 0.3, 0.4, 0.5, 0.6]\nn_mc = 2000\n"
    )
    code, _, err = run(capsys, "smallball", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 1 and json.loads(err)["error"] == "InsufficientHits"


def test_experiment_outputs_are_identical_across_workers(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(SMALL_TOML)
    outs = []
    for workers in ("1", "4"):
        d = tmp_path / f"w{workers}"
        code, out, _ = run(capsys, "consistency", "--config", str(cfg), "--out", str(d), "--workers", workers)
        assert code == 0 and json.loads(out)["rows"] == 6
        outs.append(((d / "cli-small.csv").read_bytes(), (d / "cli-small.json").read_bytes()))
    assert outs[0] == outs[1]
    d = tmp_path / "seeded"
    run(capsys, "consistency", "--config", str(cfg), "--out", str(d), "--seed", "8")
    assert (d / "cli-small.csv").read_bytes() != outs[0][0]
    assert json.loads((d / "cli-small.json").read_text())["config"]["seed"] == 8


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seqnw", "bandwidth", "--n", "1000"], capture_output=True, text=True)
    assert proc.returncode == 0 and "a_opt_pointwise" in proc.stdout
