import dataclasses
import json
import math

import numpy as np
import pytest

from seqnw.errors import ConfigError, InsufficientHits
from seqnw.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    draw_sample,
    ks_distance,
    nw_estimate,
    preset,
    restandardize,
    run_clt,
    run_consistency,
    run_experiment,
    run_smallball_validation,
    run_uniform,
    uniform_points,
    uniform_tau,
    write_results,
)


def small(kind, **kw):
    base = {
        "consistency": dict(n_grid=(100, 400), replicates=4),
        "clt": dict(n_grid=(300,), replicates=200),
        "uniform": dict(n_grid=(100, 400), replicates=3, grid_sample=8, grid_cap=16),
        "smallball": dict(tau=10, n_mc=20_000, h_grid=(0.3, 0.4, 0.5, 0.6, 0.8), replicates=2),
    }[kind]
    return preset(kind, experiment=f"t-{kind}", **{**base, **kw})


# configuration ------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        preset("consistency", replicates=1)
    with pytest.raises(ConfigError):
        preset("consistency", n_grid=(500, 500))
    with pytest.raises(ConfigError):
        preset("consistency", process="arma")
    with pytest.raises(ConfigError):
        preset("smallball", h_grid=(0.1, 0.2))
    with pytest.raises(ConfigError):
        preset("consistency", dist="lognormal:1")
    with pytest.raises(ConfigError):
        preset("nonsense")


@pytest.mark.parametrize("kind", ["consistency", "clt", "uniform", "smallball"])
def test_dict_round_trip(kind):
    cfg = dataclasses.replace(preset(kind), eta=1.5, burn_in=50, ma_coeffs=(1.0, 0.3))
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_unknown_keys_and_version():
    doc = preset("consistency").to_dict()
    bad = dict(doc, extra=1)
    with pytest.raises(ConfigError, match="unknown top-level key"):
        ExperimentConfig.from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["kernel"]["width"] = 2
    with pytest.raises(ConfigError, match=r"\[kernel\]"):
        ExperimentConfig.from_dict(bad)
    with pytest.raises(ConfigError, match="schema_version"):
        ExperimentConfig.from_dict({k: v for k, v in doc.items() if k != "schema_version"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(doc, design=3))


# consistency ----------------------------------------------------------------------

def test_noise_free_constant_design_has_zero_error():
    res = run_consistency(small("consistency", c0=0.0, noise_sigma=0.0))
    assert all(r.abs_error == 0.0 for r in res.records if not r.empty_window)
    assert all(r.truth == 0.0 for r in res.records)


def test_record_rows_are_self_describing():
    cfg = small("consistency", points=((0.0,), (0.3, -0.2)))
    res = run_consistency(cfg)
    rec = res.records[7]
    sample = draw_sample(cfg, rec.n, rec.replicate)
    est = nw_estimate(sample, cfg.points[rec.point], cfg.kernel(), cfg.schedule(cfg.bandwidth(rec.n)))
    assert est.value == rec.estimate
    assert len(res.summary["by_n"][0]["points"]) == 2


def test_window_counts_grow_under_the_rule():
    res = run_consistency(preset("consistency", replicates=20, experiment="grow"))
    counts = [b["n"] * b["points"][0]["mean_phi_hat"] for b in res.summary["by_n"]]
    assert counts[0] < counts[1] < counts[2]
    assert all(b["points"][0]["empty_rate"] == 0.0 for b in res.summary["by_n"])


def test_autoregressive_design_runs():
    res = run_consistency(small("consistency", process="nar", tau=3, c0=0.5, burn_in=100))
    assert len(res.records) == 8
    assert all(r.truth == 0.0 for r in res.records)


def test_timing_column():
    res = run_consistency(small("consistency"))
    assert all(r.elapsed_ms is None for r in res.records)
    res = run_consistency(small("consistency", timing=True))
    assert all(r.elapsed_ms >= 0 for r in res.records)


# normal limit -----------------------------------------------------------------------

def test_clt_restandardization_and_ks():
    res = run_clt(small("clt"))
    entry = res.summary["by_n"][0]
    assert entry["mean"] == pytest.approx(0.0, abs=1e-12)
    assert entry["variance"] == pytest.approx(1.0, rel=1e-12)
    assert entry["ks_critical_01"] == pytest.approx(1.63 / math.sqrt(entry["used"]))
    assert "theory_scaled" in entry
    est = np.array([r.estimate for r in res.records if not r.empty_window])
    shuffled = np.random.default_rng(0).permutation(est)
    assert ks_distance(restandardize(shuffled)) == pytest.approx(entry["ks_distance"], abs=1e-15)


def test_clt_needs_replicates():
    with pytest.raises(ConfigError):
        run_clt(small("clt", replicates=50))


def test_ks_distance_sanity():
    z = np.random.default_rng(1).standard_normal(2000)
    assert ks_distance(z) < 1.63 / math.sqrt(2000)
    assert ks_distance(z + 1.0) > 0.3


# uniform ----------------------------------------------------------------------------

def test_uniform_tau_schedule():
    assert [uniform_tau(n) for n in (1000, 10_000, 100_000)] == [7, 10, 12]


def test_uniform_sup_dominates_and_grid_is_fixed():
    cfg = small("uniform")
    res = run_uniform(cfg)
    for b in res.summary["by_n"]:
        for rep, sup in enumerate(b["sup_errors"]):
            errs = [r.abs_error for r in res.records if r.n == b["n"] and r.replicate == rep and not r.empty_window]
            assert sup == max(errs)
            assert sup >= max(errs[: len(errs) // 2 or 1])
    p1, sampled, size = uniform_points(cfg, 400)
    p2, _, _ = uniform_points(cfg, 400)
    assert np.array_equal(p1, p2) and sampled and size > cfg.grid_cap
    full, sampled, _ = uniform_points(dataclasses.replace(cfg, grid_cap=10**6), 100)
    assert not sampled and len(full) == (math.ceil(math.sqrt(5)) + 1) ** 5


# small ball --------------------------------------------------------------------------

def test_smallball_small_run():
    res = run_smallball_validation(small("smallball"))
    assert res.summary["all_negative"]
    assert len(res.records) == 10


def test_insufficient_hits():
    with pytest.raises(InsufficientHits, match="raise the smallest h"):
        run_smallball_validation(small("smallball", h_grid=(0.01, 0.3, 0.4, 0.5, 0.6), n_mc=2000))


def test_dependent_design_slope_ratio():
    common = dict(tau=60, n_mc=1_000_000, replicates=2)
    iid = run_smallball_validation(preset("smallball", experiment="sb-iid", **common))
    ma = run_smallball_validation(
        preset("smallball", experiment="sb-ma", process="gaussian_ma", ma_ratio=0.5, **common)
    )
    ratio = ma.summary["mean_slope"] / iid.summary["mean_slope"]
    expected = ma.summary["constants"]["C_A"] ** (2 / 3)
    assert abs(ratio / expected - 1) < 0.30


# determinism and output ---------------------------------------------------------------

@pytest.mark.parametrize("kind", ["consistency", "uniform", "smallball"])
def test_parallel_runs_are_byte_identical(kind):
    cfg = small(kind)
    a = run_experiment(cfg, workers=1)
    b = run_experiment(cfg, workers=2)
    assert a.csv_text() == b.csv_text()
    assert a.json_text() == b.json_text()


def test_outputs(tmp_path):
    res = run_consistency(small("consistency"))
    csv_path, json_path = write_results(res, tmp_path / "out", "c")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + len(res.records)
    assert lines[1].endswith(",")  # elapsed_ms left blank
    summary = json.loads(json_path.read_text())
    assert summary["config"]["schema_version"] == 1
    assert ExperimentConfig.from_dict(summary["config"]) == small("consistency")
