import json
import math

import numpy as np
import pytest

from spinscape.cli import ExperimentConfig, load_config, main


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


TABLE_MODEL = {"kind": "table", "energies": [0.0, 2.0, 3.0, 1.0]}
K6_MODEL = {"kind": "ising-graph", "n": 6, "j": 1.0, "h": 0.5,
            "graph": {"type": "complete"}}


def read_rows(path):
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(dict(zip(header, line.split(","))))
    return rows


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_config_roundtrip():
    cfg = ExperimentConfig(mode="sweep", model=TABLE_MODEL,
                           beta_grid=(4.0, 6.0, 8.0, 10.0, 12.0),
                           eps=0.2, runs=50, seed=7)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        ExperimentConfig.from_dict({"mode": "analyze", "model": TABLE_MODEL,
                                    "bogus": 1})


def test_config_rejects_bad_mode():
    with pytest.raises(ValueError, match="mode"):
        ExperimentConfig.from_dict({"mode": "dance", "model": TABLE_MODEL})


def test_config_missing_model_file(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        ExperimentConfig.from_dict({"mode": "analyze",
                                    "model": {"path": str(tmp_path / "nope.json")}})


def test_randomized_modes_require_seed(tmp_path):
    cfg = write_config(tmp_path, {"mode": "sample", "model": TABLE_MODEL})
    with pytest.raises(SystemExit, match="seed"):
        main(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")])


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def test_analyze_table_model(tmp_path, capsys):
    cfg = write_config(tmp_path, {"mode": "analyze", "model": TABLE_MODEL,
                                  "beta": 3.0, "eps": 0.1})
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "res")]) == 0
    doc = json.loads((tmp_path / "res" / "analyze.json").read_text())
    assert doc["config"]["model"] == TABLE_MODEL  # reproducibility header
    assert doc["saddle"]["m"] == 1.0
    assert doc["saddle"]["m_modified"] is not None
    assert doc["flags"]["torpid_relaxation"]["pass"]
    assert doc["flags"]["gap_floor_modified"]["pass"]
    rows = read_rows(tmp_path / "res" / "analyze.csv")
    assert len(rows) == 1 and float(rows[0]["m"]) == 1.0


def test_analyze_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, {"mode": "analyze", "model": TABLE_MODEL,
                                  "beta": 2.0})
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "b")])
    da = json.loads((tmp_path / "a" / "analyze.json").read_text())
    db = json.loads((tmp_path / "b" / "analyze.json").read_text())
    da["config"].pop("out", None), db["config"].pop("out", None)
    assert da == db


def test_analyze_invalid_threshold_still_reports(tmp_path):
    # offset beyond the energy gap: validity warning, flags still computed
    cfg = write_config(tmp_path, {"mode": "analyze", "model": TABLE_MODEL,
                                  "beta": 3.0,
                                  "modification": {"f_kind": "quadratic",
                                                   "alpha_rule": "beta",
                                                   "delta": 1.5}})
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "res")])
    doc = json.loads((tmp_path / "res" / "analyze.json").read_text())
    assert doc["tune"]["valid"] is False
    assert "modified_height_cap" not in doc["flags"]
    assert doc["flags"]["torpid_relaxation"]["pass"]


def test_analyze_k6_at_low_temperature_beta(tmp_path):
    cfg = write_config(tmp_path, {"mode": "analyze", "model": K6_MODEL, "eps": 0.1})
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "res")])
    doc = json.loads((tmp_path / "res" / "analyze.json").read_text())
    assert doc["all_evaluated_pass"]
    assert doc["flags"]["mix_lower_zero"].get("skipped")  # torpid side beyond float
    assert math.isclose(doc["beta"], 8.3709467, rel_tol=1e-6)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_slopes_table(tmp_path):
    cfg = write_config(tmp_path, {"mode": "sweep", "model": TABLE_MODEL,
                                  "beta_grid": [4, 6, 8, 10, 12, 14, 16]})
    main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "res")])
    doc = json.loads((tmp_path / "res" / "sweep.json").read_text())
    assert abs(doc["slope_zero"] - doc["m"]) < 0.1 * doc["m"]
    assert abs(doc["slope_modified"]) < 0.02
    rows = read_rows(tmp_path / "res" / "sweep.csv")
    assert len(rows) == 7
    assert {"beta", "t_rel_zero", "lambda2_modified", "tv_floor"} <= set(rows[0])


def test_sweep_needs_five_points(tmp_path):
    cfg = write_config(tmp_path, {"mode": "sweep", "model": TABLE_MODEL,
                                  "beta_grid": [4.0]})
    with pytest.raises(SystemExit, match="at least 5"):
        main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "res")])


# ---------------------------------------------------------------------------
# sampling modes
# ---------------------------------------------------------------------------

def test_sample_writes_trajectory(tmp_path):
    cfg = write_config(tmp_path, {"mode": "sample", "model": TABLE_MODEL,
                                  "beta": 1.0, "max_horizon": 30.0, "seed": 5})
    main(["sample", "--config", str(cfg), "--out", str(tmp_path / "res")])
    rows = read_rows(tmp_path / "res" / "sample.csv")
    assert rows[0]["time"] == "0.0" and rows[0]["state"] == "00"
    times = [float(r["time"]) for r in rows]
    assert times == sorted(times)
    # flag override wins over config
    main(["sample", "--config", str(cfg), "--seed", "6", "--out", str(tmp_path / "res2")])
    doc = read_rows(tmp_path / "res2" / "sample.csv")
    assert doc != rows


def test_tunnel_csv(tmp_path):
    cfg = write_config(tmp_path, {"mode": "tunnel", "model": TABLE_MODEL,
                                  "beta_grid": [2.0, 3.0], "runs": 200,
                                  "max_horizon": 1e4, "seed": 11})
    main(["tunnel", "--config", str(cfg), "--out", str(tmp_path / "res")])
    rows = read_rows(tmp_path / "res" / "tunnel.csv")
    assert {r["chain"] for r in rows} == {"zero", "modified"}
    assert {r["beta"] for r in rows} == {"2.0", "3.0"}
    start_11 = [r for r in rows if r["start"] == "11" and r["chain"] == "zero"]
    assert all(float(r["mean"]) > 0 for r in start_11)


def test_anneal_csv_and_constants(tmp_path):
    cfg = write_config(tmp_path, {"mode": "anneal", "model": K6_MODEL,
                                  "schedule": {"a": 0.5}, "runs": 300,
                                  "horizons": [50.0, 500.0], "seed": 13,
                                  "eps": 0.1, "delta": 1.5})
    main(["anneal", "--config", str(cfg), "--out", str(tmp_path / "res")])
    doc = json.loads((tmp_path / "res" / "anneal.json").read_text())
    assert doc["c"] == -6.0  # cheapest non-global local minimum
    assert doc["horizon_constants"]["tau1"] > 0
    rows = read_rows(tmp_path / "res" / "anneal.csv")
    assert {r["horizon"] for r in rows} == {"50.0", "500.0"}
    for r in rows:
        assert 0.0 <= float(r["ci_low"]) <= float(r["exceedance"]) <= float(r["ci_high"]) <= 1.0


def test_rem_study(tmp_path):
    cfg = write_config(tmp_path, {"mode": "rem-study",
                                  "model": {"kind": "rem", "n": 10, "seed": 0},
                                  "draws": 30, "seed": 1000})
    main(["rem-study", "--config", str(cfg), "--out", str(tmp_path / "res")])
    doc = json.loads((tmp_path / "res" / "rem_study.json").read_text())
    assert doc["draws"] == 30
    assert 0.0 <= doc["frac_max_in_band"] <= 1.0
    rows = read_rows(tmp_path / "res" / "rem_study.csv")
    assert len(rows) == 30
    # per-draw minimum pairwise gap is positive almost surely
    assert all(float(r["min_pair_gap"]) > 0 for r in rows)


def test_rem_study_rejects_non_rem_model(tmp_path):
    cfg = write_config(tmp_path, {"mode": "rem-study", "model": TABLE_MODEL,
                                  "seed": 1})
    with pytest.raises(SystemExit, match="rem"):
        main(["rem-study", "--config", str(cfg), "--out", str(tmp_path / "res")])
