import json

import numpy as np
import pytest
import yaml

from inmafield import ConfigurationError, InmaModel, Poisson, simulate_grid
from inmafield.cli import main
from inmafield.io import RunConfig, dump_config, load_config, load_grid, save_grid

STANDARD = {
    "order": [1, 1],
    "beta": [[0.5, 0.5], [0.5, 0.5]],
    "innovation": {"family": "poisson", "mu": 2.0},
    "crossdep": "independence",
}


def write_config(tmp_path, model=STANDARD, **sections):
    doc = {"model": model, "run": {"n1": 40, "n2": 30, "seed": 7, "out": str(tmp_path / "out")}}
    doc.update(sections)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


def test_simulate_writes_csv_and_sidecar(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", str(cfg)]) == 0
    lines = (tmp_path / "out" / "grid.csv").read_text().splitlines()
    assert len(lines) == 40 and all(len(line.split(",")) == 30 for line in lines)
    meta = json.loads((tmp_path / "out" / "grid.json").read_text())
    assert meta["seed"] == 7 and meta["n1"] == 40 and meta["mode"] == "unilateral"
    assert meta["model_hash"] == InmaModel.from_dict(STANDARD).hash
    out = capsys.readouterr().out
    assert "mean" in out and "variance" in out


def test_simulate_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "4"])
    assert (tmp_path / "a" / "grid.csv").read_bytes() == (tmp_path / "b" / "grid.csv").read_bytes()


def test_overrides(tmp_path):
    cfg = write_config(tmp_path)
    main(["simulate", "--config", str(cfg), "--n1", "3", "--n2", "4", "--seed", "99"])
    g = load_grid(tmp_path / "out" / "grid.csv")
    assert g.shape == (3, 4) and g.seed == 99


def test_bad_beta_is_named(tmp_path, capsys):
    model = dict(STANDARD, beta=[[0.5, 1.5], [0.5, 0.5]])
    assert main(["simulate", "--config", str(write_config(tmp_path, model))]) != 0
    err = capsys.readouterr().err
    assert "beta[0][1]" in err and "1.5" in err


@pytest.mark.parametrize("model", [
    dict(STANDARD, beta=[[0.5, 0.5]]),
    dict(STANDARD, innovation={"family": "zipf"}),
    dict(STANDARD, crossdep="spread"),
])
def test_config_errors_exit_nonzero(tmp_path, capsys, model):
    assert main(["simulate", "--config", str(write_config(tmp_path, model))]) == 2
    assert capsys.readouterr().err.startswith("inmafield: error:")


def test_unknown_keys_and_missing_file(tmp_path, capsys):
    cfg = write_config(tmp_path, run={"n1": 5, "n2": 5, "sed": 1})
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_analyze_poisson(tmp_path):
    cfg = write_config(tmp_path, analysis={"lag_box": [3, 2]})
    assert main(["analyze", "--config", str(cfg)]) == 0
    doc = json.loads((tmp_path / "out" / "analysis.json").read_text())
    assert doc["moments"]["mean"] == 4.0
    assert doc["poisson"]["jump_pmf"] and doc["poisson"]["order_probs"]
    for row in doc["acf"]:
        if not row["within_order"]:
            assert row["acf"] == 0.0 and row["acvf"] == 0.0
    assert len(doc["acf"]) == 4 * 3


def test_analyze_negbin_notes_missing_sections(tmp_path):
    model = dict(STANDARD, innovation={"family": "negbin", "n": 2, "pi": 0.5})
    assert main(["analyze", "--config", str(write_config(tmp_path, model))]) == 0
    doc = json.loads((tmp_path / "out" / "analysis.json").read_text())
    assert "poisson" not in doc
    assert "absent" in doc["notes"][0]


def test_analyze_zero_variance_model(tmp_path):
    model = dict(STANDARD, innovation={"family": "deterministic", "c": 0})
    assert main(["analyze", "--config", str(write_config(tmp_path, model))]) == 0
    doc = json.loads((tmp_path / "out" / "analysis.json").read_text())
    assert doc["acf"][0]["acf"] is None


def test_verify_exit_codes(tmp_path):
    cfg = write_config(tmp_path, run={"n1": 200, "n2": 200, "seed": 3, "out": str(tmp_path / "out")})
    assert main(["verify", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["pass"] is True
    strict = write_config(tmp_path, run={"n1": 50, "n2": 50, "seed": 3, "out": str(tmp_path / "out")},
                          analysis={"z_threshold": 0.0001})
    assert main(["verify", "--config", str(strict)]) == 1


def test_verify_detects_tampered_model(tmp_path, capsys):
    cfg = write_config(tmp_path)
    main(["simulate", "--config", str(cfg)])
    grid = str(tmp_path / "out" / "grid.csv")
    tampered = write_config(tmp_path, dict(STANDARD, beta=[[0.5, 0.5], [0.5, 0.4]]))
    assert main(["verify", "--config", str(tampered), "--grid", grid]) != 0
    assert "generated by model" in capsys.readouterr().err


def test_oracle_command(tmp_path, capsys):
    model = {"order": [1, 0], "beta": [[0.5], [0.5]], "innovation": {"family": "deterministic", "c": 1}}
    assert main(["oracle", "--config", str(write_config(tmp_path, model))]) == 0
    doc = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert doc["marginal"]["pmf"] == pytest.approx([0.25, 0.5, 0.25])
    assert doc["marginal"]["error_bound"] == 0.0
    big = write_config(tmp_path, oracle={"state_limit": 10})
    assert main(["oracle", "--config", str(big)]) == 3
    assert "state_limit" in capsys.readouterr().err


def test_config_round_trip(tmp_path):
    cfg = load_config(write_config(tmp_path, analysis={"lag_box": [2, 2], "z_threshold": 3.5},
                                   oracle={"tail": "1e-10"}))
    again = RunConfig.from_dict(yaml.safe_load(dump_config(cfg)))
    assert again.model.hash == cfg.model.hash
    assert again.to_dict() == cfg.to_dict()
    assert cfg.oracle["tail"] == 1e-10


def test_config_type_errors():
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"model": STANDARD, "run": {"n1": 2.5}})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"model": STANDARD, "extra": {}})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"run": {}})


def test_csv_round_trip_is_exact(tmp_path):
    g = simulate_grid(InmaModel(np.full((2, 2), 0.5), Poisson(30.0)), 17, 23, 5)
    save_grid(g, tmp_path / "g.csv")
    h = load_grid(tmp_path / "g.csv")
    assert np.array_equal(g.values, h.values)
    assert (h.seed, h.model_hash, h.mode) == (g.seed, g.model_hash, g.mode)


def test_csv_without_sidecar(tmp_path):
    (tmp_path / "g.csv").write_text("1,2,3\n4,5,6\n")
    g = load_grid(tmp_path / "g.csv")
    assert g.values.tolist() == [[1, 2, 3], [4, 5, 6]] and g.model_hash is None
    (tmp_path / "bad.csv").write_text("1,2\n3\n")
    with pytest.raises(ConfigurationError):
        load_grid(tmp_path / "bad.csv")


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    cfg = write_config(tmp_path)
    res = subprocess.run([sys.executable, "-m", "inmafield", "analyze", "--config", str(cfg)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "out" / "analysis.json").exists()
