import json
from pathlib import Path

import numpy as np
import pytest

from adiabatic_lab.cli import (
    DEFAULTS,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    execute,
    load_config,
    main,
    resolve,
    validate,
)
from adiabatic_lab.errors import ValidationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def errors(cfg):
    return [f.message for f in validate(cfg) if f.level == "error"]


def warnings_(cfg):
    return [f.message for f in validate(cfg) if f.level == "warning"]


@pytest.mark.parametrize("exp", sorted(DEFAULTS))
def test_defaults_are_valid(exp):
    assert validate({"experiment": exp}) == []


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_valid(path):
    assert validate(load_config(path)) == []


def test_unknown_key_suggestion():
    msgs = errors({"experiment": "leading", "lamda": 5.0})
    assert any("'lamda'" in m and "did you mean 'lambda'" in m for m in msgs)


def test_nested_unknown_keys():
    assert any("'stpes'" in m and "'steps'" in m for m in errors({"experiment": "leading", "grid": {"stpes": 100}}))
    assert any("'tl'" in m for m in errors({"experiment": "leading", "options": {"tl": 1e-10}}))


def test_undersampling_warning():
    cfg = {"experiment": "leading", "lambda": 1e4, "grid": {"t0": -2.0, "t1": 2.0, "steps": 16}}
    assert errors(cfg) == []
    assert any("undersampled" in m for m in warnings_(cfg))


def test_repeated_lambdas_rejected():
    msgs = errors({"experiment": "ip-check", "lambdas": [100, 100]})
    assert any("strictly increasing" in m for m in msgs)


@pytest.mark.parametrize(
    "cfg",
    [
        {"experiment": "sweep", "lambdas": [10, 20, 30]},
        {"experiment": "leading", "lambda": -1},
        {"experiment": "leading", "grid": {"steps": 8}},
        {"experiment": "leading", "model": {"kind": "gapped-lz", "params": {"v": "fast"}}},
        {"experiment": "leading", "model": {"kind": "nope"}},
        {"experiment": "berry", "model": {"kind": "gapped-lz"}},
        {"experiment": "berry", "grid": {"t0": 0.0, "steps": 100}},
        {"experiment": "wk-scan", "options": {"times": [0.01, 0.02, 0.03, 0.04]}},
        {"experiment": "wk-beta", "model": {"kind": "grid", "params": {"n": 100}}},
        {"experiment": "leading", "options": {"tol": 1e-3}},
        {"experiment": "leading", "seed": 1.5},
        {"experiment": "oscillatory-probe", "options": {"profile": "wiggly"}},
        {"experiment": "nothing"},
    ],
)
def test_invalid_configs(cfg):
    assert errors(cfg)


def test_resolve_echoes_every_default():
    cfg = resolve({"experiment": "berry", "lambda": 50.0})
    assert cfg["lambda"] == 50.0
    assert cfg["seed"] == 0
    assert cfg["model"]["params"] == {"R": 1.0, "T": 2 * np.pi, "X0": 0.0, "Z0": 0.0}
    assert set(cfg["options"]) == set(DEFAULTS["berry"]["options"])


def test_berry_config_run(tmp_path):
    assert main(["berry", "--config", str(CONFIGS / "berry.yaml"), "--output", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "berry_summary.json").read_text())
    series = (tmp_path / "berry_series.csv").read_text().splitlines()
    assert summary["results"]["geometric_phase"] == pytest.approx(np.pi, abs=1e-4)
    assert summary["results"]["gauge_invariance_deviation"] < 1e-10
    assert summary["results"]["oracle_transported_overlap_re"] < 0
    assert series[0].split(",")[:3] == ["t", "E_0", "E_1"]
    assert len(series) == 2002
    # summary echoes the resolved configuration, including the seed
    assert summary["config"]["seed"] == 7
    assert summary["config"]["options"]["gauge_trials"] == 3


def test_byte_identical_reruns(tmp_path):
    for d in ("a", "b"):
        assert main(["berry", "--config", str(CONFIGS / "berry.yaml"), "--output", str(tmp_path / d)]) == EXIT_OK
    for name in ("berry_summary.json", "berry_series.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_only_gauge_check(tmp_path):
    cfg = {"experiment": "berry", "lambda": 20.0, "grid": {"steps": 200}, "options": {"oracle": False}}
    a = execute({**cfg, "seed": 1}, tmp_path / "a")["results"]
    b = execute({**cfg, "seed": 2}, tmp_path / "b")["results"]
    assert a["geometric_phase"] == b["geometric_phase"]
    assert a["gauge_invariance_deviation"] < 1e-10 and b["gauge_invariance_deviation"] < 1e-10


def test_series_precision(tmp_path):
    execute({"experiment": "wk-beta"}, tmp_path)
    rows = (tmp_path / "wk_beta_series.csv").read_text().splitlines()
    assert rows[0] == "beta,residual,quartic_bound"
    beta = [float(r.split(",")[0]) for r in rows[1:]]
    assert beta == [0.025, 0.05, 0.1]


def test_validate_only_and_exit_codes(tmp_path, capsys):
    assert main(["leading", "--validate-only"]) == EXIT_OK
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: leading\nlamda: 5\n")
    assert main(["leading", "--config", str(bad)]) == EXIT_VALIDATION
    assert "did you mean 'lambda'" in capsys.readouterr().err
    other = tmp_path / "other.yaml"
    other.write_text("experiment: berry\n")
    assert main(["leading", "--config", str(other)]) == EXIT_VALIDATION


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "coarse.yaml"
    cfg.write_text("experiment: leading\nlambda: 5.0\ngrid: {t0: -2.0, t1: 2.0, steps: 16}\n")
    assert main(["leading", "--config", str(cfg), "--output", str(tmp_path / "out")]) == EXIT_NUMERICAL
    assert "StepSizeError" in capsys.readouterr().err


def test_execute_rejects_invalid(tmp_path):
    with pytest.raises(ValidationError):
        execute({"experiment": "leading", "lamda": 1}, tmp_path)


def test_json_config_accepted(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"experiment": "wk-beta", "options": {"betas": [0.08, 0.04, 0.02]}}))
    assert main(["wk-beta", "--config", str(cfg), "--output", str(tmp_path / "o")]) == EXIT_OK
