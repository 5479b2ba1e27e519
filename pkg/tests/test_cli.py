import json

import numpy as np
import pytest

from ppsg.basis import BINOMIAL, CoefficientVector
from ppsg.cli import main
from ppsg.degrees import build_total_order
from ppsg.signal import synthesize, write_signal

M01 = build_total_order([(0,), (1,)])


def _write_test_signal(path, values=(0.125, 0.25), N=(16,)):
    b = CoefficientVector(np.asarray(values), BINOMIAL, M01)
    s = synthesize(b, N)
    with open(path, "wb") as fh:
        write_signal(s, fh)
    return b


def test_crb_row_count(tmp_path, capsys):
    out = tmp_path / "crb.csv"
    code = main(
        [
            "crb",
            "--degrees",
            "[[0],[1]]",
            "--window",
            "[64]",
            "--snr-db-range",
            "0:30:5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("snr_db,crb_0,crb_1,reconstruction_bound")
    assert len(lines) == 8  # header + 7 grid points


def test_estimate_noise_free_roundtrip(tmp_path):
    sig = tmp_path / "sig.ppsg"
    out = tmp_path / "est.json"
    b = _write_test_signal(sig)
    code = main(
        [
            "estimate",
            "--input",
            str(sig),
            "--degrees",
            "[[0],[1]]",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    got = np.array(payload["binomial"]["values"])
    assert np.max(np.abs(got - b.values)) < 1e-9
    assert payload["monomial"] is None
    assert payload["binomial"]["degrees"] == [[0], [1]]


def test_estimate_basis_both(tmp_path):
    sig = tmp_path / "sig.ppsg"
    out = tmp_path / "est.json"
    _write_test_signal(sig)
    code = main(
        [
            "estimate",
            "--input",
            str(sig),
            "--degrees",
            "[[0],[1]]",
            "--basis",
            "both",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["monomial"]["basis"] == "monomial"
    assert payload["binomial"]["basis"] == "binomial"


def test_estimate_missing_input_is_validation_error(tmp_path):
    code = main(
        ["estimate", "--input", str(tmp_path / "nope.ppsg"), "--degrees", "[[0]]"]
    )
    assert code == 1


def test_unknown_flag_rejected_with_usage(capsys):
    code = main(["crb", "--degrees", "[[0]]", "--window", "[4]", "--whoops", "1"])
    assert code == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_bad_degrees_json(capsys):
    code = main(
        ["crb", "--degrees", "[[0],", "--window", "[4]", "--snr-db-range", "0:1:1"]
    )
    assert code == 1
    assert "--degrees" in capsys.readouterr().err


def test_weights_csv(tmp_path):
    out = tmp_path / "w.csv"
    code = main(
        ["weights", "--degree", "[1]", "--window", "[4]", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n_0,weight"
    weights = [float(line.split(",")[1]) for line in lines[1:]]
    assert weights == pytest.approx([0.3, 0.4, 0.3])


def test_simulate_writes_csv_and_sidecar(tmp_path):
    config = {
        "degrees": [[0], [1]],
        "window": [32],
        "snr_db_grid": [10.0, 20.0],
        "trials": 5,
        "parameter_mode": "zero",
        "averaging": "circular",
        "master_seed": 11,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "result.csv"
    code = main(["simulate", "--config", str(cfg_path), "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    sidecar = json.loads((tmp_path / "result.csv.meta.json").read_text())
    assert sidecar["config"]["master_seed"] == 11
    assert sidecar["config"]["degrees"] == [[0], [1]]
    assert "version" in sidecar


def test_simulate_missing_field_named(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"degrees": [[0]]}))
    code = main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "r.csv")])
    assert code == 1
    assert "window" in capsys.readouterr().err


def test_byte_identical_reruns(tmp_path):
    config = {
        "degrees": [[0], [1]],
        "window": [32],
        "snr_db_grid": [10.0],
        "trials": 8,
        "parameter_mode": "uniform_cell",
        "master_seed": 3,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out_a)]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_crb_deterministic_output(tmp_path):
    args = [
        "crb",
        "--degrees",
        "[[0],[1],[2]]",
        "--window",
        "[32]",
        "--snr-db-range",
        "0:20:10",
    ]
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "orthogonality: PASS" in out
    assert "inversion formula: PASS" in out
    assert "weight oracle: PASS" in out


def test_seed_env_override(tmp_path, monkeypatch):
    config = {
        "degrees": [[0]],
        "window": [8],
        "snr_db_grid": [10.0],
        "trials": 3,
        "parameter_mode": "uniform_cell",
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out_env = tmp_path / "env.csv"
    out_flag = tmp_path / "flag.csv"
    monkeypatch.setenv("PPSG_SEED", "99")
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out_env)]) == 0
    sidecar = json.loads((tmp_path / "env.csv.meta.json").read_text())
    assert sidecar["config"]["master_seed"] == 99
    # explicit flag wins over the environment
    assert (
        main(
            [
                "simulate",
                "--config",
                str(cfg_path),
                "--out",
                str(out_flag),
                "--seed",
                "7",
            ]
        )
        == 0
    )
    sidecar = json.loads((tmp_path / "flag.csv.meta.json").read_text())
    assert sidecar["config"]["master_seed"] == 7
