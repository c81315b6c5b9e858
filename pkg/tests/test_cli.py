import json
import math
from pathlib import Path

import pytest


from hqrb.cli import main
from hqrb.pulses import DeviceParams, synth_rz


@pytest.fixture()
def config_path(tmp_path):
    cfg = {
        "device": {"j_max_ueV": 1.0, "e_z_ueV": 0.25, "t_min_ps": 100},
        "noise": {"model": "qsg", "sigma_t_ps": 50.0, "sigma_j_neV": 20.0},
        "rb": {"n_grid": [1, 5, 10, 20], "n_seq": 6, "n_rep": 2, "interleave": None, "seed": 99},
        "sweep": {"sigma_t_ps": [10.0], "sigma_j_neV": [10.0, 20.0]},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_synth_prints_rz_schedule(capsys):
    assert main(["synth", "--gate", "rz", "--theta", str(math.pi)]) == 0
    out = capsys.readouterr().out
    sched = synth_rz(math.pi, DeviceParams())
    for step in sched.steps:
        assert f"{step.duration_ns:.6f}" in out
    assert f"{sched.duration_ns:.6f}" in out


def test_synth_rejects_unknown_gate(capsys):
    assert main(["synth", "--gate", "t"]) == 2
    assert "unknown gate" in capsys.readouterr().err


def test_run_writes_decay_and_fit_and_is_deterministic(tmp_path, config_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(config_path), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(config_path), "--out", str(out2), "--threads", "2"]) == 0
    decay1 = (out1 / "decay.csv").read_bytes()
    decay2 = (out2 / "decay.csv").read_bytes()
    assert decay1 == decay2
    fit = json.loads((out1 / "fit.json").read_text())
    for key in ("f_a", "f_b", "p", "se_p", "epc", "se_epc", "converged"):
        assert key in fit
    assert "config" in fit["_provenance"]


def test_fit_round_trips_run_output(tmp_path, config_path, capsys):
    out = tmp_path / "run"
    main(["run", "--config", str(config_path), "--out", str(out)])
    refit_path = tmp_path / "refit.json"
    assert main(["fit", str(out / "decay.csv"), "--out", str(refit_path)]) == 0
    original = json.loads((out / "fit.json").read_text())
    refit = json.loads(refit_path.read_text())
    # the CSV stores 9 significant digits, so agreement holds to that level
    for key in ("f_a", "f_b", "p", "se_p", "epc"):
        assert refit[key] == pytest.approx(original[key], rel=1e-6, abs=1e-9)


def test_fit_recovers_bundled_synthetic_fixture(capsys):
    # fixture generated from decay_model(n, 0.5, 0.5, 0.99), see tests/data
    path = Path(__file__).parent / "data" / "synthetic_decay.csv"
    assert main(["fit", str(path)]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["p"] == pytest.approx(0.99, abs=1e-6)
    assert fit["f_a"] == pytest.approx(0.5, abs=1e-6)


def test_fit_with_reference_adds_irb_fields(tmp_path, config_path, capsys):
    out = tmp_path / "rb"
    main(["run", "--config", str(config_path), "--out", str(out)])
    irb_cfg = json.loads(config_path.read_text())
    irb_cfg["rb"]["interleave"] = "x"
    irb_path = tmp_path / "irb.json"
    irb_path.write_text(json.dumps(irb_cfg))
    out_irb = tmp_path / "irb"
    main(["run", "--config", str(irb_path), "--out", str(out_irb)])
    assert (
        main(
            [
                "fit",
                str(out_irb / "decay.csv"),
                "--reference",
                str(out / "fit.json"),
                "--out",
                str(tmp_path / "gate.json"),
            ]
        )
        == 0
    )
    payload = json.loads((tmp_path / "gate.json").read_text())
    assert {"p_i", "eps", "bound_e", "interval"} <= set(payload)
    lo, hi = payload["interval"]
    assert 0.0 <= lo <= payload["eps"] <= hi


def test_seed_override_changes_results(tmp_path, config_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(config_path), "--out", str(out_a)]) == 0
    assert main(["run", "--config", str(config_path), "--out", str(out_b), "--seed", "123"]) == 0
    a = (out_a / "decay.csv").read_text()
    b = (out_b / "decay.csv").read_text()
    assert "seed=99" in a and "seed=123" in b
    assert a.splitlines()[2:] != b.splitlines()[2:]


def test_malformed_config_names_offending_key(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"noise": {"sigma_t_ps": -3}}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "noise.sigma_t_ps" in capsys.readouterr().err


def test_unknown_config_key_rejected(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rb": {"n_grd": [1, 2, 3, 4]}}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "rb.n_grd" in capsys.readouterr().err


def test_sweep_writes_long_format_table(tmp_path, config_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_path), "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("# config=")
    assert lines[1] == "model,sigma_t_ps,sigma_j_neV,p,se_p,epc,se_epc,f_a,f_b,converged,status"
    assert len(lines) == 4  # 1x2 grid


def test_noise_check_writes_trace_and_periodogram(tmp_path, capsys):
    cfg = {
        "noise": {"model": "one_over_f", "sigma_t_ps": 10.0, "sigma_j_neV": 10.0},
        "rb": {"seed": 5},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "nc"
    assert main(["noise-check", "--config", str(path), "--out", str(out), "--samples", "100"]) == 0
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[1] == "t_ns,value_neV"
    assert len(trace) == 102
    periodogram = (out / "periodogram.csv").read_text().splitlines()
    assert periodogram[1] == "f_hz,psd"
    f0 = float(periodogram[2].split(",")[0])
    assert f0 == pytest.approx(50e3, rel=1e-6)


def test_noise_check_requires_one_over_f(tmp_path, config_path, capsys):
    assert main(["noise-check", "--config", str(config_path), "--out", str(tmp_path / "o")]) == 2


def test_calibrate_ez_writes_schema_valid_report(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({}))
    out = tmp_path / "calibration.json"
    assert (
        main(
            [
                "calibrate-ez",
                "--config",
                str(cfg_path),
                "--out",
                str(out),
                "--max-iterations",
                "30",
            ]
        )
        == 0
    )
    report = json.loads(out.read_text())
    assert report["model"] == "two-level-hamiltonian"
    assert isinstance(report["certified"], bool)
    assert "e_z_uev" in report["gate_time_fit"]
    assert all("residual_ns" in row for row in report["gate_time_fit"]["rows"])


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
