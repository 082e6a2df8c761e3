import json
import subprocess
import sys

import numpy as np
import pytest

from gaugewalk import ValidationError
from gaugewalk.cli import main
from gaugewalk.config import config_from_dict, load_config


def base_config_1d(**overrides):
    raw = {
        "dimension": 1,
        "extent_x": 16,
        "spacing": 0.25,
        "mass": 1.0,
        "charge": 1.0,
        "angles": "continuum-family",
        "potential": {"A0": "0", "A1": "sin(2*pi*x/4)"},
        "initial_state": {"type": "gaussian", "center": [2.0], "width": 0.4,
                          "momentum": [1.0]},
        "n_steps": 10,
        "seed": 3,
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, raw, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def test_missing_mass_names_field(tmp_path):
    raw = base_config_1d()
    del raw["mass"]
    with pytest.raises(ValidationError, match="'mass'"):
        config_from_dict(raw)


def test_bad_expression_names_field():
    raw = base_config_1d(potential={"A1": "sin("})
    with pytest.raises(ValidationError, match="potential.A1"):
        config_from_dict(raw)


def test_angles_validation():
    with pytest.raises(ValidationError, match="'angles'"):
        config_from_dict(base_config_1d(angles={"theta1": 0.5}))
    cfg = config_from_dict(base_config_1d(angles={"theta": 0.5}))
    assert cfg.params().theta == 0.5


def test_simulate_writes_deterministic_outputs(tmp_path):
    config = write_config(tmp_path, base_config_1d())
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["simulate", "--config", str(config), "--out", str(out1), "--quiet"]) == 0
    assert main(["simulate", "--config", str(config), "--out", str(out2), "--quiet"]) == 0
    for name in ("series.csv", "observables.csv", "state_final.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    series = (out1 / "series.csv").read_text().strip().splitlines()
    assert series[0] == "step,t,norm,total_probability"
    assert len(series) == 12  # header + 11 states
    for line in series[1:]:
        total = float(line.split(",")[3])
        assert abs(total - 1.0) <= 1e-12

    obs = (out1 / "observables.csv").read_text().strip().splitlines()
    assert obs[0] == "t,x,J0,Jx,residual"
    residuals = [abs(float(line.split(",")[4])) for line in obs[1:]]
    assert max(residuals) <= 1e-12


def test_simulate_2d_odd_extent_norm_constant(tmp_path):
    raw = {
        "dimension": 2,
        "extent_x": 9,
        "extent_y": 9,
        "spacing": 0.5,
        "mass": 0.5,
        "charge": 1.0,
        "angles": "continuum-family",
        "potential": {"A0": "0.2*cos(2*pi*x/4.5)", "A1": "0.1*sin(2*pi*y/4.5)", "A2": "0"},
        "initial_state": {"type": "gaussian", "center": [2.25, 2.25], "width": 0.7,
                          "momentum": [0.5, -0.5]},
        "n_steps": 8,
        "seed": 1,
    }
    config = write_config(tmp_path, raw)
    out = tmp_path / "out2d"
    assert main(["simulate", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    series = (out / "series.csv").read_text().strip().splitlines()[1:]
    norms = [float(line.split(",")[2]) for line in series]
    assert max(abs(n - 1.0) for n in norms) <= 1e-12
    obs = (out / "observables.csv").read_text().strip().splitlines()
    assert obs[0] == "t,x,y,J0,Jx,Jy,residual"
    residuals = [abs(float(line.split(",")[6])) for line in obs[1:]]
    assert max(residuals) <= 1e-12


def test_check_passes_default_and_fails_corrupted(tmp_path):
    config = write_config(tmp_path, base_config_1d(n_steps=40))
    out = tmp_path / "chk"
    assert main(["check", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is True
    names = [c["name"] for c in report["checks"]]
    assert names == [
        "unitarity", "gauge-equivariance", "tensor-invariance", "continuity", "m-identities",
    ]

    corrupted = write_config(
        tmp_path, base_config_1d(n_steps=40, corrupt_gauge_half_factor=True), "bad.json"
    )
    out_bad = tmp_path / "chk_bad"
    assert main(["check", "--config", str(corrupted), "--out", str(out_bad), "--quiet"]) == 2
    report = json.loads((out_bad / "report.json").read_text())
    failed = {c["name"]: c for c in report["checks"]}["gauge-equivariance"]
    assert failed["status"] == "fail"
    assert failed["max_deviation"] >= 1e-2


def test_check_zero_steps_reports_insufficient(tmp_path):
    config = write_config(tmp_path, base_config_1d(n_steps=0))
    out = tmp_path / "chk0"
    assert main(["check", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "report.json").read_text())
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["unitarity"]["status"] == "pass"
    assert by_name["continuity"]["status"] == "skipped"
    assert by_name["continuity"]["note"] == "insufficient steps"


def test_converge_prints_slope(tmp_path, capsys):
    raw = base_config_1d(
        extent_x=64,
        convergence={"eps_list": [0.0625, 0.03125], "final_time": 0.5, "domain": 4.0,
                     "packet_center": [2.0], "packet_width": 0.35,
                     "packet_momentum": [3.141592653589793]},
    )
    config = write_config(tmp_path, raw)
    out = tmp_path / "conv"
    assert main(["converge", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    captured = capsys.readouterr().out
    assert captured.startswith("slope ")
    slope_text = captured.split()[1]
    assert len(slope_text.split(".")[1]) == 4  # four decimals
    rows = (out / "convergence.csv").read_text().strip().splitlines()
    assert rows[0] == "epsilon,l2_error"
    errs = [float(r.split(",")[1]) for r in rows[1:]]
    assert errs[0] > errs[1]


def test_validation_error_exit_code(tmp_path):
    raw = base_config_1d()
    del raw["charge"]
    config = write_config(tmp_path, raw)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "x")]) == 1
    missing = tmp_path / "nope.json"
    assert main(["simulate", "--config", str(missing), "--out", str(tmp_path / "y")]) == 1


def test_help_runs_for_all_subcommands():
    for sub in ("simulate", "check", "converge"):
        proc = subprocess.run(
            [sys.executable, "-m", "gaugewalk", sub, "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "--config" in proc.stdout


def test_tabulated_potential_roundtrip(tmp_path):
    geom_steps = 2
    spacing = 0.5
    lines = ["t,x,y,A0,A1,A2"]
    for s in range(1, geom_steps + 1):
        t = s * spacing
        for p in range(4):
            lines.append(f"{t},{p * spacing},0.0,1.5,0.25,0")
    (tmp_path / "table.csv").write_text("\n".join(lines) + "\n")
    raw = base_config_1d(
        extent_x=4,
        spacing=spacing,
        n_steps=geom_steps,
        potential={"tabulated": "table.csv"},
    )
    config = load_config(write_config(tmp_path, raw))
    from gaugewalk import sample_phases

    phases = sample_phases(config.potential_spec(), config.geom(), geom_steps)
    np.testing.assert_allclose(phases.alpha, spacing * 1.0 * 1.5)
    np.testing.assert_allclose(phases.xi1, spacing * 1.0 * 0.25)


def test_tabulated_potential_missing_sample(tmp_path):
    (tmp_path / "table.csv").write_text("t,x,y,A0,A1,A2\n0.5,0.0,0.0,1,0,0\n")
    raw = base_config_1d(extent_x=4, spacing=0.5, n_steps=1,
                         potential={"tabulated": "table.csv"})
    config = load_config(write_config(tmp_path, raw))
    from gaugewalk import SamplingError, sample_phases

    with pytest.raises(SamplingError, match=r"site \(1,\)"):
        sample_phases(config.potential_spec(), config.geom(), 1)
