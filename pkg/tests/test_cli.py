import json
import os
import subprocess
import sys

import numpy as np
import pytest

from nmbloch import runner
from nmbloch.__main__ import main
from nmbloch.config import from_dict, load
from nmbloch.cp import CPReport
from nmbloch.exceptions import ConfigError, IntegrationError

SMALL = """
name = "small"
mode = "full"
outputs = ["rates", "bloch", "cp", "markov_summary"]

[spectrum]
kind = "lorentzian"
alpha_sq = 0.01
p = 0.01
s = 1.0

[system]
omega_A = 1.0
Omega = 0.01
Delta = 0.0

[initial_state]
z = 1.0

[horizon]
T_max = 5.0
samples = 41
"""


@pytest.fixture
def cfg_file(tmp_path):
    def write(text=SMALL, name="scenario.toml"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return write


@pytest.fixture(autouse=True)
def no_env(monkeypatch):
    monkeypatch.delenv(runner.OUTPUT_ENV, raising=False)


def test_validate_ok(cfg_file, capsys):
    assert main(["validate", str(cfg_file())]) == 0
    assert "ok (1 cell(s))" in capsys.readouterr().out


@pytest.mark.parametrize("old, new, field", [
    ('name = "small"', 'name = "small"\nbogus = 1', "bogus"),
    ("alpha_sq = 0.01", "alpha_sq = -1.0", "spectrum.alpha_sq"),
    ('mode = "full"', 'mode = "sideways"', "mode"),
    ("samples = 41", "samples = 1", "horizon.samples"),
])
def test_validate_reports_field(cfg_file, capsys, old, new, field):
    assert main(["validate", str(cfg_file(SMALL.replace(old, new)))]) == 1
    assert field in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.toml")]) == 1


def test_run_writes_outputs(cfg_file, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(cfg_file()), "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    for name in ("rates.csv", "bloch.csv", "cp.csv", "rates.svg", "bloch.svg", "cp.svg", "manifest.json"):
        assert name in man["files"] and (out / name).exists()
    cell = man["cells"][0]
    assert cell["cp_verdict"] == "CP_holds" and cell["regime"] == "nonsecular"
    assert set(cell["markov_summary"]) >= {"tau_R", "tau_D", "z_inf", "steady_state_bare"}
    head = (out / "bloch.csv").read_text().splitlines()[0].split(",")
    assert head[:5] == ["t", "T_dimensionless", "Rx", "Ry", "Rz"]
    cp_head = (out / "cp.csv").read_text().splitlines()[0]
    assert cp_head == "t,m1,m2,m3,m4,eps3,eps4,hall_sufficient,verdict_flag"


def test_outputs_are_deterministic(cfg_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    path = cfg_file()
    assert main(["run", str(path), "--out", str(a)]) == 0
    assert main(["run", str(path), "--out", str(b)]) == 0
    for name in ("rates.csv", "bloch.csv", "cp.csv", "rates.svg", "bloch.svg", "cp.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_output_precedence(cfg_file, tmp_path, monkeypatch):
    cfg = load(cfg_file(SMALL.replace('mode = "full"', f'mode = "full"\noutput_dir = "{tmp_path / "cfg"}"')))
    assert runner.resolve_output_dir(cfg) == tmp_path / "cfg"
    monkeypatch.setenv(runner.OUTPUT_ENV, str(tmp_path / "env"))
    assert runner.resolve_output_dir(cfg) == tmp_path / "env"
    assert runner.resolve_output_dir(cfg, tmp_path / "flag") == tmp_path / "flag"


def test_env_override_runs(cfg_file, tmp_path, monkeypatch):
    monkeypatch.setenv(runner.OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["run", str(cfg_file())]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_empty_outputs(cfg_file, tmp_path):
    out = tmp_path / "empty"
    text = SMALL.replace('outputs = ["rates", "bloch", "cp", "markov_summary"]', "outputs = []")
    assert main(["run", str(cfg_file(text)), "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["files"] == ["manifest.json"]
    assert sorted(p.name for p in out.iterdir()) == ["manifest.json"]


SWEEP = """
name = "ohmic-sweep"
outputs = ["rates", "markov_summary"]

[spectrum]
kind = "ohmic"
alpha = 0.01
s = 10.0
p = 1.0

[system]
omega_A = 1.0
Delta = 0.0

[horizon]
T_max = 10.0
samples = 21

[sweep]
"spectrum.p" = [0.01, 5.0, 6.0]
"""


def test_sweep_parallel_matches_serial(cfg_file, tmp_path):
    cfg = load(cfg_file(SWEEP))
    serial = runner.run(cfg, tmp_path / "serial", workers=1)
    parallel = runner.run(cfg, tmp_path / "parallel", workers=3)
    assert serial.files == parallel.files
    for name in serial.files:
        if name.endswith(".csv") or name.endswith(".svg"):
            assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()
    assert serial.warnings == parallel.warnings
    assert serial.files[0].startswith("cell00_")


def test_sweep_warnings_deduplicated(cfg_file, tmp_path):
    man = runner.run(load(cfg_file(SWEEP)), tmp_path / "w")
    validity = [w for w in man.warnings if "ModelValidityWarning" in w]
    assert validity and len(validity) == len(set(validity))
    assert sum("p << s" in w or "p=" in w for w in validity) >= 1


def test_bare_initial_state(cfg_file, tmp_path):
    text = SMALL.replace("[initial_state]\nz = 1.0", '[initial_state]\nx = 1.0\nz = 0.0\nbasis = "bare"')
    cfg = load(cfg_file(text))
    cell = cfg.cells()[0]
    # resonant drive: the dressed axes are the bare ones rotated by theta = pi/2
    assert np.linalg.norm(cell.r0) == pytest.approx(1.0)
    man = runner.run(cfg, tmp_path / "bare")
    np.testing.assert_allclose(man.cells[0]["r0_dressed"], cell.r0)
    bloch = np.genfromtxt(tmp_path / "bare" / "bloch.csv", delimiter=",", names=True)
    np.testing.assert_allclose([bloch["Rx_bare"][0], bloch["Ry_bare"][0], bloch["Rz_bare"][0]],
                               [1, 0, 0], atol=1e-14)


def test_strict_cp_exit_code(cfg_file, tmp_path, monkeypatch, capsys):
    real = runner.nonsecular_cp_check

    def violating(traj):
        rep = real(traj)
        return CPReport(**{**rep.__dict__, "violated_at": float(traj.grid[3]),
                           "equivalent_at": float(traj.grid[3])})

    monkeypatch.setattr(runner, "nonsecular_cp_check", violating)
    path = cfg_file(SMALL.replace('mode = "full"', 'mode = "full"\nstrict_cp = true'))
    assert main(["run", str(path), "--out", str(tmp_path / "s")]) == 3
    assert "CP violation" in capsys.readouterr().err
    relaxed = cfg_file(SMALL, "relaxed.toml")
    assert main(["run", str(relaxed), "--out", str(tmp_path / "r")]) == 0


def test_numerical_failure_exit_code(cfg_file, tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise IntegrationError("step size underflow")

    monkeypatch.setattr(runner, "integrate_bloch", boom)
    assert main(["run", str(cfg_file()), "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "cell 0" in err and "IntegrationError" in err


def test_unknown_preset():
    with pytest.raises(SystemExit):
        main(["preset", "fig9"])


def test_preset_subprocess(tmp_path):
    env = {**os.environ}
    env.pop(runner.OUTPUT_ENV, None)
    res = subprocess.run([sys.executable, "-m", "nmbloch", "preset", "fig2", "--out", str(tmp_path / "f2")],
                         capture_output=True, text=True, env=env, timeout=300)
    assert res.returncode == 0, res.stderr
    man = json.loads((tmp_path / "f2" / "manifest.json").read_text())
    assert len(man["cells"]) == 3 and "rates.svg" in man["files"]
    assert any("ModelValidityWarning" in w for w in man["warnings"])
    assert man["assumptions"]


def test_from_dict_rejects_bad_sweep():
    with pytest.raises(ConfigError):
        from_dict({"spectrum": {"kind": "lorentzian", "alpha_sq": 0.01, "p": 1.0, "s": 0.0},
                   "system": {"omega_A": 1.0, "Omega": 0.01},
                   "sweep": {"spectrum.nope": [1.0]}})
