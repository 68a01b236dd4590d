import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from entropic_fourier.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def column(rows, name):
    return np.array([float(r[name]) for r in rows])


def run(tmp_path, *overrides, cmd="run", name="out", extra=()):
    out = tmp_path / name
    args = [cmd, "--out", str(out), "--override", f"cache_dir={tmp_path / 'cache'}"]
    for o in overrides:
        args += ["--override", o]
    return main(args + list(extra)), out


def test_t_end_zero_single_row(tmp_path):
    code, out = run(tmp_path, "N=16", "t_end=0")
    assert code == 0
    rows = read_csv(out / "diagnostics.csv")
    assert len(rows) == 1 and float(rows[0]["time"]) == 0.0
    assert "momentum_3" not in rows[0]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["steps"] == 0 and summary["errors"]["l1"] == pytest.approx(0.0, abs=1e-15)


def test_efm_run_outputs_and_monotone_entropy(tmp_path):
    code, out = run(tmp_path, "N=64", "t_end=1", "slice_times=[0.5]", "field_times=[1.0]")
    assert code == 0
    rows = read_csv(out / "diagnostics.csv")
    assert len(rows) == 101
    eta = column(rows, "entropy")
    assert np.all(np.diff(eta) <= 1e-10)
    assert column(rows, "positivity_error").max() <= 1e-12
    mass = column(rows, "mass")
    assert np.abs(mass - mass[0]).max() <= 1e-10 * mass[0]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["files"]["slices"] == ["slice_t0p5000.csv", "slice_t1p0000.csv"]
    assert summary["files"]["fields"] == ["field_t1p0000.csv"]
    sl = read_csv(out / "slice_t0p5000.csv")
    assert list(sl[0]) == ["v1", "F", "exact"] and len(sl) == 63
    fl = read_csv(out / "field_t1p0000.csv")
    assert len(fl) == 63 * 63
    for key in ("config", "grid", "kernel_cache", "runtime_s", "errors", "mass_drift_rel", "momentum_drift", "energy_drift"):
        assert key in summary
    assert summary["grid"]["N"] == 63 and summary["grid"]["N_input"] == 64


def test_fgm_loses_positivity(tmp_path):
    code, out = run(tmp_path, "method=fgm", "N=16", "t_end=1")
    assert code == 0
    assert column(read_csv(out / "diagnostics.csv"), "positivity_error").max() > 0


def test_3d_run_has_three_momenta(tmp_path):
    code, out = run(tmp_path, "problem=bkw3d", "N=8", "t_end=0.02")
    assert code == 0
    rows = read_csv(out / "diagnostics.csv")
    assert "momentum_3" in rows[0] and len(rows) == 3


def test_bitwise_determinism_and_echo(tmp_path):
    ov = ("problem=bigaussian2d", "N=16", "t_end=0.1", "method=fcm", "slice_times=[0.05]")
    _, a = run(tmp_path, *ov, name="a")
    _, b = run(tmp_path, *ov, name="b")
    for f in ("diagnostics.csv", "slice_t0p0500.csv", "slice_t0p1000.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    echo = json.loads((a / "summary.json").read_text())["config"]
    cfg = tmp_path / "echo.json"
    echo["out"] = str(tmp_path / "c")
    cfg.write_text(json.dumps(echo))
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "c" / "diagnostics.csv").read_bytes() == (a / "diagnostics.csv").read_bytes()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # the dt=5 run overflows on purpose
def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "problem=bkw3d", "d=2")[0] == 2
    assert run(tmp_path, "method=efm", "filter=none")[0] == 2
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    assert run(tmp_path, "T=5.0")[0] == 2  # violates the dealiasing bound
    code, out = run(tmp_path, "method=fcm", "N=9", "dt=5", "t_end=2000")
    assert code == 3 and (out / "failure_dump.npz").exists()
    assert "config error" in capsys.readouterr().err


def test_convergence_command(tmp_path):
    code, out = run(tmp_path, "N_list=[8,16]", "M_list=[2,8]", cmd="convergence")
    assert code == 0
    rows = read_csv(out / "convergence.csv")
    assert [r["M"] for r in rows] == ["2", "2", "8", "8"]
    assert rows[0]["rate_l1"] == "" and float(rows[1]["rate_l1"]) > 0
    data = json.loads((out / "convergence.json").read_text())
    assert data["t_end"] == 0.01 and set(data["table"]) == {"2", "8"}
    assert run(tmp_path, "problem=bigaussian2d", cmd="convergence")[0] == 2


def test_verify_pass_and_tamper(tmp_path):
    code, out = run(tmp_path, cmd="verify", extra=["--quick"])
    assert code == 0
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["passed"] and rep["n_failed"] == 0
    neg = [c for c in rep["checks"] if c["name"].startswith("G_unfiltered_negative")]
    assert neg and all(c["value"] < 0 for c in neg)
    code, out = run(tmp_path, "tamper=negate-mode", cmd="verify", name="t", extra=["--quick"])
    assert code == 4
    failed = [c["name"] for c in json.loads((out / "verify_report.json").read_text())["checks"] if not c["passed"]]
    assert any("symmetry" in n or "G_nonneg" in n for n in failed)


def test_kernel_cache_cycle(tmp_path, capsys):
    ov = ("N_list=[9,17]", "M=4")
    assert run(tmp_path, *ov, cmd="kernel")[0] == 0
    first = [json.loads(line)["status"] for line in capsys.readouterr().out.splitlines()]
    assert first == ["miss", "miss"]
    assert run(tmp_path, *ov, cmd="kernel")[0] == 0
    assert [json.loads(line)["status"] for line in capsys.readouterr().out.splitlines()] == ["hit", "hit"]
    victim = sorted((tmp_path / "cache").glob("*N9_*"))[0]
    victim.write_bytes(victim.read_bytes()[:-5])
    with pytest.warns(RuntimeWarning):
        assert run(tmp_path, *ov, cmd="kernel")[0] == 0
    statuses = [json.loads(line)["status"] for line in capsys.readouterr().out.splitlines()]
    assert statuses == ["rebuilt", "hit"]


def test_kernel_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("EFM_KERNEL_CACHE", str(tmp_path / "env"))
    assert main(["kernel", "--override", "N=5", "--override", "M=2"]) == 0
    assert list((tmp_path / "env").glob("*.efmk"))


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "entropic_fourier", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
