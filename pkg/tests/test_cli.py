import filecmp
import json
import shutil
import subprocess

import numpy as np
import pytest

from inertial_phasefield.cli import main

from conftest import small_config


def write_config(tmp_path, cfg=None, name="cfg.json", **extra):
    d = (cfg or small_config()).to_dict()
    d.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return path


class TestRun:
    def test_emits_artifacts(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", str(write_config(tmp_path)), "-o", str(out)]) == 0
        names = {p.name for p in out.iterdir()}
        assert {"trajectory.csv", "mean_laws.csv", "energy_ledger.csv", "weak_residual.csv",
                "report.json", "manifest.json"} <= names
        man = json.loads((out / "manifest.json").read_text())
        assert man["command"] == "run" and man["seeds"]["phi0"] == 1
        assert "wrote artifacts" in capsys.readouterr().out

    def test_rerun_from_manifest_is_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(write_config(tmp_path)), "-o", str(a)]) == 0
        assert main(["run", str(a / "manifest.json"), "-o", str(b)]) == 0
        files = sorted(p.name for p in a.iterdir())
        match, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
        assert not mismatch and not errors

    def test_csv_reload_is_exact(self, tmp_path):
        from inertial_phasefield.integrate import integrate

        cfg = small_config()
        out = tmp_path / "out"
        main(["run", str(write_config(tmp_path, cfg)), "-o", str(out)])
        rows = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
        prob = cfg.problem()
        tr = integrate(prob.system(cfg.build_params()), prob.T, prob.dt)
        n = prob.grid.n_cells
        assert np.array_equal(rows[:, 0], tr.t)
        assert np.array_equal(rows[:, 1 + n:1 + 2 * n], tr.phi)

    def test_limit_run(self, tmp_path):
        cfg = small_config(tau=0.0, lam=0.25, eps=0.25)
        out = tmp_path / "out"
        assert main(["run", str(write_config(tmp_path, cfg)), "-o", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["solver"] == "limit"
        assert report["mean_conservation"]["sup_drift"] < 1e-12
        assert not (out / "energy_ledger.csv").exists()

    def test_numerical_failure(self, tmp_path, capsys):
        # default K = 100 puts the RK4 guard at dt = 0.025
        cfg = small_config(T=0.1, dt=0.05)
        d = cfg.to_dict()
        d["scheme"]["name"] = "rk4"
        path = tmp_path / "rk4.json"
        path.write_text(json.dumps(d))
        out = tmp_path / "out"
        assert main(["run", str(path), "-o", str(out)]) == 3
        failure = json.loads((out / "failure.json").read_text())
        assert failure["samples"] == 1
        assert (out / "trajectory.csv").exists()
        assert "integration failed" in capsys.readouterr().err

    def test_output_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("IPF_OUTPUT_DIR", str(tmp_path / "env"))
        assert main(["run", str(write_config(tmp_path))]) == 0
        assert (tmp_path / "env" / "manifest.json").exists()


class TestConfigErrors:
    def test_invalid_lambda(self, tmp_path, capsys):
        d = small_config().to_dict()
        d["params"]["lambda"] = 0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        assert main(["run", str(path)]) == 2
        assert "params.lambda" in capsys.readouterr().err

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\n  \"seed\": ,\n}")
        assert main(["run", str(path)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_sweep_without_section(self, tmp_path):
        assert main(["sweep", str(write_config(tmp_path))]) == 2

    def test_bad_workers(self, tmp_path, monkeypatch):
        monkeypatch.setenv("IPF_WORKERS", "many")
        assert main(["verify", "--no-suites"]) == 2


class TestSweepAndVerify:
    def test_sweep(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config(n_cells=16),
                            sweep={"param": "eta", "values": [0.5, 0.25, 0.125], "norm": "C0H"})
        out = tmp_path / "out"
        assert main(["sweep", str(path), "-o", str(out)]) == 0
        assert (out / "sweep_distances.csv").exists()
        assert "eta distances" in capsys.readouterr().out

    def test_tau_sweep_writes_limit_errors(self, tmp_path):
        path = write_config(tmp_path, small_config(n_cells=16),
                            sweep={"param": "tau", "values": [0.25, 0.125, 0.0], "norm": "C0H"})
        out = tmp_path / "out"
        assert main(["sweep", str(path), "-o", str(out)]) == 0
        report = json.loads((out / "sweep_report.json").read_text())
        assert report["convergence"]["direct_monotone"] is True
        assert (out / "limit_errors.csv").exists()

    def test_verify_no_suites(self, capsys):
        assert main(["verify", "--no-suites"]) == 0
        assert "0/0 suites passed" in capsys.readouterr().out

    def test_verify_single_suite(self, capsys):
        assert main(["verify", "--suite", "scalar"]) == 0
        assert capsys.readouterr().out.split()[:2] == ["PASS", "scalar"]

    def test_verify_tightened_fails(self):
        assert main(["verify", "--suite", "weak", "--tighten", "100"]) == 4

    def test_unknown_suite(self):
        with pytest.raises(SystemExit):
            main(["verify", "--suite", "nope"])


@pytest.mark.skipif(shutil.which("ipf") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["ipf", "verify", "--no-suites"], capture_output=True, text=True)
    assert proc.returncode == 0
