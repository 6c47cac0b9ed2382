import json

import numpy as np
import pytest

from pencilspec.cli import load_config, main, thread_count
from pencilspec.errors import ConfigError
from pencilspec.io import write_matrix


def run(tmp_path, command, config_text=None, *extra):
    args = [command]
    if config_text is not None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text(config_text)
        args += ["--config", str(cfg)]
    out = tmp_path / f"{command}.json"
    code = main(args + ["--out", str(out)] + list(extra))
    return code, out


def test_estimate_exact_generated_instance(tmp_path):
    code, out = run(tmp_path, "estimate", "dim = 6\nsparsity = 2\nprobe = 4\nseed = 3\n")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["matched_error_max"] <= 1e-7
    assert report["trials"][0]["r_est"] == 2
    assert any(b["name"] == "kappa_bound_general" for b in report["bounds"])


def test_estimate_is_byte_identical_across_runs_and_threads(tmp_path):
    text = "dim = 6\nsparsity = 2\naccess = hadamard\nshots = 1000000\nknown_sparsity = true\ntrials = 4\n"
    _, a = run(tmp_path, "estimate", text)
    first = a.read_bytes()
    _, b = run(tmp_path, "estimate", text, "--threads", "3")
    assert b.read_bytes() == first
    report = json.loads(first)
    assert report["cost_ledger"]["total"] == sum(report["cost_ledger"]["per_trial"])
    assert report["cost_ledger"]["per_trial"][0] == 2 * 4 * 2 * 10 ** 6


def test_missing_matrix_file(tmp_path):
    code, out = run(tmp_path, "estimate", "matrix = nowhere.txt\n")
    assert code == 2
    assert not out.exists()


def test_config_errors(tmp_path):
    assert run(tmp_path, "estimate", "family = laplace\n")[0] == 2
    assert run(tmp_path, "estimate", "bogus = 1\n")[0] == 2
    assert main(["estimate", "--config", str(tmp_path / "absent.cfg")]) == 2
    with pytest.raises(ConfigError, match=":2: probe"):
        p = tmp_path / "bad.cfg"
        p.write_text("dim = 4\nprobe = 0\n")
        load_config(p)


def test_exit_codes_for_precondition_and_numerical(tmp_path):
    write_matrix(tmp_path / "jordan.txt", np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert run(tmp_path, "estimate", "matrix = jordan.txt\n")[0] == 4
    write_matrix(tmp_path / "rot.txt", np.array([[0.0, -0.5], [0.5, 0.0]]))
    assert run(tmp_path, "estimate", "matrix = rot.txt\nfamily = fourier\n")[0] == 3


def test_estimate_matrix_file(tmp_path):
    write_matrix(tmp_path / "a.txt", np.array([[0.6, 0.2], [0.0, -0.3]]))
    code, out = run(tmp_path, "estimate", "matrix = a.txt\nprobe = 2\n")
    assert code == 0
    assert json.loads(out.read_text())["matched_error_max"] <= 1e-10


def test_liouvillian_damped_qubit(tmp_path):
    code, out = run(tmp_path, "liouvillian", "gamma = 0.4\n")
    assert code == 0
    assert json.loads(out.read_text())["trials"][0]["gap"] == pytest.approx(0.2, abs=1e-8)


def test_liouvillian_spec_file(tmp_path):
    (tmp_path / "spec.txt").write_text("1\nLgroup 0.6\n0.5 X\n0+0.5i Y\nend\n")
    code, out = run(tmp_path, "liouvillian", "lindblad = spec.txt\n")
    assert code == 0
    assert json.loads(out.read_text())["trials"][0]["gap"] == pytest.approx(0.3, abs=1e-8)


def test_bounds_table_monotone(tmp_path):
    code, out = run(tmp_path, "bounds", "bounds_sparsity = 3\n")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["monotone_in_gap"] is True
    csv_lines = out.with_suffix(".csv").read_text().strip().splitlines()
    assert len(csv_lines) == 1 + len(report["table"])


def test_abscissa_triangular(tmp_path):
    write_matrix(tmp_path / "tri.txt", np.array([[-1.0, 5.0], [0.0, -0.5]]))
    code, out = run(tmp_path, "abscissa", "matrix = tri.txt\n")
    assert code == 0
    verdict = json.loads(out.read_text())["trials"][0]["verdict"]
    assert verdict["classification"] == "AsymptoticallyStable"


def test_scaling_slopes(tmp_path):
    text = "hadamard_shots = 1e3, 1e4, 1e5, 1e6, 1e7\nqae_eps = 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 3e-7\n"
    code, out = run(tmp_path, "scaling", text)
    assert code == 0
    slopes = json.loads(out.read_text())["slopes"]
    assert abs(slopes["qae"] + 1.0) <= 0.15
    assert abs(slopes["hadamard"] + 0.5) <= 0.1


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("PENCILSPEC_THREADS", "3")
    assert thread_count(None) == 3
    assert thread_count(2) == 2
    monkeypatch.setenv("PENCILSPEC_THREADS", "zero")
    with pytest.raises(ConfigError):
        thread_count(None)
