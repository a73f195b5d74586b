"""End-to-end CLI tests: exit codes, file outputs, determinism."""

import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from nearkit import cli
from nearkit.io import read_matrix, write_matrix

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
EXAMPLE_CONFIG = os.path.join(REPO, "configs",
                              "rank_one_2x2_trace_norm.json")


def run_cli(argv):
    return cli.main(argv)


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ---------------------------------------------------------------------------
# solve

def test_solve_identity_instance_roundtrips(tmp_path):
    A = np.random.default_rng(0).standard_normal((2, 2))
    write_matrix(tmp_path / "A.csv", A)
    cfg = write_config(tmp_path, {"A": "A.csv", "p": 2, "tol": 1e-12})
    out = tmp_path / "out"
    assert run_cli(["solve", "--config", cfg, "--out", str(out)]) == 0
    X = read_matrix(out / "X_star.csv")
    assert np.allclose(X, A, atol=1e-10)
    report = json.loads((out / "report.json").read_text())
    assert report["converged"]
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "k,objective,step_norm,constraint_residual,elapsed_ms"
    assert len(trace) == report["iterations"] + 1


def test_shipped_example_config_gives_objective_two(tmp_path):
    out = tmp_path / "out"
    assert run_cli(["solve", "--config", EXAMPLE_CONFIG,
                    "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report["objective"] - 2.0) <= 1e-6


def test_solve_deterministic_rerun(tmp_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    for out in (out1, out2):
        assert run_cli(["solve", "--config", EXAMPLE_CONFIG, "--seed", "0",
                        "--out", str(out)]) == 0
    assert (out1 / "X_star.csv").read_bytes() == \
        (out2 / "X_star.csv").read_bytes()
    assert (out1 / "report.json").read_bytes() == \
        (out2 / "report.json").read_bytes()


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("nearkit")
    if exe is None:
        pytest.skip("console script not installed")
    out = tmp_path / "out"
    proc = subprocess.run([exe, "solve", "--config", EXAMPLE_CONFIG,
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "objective 2" in proc.stdout


# ---------------------------------------------------------------------------
# exit codes

def test_missing_config_is_io_error():
    assert run_cli(["solve", "--config", "/nonexistent.json"]) == 3


def test_malformed_matrix_is_io_error(tmp_path):
    (tmp_path / "A.csv").write_text("1,2\n3\n")
    cfg = write_config(tmp_path, {"A": "A.csv"})
    assert run_cli(["solve", "--config", cfg,
                    "--out", str(tmp_path / "out")]) == 3


def test_invalid_json_is_io_error(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run_cli(["solve", "--config", str(cfg)]) == 3


def test_unknown_constraint_kind_is_io_error(tmp_path):
    write_matrix(tmp_path / "A.csv", np.eye(2))
    cfg = write_config(tmp_path, {"A": "A.csv",
                                  "constraint": {"kind": "mystery"}})
    assert run_cli(["solve", "--config", cfg,
                    "--out", str(tmp_path / "out")]) == 3


def test_capability_error_exit_code(tmp_path):
    # ball constraint with a general B has no exact X-step
    rng = np.random.default_rng(0)
    write_matrix(tmp_path / "A.csv", rng.standard_normal((2, 2)))
    write_matrix(tmp_path / "B.csv", rng.standard_normal((2, 2)))
    write_matrix(tmp_path / "center.csv", np.zeros((2, 2)))
    cfg = write_config(tmp_path, {
        "A": "A.csv", "B": "B.csv",
        "constraint": {"kind": "ball", "center": "center.csv", "radius": 1.0}})
    assert run_cli(["solve", "--config", cfg,
                    "--out", str(tmp_path / "out")]) == 2


# ---------------------------------------------------------------------------
# other commands

def test_example_mirsky_passes():
    assert run_cli(["example-mirsky"]) == 0


def test_prox_command(tmp_path):
    write_matrix(tmp_path / "M.csv", np.diag([3.0, 0.5]))
    cfg = write_config(tmp_path, {"M": "M.csv", "mu": 1.0, "p": 1})
    out = tmp_path / "out"
    assert run_cli(["prox", "--config", cfg, "--out", str(out)]) == 0
    Y = read_matrix(out / "Y.csv")
    assert np.allclose(Y, np.diag([2.0, 0.0]), atol=1e-10)


def test_recover_bench_small(tmp_path):
    cfg = write_config(tmp_path, {"n": 4, "trials": 2, "p_list": [1, "inf"],
                                  "cases": ["i"]})
    out = tmp_path / "out"
    assert run_cli(["recover-bench", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 1 + 4  # header + 1 case x 2 p x 2 trials
    # audit matrices written for every trial
    audits = sorted(os.listdir(out / "audit"))
    assert len(audits) == 8
    # ground truth and solution agree to the stopping threshold
    for name in audits:
        if name.startswith("X_true"):
            Xt = read_matrix(out / "audit" / name)
            Xs = read_matrix(out / "audit" / name.replace("X_true", "X_star"))
            err = np.linalg.norm(Xs - Xt) / np.linalg.norm(Xt)
            assert err <= 1e-8


def test_recover_bench_trivial_n2(tmp_path):
    cfg = write_config(tmp_path, {"n": 2, "trials": 1, "p_list": [2],
                                  "cases": ["i"], "max_iter": 100,
                                  "stop_fwd": 1e-10})
    out = tmp_path / "out"
    assert run_cli(["recover-bench", "--config", cfg, "--out", str(out)]) == 0
    from nearkit.io import read_results
    rows = read_results(out / "results.csv")
    assert float(rows[0]["forward_error"]) <= 1e-10
    assert int(rows[0]["iters"]) < 100


def test_recover_bench_seed_invariance(tmp_path):
    from nearkit.io import read_results
    errs = []
    for seed in ("0", "1", "2"):
        out = tmp_path / f"out{seed}"
        cfg = write_config(tmp_path, {"n": 6, "trials": 3, "p_list": [1],
                                      "cases": ["i"]}, name=f"c{seed}.json")
        assert run_cli(["recover-bench", "--config", cfg, "--seed", seed,
                        "--out", str(out)]) == 0
        rows = read_results(out / "results.csv")
        errs.append(max(float(r["forward_error"]) for r in rows))
    # all seeds hit the same stopping threshold; same order of magnitude
    assert max(errs) <= 1e-8


def test_sysid_command(tmp_path):
    cfg = write_config(tmp_path, {"n_list": [6]})
    out = tmp_path / "out"
    assert run_cli(["sysid", "--config", cfg, "--out", str(out)]) == 0
    from nearkit.io import read_results
    rows = read_results(out / "results.csv")
    assert float(rows[0]["feasibility_violation"]) <= 1e-10


def test_cfar_command(tmp_path):
    cfg = write_config(tmp_path, {"n": 6, "pprime_list": [2, 6]})
    out = tmp_path / "out"
    assert run_cli(["cfar", "--config", cfg, "--out", str(out)]) == 0
    from nearkit.io import read_results
    rows = read_results(out / "results.csv")
    assert len(rows) == 2
    assert all(float(r["feasibility_violation"]) <= 1e-8 for r in rows)


def test_threads_env_var_same_results(tmp_path, monkeypatch):
    from nearkit.io import read_results
    outs = []
    for tag, threads in (("a", "1"), ("b", "4")):
        monkeypatch.setenv("NEARKIT_THREADS", threads)
        out = tmp_path / tag
        cfg = write_config(tmp_path, {"n": 4, "trials": 2, "p_list": [1],
                                      "cases": ["i", "iv"]},
                           name=f"c{tag}.json")
        assert run_cli(["recover-bench", "--config", cfg,
                        "--out", str(out)]) == 0
        rows = read_results(out / "results.csv")
        outs.append([(r["experiment"], r["p"], r["iters"], r["objective"])
                     for r in rows])
    assert outs[0] == outs[1]
