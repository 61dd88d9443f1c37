"""End-to-end command-line behavior: exit codes, file outputs, config files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from rowsolve.cli import cli_main
from rowsolve.harness import read_trace, read_ensemble
from rowsolve.matrix import MatrixStore, mm_write
from rowsolve.harness import write_vector
from rowsolve.problems import synthetic_udv, noisy_rhs


@pytest.fixture()
def instance_dir(tmp_path):
    code = cli_main(["gen", "example1", "--n", "20", "--seed", "1",
                     "--out", str(tmp_path / "inst")])
    assert code == 0
    return tmp_path / "inst"


@pytest.fixture()
def flat_files(tmp_path):
    A = synthetic_udv(18, 5, 3, 2.0, seed=4)
    b, x_star = noisy_rhs(A, 0.1, seed=4)
    mm_write(A, tmp_path / "A.mtx")
    write_vector(b, tmp_path / "b.csv")
    write_vector(x_star, tmp_path / "xs.csv")
    return tmp_path


def test_gen_example1_writes_instance(tmp_path, capsys):
    assert cli_main(["gen", "example1", "--n", "20",
                     "--out", str(tmp_path / "inst")]) == 0
    for name in ("A.mtx", "b.csv", "xstar.csv", "instance.json"):
        assert (tmp_path / "inst" / name).exists()
    doc = json.loads((tmp_path / "inst" / "instance.json").read_text())
    assert doc["m"] == 600 and doc["n"] == 20
    assert capsys.readouterr().out.startswith("wrote instance (600 x 20)")


def test_gen_tomo_writes_phantom(tmp_path):
    out = tmp_path / "t"
    assert cli_main(["gen", "tomo", "--grid", "4", "--angles", "4",
                     "--rays", "6", "--out", str(out)]) == 0
    assert (out / "phantom.pgm").read_text().startswith("P2\n4 4\n")
    doc = json.loads((out / "instance.json").read_text())
    assert doc["descriptor"]["generator"] == "tomo"


def test_solve_from_instance(instance_dir, tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = cli_main(["solve", "--instance", str(instance_dir),
                     "--method", "ermr", "--tau-rows", "20", "--tau-cols", "4",
                     "--max-iters", "2000", "--rse-tol", "1e-6",
                     "--out", str(out)])
    assert code == 0
    trace = read_trace(out)
    assert trace.metadata["method"] == "ermr"
    assert trace.metadata["stopped_by"] == "rse_tol"
    assert trace.rse[-1] <= 1e-6
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("ermr: k=") and "stopped_by=rse_tol" in line


def test_solve_from_flat_files(flat_files, tmp_path):
    out = tmp_path / "t.csv"
    code = cli_main(["solve", "--matrix", str(flat_files / "A.mtx"),
                     "--rhs", str(flat_files / "b.csv"),
                     "--xstar", str(flat_files / "xs.csv"),
                     "--method", "rmr", "--max-iters", "500",
                     "--out", str(out)])
    assert code == 0
    assert read_trace(out).metadata["iterations"] == 500


def test_solve_homogeneous_uses_null_target(instance_dir, tmp_path):
    out = tmp_path / "h.csv"
    code = cli_main(["solve", "--instance", str(instance_dir),
                     "--method", "rmr_homogeneous", "--tau-cols", "4",
                     "--max-iters", "300", "--out", str(out)])
    assert code == 0
    trace = read_trace(out)
    assert all(r is not None and np.isfinite(r) for r in trace.rse)


def test_missing_input_is_usage_error(tmp_path):
    assert cli_main(["solve", "--matrix", str(tmp_path / "nope.mtx"),
                     "--rhs", str(tmp_path / "nope.csv")]) == 1
    assert cli_main(["solve"]) == 1  # neither instance nor files


def test_malformed_matrix_is_data_error(tmp_path):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n5 5 1.0\n")
    (tmp_path / "b.csv").write_text("1.0\n1.0\n")
    assert cli_main(["solve", "--matrix", str(bad),
                     "--rhs", str(tmp_path / "b.csv")]) == 2


def test_unknown_flag_and_method_exit_one(instance_dir):
    assert cli_main(["solve", "--instance", str(instance_dir),
                     "--frobnicate"]) == 1
    assert cli_main(["solve", "--instance", str(instance_dir),
                     "--method", "sor"]) == 1
    assert cli_main(["quux"]) == 1


def test_bench_writes_trials_and_ensembles(instance_dir, tmp_path, capsys):
    out = tmp_path / "bench"
    code = cli_main(["bench", "--instance", str(instance_dir),
                     "--methods", "rmr,ermr", "--trials", "3",
                     "--tau-rows", "20", "--tau-cols", "4",
                     "--max-iters", "400", "--trace-stride", "100",
                     "--out", str(out)])
    assert code == 0
    for method in ("rmr", "ermr"):
        for t in range(3):
            assert (out / f"{method}_trial{t:02d}.csv").exists()
        ens = read_ensemble(out / f"{method}_ensemble.csv")
        assert ens["k"][0] == 0.0
        assert np.all(ens["rse_min"] <= ens["rse_median"])
        assert np.all(ens["rse_median"] <= ens["rse_max"])
    assert "bench: 3 trials" in capsys.readouterr().out


def test_bench_requires_oracle(flat_files, tmp_path):
    assert cli_main(["bench", "--matrix", str(flat_files / "A.mtx"),
                     "--rhs", str(flat_files / "b.csv"),
                     "--out", str(tmp_path / "b")]) == 1


def test_bench_rejects_unknown_method(instance_dir, tmp_path):
    assert cli_main(["bench", "--instance", str(instance_dir),
                     "--methods", "rmr,sor",
                     "--out", str(tmp_path / "b")]) == 1


def test_rates_report(flat_files, capsys):
    code = cli_main(["rates", "--matrix", str(flat_files / "A.mtx"),
                     "--tau-rows", "3", "--tau-cols", "2"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert 0.0 < doc["rho1"] < 1.0
    assert 0.0 < doc["rho2"] < 1.0
    assert doc["rho"] == max(doc["rho1"], doc["rho2"])
    assert not doc["degenerate"]


def test_lemmas_report(flat_files, capsys):
    code = cli_main(["lemmas", "--matrix", str(flat_files / "A.mtx"),
                     "--trials", "50"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["violations_range"] == 0 and doc["violations_norm"] == 0


def test_config_file_defaults_and_override(instance_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# solver settings\nmax_iters = 50\ntrace-stride = 25\n"
                   "consistent-mode = false\n")
    out = tmp_path / "c.csv"
    code = cli_main(["solve", "--config", str(cfg),
                     "--instance", str(instance_dir), "--method", "ermr",
                     "--out", str(out)])
    assert code == 0
    assert read_trace(out).metadata["max_iters"] == 50
    # explicit flag beats the config file
    code = cli_main(["solve", "--config", str(cfg),
                     "--instance", str(instance_dir), "--method", "ermr",
                     "--max-iters", "75", "--out", str(out)])
    assert code == 0
    trace = read_trace(out)
    assert trace.metadata["max_iters"] == 75
    assert trace.metadata["trace_stride"] == 25


def test_config_file_errors(tmp_path, instance_dir):
    bad = tmp_path / "bad.cfg"
    bad.write_text("just some words\n")
    assert cli_main(["solve", "--config", str(bad),
                     "--instance", str(instance_dir)]) == 1
    assert cli_main(["solve", "--config", str(tmp_path / "missing.cfg"),
                     "--instance", str(instance_dir)]) == 1
    assert cli_main(["solve", "--config"]) == 1
