import csv
import json

import numpy as np
import pytest

from awaystep import Instance, QuadraticObjective, save_instance, zigzag_instance
from awaystep.cli import main


@pytest.fixture
def zigzag_file(tmp_path):
    path = tmp_path / "zigzag.json"
    save_instance(zigzag_instance(), path)
    return str(path)


@pytest.fixture
def infeasible_file(tmp_path):
    inst = Instance(np.array([[1.0, 0.5], [0.0, np.sqrt(3) / 2]]))
    path = tmp_path / "pair.json"
    save_instance(inst, path)
    return str(path)


def test_gen_then_solve_roundtrip(tmp_path):
    out = tmp_path / "hex.json"
    assert main(["gen", "hexagon", "--eps", "0.5", "--delta", "0.5",
                 "--out", str(out)]) == 0
    assert main(["solve", str(out), "--algo", "vn-away", "--normalize"]) == 0


def test_solve_exit_codes(zigzag_file, infeasible_file):
    assert main(["solve", zigzag_file, "--algo", "vn-away"]) == 0
    assert main(["solve", infeasible_file, "--algo", "vn"]) == 1
    assert main(["solve", zigzag_file, "--algo", "vn", "--eps", "1e-8",
                 "--max-iter", "50"]) == 2


def test_solve_requires_objective_for_quadratic(zigzag_file):
    assert main(["solve", zigzag_file, "--algo", "fw-away"]) == 3


def test_solve_with_objective(tmp_path):
    path = tmp_path / "quad.json"
    save_instance(zigzag_instance(), path,
                  QuadraticObjective(np.eye(2), np.array([0.0, -0.5])))
    assert main(["solve", str(path), "--algo", "fw-away"]) == 0


def test_solve_unnormalized_needs_flag(tmp_path):
    path = tmp_path / "wide.json"
    save_instance(Instance(np.array([[2.0, -2.0], [0.1, 0.1]])), path)
    assert main(["solve", str(path), "--algo", "vn-away"]) == 3
    assert main(["solve", str(path), "--algo", "vn-away", "--normalize"]) in (0, 1)


def test_solve_trace_and_figure(zigzag_file, tmp_path):
    trace = tmp_path / "trace.csv"
    assert main(["solve", zigzag_file, "--algo", "vn-away",
                 "--trace", str(trace)]) == 0
    header = trace.read_text().splitlines()[0]
    assert header == "k,kind,j,l,theta,theta_max,obj,support_size,y_1,y_2"
    assert (tmp_path / "trace.png").exists()


def test_solve_no_plot(zigzag_file, tmp_path):
    trace = tmp_path / "trace.csv"
    assert main(["solve", zigzag_file, "--algo", "vn-away",
                 "--trace", str(trace), "--no-plot"]) == 0
    assert not (tmp_path / "trace.png").exists()


def test_solve_bad_x0(zigzag_file):
    assert main(["solve", zigzag_file, "--x0", "9"]) == 3


def test_measure_report(zigzag_file, tmp_path):
    report = tmp_path / "report.json"
    assert main(["measure", zigzag_file, "--budget", "4",
                 "--report", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert payload["kernel"] == [1, 2]
    assert payload["width_case"] == "mixed"
    assert payload["flags"]["sandwich_ok"] is True
    assert "provenance" in payload


def test_measure_hexagon_values(tmp_path):
    from awaystep import named_instance

    path = tmp_path / "hex.json"
    save_instance(named_instance("hexagon", 0.5, 0.5), path)
    report = tmp_path / "report.json"
    assert main(["measure", str(path), "--budget", "4",
                 "--report", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert payload["kernel_margin"] == pytest.approx(-0.5, abs=1e-9)
    assert payload["width_case"] == "kernel-only"
    assert payload["width_upper"] <= 0.75 + 1e-8


def test_gen_random_modes(tmp_path):
    for mode in ("interior", "boundary", "infeasible"):
        out = tmp_path / f"{mode}.json"
        m = "3" if mode == "boundary" else "2"
        assert main(["gen", "random", "--m", m, "--n", "5", "--seed", "3",
                     "--mode", mode, "--out", str(out)]) == 0
        assert out.exists()


def test_gen_with_objective_solvable(tmp_path):
    out = tmp_path / "quad.json"
    assert main(["gen", "random", "--m", "2", "--n", "5", "--seed", "1",
                 "--mode", "interior", "--with-objective",
                 "--out", str(out)]) == 0
    assert main(["solve", str(out), "--algo", "fw-away"]) == 0


def test_bench_outputs_and_audit(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--out", str(out), "--eps", "1e-4",
                 "--max-iter", "5000", "--seed", "0"]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["instance", "algo", "status", "iters", "final_obj",
                       "bound_L", "max_contraction_violation"]
    by_key = {(r[0], r[1]): r for r in rows[1:]}
    zig_vn = by_key[("zigzag", "vn")]
    zig_away = by_key[("zigzag", "vn-away")]
    assert int(zig_away[3]) < int(zig_vn[3])
    assert all(float(r[6]) == 0.0 for r in rows[1:])
    assert (tmp_path / "bench_zigzag.png").exists()


def test_bench_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["bench", "--out", str(out), "--eps", "1e-4",
                     "--max-iter", "2000", "--seed", "5", "--no-plot"]) == 0
    assert a.read_bytes() == b.read_bytes()
