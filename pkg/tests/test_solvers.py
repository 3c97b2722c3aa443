import math

import numpy as np
import pytest

from awaystep import (
    Instance,
    QuadraticObjective,
    SimplexIterate,
    certificate_check,
    fw_away_run,
    fw_away_step,
    min_norm_point,
    observed_width,
    vn_away_run,
    vn_away_step,
    vn_run,
    vn_step,
    write_trace_csv,
    zigzag_instance,
)
from awaystep.conditioning import origin_in_hull
from awaystep.solvers import StepRecord

SIXTY_DEGREE_PAIR = Instance(np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]]))


def equilateral():
    ang = np.deg2rad([90.0, 210.0, 330.0])
    return Instance(np.vstack([np.cos(ang), np.sin(ang)]), label="equilateral")


# ---------------------------------------------------------------------------
# Single steps
# ---------------------------------------------------------------------------

def test_vn_step_hand_trace():
    inst = zigzag_instance()
    nxt, rec = vn_step(inst, SimplexIterate.vertex(inst, 0))
    assert rec.kind == "regular"
    assert rec.j == 1  # tie between the last two columns broken low
    assert rec.theta == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(nxt.x, [0.5, 0.5, 0.0])
    assert np.allclose(nxt.y, [0.5, -0.5])


def test_vn_step_halts_with_separator():
    it = SimplexIterate.vertex(SIXTY_DEGREE_PAIR, 0)
    out = vn_step(SIXTY_DEGREE_PAIR, it)
    assert isinstance(out, np.ndarray)
    assert np.allclose(out, [1.0, 0.0])
    assert certificate_check(SIXTY_DEGREE_PAIR, out)


def test_vn_step_exact_solution_short_circuits():
    inst = zigzag_instance()
    it = SimplexIterate.from_weights(inst, np.array([0.0, 0.5, 0.5]))
    same, rec = vn_step(inst, it)
    assert rec is None and same is it


def test_vn_away_step_hand_trace():
    inst = zigzag_instance()
    it = SimplexIterate.from_weights(inst, np.array([0.5, 0.5, 0.0]))
    nxt, rec = vn_away_step(inst, it)
    assert rec.kind == "regular"
    assert rec.j == 2
    assert rec.theta == pytest.approx(0.4, abs=1e-15)
    assert np.allclose(nxt.x, [0.3, 0.3, 0.4])
    assert np.allclose(nxt.y, [0.3, 0.1])


def test_vn_away_step_drop_and_theta_max():
    # At x = (0.2, 0.4, 0.4) the image is (0.2, 0): the away branch fires on
    # the first column with theta_max = 0.2/0.8, and the line search lands
    # exactly on the bound, so the step is a drop that zeroes that weight.
    inst = zigzag_instance()
    it = SimplexIterate.from_weights(inst, np.array([0.2, 0.4, 0.4]))
    nxt, rec = vn_away_step(inst, it)
    assert rec.kind == "drop"
    assert rec.l == 0
    assert rec.theta_max == pytest.approx(0.25, abs=1e-15)
    assert rec.theta == rec.theta_max
    assert nxt.x[0] == 0.0
    assert nxt.support == (1, 2)
    assert np.allclose(nxt.y, [0.0, 0.0], atol=1e-15)


def test_vn_away_step_halting_rule_matches_plain():
    it = SimplexIterate.vertex(SIXTY_DEGREE_PAIR, 0)
    out = vn_away_step(SIXTY_DEGREE_PAIR, it)
    assert isinstance(out, np.ndarray)


def test_unnormalized_instance_rejected():
    inst = Instance(np.array([[2.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="unit columns"):
        vn_step(inst, SimplexIterate.vertex(inst, 0))
    with pytest.raises(ValueError, match="unit columns"):
        vn_away_run(inst)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

def test_vn_run_zigzag_converges_slowly():
    run = vn_run(zigzag_instance(), eps=1e-2, max_iter=100_000)
    assert run.status == "converged"
    assert run.iterations > 100  # sublinear zig-zag regime
    assert np.linalg.norm(run.iterate.y) <= 1e-2


def test_vn_run_certificate_within_separation_cap():
    rho = min_norm_point(SIXTY_DEGREE_PAIR.columns, 1e-10)[1]
    assert rho == pytest.approx(math.sqrt(3) / 2, abs=1e-10)
    cap = math.ceil(8.0 / rho**2)
    assert cap == 11
    run = vn_run(SIXTY_DEGREE_PAIR, eps=1e-10, max_iter=1000)
    assert run.status == "infeasible_certificate"
    assert run.iterations <= cap
    assert certificate_check(SIXTY_DEGREE_PAIR, run.certificate)
    assert not origin_in_hull(SIXTY_DEGREE_PAIR)


def test_vn_run_interior_linear_rate():
    run = vn_run(equilateral(), eps=1e-13, max_iter=200)
    objs = [rec.obj for rec in run.trace]
    objs.append(float(run.iterate.y @ run.iterate.y))
    for k, obj in enumerate(objs):
        assert obj <= 0.75**k * objs[0] * (1 + 1e-9)


def test_vn_away_run_contraction_and_inverse_k_bound():
    run = vn_away_run(zigzag_instance(), eps=1e-8)
    assert run.status == "converged"
    objs = [rec.obj for rec in run.trace]
    objs.append(float(run.iterate.y @ run.iterate.y))
    rate = 1.0 - (1.0 / math.sqrt(2)) ** 2 / 16.0
    for k, rec in enumerate(run.trace):
        if rec.kind != "drop":
            assert objs[k + 1] <= rate * objs[k] + 1e-12
        if rec.k >= 1:
            assert rec.obj <= 8.0 / rec.k + 1e-9
    assert run.notes == ()


def test_vn_away_run_requires_vertex_start():
    inst = zigzag_instance()
    x0 = SimplexIterate.from_weights(inst, np.array([0.5, 0.5, 0.0]))
    with pytest.raises(ValueError, match="vertex"):
        vn_away_run(inst, x0)


def test_fw_step_equals_away_step_for_identity_objective():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    it = SimplexIterate.from_weights(inst, np.array([0.5, 0.5, 0.0]))
    nxt_fw, rec_fw = fw_away_step(inst, obj, it, gap_tol=1e-14)
    nxt_vn, rec_vn = vn_away_step(inst, it)
    assert rec_fw.kind == rec_vn.kind
    assert rec_fw.j == rec_vn.j
    assert rec_fw.theta == pytest.approx(rec_vn.theta, abs=1e-15)
    assert np.allclose(nxt_fw.x, nxt_vn.x)


def test_fw_run_matches_away_run_iterate_by_iterate():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    run_vn = vn_away_run(inst, eps=1e-6)
    run_fw = fw_away_run(inst, obj, gap_tol=1e-14)
    for rec_vn, rec_fw in zip(run_vn.trace, run_fw.trace):
        assert (rec_vn.kind, rec_vn.j, rec_vn.l) == (rec_fw.kind, rec_fw.j, rec_fw.l)
        assert rec_fw.theta == pytest.approx(rec_vn.theta, abs=1e-12)


def test_fw_run_reaches_known_optimum():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.array([0.0, -0.5]))
    run = fw_away_run(inst, obj, gap_tol=1e-10)
    assert run.status == "converged"
    assert obj.value(np.asarray(run.iterate.y)) <= -0.125 + 1e-10
    assert np.allclose(run.iterate.y, [0.0, 0.5], atol=1e-4)


def test_fw_step_detects_stationarity():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.array([0.0, -0.5]))
    it = SimplexIterate.from_weights(inst, np.array([0.0, 0.25, 0.75]))
    same, rec = fw_away_step(inst, obj, it, gap_tol=1e-12)
    assert rec is None and same is it


def test_fw_accepts_unnormalized_columns():
    inst = Instance(np.array([[2.0, -1.0], [0.0, 1.0]]))
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    run = fw_away_run(inst, obj, gap_tol=1e-10)
    assert run.status == "converged"


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def test_certificate_check_examples():
    assert certificate_check(SIXTY_DEGREE_PAIR, np.array([1.0, 0.3]))
    inst = zigzag_instance()
    rng = np.random.default_rng(0)
    for _ in range(50):
        # the last two columns are opposite, so no direction separates all
        assert not certificate_check(inst, rng.normal(size=2))
    assert not certificate_check(inst, np.zeros(2))


# ---------------------------------------------------------------------------
# Observed width along a trace
# ---------------------------------------------------------------------------

def test_observed_width_single_point():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    trace = [StepRecord(0, "regular", 1, None, 0.5, 1.0, 0.5, 1,
                        support=(0,), y_snapshot=np.array([1.0, 0.0]))]
    assert observed_width(inst, obj, trace, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_observed_width_skips_optimal_iterates():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    trace = [
        StepRecord(0, "regular", 1, None, 0.5, 1.0, 0.5, 1,
                   support=(0,), y_snapshot=np.array([1.0, 0.0])),
        StepRecord(1, "regular", 2, None, 0.5, 1.0, 0.0, 2,
                   support=(1, 2), y_snapshot=np.zeros(2)),
    ]
    assert observed_width(inst, obj, trace, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_observed_width_errors():
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError, match="empty"):
        observed_width(inst, obj, [], 0.0)
    trace = [StepRecord(0, "regular", 1, None, 0.5, 1.0, 0.5, 1,
                        support=(0,), y_snapshot=np.array([1.0, 0.0]))]
    with pytest.raises(ValueError, match="exceeds"):
        observed_width(inst, obj, trace, 1.0)
    bare = [StepRecord(0, "regular", 1, None, 0.5, 1.0, 0.5, 1)]
    with pytest.raises(ValueError, match="snapshots"):
        observed_width(inst, obj, bare, 0.0)


def test_observed_width_dominates_certified_bound_on_zigzag():
    from awaystep.conditioning import (
        canonical_partition, exposed_margin, kernel_margin, width_lower_bound,
    )

    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.zeros(2))
    run = fw_away_run(inst, obj, gap_tol=1e-10)
    wf = observed_width(inst, obj, run.trace, 0.0)
    part = canonical_partition(inst)
    bound, _ = width_lower_bound(inst, part, kernel_margin(inst, part),
                                 exposed_margin(inst, part))
    assert wf >= bound - 1e-9


# ---------------------------------------------------------------------------
# Trace invariants across runs
# ---------------------------------------------------------------------------

def _assert_trace_properties(inst, run):
    objs = [rec.obj for rec in run.trace]
    drops = 0
    for k, rec in enumerate(run.trace):
        nxt_size = (run.trace[k + 1].support_size if k + 1 < len(run.trace)
                    else len(run.iterate.support))
        if rec.kind == "drop":
            drops += 1
            assert nxt_size < rec.support_size
            assert rec.theta == rec.theta_max
        else:
            assert nxt_size <= rec.support_size + 1
        assert drops <= (k + 1) - drops, "drop steps outnumber the others"
        if k + 1 < len(objs):
            assert objs[k + 1] <= objs[k] + 1e-12 * (1.0 + abs(objs[k]))
            still_above_floor = objs[k] > objs[-1] + 1e-12 * (1.0 + abs(objs[-1]))
            if rec.kind != "drop" and rec.theta > 1e-9 and still_above_floor:
                assert objs[k + 1] < objs[k]
        if rec.x_snapshot is not None:
            x = rec.x_snapshot
            assert x.min() >= 0.0
            assert abs(x.sum() - 1.0) <= 1e-10
            assert np.linalg.norm(rec.y_snapshot - inst.columns @ x) <= (
                1e-9 * (1.0 + inst.max_column_norm())
            )
    final = np.asarray(run.iterate.y)
    assert np.linalg.norm(final - inst.columns @ run.iterate.x) <= (
        1e-9 * (1.0 + inst.max_column_norm())
    )


def test_run_invariants_across_random_instances():
    from awaystep import random_instance

    for seed in range(6):
        mode = ("interior", "boundary", "infeasible")[seed % 3]
        m = 2 if mode != "boundary" else 3
        inst = random_instance(m, 6, seed, mode)
        for runner in (vn_run, vn_away_run):
            run = runner(inst, eps=1e-8, max_iter=5000, keep_weights=True)
            _assert_trace_properties(inst, run)
            if run.status == "infeasible_certificate":
                assert certificate_check(inst, run.certificate)
                assert not origin_in_hull(inst)
        rng = np.random.default_rng(seed)
        root = rng.normal(size=(m, m))
        obj = QuadraticObjective(root @ root.T + 0.3 * np.eye(m),
                                 rng.normal(size=m))
        run = fw_away_run(inst, obj, gap_tol=1e-9, max_iter=20000,
                          keep_weights=True)
        _assert_trace_properties(inst, run)


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------

def test_trace_csv_layout(tmp_path):
    run = vn_away_run(zigzag_instance(), eps=1e-6)
    path = tmp_path / "trace.csv"
    write_trace_csv(run.trace, path, m=2)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k,kind,j,l,theta,theta_max,obj,support_size,y_1,y_2"
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "regular"
    assert first[3] == ""  # no leaving index on a regular step
    away_lines = [ln for ln in lines[1:] if ln.split(",")[1] in ("away", "drop")]
    assert away_lines and away_lines[0].split(",")[2] == ""


def test_trace_csv_bit_stable(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(vn_away_run(zigzag_instance(), eps=1e-6).trace, a, m=2)
    write_trace_csv(vn_away_run(zigzag_instance(), eps=1e-6).trace, b, m=2)
    assert a.read_bytes() == b.read_bytes()
