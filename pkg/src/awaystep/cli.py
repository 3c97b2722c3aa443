"""Command-line interface: solve, measure, gen, and bench subcommands.

Exit codes for ``solve`` are a stable contract: 0 converged, 1 infeasibility
certificate, 2 iteration limit, 3 any error.  ``bench`` returns 4 when a
per-iteration inequality audit fails.  Whenever a subcommand writes delimited
output (trace or benchmark CSV) it also renders a figure next to it unless
--no-plot is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .conditioning import (
    canonical_partition,
    condition_report,
    exposed_margin,
    hull_diameter,
    hull_margin,
    kernel_margin,
    metric_transform,
    min_norm_point,
    width_lower_bound,
)
from .instance import (
    Instance,
    QuadraticObjective,
    SimplexIterate,
    load_problem,
    named_instance,
    normalize_columns,
    random_instance,
    save_instance,
    zigzag_instance,
)
from .simplexlp import LpFailure
from .solvers import (
    RunResult,
    certificate_check,
    fw_away_run,
    vn_away_run,
    vn_run,
    write_trace_csv,
)

_EXIT = {"converged": 0, "infeasible_certificate": 1, "iteration_limit": 2}
_BENCH_HEADER = [
    "instance", "algo", "status", "iters", "final_obj", "bound_L",
    "max_contraction_violation",
]


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst, obj = load_problem(args.instance)
    if args.algo in ("vn", "vn-away"):
        if not inst.normalized:
            if not args.normalize:
                raise ValueError(
                    "this algorithm needs unit columns; pass --normalize to "
                    "rescale the instance"
                )
            inst = normalize_columns(inst)
    if not 1 <= args.x0 <= inst.n:
        raise ValueError(f"--x0 must be in 1..{inst.n}")
    x0 = SimplexIterate.vertex(inst, args.x0 - 1)

    if args.algo == "vn":
        run = vn_run(inst, x0, eps=args.eps, max_iter=args.max_iter)
    elif args.algo == "vn-away":
        run = vn_away_run(inst, x0, eps=args.eps, max_iter=args.max_iter)
    else:
        if obj is None:
            raise ValueError("instance file has no objective; fw-away needs one")
        run = fw_away_run(inst, obj, x0, gap_tol=args.gap_tol,
                          max_iter=args.max_iter)

    y = np.asarray(run.iterate.y)
    print(f"status: {run.status}")
    print(f"iterations: {run.iterations}")
    if args.algo == "fw-away":
        grad = obj.gradient(y)
        gap = float(y @ grad) - float(np.min(inst.columns.T @ grad))
        print(f"objective: {_fmt(obj.value(y))}")
        print(f"gap: {_fmt(gap)}")
    else:
        print(f"norm: {_fmt(np.linalg.norm(y))}")
    if run.certificate is not None:
        verified = certificate_check(inst, run.certificate)
        print(f"certificate: {np.array2string(run.certificate, precision=17)}")
        print(f"certificate_verified: {verified}")
    for note in run.notes:
        print(f"note: {note}")

    if args.trace:
        write_trace_csv(run.trace, args.trace, inst.m)
        print(f"trace: {args.trace}")
        if not args.no_plot:
            from .plotting import render_trace_figure

            fig_path = Path(args.trace).with_suffix(".png")
            render_trace_figure(inst.columns, run.trace, y, fig_path,
                                title=f"{args.algo} on {inst.label or 'instance'}")
            print(f"figure: {fig_path}")
    return _EXIT[run.status]


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def cmd_measure(args) -> int:
    inst, _ = load_problem(args.instance)
    report = condition_report(inst, budget=args.budget, seed=args.seed)
    payload = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"report: {args.report}")
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    print(f"case: {report.width_case}")
    for name, value in report.flags.items():
        print(f"flag {name}: {value}")
    for field, note in report.notes.items():
        print(f"note {field}: {note}")
    return 0


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.name == "random":
        inst = random_instance(args.m, args.n, args.seed, args.mode)
    else:
        inst = named_instance(args.name, args.eps, args.delta)
    obj = None
    if args.with_objective:
        rng = np.random.default_rng(args.seed)
        root = rng.normal(size=(inst.m, inst.m))
        obj = QuadraticObjective(root @ root.T + 0.5 * np.eye(inst.m),
                                 rng.normal(size=inst.m))
    save_instance(inst, args.out, obj)
    print(f"wrote {args.out} (m={inst.m}, n={inst.n}, label={inst.label!r})")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _certified_bound(inst: Instance):
    part = canonical_partition(inst)
    km = kernel_margin(inst, part) if part.kernel else None
    em = exposed_margin(inst, part) if part.exposed else None
    bound, case = width_lower_bound(inst, part, km, em)
    return part, bound, case


def _audit_run(inst: Instance, algo: str, run: RunResult, in_hull: bool,
               bound: float | None, margin: float | None,
               separation: float | None) -> float:
    """Max amount by which any applicable per-iteration inequality fails."""
    objs = [rec.obj for rec in run.trace]
    objs.append(float(np.asarray(run.iterate.y) @ np.asarray(run.iterate.y)))
    worst = 0.0
    if algo == "vn-away":
        for rec in run.trace:
            if rec.k >= 1:
                worst = max(worst, rec.obj - (8.0 / rec.k + 1e-9))
        if in_hull and bound is not None:
            rate = 1.0 - bound * bound / 16.0
            for k, rec in enumerate(run.trace):
                if rec.kind != "drop":
                    worst = max(worst, objs[k + 1] - (rate * objs[k] + 1e-12))
        if separation is not None:
            cap = math.ceil(8.0 / separation**2)
            if run.status != "infeasible_certificate" or run.iterations > cap:
                worst = max(worst, 1.0)
    if algo == "vn":
        for rec in run.trace:
            if rec.k >= 1:
                worst = max(worst, rec.obj - (1.0 / rec.k + 1e-9))
    if algo == "vn" and margin is not None and margin < 0.0 and objs:
        rate = 1.0 - margin * margin
        for k, obj_k in enumerate(objs):
            worst = max(worst, obj_k - rate**k * objs[0] * (1.0 + 1e-9))
    if algo == "vn" and separation is not None:
        cap = math.ceil(1.0 / separation**2)
        if run.status != "infeasible_certificate" or run.iterations > cap:
            worst = max(worst, 1.0)
    return worst


def _bench_instances(seed: int):
    yield zigzag_instance()
    yield random_instance(2, 5, seed, "interior")
    yield random_instance(3, 6, seed, "boundary")
    yield random_instance(2, 5, seed, "infeasible")


def _quadratic_bench_cell(args):
    """One quadratic-solver row: contraction audit at the transformed rate.

    The reference optimum comes from a much tighter run polished by an
    equality-constrained solve on its final support; audited iterates must
    sit well above the reference's own uncertainty.
    """
    inst = zigzag_instance()
    obj = QuadraticObjective(np.eye(2), np.array([0.0, -0.5]))
    tight = fw_away_run(inst, obj, gap_tol=1e-13, max_iter=200_000)
    y_ref = np.asarray(tight.iterate.y)
    support = list(tight.iterate.support)
    C = inst.columns[:, support]
    ns = len(support)
    kkt = np.zeros((ns + 1, ns + 1))
    kkt[:ns, :ns] = C.T @ obj.Q @ C
    kkt[:ns, ns] = 1.0
    kkt[ns, :ns] = 1.0
    rhs = np.concatenate([-C.T @ obj.b, [1.0]])
    w = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:ns]
    if w.min() >= -1e-12:
        y_ref = C @ np.clip(w, 0.0, None) / max(np.clip(w, 0.0, None).sum(), 1e-300)
    f_star = obj.value(y_ref)

    shifted = metric_transform(inst, obj, y_ref)
    _, bound, _ = _certified_bound(shifted)
    diameter = hull_diameter(shifted.columns)
    rate = 1.0 - bound**2 / (4.0 * diameter**2)
    run = fw_away_run(inst, obj, gap_tol=args.eps, max_iter=args.max_iter)
    objs = [rec.obj for rec in run.trace]
    objs.append(obj.value(np.asarray(run.iterate.y)))
    worst = 0.0
    for k, rec in enumerate(run.trace):
        if rec.kind == "drop" or objs[k] - f_star <= 1e-9:
            continue
        worst = max(worst, (objs[k + 1] - f_star) - (rate * (objs[k] - f_star) + 1e-10))
    row = ["zigzag+quadratic", "fw-away", run.status, run.iterations,
           _fmt(objs[-1]), _fmt(bound), _fmt(worst)]
    return row, worst


def cmd_bench(args) -> int:
    rows = []
    zigzag_runs: dict[str, RunResult] = {}
    violations = 0.0
    print(f"bench seed: {args.seed}")
    for inst in _bench_instances(args.seed):
        part, bound, case = _certified_bound(inst)
        in_hull = bool(part.kernel)
        margin = None
        separation = None
        if in_hull:
            try:
                margin = hull_margin(inst, part)
            except ValueError:
                margin = None
        else:
            separation = min_norm_point(inst.columns, 1e-10)[1]
        for algo, runner in (("vn", vn_run), ("vn-away", vn_away_run)):
            run = runner(inst, eps=args.eps, max_iter=args.max_iter)
            worst = _audit_run(inst, algo, run, in_hull,
                               bound if in_hull else None, margin, separation)
            violations = max(violations, worst)
            final_obj = float(np.asarray(run.iterate.y) @ np.asarray(run.iterate.y))
            rows.append([
                inst.label, algo, run.status, run.iterations, _fmt(final_obj),
                _fmt(bound) if in_hull else "", _fmt(worst),
            ])
            if inst.label == "zigzag":
                zigzag_runs[algo] = run
            print(f"{inst.label:34s} {algo:8s} {run.status:22s} "
                  f"iters={run.iterations:<7d} violation={worst:.3e}")

    quad_row, quad_worst = _quadratic_bench_cell(args)
    rows.append(quad_row)
    violations = max(violations, quad_worst)
    print(f"{quad_row[0]:34s} {quad_row[1]:8s} {quad_row[2]:22s} "
          f"iters={quad_row[3]:<7d} violation={quad_worst:.3e}")

    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_BENCH_HEADER)
        writer.writerows(rows)
    print(f"csv: {out}")
    if not args.no_plot:
        from .plotting import render_comparison_figure

        fig_path = out.with_name(out.stem + "_zigzag.png")
        render_comparison_figure(zigzag_instance().columns, zigzag_runs, fig_path)
        print(f"figure: {fig_path}")
    if violations > 0.0:
        print("inequality audit FAILED", file=sys.stderr)
        return 4
    print("inequality audit passed: zero violations")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="awaystep",
        description="Hull membership of the origin, quadratic minimization "
                    "over hulls, and geometric conditioning reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a solver on an instance file")
    p_solve.add_argument("instance", help="instance JSON path")
    p_solve.add_argument("--algo", choices=["vn", "vn-away", "fw-away"],
                         default="vn-away")
    p_solve.add_argument("--eps", type=float, default=1e-8,
                         help="image-norm stopping tolerance (feasibility)")
    p_solve.add_argument("--gap-tol", type=float, default=1e-8,
                         help="linearized-gap stopping tolerance (fw-away)")
    p_solve.add_argument("--max-iter", type=int, default=10**6)
    p_solve.add_argument("--normalize", action="store_true",
                         help="rescale columns to unit norm before solving")
    p_solve.add_argument("--x0", type=int, default=1,
                         help="1-based index of the starting vertex")
    p_solve.add_argument("--trace", help="write the per-iteration CSV here")
    p_solve.add_argument("--no-plot", action="store_true",
                         help="skip the figure next to the trace CSV")
    p_solve.set_defaults(func=cmd_solve)

    p_measure = sub.add_parser("measure", help="write a conditioning report")
    p_measure.add_argument("instance")
    p_measure.add_argument("--budget", type=int, default=64,
                           help="samples per support set for width estimates")
    p_measure.add_argument("--seed", type=int, default=0)
    p_measure.add_argument("--report", help="report JSON path (default stdout)")
    p_measure.set_defaults(func=cmd_measure)

    p_gen = sub.add_parser("gen", help="write an instance file")
    p_gen.add_argument("name",
                       choices=["zigzag", "hexagon", "segment", "tent", "random"])
    p_gen.add_argument("--eps", type=float, default=0.5)
    p_gen.add_argument("--delta", type=float, default=0.5)
    p_gen.add_argument("--m", type=int, default=2)
    p_gen.add_argument("--n", type=int, default=5)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--mode", choices=["interior", "boundary", "infeasible"],
                       default="interior")
    p_gen.add_argument("--with-objective", action="store_true",
                       help="attach a random positive-definite quadratic")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser(
        "bench",
        help="compare the plain and away-step solvers and audit the "
             "per-iteration inequalities",
    )
    p_bench.add_argument("--eps", type=float, default=1e-4)
    p_bench.add_argument("--max-iter", type=int, default=20000)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default="bench.csv")
    p_bench.add_argument("--no-plot", action="store_true")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LpFailure, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
