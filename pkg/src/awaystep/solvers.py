"""Hull solvers: plain descent toward the origin, its away-step variant, and
away-step descent for convex quadratics, with per-iteration tracing.

All three walk a weight vector over the standard simplex.  A *regular* step
moves toward the most promising column; an *away* step reduces the weight of
the worst supported column instead, bounded so the weights stay nonnegative;
an away step that hits its bound zeroes that weight exactly and is recorded
as a *drop*.  The feasibility solvers halt with a separating certificate when
every column has strictly positive inner product with the current image.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .instance import Instance, QuadraticObjective, SimplexIterate
from .linesearch import exact_norm_step, exact_quadratic_step

CERT_TOL_SCALE = 1e-12
REFRESH_EVERY = 100
DRIFT_TOL = 1e-10
DEFAULT_EPS = 1e-8
DEFAULT_GAP_TOL = 1e-8
DEFAULT_MAX_ITER = 10**6

# Away steps whose length reaches this fraction of the bound are committed at
# the bound itself: the remaining sliver is below rounding noise and writing
# the exact zero keeps the support bookkeeping literal.
_DROP_SNAP = 1.0 - 1e-12


@dataclass(frozen=True, slots=True)
class StepRecord:
    """State before iteration k plus the step taken at k.

    ``obj`` is the squared image norm for the feasibility solvers and the
    objective value for the quadratic solver.  ``support`` and the snapshots
    are populated only when the run was asked to keep them.
    """

    k: int
    kind: str  # "regular" | "away" | "drop"
    j: int | None
    l: int | None
    theta: float
    theta_max: float
    obj: float
    support_size: int
    support: tuple | None = None
    y_snapshot: np.ndarray | None = None
    x_snapshot: np.ndarray | None = None


@dataclass(frozen=True)
class RunResult:
    status: str  # "converged" | "infeasible_certificate" | "iteration_limit"
    iterate: SimplexIterate
    certificate: np.ndarray | None
    trace: list
    iterations: int
    notes: tuple = ()


def certificate_check(inst: Instance, y: np.ndarray) -> bool:
    """True iff y strictly separates the origin from every column."""
    y = np.asarray(y, dtype=float)
    products = inst.columns.T @ y
    return bool(products.min() > CERT_TOL_SCALE * (1.0 + np.linalg.norm(y)))


def _verify_certificate_exact(A: np.ndarray, y: np.ndarray) -> bool:
    # Compensated summation, one inner product per column; strict positivity.
    m, n = A.shape
    for i in range(n):
        if math.fsum(A[k, i] * y[k] for k in range(m)) <= 0.0:
            return False
    return True


def _require_normalized(inst: Instance) -> None:
    if not inst.normalized:
        raise ValueError(
            "this solver assumes unit columns; run normalize_columns first"
        )


def _check_weights(x: np.ndarray, where: str) -> None:
    if x.min() < -DRIFT_TOL or abs(x.sum() - 1.0) > DRIFT_TOL:
        raise RuntimeError(
            f"simplex invariant violated {where}: min={x.min():.3e}, "
            f"sum-1={x.sum() - 1.0:.3e}"
        )


def _finalize_weights(inst: Instance, x: np.ndarray) -> SimplexIterate:
    _check_weights(x, "at run end")
    total = x.sum()
    if total != 1.0:
        x = x / total
    return SimplexIterate.from_weights(inst, x)


# ---------------------------------------------------------------------------
# Single steps
# ---------------------------------------------------------------------------

def _advance_feasibility(A, x, y, products, ny2, away):
    """Apply one update in place; returns (kind, j, l, theta, theta_max, y_new)."""
    j = int(np.argmin(products))
    if away:
        support = np.nonzero(x)[0]
        l = int(support[np.argmax(products[support])])
        regular_gain = products[j] - ny2  # <a_j - y, y>
        away_gain = ny2 - products[l]  # <y - a_l, y>
        # A full-weight column has no away direction; ties go to the regular
        # branch as well.
        if support.size > 1 and away_gain < regular_gain:
            a = y - A[:, l]
            theta_max = x[l] / (1.0 - x[l])
            step = exact_norm_step(y, a, theta_max)
            if step.theta >= theta_max * _DROP_SNAP:
                x *= 1.0 + theta_max
                x[l] = 0.0
                return "drop", None, l, theta_max, theta_max, y + theta_max * a
            x *= 1.0 + step.theta
            x[l] -= step.theta
            if x[l] <= 0.0:
                raise RuntimeError("away step drove a weight negative")
            return "away", None, l, step.theta, theta_max, y + step.theta * a
    a = A[:, j] - y
    step = exact_norm_step(y, a, 1.0)
    if step.theta == 1.0:
        x[:] = 0.0
    else:
        x *= 1.0 - step.theta
    x[j] += step.theta
    return "regular", j, None, step.theta, 1.0, y + step.theta * a


def _advance_quadratic(A, x, y, grad, products, obj):
    j = int(np.argmin(products))
    ygrad = float(y @ grad)
    support = np.nonzero(x)[0]
    l = int(support[np.argmax(products[support])])
    regular_gain = products[j] - ygrad  # <a_j - y, grad>
    away_gain = ygrad - products[l]  # <y - a_l, grad>
    if support.size > 1 and away_gain < regular_gain:
        a = y - A[:, l]
        theta_max = x[l] / (1.0 - x[l])
        step = exact_quadratic_step(y, a, obj, theta_max)
        if step.theta >= theta_max * _DROP_SNAP:
            x *= 1.0 + theta_max
            x[l] = 0.0
            return "drop", None, l, theta_max, theta_max, y + theta_max * a
        x *= 1.0 + step.theta
        x[l] -= step.theta
        if x[l] <= 0.0:
            raise RuntimeError("away step drove a weight negative")
        return "away", None, l, step.theta, theta_max, y + step.theta * a
    a = A[:, j] - y
    step = exact_quadratic_step(y, a, obj, 1.0)
    if step.theta == 1.0:
        x[:] = 0.0
    else:
        x *= 1.0 - step.theta
    x[j] += step.theta
    return "regular", j, None, step.theta, 1.0, y + step.theta * a


def vn_step(inst: Instance, it: SimplexIterate):
    """One plain feasibility step.

    Returns ``(iterate, record)``, or the separating vector itself when every
    inner product <a_i, y> is strictly positive (the halting test).
    """
    _require_normalized(inst)
    it.validate(inst)
    x = it.x.copy()
    y = it.y.copy()
    ny2 = float(y @ y)
    products = inst.columns.T @ y
    if products.min() > CERT_TOL_SCALE * (1.0 + math.sqrt(ny2)):
        return y.copy()
    if ny2 == 0.0:
        return it, None  # already an exact solution; nothing to do
    kind, j, l, theta, theta_max, _ = _advance_feasibility(
        inst.columns, x, y, products, ny2, away=False
    )
    record = StepRecord(0, kind, j, l, theta, theta_max, ny2, len(it.support),
                        it.support, it.y.copy())
    return SimplexIterate.from_weights(inst, x), record


def vn_away_step(inst: Instance, it: SimplexIterate):
    """One away-step feasibility step; same return convention as vn_step."""
    _require_normalized(inst)
    it.validate(inst)
    x = it.x.copy()
    y = it.y.copy()
    ny2 = float(y @ y)
    products = inst.columns.T @ y
    if products.min() > CERT_TOL_SCALE * (1.0 + math.sqrt(ny2)):
        return y.copy()
    if ny2 == 0.0:
        return it, None
    kind, j, l, theta, theta_max, _ = _advance_feasibility(
        inst.columns, x, y, products, ny2, away=True
    )
    record = StepRecord(0, kind, j, l, theta, theta_max, ny2, len(it.support),
                        it.support, it.y.copy())
    return SimplexIterate.from_weights(inst, x), record


def fw_away_step(inst: Instance, obj: QuadraticObjective, it: SimplexIterate,
                 gap_tol: float = DEFAULT_GAP_TOL):
    """One away-step quadratic-descent step.

    Returns ``(iterate, record)``, or ``(it, None)`` when the linearized gap
    at the best column already certifies stationarity within gap_tol.
    """
    it.validate(inst)
    x = it.x.copy()
    y = it.y.copy()
    grad = obj.gradient(y)
    products = inst.columns.T @ grad
    gap = float(y @ grad) - float(products.min())
    if gap <= gap_tol:
        return it, None
    kind, j, l, theta, theta_max, _ = _advance_quadratic(
        inst.columns, x, y, grad, products, obj
    )
    record = StepRecord(0, kind, j, l, theta, theta_max, obj.value(y),
                        len(it.support), it.support, it.y.copy())
    return SimplexIterate.from_weights(inst, x), record


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------

def _resolve_start(inst: Instance, x0, vertex_required: bool) -> SimplexIterate:
    if x0 is None:
        x0 = SimplexIterate.vertex(inst, 0)
    x0.validate(inst)
    if vertex_required and len(x0.support) != 1:
        raise ValueError("this solver must start from a vertex of the simplex")
    return x0


def _feasibility_run(inst, x0, eps, max_iter, away, snapshots, keep_weights):
    _require_normalized(inst)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    A = inst.columns
    x = np.array(x0.x, dtype=float)
    y = A @ x
    trace: list[StepRecord] = []
    notes: list[str] = []
    status = "iteration_limit"
    certificate = None
    norm_flagged = False
    for k in range(max_iter):
        if k and k % REFRESH_EVERY == 0:
            y = A @ x
            _check_weights(x, f"at refresh k={k}")
        ny2 = float(y @ y)
        if ny2 <= eps * eps:
            status = "converged"
            break
        products = A.T @ y
        if products.min() > CERT_TOL_SCALE * (1.0 + math.sqrt(ny2)):
            if not _verify_certificate_exact(A, y):
                raise RuntimeError("certificate failed compensated re-verification")
            status = "infeasible_certificate"
            certificate = y.copy()
            break
        if not norm_flagged and ny2 > 1.0 + 1e-9:
            notes.append(f"image norm exceeded 1 at k={k}")
            norm_flagged = True
        support = np.nonzero(x)[0]
        stalled = products.min() - ny2 >= 0.0
        if away and stalled:
            stalled = ny2 - products[support].max() >= 0.0
        if stalled:
            raise RuntimeError(
                f"no descent direction left at ||y||={math.sqrt(ny2):.3e}; "
                "eps is below the attainable resolution"
            )
        support_size = int(support.size)
        rec_support = tuple(int(i) for i in support) if snapshots else None
        rec_y = y.copy() if snapshots else None
        rec_x = x.copy() if keep_weights else None
        kind, j, leave, theta, theta_max, y = _advance_feasibility(
            A, x, y, products, ny2, away
        )
        trace.append(StepRecord(k, kind, j, leave, theta, theta_max, ny2,
                                support_size, rec_support, rec_y, rec_x))
    drift = np.linalg.norm(y - A @ x)
    if drift > 1e-9 * (1.0 + inst.max_column_norm()):
        raise RuntimeError(f"image cache drifted by {drift:.3e}")
    return RunResult(status, _finalize_weights(inst, x), certificate, trace,
                     len(trace), tuple(notes))


def vn_run(inst: Instance, x0: SimplexIterate | None = None,
           eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER,
           snapshots: bool = True, keep_weights: bool = False) -> RunResult:
    """Plain feasibility descent: is the origin in the hull?

    Stops when ||y_k|| <= eps, when a separating certificate appears, or at
    max_iter.  x0 defaults to the first vertex.
    """
    x0 = _resolve_start(inst, x0, vertex_required=False)
    return _feasibility_run(inst, x0, eps, max_iter, False, snapshots, keep_weights)


def vn_away_run(inst: Instance, x0: SimplexIterate | None = None,
                eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER,
                snapshots: bool = True, keep_weights: bool = False) -> RunResult:
    """Feasibility descent with away steps; must start from a vertex.

    The vertex start keeps the support-counting argument honest: drop steps
    can never outnumber the other steps on any prefix of the trace.
    """
    x0 = _resolve_start(inst, x0, vertex_required=True)
    return _feasibility_run(inst, x0, eps, max_iter, True, snapshots, keep_weights)


def fw_away_run(inst: Instance, obj: QuadraticObjective,
                x0: SimplexIterate | None = None,
                gap_tol: float = DEFAULT_GAP_TOL,
                max_iter: int = DEFAULT_MAX_ITER,
                snapshots: bool = True, keep_weights: bool = False) -> RunResult:
    """Minimize the quadratic over the hull with away steps.

    Stops when the linearized gap <y - a_j, grad f(y)> at the best column j
    falls to gap_tol; by convexity that certifies f(y) - f* <= gap_tol.  The
    columns need not be normalized here.
    """
    if obj.m != inst.m:
        raise ValueError("objective dimension does not match the instance")
    if gap_tol <= 0.0:
        raise ValueError("gap_tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x0 = _resolve_start(inst, x0, vertex_required=True)
    A = inst.columns
    x = np.array(x0.x, dtype=float)
    y = A @ x
    trace: list[StepRecord] = []
    status = "iteration_limit"
    for k in range(max_iter):
        if k and k % REFRESH_EVERY == 0:
            y = A @ x
            _check_weights(x, f"at refresh k={k}")
        grad = obj.gradient(y)
        products = A.T @ grad
        gap = float(y @ grad) - float(products.min())
        if gap <= gap_tol:
            status = "converged"
            break
        support_size = int(np.count_nonzero(x))
        rec_support = tuple(int(i) for i in np.nonzero(x)[0]) if snapshots else None
        rec_y = y.copy() if snapshots else None
        rec_x = x.copy() if keep_weights else None
        fval = obj.value(y)
        kind, j, l, theta, theta_max, y = _advance_quadratic(
            A, x, y, grad, products, obj
        )
        trace.append(StepRecord(k, kind, j, l, theta, theta_max, fval,
                                support_size, rec_support, rec_y, rec_x))
    drift = np.linalg.norm(y - A @ x)
    if drift > 1e-9 * (1.0 + inst.max_column_norm()):
        raise RuntimeError(f"image cache drifted by {drift:.3e}")
    return RunResult(status, _finalize_weights(inst, x), None, trace,
                     len(trace), ())


# ---------------------------------------------------------------------------
# Trace analysis and serialization
# ---------------------------------------------------------------------------

def observed_width(inst: Instance, obj: QuadraticObjective, trace: list,
                   f_star: float) -> float:
    """Smallest spread-to-suboptimality ratio seen along a trace.

    For each recorded iterate with image y and support S, the ratio is

        max_{l in S, j} <grad f(y), a_l - a_j>  /  sqrt(2 (f(y) - f_star)),

    an upper bound, restricted to visited iterates, on the width constant
    that drives the per-step contraction.  Iterates already at f_star are
    skipped.  Requires traces recorded with snapshots.
    """
    if not trace:
        raise ValueError("trace is empty")
    A = inst.columns
    values = []
    for rec in trace:
        if rec.y_snapshot is None or rec.support is None:
            raise ValueError("trace was recorded without snapshots")
        values.append(obj.value(rec.y_snapshot))
    fmin = min(values)
    if f_star > fmin + 1e-12 * (1.0 + abs(fmin)):
        raise ValueError(f"f_star={f_star} exceeds the trace minimum {fmin}")
    best = math.inf
    for rec, fval in zip(trace, values):
        if fval - f_star <= 0.0:
            continue
        grad = obj.gradient(rec.y_snapshot)
        products = A.T @ grad
        spread = float(products[list(rec.support)].max() - products.min())
        best = min(best, spread / math.sqrt(2.0 * (fval - f_star)))
    if not math.isfinite(best):
        raise ValueError("every trace iterate sits at f_star")
    return best


def write_trace_csv(trace: list, path, m: int | None = None) -> None:
    """Write a trace in the stable CSV layout.

    Columns: k,kind,j,l,theta,theta_max,obj,support_size and, when the trace
    carries snapshots, y_1..y_m.  Missing indices become empty fields.
    """
    with_snapshots = bool(trace) and trace[0].y_snapshot is not None
    if with_snapshots and m is None:
        m = len(trace[0].y_snapshot)
    header = ["k", "kind", "j", "l", "theta", "theta_max", "obj", "support_size"]
    if with_snapshots:
        header += [f"y_{i + 1}" for i in range(m)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in trace:
            row = [
                rec.k,
                rec.kind,
                "" if rec.j is None else rec.j,
                "" if rec.l is None else rec.l,
                repr(rec.theta),
                repr(rec.theta_max),
                repr(rec.obj),
                rec.support_size,
            ]
            if with_snapshots:
                row += [repr(float(v)) for v in rec.y_snapshot]
            writer.writerow(row)
