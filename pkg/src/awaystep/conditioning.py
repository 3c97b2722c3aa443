"""Geometry of the hull around the origin: canonical partition, margins,
restricted and relative widths, and certified lower bounds.

The column indices split into a *kernel* (columns that can participate in a
convex combination equal to the origin, all with strictly positive weight)
and an *exposed* set (columns strictly separated from the kernel's span by
some direction).  The kernel is nonempty exactly when the origin lies in the
hull.  The margins refine the signed origin-to-boundary distance on the two
sides of that split, and combine into a certified, always-positive lower
bound on the restricted width whenever the origin is in the hull.  Width
values themselves are estimated by sampling; the estimates are upper bounds
of the true minima and are never conflated with the certified bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, QuadraticObjective
from .simplexlp import LpFailure, LpProblem, solve_lp
from .solvers import fw_away_run, observed_width as _trace_observed_width

MEMBERSHIP_TOL = 1e-9
RANK_RTOL = 1e-9
DEFAULT_MIN_NORM_TOL = 1e-10
_SUPPORT_ENUM_LIMIT = 12


@dataclass(frozen=True)
class Partition:
    """Canonical split of the column indices.

    ``kernel_witness`` has strictly positive weight on every kernel index and
    maps to the origin; ``separating_witness`` is orthogonal to the kernel
    columns' span and has strictly positive inner product with every exposed
    column.  Each witness is present iff its side is nonempty.
    """

    kernel: tuple
    exposed: tuple
    kernel_witness: np.ndarray | None
    separating_witness: np.ndarray | None


@dataclass(frozen=True)
class WidthCertificate:
    """Feasible (u, v) pair certifying a restricted-width value.

    ``lam`` is the raw optimum of the width program; the reported width is
    max(lam, 0), and ``positive`` records whether a positive stretch exists
    at all (it may not when the origin is outside the hull).
    """

    lam: float
    u: np.ndarray
    v: np.ndarray

    @property
    def positive(self) -> bool:
        return self.lam > 0.0


def origin_in_hull(inst: Instance) -> bool:
    """LP membership test for the origin: is {x in simplex : Ax = 0} nonempty?"""
    E = np.vstack([inst.columns, np.ones((1, inst.n))])
    g = np.zeros(inst.m + 1)
    g[-1] = 1.0
    sol = solve_lp(LpProblem(np.zeros(inst.n), E, g))
    return sol.status == "optimal"


# ---------------------------------------------------------------------------
# Canonical partition
# ---------------------------------------------------------------------------

def canonical_partition(inst: Instance) -> Partition:
    """Split the columns into kernel and exposed sets, with witnesses.

    Index i joins the kernel iff max{ x_i : Ax = 0, sum x = 1, x >= 0 } is
    positive; the kernel witness averages the per-index maximizers.  The
    separating witness solves max{ t : <a_i, y> >= t on the exposed set,
    y orthogonal to the kernel columns, ||y||_inf <= 1 }.
    """
    A = inst.columns
    m, n = inst.m, inst.n
    E = np.vstack([A, np.ones((1, n))])
    g = np.zeros(m + 1)
    g[-1] = 1.0

    kernel: list[int] = []
    maximizers: list[np.ndarray] = []
    feasible = True
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        sol = solve_lp(LpProblem(c, E, g))
        if sol.status == "infeasible":
            feasible = False
            break
        if sol.status != "optimal":
            raise LpFailure(f"membership program for column {i} returned {sol.status}")
        if sol.value > MEMBERSHIP_TOL:
            kernel.append(i)
            maximizers.append(sol.z)

    exposed = tuple(i for i in range(n) if i not in set(kernel))
    kernel_witness = None
    if feasible and kernel:
        w = np.mean(maximizers, axis=0)
        w[w < 1e-12] = 0.0
        w /= w.sum()
        if np.linalg.norm(A @ w) > MEMBERSHIP_TOL * (1.0 + inst.max_column_norm()):
            raise LpFailure("kernel witness does not map to the origin")
        if sorted(np.nonzero(w)[0]) != kernel:
            raise LpFailure("kernel witness support disagrees with the kernel set")
        kernel_witness = w

    separating_witness = None
    if exposed:
        separating_witness = _separating_witness(inst, tuple(kernel), exposed)

    return Partition(tuple(kernel), exposed, kernel_witness, separating_witness)


def _separating_witness(inst: Instance, kernel: tuple, exposed: tuple) -> np.ndarray:
    # max t  s.t.  <a_i, y> - t - s_i = 0 (i exposed),  A_kernel^T y = 0,
    #              -1 <= y_k <= 1;  y and t split into signed parts.
    A = inst.columns
    m = inst.m
    ne = len(exposed)
    nk = len(kernel)
    # variables: y+ (m), y- (m), t+, t-, s (ne), box slacks hi (m), lo (m)
    p = 2 * m + 2 + ne + 2 * m
    q = ne + nk + 2 * m
    E = np.zeros((q, p))
    g = np.zeros(q)
    Ae = A[:, list(exposed)]
    E[:ne, :m] = Ae.T
    E[:ne, m : 2 * m] = -Ae.T
    E[:ne, 2 * m] = -1.0
    E[:ne, 2 * m + 1] = 1.0
    E[np.arange(ne), 2 * m + 2 + np.arange(ne)] = -1.0
    if nk:
        Ak = A[:, list(kernel)]
        E[ne : ne + nk, :m] = Ak.T
        E[ne : ne + nk, m : 2 * m] = -Ak.T
    row = ne + nk
    for k in range(m):
        E[row + k, k] = 1.0
        E[row + k, m + k] = -1.0
        E[row + k, 2 * m + 2 + ne + k] = 1.0
        g[row + k] = 1.0
        E[row + m + k, k] = -1.0
        E[row + m + k, m + k] = 1.0
        E[row + m + k, 2 * m + 2 + ne + m + k] = 1.0
        g[row + m + k] = 1.0
    c = np.zeros(p)
    c[2 * m] = 1.0
    c[2 * m + 1] = -1.0
    sol = solve_lp(LpProblem(c, E, g))
    if sol.status != "optimal" or sol.value <= 0.0:
        raise LpFailure("no strict separator found for the exposed columns")
    y = sol.z[:m] - sol.z[m : 2 * m]
    y /= np.linalg.norm(y)
    margin = min(float(A[:, i] @ y) for i in exposed)
    if margin < MEMBERSHIP_TOL:
        raise LpFailure(f"separating witness margin {margin:.3e} below tolerance")
    return y


# ---------------------------------------------------------------------------
# Minimum-norm point and margins
# ---------------------------------------------------------------------------

def min_norm_point(columns, tol: float = DEFAULT_MIN_NORM_TOL,
                   max_iter: int = 200_000):
    """Closest point of conv(columns) to the origin, and its norm.

    Runs the away-step quadratic solver on 0.5||y||^2, then polishes with an
    equality-constrained least-squares solve on the final support, dropping
    negative weights until the support is clean, and re-verifies global
    optimality: <y*, a_i - y*> >= -tol for every column.
    """
    cols = np.atleast_2d(np.asarray(columns, dtype=float))
    m = cols.shape[0]
    if not np.any(np.abs(cols) > 0.0):
        return np.zeros(m), 0.0
    inst = Instance(cols)
    run = fw_away_run(inst, QuadraticObjective.min_norm(m),
                      gap_tol=max(tol * tol, 1e-13), max_iter=max_iter,
                      snapshots=False)
    if run.status != "converged":
        raise RuntimeError(f"minimum-norm solve hit the iteration limit ({max_iter})")
    x = np.array(run.iterate.x)

    support = list(np.nonzero(x)[0])
    while support:
        w = _affine_min_norm(cols[:, support])
        if w.min() >= -1e-12:
            break
        support.pop(int(np.argmin(w)))
    if support:
        x = np.zeros(inst.n)
        x[support] = np.clip(w, 0.0, None)
        x /= x.sum()
    y = cols @ x
    # Keep the polish only if it verifies; otherwise fall back to the run.
    if _min_norm_verified(cols, y, tol):
        return y, float(np.linalg.norm(y))
    y_run = np.array(run.iterate.y)
    if _min_norm_verified(cols, y_run, tol):
        return y_run, float(np.linalg.norm(y_run))
    raise RuntimeError("minimum-norm point failed optimality verification")


def _affine_min_norm(C: np.ndarray) -> np.ndarray:
    # min ||C w||^2 s.t. sum w = 1 (sign-free); lstsq handles singular Grams.
    k = C.shape[1]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = C.T @ C
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def _min_norm_verified(cols: np.ndarray, y: np.ndarray, tol: float) -> bool:
    # Global optimality over the hull: <y, a_i - y> >= -tol for every column.
    return bool(float(np.min(cols.T @ y)) - float(y @ y) >= -tol)


def _orthonormal_basis(V: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Modified Gram-Schmidt with reorthogonalization; columns span col(V)."""
    scale = float(np.linalg.norm(V, axis=0).max(initial=0.0))
    if scale == 0.0:
        return np.zeros((V.shape[0], 0))
    basis: list[np.ndarray] = []
    for v in V.T:
        w = v.astype(float).copy()
        for _ in range(2):
            for u in basis:
                w -= (u @ w) * u
        norm = np.linalg.norm(w)
        if norm > rtol * scale:
            basis.append(w / norm)
    if not basis:
        return np.zeros((V.shape[0], 0))
    return np.column_stack(basis)


def _inscribed_radius(P: np.ndarray) -> float:
    """Radius of the largest origin-centered ball inside conv(P), dim <= 3.

    Every affinely independent subset of size dim spans a candidate
    hyperplane; candidates with all points on one closed side are supporting,
    and the smallest origin distance among them is the radius.  Assumes the
    origin is interior, which makes every supporting distance positive.
    """
    d, k = P.shape
    if d > 3:
        raise ValueError("inscribed radius supported only up to dimension 3")
    scale = float(np.abs(P).max())
    side_tol = 1e-9 * (1.0 + scale)
    if d == 1:
        hi, lo = P.max(), P.min()
        if not (lo < -side_tol < side_tol < hi):
            raise RuntimeError("origin is not interior to the 1-d hull")
        return float(min(hi, -lo))
    best = math.inf
    for subset in itertools.combinations(range(k), d):
        pts = P[:, subset]
        diffs = (pts[:, 1:] - pts[:, :1]).T  # (d-1, d)
        svals, vt = np.linalg.svd(diffs)[1:]
        if svals.min() <= 1e-9 * max(svals.max(), scale):
            continue  # affinely dependent subset
        h = vt[-1]
        offset = float(h @ pts[:, 0])
        if offset < 0.0:
            h, offset = -h, -offset
        if float((h @ P).max()) <= offset + side_tol:
            best = min(best, offset)
    if not math.isfinite(best):
        raise RuntimeError("no supporting hyperplane found; hull is degenerate")
    return best


def hull_margin(inst: Instance, part: Partition | None = None,
                tol: float = DEFAULT_MIN_NORM_TOL) -> float:
    """Signed distance from the origin to the hull boundary.

    Positive when the origin is outside the hull (the minimum-norm distance),
    negative when strictly inside (minus the inscribed radius; needs m <= 3),
    zero when the origin sits on the boundary.
    """
    if part is None:
        part = canonical_partition(inst)
    if not part.kernel:
        return min_norm_point(inst.columns, tol)[1]
    full_rank = _orthonormal_basis(inst.columns).shape[1] == inst.m
    if part.exposed or not full_rank:
        return 0.0
    if inst.m > 3:
        raise ValueError("interior radius unsupported for m > 3")
    return -_inscribed_radius(inst.columns)


def kernel_margin(inst: Instance, part: Partition) -> float | None:
    """Negated inscribed radius of the kernel columns within their own span.

    None when all kernel columns are zero (the span is trivial); otherwise
    strictly negative.  The span dimension must not exceed 3.
    """
    if not part.kernel:
        raise ValueError("kernel side is empty")
    K = inst.columns[:, list(part.kernel)]
    basis = _orthonormal_basis(K)
    r = basis.shape[1]
    if r == 0:
        return None
    if r > 3:
        raise ValueError(f"kernel span has dimension {r} > 3; unsupported")
    return -_inscribed_radius(basis.T @ K)


def exposed_margin(inst: Instance, part: Partition,
                   tol: float = DEFAULT_MIN_NORM_TOL) -> float:
    """Distance from the origin to the hull of the exposed columns, after
    projecting them onto the orthogonal complement of the kernel span.
    Strictly positive whenever the exposed side is nonempty."""
    if not part.exposed:
        raise ValueError("exposed side is empty")
    cols = inst.columns[:, list(part.exposed)]
    if part.kernel:
        basis = _orthonormal_basis(inst.columns[:, list(part.kernel)])
        if basis.shape[1]:
            cols = cols - basis @ (basis.T @ cols)
    value = min_norm_point(cols, tol)[1]
    if value <= 0.0:
        raise RuntimeError("projected exposed hull touches the origin")
    return value


# ---------------------------------------------------------------------------
# Restricted and relative widths
# ---------------------------------------------------------------------------

def restricted_width_at(inst: Instance, x) -> tuple[float, WidthCertificate]:
    """Largest stretch of the direction Ax realizable as Au - Av with u
    supported inside the support of x.

    Solved as a linear program over (u, v, lambda).  The raw optimum may be
    nonpositive when the origin lies outside the hull; the returned width is
    then 0 and the certificate's ``positive`` flag is False.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (inst.n,) or np.any(x < 0.0):
        raise ValueError("x must be a nonnegative vector of length n")
    A = inst.columns
    direction = A @ x
    norm = np.linalg.norm(direction)
    if norm <= 1e-10:
        raise ValueError("Ax is numerically zero; the width is undefined here")
    direction = direction / norm
    support = np.nonzero(x)[0]
    s, n, m = support.size, inst.n, inst.m

    E = np.zeros((m + 2, s + n + 2))
    E[:m, :s] = A[:, support]
    E[:m, s : s + n] = -A
    E[:m, s + n] = -direction
    E[:m, s + n + 1] = direction
    E[m, :s] = 1.0
    E[m + 1, s : s + n] = 1.0
    g = np.zeros(m + 2)
    g[m] = 1.0
    g[m + 1] = 1.0
    c = np.zeros(s + n + 2)
    c[s + n] = 1.0
    c[s + n + 1] = -1.0
    sol = solve_lp(LpProblem(c, E, g))
    if sol.status != "optimal":
        raise LpFailure(f"width program returned {sol.status}")
    u = np.zeros(n)
    u[support] = sol.z[:s]
    v = sol.z[s : s + n]
    lam = float(sol.value)
    return max(lam, 0.0), WidthCertificate(lam, u, v)


def _support_sets(n: int, rng: np.random.Generator):
    if n <= _SUPPORT_ENUM_LIMIT:
        for size in range(1, n + 1):
            yield from itertools.combinations(range(n), size)
        return
    seen = set()
    for _ in range(2 ** _SUPPORT_ENUM_LIMIT):
        size = int(rng.integers(1, n + 1))
        subset = tuple(sorted(rng.choice(n, size=size, replace=False)))
        if subset not in seen:
            seen.add(subset)
            yield subset


def _candidate_weights(inst: Instance, budget: int, seed: int) -> list:
    """Deterministic pool of weight vectors shared by both width estimators."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng([seed, inst.m, inst.n])
    pool: list[np.ndarray] = []
    for subset in _support_sets(inst.n, rng):
        draws = 1 if len(subset) == 1 else budget
        for _ in range(draws):
            x = np.zeros(inst.n)
            x[list(subset)] = rng.dirichlet(np.ones(len(subset)))
            pool.append(x)
    for probe in inst.probe_weights:
        pool.append(np.array(probe, dtype=float))
    return pool


def _spread(inst: Instance, x: np.ndarray) -> float | None:
    y = inst.columns @ x
    norm = np.linalg.norm(y)
    if norm <= 1e-10:
        return None
    products = inst.columns.T @ (y / norm)
    support = np.nonzero(x)[0]
    return float(products[support].max() - products.min())


def _refine_weights(inst: Instance, x: np.ndarray, objective, rounds: int = 3):
    """Coordinatewise multiplicative descent of a width-like objective."""
    best_x = x.copy()
    best = objective(inst, best_x)
    support = np.nonzero(x)[0]
    for _ in range(rounds):
        improved = False
        for i in support:
            for factor in (0.25, 0.5, 2.0, 4.0):
                trial = best_x.copy()
                trial[i] *= factor
                value = objective(inst, trial)
                if value is not None and value < best - 1e-15:
                    best_x, best = trial, value
                    improved = True
        if not improved:
            break
    return best_x, best


def relative_width_estimate(inst: Instance, budget: int = 8, seed: int = 0) -> float:
    """Sampled upper estimate of the relative width (a minimum over all
    feasible directions of the support spread).  Upper bound only: the true
    minimum may be smaller than any finite sample reveals."""
    return _width_scan(inst, budget, seed, with_phi=False)[1]


def restricted_width_estimate(inst: Instance, budget: int = 8, seed: int = 0) -> float:
    """Sampled upper estimate of the restricted width.

    Evaluates the width program over the shared candidate pool (plus the
    relative-width minimizer, so this estimate never exceeds that one) and
    refines the best support by coordinatewise descent.  Upper bound only;
    certified lower bounds come from width_lower_bound.
    """
    return _width_scan(inst, budget, seed, with_phi=True)[0]


def _phi_value(inst: Instance, x: np.ndarray) -> float | None:
    if np.linalg.norm(inst.columns @ x) <= 1e-10:
        return None
    return restricted_width_at(inst, x)[0]


def _width_scan(inst: Instance, budget: int, seed: int, with_phi: bool):
    pool = _candidate_weights(inst, budget, seed)
    spread_best = math.inf
    spread_arg = None
    for x in pool:
        value = _spread(inst, x)
        if value is not None and value < spread_best:
            spread_best, spread_arg = value, x
    if spread_arg is None:
        raise RuntimeError("no candidate direction had a nonzero image")
    refined_x, refined_val = _refine_weights(
        inst, spread_arg, lambda i, w: _spread(i, w)
    )
    w_est = min(spread_best, refined_val)
    if not with_phi:
        return None, w_est

    phi_best = math.inf
    phi_arg = None
    for x in pool + [spread_arg, refined_x]:
        value = _phi_value(inst, x)
        if value is not None and value < phi_best:
            phi_best, phi_arg = value, x
    phi_refined_x, phi_refined = _refine_weights(
        inst, phi_arg, lambda i, w: _phi_value(i, w)
    )
    return min(phi_best, phi_refined), w_est


def hull_diameter(columns) -> float:
    """Largest distance between two hull points; attained at a column pair."""
    cols = np.atleast_2d(np.asarray(columns, dtype=float))
    sq = np.sum(cols * cols, axis=0)
    dist_sq = sq[:, None] + sq[None, :] - 2.0 * (cols.T @ cols)
    return float(math.sqrt(max(dist_sq.max(), 0.0)))


# ---------------------------------------------------------------------------
# Metric transform and certified bound
# ---------------------------------------------------------------------------

def metric_transform(inst: Instance, obj: QuadraticObjective,
                     y_star: np.ndarray) -> Instance:
    """Columns recentred at y_star and mapped by the Cholesky factor of Q.

    Euclidean geometry of the result (widths, diameter) equals the Q-metric
    geometry of the original problem around y_star, which is what drives the
    quadratic solver's contraction rate.  y_star must lie in the hull, which
    is verified by a small linear program.
    """
    y_star = np.asarray(y_star, dtype=float).ravel()
    if y_star.shape != (inst.m,):
        raise ValueError("y_star has the wrong dimension")
    gap = _hull_distance_inf(inst, y_star)
    if gap > 1e-8 * (1.0 + max(inst.max_column_norm(), np.abs(y_star).max())):
        raise ValueError(f"y_star is outside the hull (inf-norm gap {gap:.3e})")
    M = np.linalg.cholesky(obj.Q).T  # upper triangular, M^T M = Q
    shifted = inst.columns - y_star[:, None]
    return Instance(M @ shifted, label=(inst.label + "|metric") if inst.label else "metric")


def _hull_distance_inf(inst: Instance, point: np.ndarray) -> float:
    # min t s.t. -t <= (Ax - point) <= t elementwise, x in the simplex.
    A, m, n = inst.columns, inst.m, inst.n
    p = n + 1 + 2 * m
    E = np.zeros((2 * m + 1, p))
    g = np.zeros(2 * m + 1)
    E[:m, :n] = A
    E[:m, n] = -1.0
    E[:m, n + 1 : n + 1 + m] = np.eye(m)
    g[:m] = point
    E[m : 2 * m, :n] = -A
    E[m : 2 * m, n] = -1.0
    E[m : 2 * m, n + 1 + m :] = np.eye(m)
    g[m : 2 * m] = -point
    E[2 * m, :n] = 1.0
    g[2 * m] = 1.0
    c = np.zeros(p)
    c[n] = -1.0
    sol = solve_lp(LpProblem(c, E, g))
    if sol.status != "optimal":
        raise LpFailure(f"hull-distance program returned {sol.status}")
    return float(sol.z[n])


def width_lower_bound(inst: Instance, part: Partition,
                      kernel_m: float | None,
                      exposed_m: float | None) -> tuple[float, str]:
    """Certified lower bound on the restricted width, with the case taken.

    - ``kernel-only``: no exposed columns; the bound is |kernel margin|.
    - ``zero-span-kernel``: the kernel columns are all zero; the bound is the
      exposed margin.
    - ``mixed``: both sides active; the bound combines the margins with the
      largest column norm.
    - ``empty-kernel-augmented``: the origin is outside the hull, so no
      positive width exists for the instance itself; the returned bound
      certifies the instance augmented with an appended origin column.
    """
    if not part.exposed:
        if kernel_m is None:
            raise ValueError("kernel-only case needs the kernel margin")
        return abs(kernel_m), "kernel-only"
    if exposed_m is None:
        raise ValueError("this case needs the exposed margin")
    if not part.kernel:
        return exposed_m, "empty-kernel-augmented"
    if kernel_m is None:
        return exposed_m, "zero-span-kernel"
    norm_a = inst.max_column_norm()
    return (
        abs(kernel_m) * exposed_m / math.sqrt(norm_a**2 + exposed_m**2),
        "mixed",
    )


# ---------------------------------------------------------------------------
# Consolidated report
# ---------------------------------------------------------------------------

@dataclass
class ConditionReport:
    label: str
    m: int
    n: int
    normalized: bool
    kernel: tuple
    exposed: tuple
    kernel_dim: int
    margin: float | None
    kernel_margin: float | None
    exposed_margin: float | None
    width_lower: float | None
    width_case: str
    width_upper: float
    relative_width_upper: float
    width_gap: float
    diameter: float
    max_column_norm: float
    observed_width: float | None
    flags: dict
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def _clean(value):
            if isinstance(value, np.floating):
                return float(value)
            return value

        payload = {
            "label": self.label,
            "m": self.m,
            "n": self.n,
            "normalized": self.normalized,
            "kernel": list(self.kernel),
            "exposed": list(self.exposed),
            "kernel_dim": self.kernel_dim,
            "margin": _clean(self.margin),
            "kernel_margin": _clean(self.kernel_margin),
            "exposed_margin": _clean(self.exposed_margin),
            "width_lower": _clean(self.width_lower),
            "width_case": self.width_case,
            "width_upper": _clean(self.width_upper),
            "relative_width_upper": _clean(self.relative_width_upper),
            "width_gap": _clean(self.width_gap),
            "diameter": _clean(self.diameter),
            "max_column_norm": _clean(self.max_column_norm),
            "observed_width": _clean(self.observed_width),
            "flags": dict(self.flags),
            "notes": dict(self.notes),
            "provenance": {
                "width_lower": "certified lower bound on the restricted width",
                "width_upper": "sampling estimate; upper bound on the true minimum",
                "relative_width_upper": "sampling estimate; upper bound on the true minimum",
                "width_gap": "relative minus restricted upper estimates; a measurement, not a test",
                "margin": "signed origin-to-boundary distance; positive outside, negative inside",
            },
        }
        return payload


def condition_report(inst: Instance, budget: int = 8, seed: int = 0,
                     obj: QuadraticObjective | None = None,
                     trace: list | None = None,
                     f_star: float | None = None) -> ConditionReport:
    """Compute the full geometric report for an instance.

    Fields that are unsupported for the given dimensions (the interior radius
    beyond m = 3, kernel spans beyond dimension 3) are left as None with an
    explanatory note rather than silently approximated.  When a solver trace
    plus its optimal value are supplied, the observed width along that trace
    is included.
    """
    notes: dict[str, str] = {}
    part = canonical_partition(inst)

    k_margin = None
    if part.kernel:
        try:
            k_margin = kernel_margin(inst, part)
            if k_margin is None:
                notes["kernel_margin"] = "all kernel columns are zero; span is trivial"
        except ValueError as exc:
            notes["kernel_margin"] = str(exc)
    e_margin = None
    if part.exposed:
        e_margin = exposed_margin(inst, part)

    margin = None
    try:
        margin = hull_margin(inst, part)
    except ValueError as exc:
        notes["margin"] = str(exc)

    width_lower = None
    width_case = "unavailable"
    try:
        width_lower, width_case = width_lower_bound(inst, part, k_margin, e_margin)
        if width_case == "empty-kernel-augmented":
            notes["width_lower"] = (
                "origin outside the hull; bound certifies the instance "
                "augmented with an origin column"
            )
        if width_case == "kernel-only" and "kernel_margin" in notes:
            width_lower, width_case = None, "unavailable"
    except ValueError as exc:
        notes["width_lower"] = str(exc)

    width_upper, rel_width_upper = _width_scan(inst, budget, seed, with_phi=True)

    observed = None
    if trace is not None:
        if obj is None or f_star is None:
            raise ValueError("observed width needs obj and f_star alongside the trace")
        observed = _trace_observed_width(inst, obj, trace, f_star)

    tol = 1e-8
    flags = {
        "margin_vs_width_ok": True,
        "positive_bound_ok": True,
        "sandwich_ok": width_lower is None
        or (width_lower <= width_upper + tol and width_upper <= rel_width_upper + tol),
    }
    if part.kernel and margin is not None:
        flags["margin_vs_width_ok"] = rel_width_upper >= abs(margin) - tol
    if part.kernel:
        flags["positive_bound_ok"] = width_lower is None or width_lower > 0.0

    return ConditionReport(
        label=inst.label,
        m=inst.m,
        n=inst.n,
        normalized=inst.normalized,
        kernel=part.kernel,
        exposed=part.exposed,
        kernel_dim=_orthonormal_basis(
            inst.columns[:, list(part.kernel)]
        ).shape[1] if part.kernel else 0,
        margin=margin,
        kernel_margin=k_margin,
        exposed_margin=e_margin,
        width_lower=width_lower,
        width_case=width_case,
        width_upper=width_upper,
        relative_width_upper=rel_width_upper,
        width_gap=rel_width_upper - width_upper,
        diameter=hull_diameter(inst.columns),
        max_column_norm=inst.max_column_norm(),
        observed_width=observed,
        flags=flags,
        notes=notes,
    )
