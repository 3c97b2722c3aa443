"""Dense two-phase simplex kernel for small equality-form linear programs.

Solves max <c, z> subject to E z = g, z >= 0.  Callers add their own slack
variables; nothing here is sparse or warm-started.  Problem sizes throughout
the package are tiny (a few hundred variables at most), so the kernel favors
stability: LU-backed basis solves with product-form updates in between full
refactorizations, Dantzig pricing with a Bland fallback once degeneracy piles
up, and a residual/duality audit on every optimal solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, qr

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
RANK_TOL = 1e-10
REFACTOR_EVERY = 50


class LpFailure(RuntimeError):
    """Numerical breakdown: reported instead of returning a wrong answer."""


@dataclass(frozen=True)
class LpProblem:
    """max <c, z>  s.t.  E z = g,  z >= 0."""

    c: np.ndarray
    E: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        E = np.atleast_2d(np.asarray(self.E, dtype=float))
        g = np.asarray(self.g, dtype=float).ravel()
        if E.shape != (g.shape[0], c.shape[0]):
            raise ValueError(
                f"inconsistent dimensions: E {E.shape}, c {c.shape}, g {g.shape}"
            )
        for name, arr in (("c", c), ("E", E), ("g", g)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    z: np.ndarray | None
    value: float | None
    basis: tuple


class _BasisFactors:
    """LU factors of the basis matrix plus the eta file accumulated since."""

    def __init__(self, E: np.ndarray, basis: list):
        self.E = E
        self.refactor(basis)

    def refactor(self, basis: list) -> None:
        self.lu = lu_factor(self.E[:, basis])
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, b: np.ndarray) -> np.ndarray:
        x = lu_solve(self.lu, b)
        for r, w in self.etas:
            t = x[r] / w[r]
            x = x - w * t
            x[r] = t
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        y = c.copy()
        for r, w in reversed(self.etas):
            y[r] = (y[r] - (w @ y - w[r] * y[r])) / w[r]
        return lu_solve(self.lu, y, trans=1)

    def update(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))


def _independent_rows(E: np.ndarray, g: np.ndarray):
    """Rank-revealing row selection; returns kept indices or None if inconsistent."""
    q = E.shape[0]
    if q == 0:
        return np.arange(0)
    R, perm = qr(E.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > RANK_TOL * scale))
    keep = np.sort(perm[:rank])
    if rank == q:
        return keep
    kept_T = E[keep].T
    for i in np.setdiff1d(np.arange(q), keep):
        lam = np.linalg.lstsq(kept_T, E[i], rcond=None)[0]
        if abs(lam @ g[keep] - g[i]) > 1e-8 * (1.0 + abs(g[i])):
            return None
    return keep


class _Core:
    """One simplex run over a fixed column set, shared by both phases."""

    def __init__(self, E, g, basis, zB, degeneracy_cap):
        self.E = E
        self.g = g
        self.basis = basis
        self.zB = zB
        self.factors = _BasisFactors(E, basis)
        self.bland = False
        self.degenerate = 0
        self.degeneracy_cap = degeneracy_cap
        self.pivots = 0
        self.scale = 1.0 + np.abs(g).max() if g.size else 1.0

    def run(self, c: np.ndarray, max_pivots: int) -> str:
        q = self.E.shape[0]
        while True:
            if self.pivots > max_pivots:
                raise LpFailure("pivot limit exceeded; possible cycling")
            u = self.factors.btran(c[self.basis])
            d = c - self.E.T @ u
            d[self.basis] = 0.0
            if self.bland:
                cand = np.nonzero(d > FEAS_TOL)[0]
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmax(d))
                if d[j] <= FEAS_TOL:
                    return "optimal"
            w = self.factors.ftran(self.E[:, j])
            pos = w > PIVOT_TOL
            if not np.any(pos):
                if np.any(w > PIVOT_TOL * 1e-2):
                    raise LpFailure("pivot below 1e-11 with no alternative")
                return "unbounded"
            ratios = np.full(q, np.inf)
            ratios[pos] = self.zB[pos] / w[pos]
            theta = float(ratios.min())
            ties = np.nonzero(ratios <= theta + 1e-12 * (1.0 + abs(theta)))[0]
            if self.bland:
                r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            else:
                r = int(ties[np.argmax(w[ties])])
            self.pivot(j, r, w, theta)

    def pivot(self, j: int, r: int, w: np.ndarray, theta: float) -> None:
        self.zB = self.zB - theta * w
        self.zB[r] = theta
        np.clip(self.zB, 0.0, None, out=self.zB)
        self.basis[r] = j
        self.factors.update(r, w)
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self.factors.refactor(self.basis)
        if theta <= PIVOT_TOL * self.scale:
            self.degenerate += 1
            if self.degenerate >= self.degeneracy_cap:
                self.bland = True


def _evict_artificials(core: _Core, p: int) -> None:
    """Pivot zero-level artificial variables out of the basis."""
    q = core.E.shape[0]
    for r in range(q):
        if core.basis[r] < p:
            continue
        unit = np.zeros(q)
        unit[r] = 1.0
        row = core.factors.btran(unit) @ core.E[:, :p]
        row[[b for b in core.basis if b < p]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= PIVOT_TOL:
            raise LpFailure("cannot remove artificial variable from the basis")
        w = core.factors.ftran(core.E[:, j])
        core.pivot(j, r, w, 0.0)


def solve_lp(problem: LpProblem) -> LpSolution:
    """Two-phase simplex.  Raises LpFailure rather than returning bad numbers."""
    c, E, g = problem.c, problem.E, problem.g
    q0, p = E.shape

    keep = _independent_rows(E, g)
    if keep is None:
        return LpSolution("infeasible", None, None, ())
    E, g = E[keep], g[keep]
    q = E.shape[0]
    if q == 0:
        if np.any(c > FEAS_TOL):
            return LpSolution("unbounded", None, None, ())
        return LpSolution("optimal", np.zeros(p), 0.0, ())

    flip = g < 0
    E = np.where(flip[:, None], -E, E)
    g = np.where(flip, -g, g)

    # Phase 1: artificial columns with an identity basis.
    E1 = np.hstack([E, np.eye(q)])
    c1 = np.concatenate([np.zeros(p), -np.ones(q)])
    core = _Core(E1, g, list(range(p, p + q)), g.copy(), 3 * (p + q))
    max_pivots = 1000 + 200 * (p + q)
    status = core.run(c1, max_pivots)
    if status != "optimal":  # phase-1 objective is bounded above by zero
        raise LpFailure("phase 1 terminated " + status)
    artificial_mass = core.zB[[i for i, b in enumerate(core.basis) if b >= p]].sum()
    if artificial_mass > FEAS_TOL * (1.0 + np.abs(g).max(initial=0.0)):
        return LpSolution("infeasible", None, None, ())
    _evict_artificials(core, p)

    # Phase 2 on the original columns.
    core.E = E
    core.factors = _BasisFactors(E, core.basis)
    status = core.run(np.asarray(c, dtype=float), max_pivots)
    if status == "unbounded":
        return LpSolution("unbounded", None, None, tuple(core.basis))

    z = np.zeros(p)
    z[core.basis] = core.zB
    value = float(c @ z)
    _audit(problem, core, z, value)
    return LpSolution("optimal", z, value, tuple(core.basis))


def _audit(problem: LpProblem, core: _Core, z: np.ndarray, value: float) -> None:
    c, E, g = problem.c, problem.E, problem.g
    residual = np.abs(E @ z - g).max(initial=0.0)
    if residual > FEAS_TOL * (1.0 + np.abs(g).max(initial=0.0)):
        raise LpFailure(f"optimal point violates E z = g by {residual:.3e}")
    if z.min(initial=0.0) < -FEAS_TOL:
        raise LpFailure("optimal point has a negative component")
    core.factors.refactor(core.basis)
    u = core.factors.btran(c[core.basis])
    reduced = c - core.E.T @ u
    reduced[core.basis] = 0.0
    if reduced.max(initial=0.0) > FEAS_TOL:
        raise LpFailure("reduced costs indicate the solve stopped short of optimal")
    dual_gap = abs(u @ core.g - value)
    if dual_gap > 1e-8 * (1.0 + abs(value)):
        raise LpFailure(f"weak-duality audit failed by {dual_gap:.3e}")
