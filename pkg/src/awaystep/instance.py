"""Problem data: column matrices, quadratic objectives, simplex iterates, I/O.

An instance is a set of n points a_1, ..., a_n in R^m, stored as the columns
of an (m, n) matrix.  All solvers operate over conv(a_1, ..., a_n), reached
through weight vectors on the standard simplex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12
SIMPLEX_TOL = 1e-12
CACHE_TOL = 1e-9
SYMMETRY_TOL = 1e-12

_MODE_CODES = {"interior": 1, "boundary": 2, "infeasible": 3}


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Instance:
    """Immutable column matrix with metadata.

    Parameters
    ----------
    columns : (m, n) array
        One point per column.  At least one column must be nonzero; zero
        columns themselves are allowed (they sit at the origin).
    label : str
        Free-form tag, used in reports and benchmark CSVs.
    probe_weights : tuple of arrays
        Optional nonnegative weight vectors of length n that samplers should
        try in addition to random draws.  Set by the named-instance
        generators, for which particular weight vectors attain known width
        values.
    """

    columns: np.ndarray
    label: str = ""
    probe_weights: tuple = ()

    def __post_init__(self):
        cols = np.atleast_2d(np.asarray(self.columns, dtype=float))
        if cols.ndim != 2 or cols.size == 0:
            raise ValueError("columns must form a nonempty 2-d matrix")
        if not np.all(np.isfinite(cols)):
            raise ValueError("columns contain non-finite entries")
        if not np.any(np.abs(cols) > 0):
            raise ValueError("all columns are zero; the hull is the single point 0")
        object.__setattr__(self, "columns", _as_readonly(cols))
        object.__setattr__(
            self, "probe_weights", tuple(_as_readonly(w) for w in self.probe_weights)
        )

    @property
    def m(self) -> int:
        return self.columns.shape[0]

    @property
    def n(self) -> int:
        return self.columns.shape[1]

    @property
    def normalized(self) -> bool:
        """True iff every column has unit Euclidean norm (within 1e-12)."""
        norms = np.linalg.norm(self.columns, axis=0)
        return bool(np.all(np.abs(norms - 1.0) <= NORMALIZATION_TOL))

    def column(self, i: int) -> np.ndarray:
        return self.columns[:, i]

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.columns, axis=0)

    def max_column_norm(self) -> float:
        return float(self.column_norms().max())

    def with_columns(self, columns: np.ndarray, label: str | None = None) -> "Instance":
        return Instance(columns, label=self.label if label is None else label)


@dataclass(frozen=True)
class QuadraticObjective:
    """f(y) = 0.5 <y, Q y> + <b, y> with Q symmetric positive definite."""

    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if b.shape[0] != Q.shape[0]:
            raise ValueError("b length does not match Q")
        if np.max(np.abs(Q - Q.T)) > SYMMETRY_TOL:
            raise ValueError("Q is not symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError as exc:
            raise ValueError("Q is not positive definite") from exc
        object.__setattr__(self, "Q", _as_readonly(Q))
        object.__setattr__(self, "b", _as_readonly(b))

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    def value(self, y: np.ndarray) -> float:
        return float(0.5 * y @ (self.Q @ y) + self.b @ y)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        return self.Q @ y + self.b

    @staticmethod
    def min_norm(m: int) -> "QuadraticObjective":
        """The objective 0.5 ||y||^2, whose hull minimizer is the closest point to 0."""
        return QuadraticObjective(np.eye(m), np.zeros(m))


@dataclass(frozen=True)
class SimplexIterate:
    """A weight vector on the standard simplex with its support and image.

    ``support`` is exactly the set of strictly positive entries; weights
    driven to zero by drop steps are stored as exact zeros so that support
    counting matches the solvers' bookkeeping.  ``y`` caches the hull point
    the weights map to.
    """

    x: np.ndarray
    support: tuple
    y: np.ndarray

    @classmethod
    def from_weights(cls, inst: Instance, x: np.ndarray) -> "SimplexIterate":
        x = np.asarray(x, dtype=float)
        it = cls(_as_readonly(x), tuple(int(i) for i in np.nonzero(x)[0]),
                 _as_readonly(inst.columns @ x))
        it.validate(inst)
        return it

    @classmethod
    def vertex(cls, inst: Instance, j: int) -> "SimplexIterate":
        if not 0 <= j < inst.n:
            raise ValueError(f"vertex index {j} out of range for n={inst.n}")
        x = np.zeros(inst.n)
        x[j] = 1.0
        return cls(_as_readonly(x), (j,), _as_readonly(inst.columns[:, j].copy()))

    def validate(self, inst: Instance) -> None:
        x = self.x
        if x.shape != (inst.n,):
            raise ValueError("weight length does not match instance")
        if np.any(x < 0):
            raise ValueError("negative weight entry")
        if abs(x.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights sum to {x.sum()!r}, not 1")
        if self.support != tuple(int(i) for i in np.nonzero(x)[0]):
            raise ValueError("support set out of sync with weights")
        if np.linalg.norm(self.y - inst.columns @ x) > CACHE_TOL:
            raise ValueError("cached image y is stale")


def normalize_columns(inst: Instance) -> Instance:
    """Scale every column to unit norm.  Zero columns cannot be normalized."""
    norms = inst.column_norms()
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize an instance with a zero column")
    return Instance(inst.columns / norms, label=inst.label)


# ---------------------------------------------------------------------------
# Named instances
# ---------------------------------------------------------------------------

def zigzag_instance() -> Instance:
    """Three unit columns (1,0), (0,-1), (0,1).

    The origin sits on the edge between the last two columns, which makes the
    plain iteration zig-zag with sublinear progress while the away-step
    variant converges linearly.  Useful as a small, fully-understood test
    case: the canonical partition is ({1, 2}, {0}) and the certified width
    bound is 1/sqrt(2).
    """
    return Instance(
        np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 1.0]]),
        label="zigzag",
        probe_weights=(np.array([0.0, 0.5, 0.5]),),
    )


def _hexagon(eps: float, delta: float) -> Instance:
    cols = np.array(
        [
            [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0],
            [-eps, -eps, eps, eps, eps * delta, eps * delta],
        ]
    )
    probe = np.array([0.0, 0.0, 0.0, 0.0, 0.5, 0.5])
    return Instance(cols, label=f"hexagon(eps={eps},delta={delta})",
                    probe_weights=(probe,))


def _segment(delta: float) -> Instance:
    # Two columns at height delta plus the origin itself as a third column.
    cols = np.array([[1.0, -1.0, 0.0], [delta, delta, 0.0]])
    probe = np.array([0.5, 0.5, 0.0])
    return Instance(cols, label=f"segment(delta={delta})", probe_weights=(probe,))


def _tent(eps: float, delta: float) -> Instance:
    cols = np.array(
        [
            [-1.0, 1.0, -1.0, 1.0, 0.0, 0.0],
            [-eps, -eps, eps, eps, 1.0, -1.0],
            [0.0, 0.0, 0.0, 0.0, delta, delta],
        ]
    )
    half = 1.0 / (2.0 * (1.0 + eps))
    probe = np.array([0.0, 0.0, half, half, 0.0, eps / (1.0 + eps)])
    return Instance(cols, label=f"tent(eps={eps},delta={delta})",
                    probe_weights=(probe,))


def named_instance(name: str, eps: float = 0.5, delta: float = 0.5) -> Instance:
    """Construct one of the built-in instances with known geometry.

    - ``zigzag``: origin on an edge; parameters ignored.
    - ``hexagon``: flat hexagon with the origin interior; inscribed radius
      eps, restricted width (1+delta)*eps attained at the bundled probe.
    - ``segment``: a segment at height delta plus an origin column; the two
      lifted columns are strictly separated with margin delta.  Ignores eps.
    - ``tent``: a flat quadrilateral through the origin with two columns
      raised by delta; restricted width at the bundled probe is
      2*eps*delta/(1+eps).

    eps and delta must lie strictly in (0, 1).
    """
    if name == "zigzag":
        return zigzag_instance()
    if name not in ("hexagon", "segment", "tent"):
        raise ValueError(f"unknown instance name {name!r}")
    for label, value in (("eps", eps), ("delta", delta)):
        if name == "segment" and label == "eps":
            continue
        if not 0.0 < value < 1.0:
            raise ValueError(f"{label} must lie strictly in (0, 1), got {value}")
    if name == "hexagon":
        return _hexagon(eps, delta)
    if name == "segment":
        return _segment(delta)
    return _tent(eps, delta)


# ---------------------------------------------------------------------------
# Random families
# ---------------------------------------------------------------------------

def _unit_columns(rng: np.random.Generator, m: int, k: int) -> np.ndarray:
    cols = rng.normal(size=(m, k))
    norms = np.linalg.norm(cols, axis=0)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        cols[:, bad] = rng.normal(size=(m, int(bad.sum())))
        norms = np.linalg.norm(cols, axis=0)
    return cols / norms


def _simplex_vertices(m: int) -> np.ndarray:
    # m+1 unit vectors in R^m with pairwise inner product -1/m; their mean is 0.
    e = np.eye(m + 1) - np.full((m + 1, m + 1), 1.0 / (m + 1))
    q, _ = np.linalg.qr(e[:, :m])
    verts = q.T @ e  # (m, m+1)
    return verts / np.linalg.norm(verts, axis=0)


def _interior_core(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    # Perturbed spanning directions whose hull surrounds the origin: the full
    # +/- coordinate frame when it fits, otherwise a perturbed regular simplex.
    if n >= 2 * m:
        core = np.hstack([np.eye(m), -np.eye(m)])
    else:
        core = _simplex_vertices(m)
    core = core + 0.05 * rng.normal(size=core.shape)
    return core / np.linalg.norm(core, axis=0)


def random_instance(m: int, n: int, seed: int, mode: str) -> Instance:
    """Deterministic random instance with unit columns.

    ``infeasible`` draws every column with first coordinate at least 0.5, so
    the first coordinate axis separates the hull from the origin by
    construction.  ``interior`` surrounds the origin with perturbed spanning
    directions and verifies, through the canonical partition, that the origin
    is in the hull's interior (retrying with fresh perturbations a bounded
    number of times).  ``boundary`` embeds an interior instance in the first
    m-1 coordinates and appends the last coordinate axis as one extra column,
    putting the origin on the boundary of the resulting hull.
    """
    if mode not in _MODE_CODES:
        raise ValueError(f"unknown mode {mode!r}")
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng([seed, _MODE_CODES[mode], m, n])
    label = f"random-{mode}(m={m},n={n},seed={seed})"

    if mode == "infeasible":
        t = rng.uniform(0.5, 1.0, size=n)
        if m == 1:
            cols = np.ones((1, n))
        else:
            w = _unit_columns(rng, m - 1, n)
            cols = np.vstack([t, np.sqrt(1.0 - t**2) * w])
        return Instance(cols, label=label)

    if mode == "interior":
        if n < m + 1:
            raise ValueError("interior mode needs n >= m + 1")
        from .conditioning import canonical_partition  # cycle broken at call time

        for _ in range(20):
            core = _interior_core(rng, m, n)
            extra = n - core.shape[1]
            cols = core if extra == 0 else np.hstack([core, _unit_columns(rng, m, extra)])
            inst = Instance(cols, label=label)
            if not canonical_partition(inst).exposed:
                return inst
        raise RuntimeError("failed to build a verified interior instance")

    # boundary
    if m < 2 or n < m + 1:
        raise ValueError("boundary mode needs m >= 2 and n >= m + 1")
    inner = random_instance(m - 1, n - 1, seed, "interior")
    cols = np.zeros((m, n))
    cols[: m - 1, : n - 1] = inner.columns
    cols[m - 1, n - 1] = 1.0
    return Instance(cols, label=label)


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def _parse_columns(payload: dict) -> np.ndarray:
    if "columns" not in payload:
        raise ValueError("instance file is missing the 'columns' key")
    raw = payload["columns"]
    if not isinstance(raw, list) or not raw:
        raise ValueError("'columns' must be a nonempty list of vectors")
    lengths = {len(c) for c in raw}
    if len(lengths) != 1:
        raise ValueError(f"columns have mismatched lengths {sorted(lengths)}")
    return np.array(raw, dtype=float).T


def load_problem(path) -> tuple[Instance, QuadraticObjective | None]:
    """Read an instance and, when present, its quadratic objective."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"cannot parse {path}: {exc}") from exc
    cols = _parse_columns(payload)
    probes = tuple(np.array(p, dtype=float) for p in payload.get("probes", ()))
    inst = Instance(cols, label=str(payload.get("label", "")),
                    probe_weights=probes)
    objective = None
    if payload.get("objective") is not None:
        spec = payload["objective"]
        objective = QuadraticObjective(np.array(spec["Q"], dtype=float),
                                       np.array(spec["b"], dtype=float))
        if objective.m != inst.m:
            raise ValueError("objective dimension does not match the columns")
    return inst, objective


def load_instance(path) -> Instance:
    return load_problem(path)[0]


def save_instance(inst: Instance, path, objective: QuadraticObjective | None = None) -> None:
    """Write an instance (and optional objective) as JSON at full precision."""
    payload: dict = {"columns": [list(inst.columns[:, i]) for i in range(inst.n)]}
    if inst.label:
        payload["label"] = inst.label
    if inst.probe_weights:
        payload["probes"] = [list(p) for p in inst.probe_weights]
    if objective is not None:
        payload["objective"] = {"Q": objective.Q.tolist(), "b": objective.b.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
