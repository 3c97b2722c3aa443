import numpy as np
import pytest

from awaystep import LpFailure, LpProblem, solve_lp

from oracles import brute_lp_max


def test_vertex_optimum():
    sol = solve_lp(LpProblem(np.array([1.0, 0.0, 0.0]),
                             np.ones((1, 3)), np.array([1.0])))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(sol.z, [1.0, 0.0, 0.0])


def test_infeasible_negative_sum():
    sol = solve_lp(LpProblem(np.zeros(2), np.array([[1.0, 1.0]]),
                             np.array([-1.0])))
    assert sol.status == "infeasible"


def test_unbounded_ray():
    sol = solve_lp(LpProblem(np.array([1.0, 1.0]),
                             np.array([[1.0, -1.0]]), np.array([0.0])))
    assert sol.status == "unbounded"


def test_redundant_rows_are_dropped():
    E = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
    g = np.array([1.0, 2.0, 0.5])
    sol = solve_lp(LpProblem(np.array([1.0, 0.0, 0.0]), E, g))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0, abs=1e-9)


def test_inconsistent_redundant_rows_infeasible():
    E = np.array([[1.0, 1.0], [2.0, 2.0]])
    g = np.array([1.0, 3.0])
    assert solve_lp(LpProblem(np.zeros(2), E, g)).status == "infeasible"


def test_dimension_validation():
    with pytest.raises(ValueError, match="dimensions"):
        LpProblem(np.zeros(2), np.zeros((1, 3)), np.zeros(1))


def test_degenerate_problem_terminates():
    # Many ties in the ratio test; Bland's fallback keeps this finite.
    n = 6
    E = np.vstack([np.eye(n), np.ones((1, n))])
    g = np.concatenate([np.zeros(n - 1), [1.0, 1.0]])
    sol = solve_lp(LpProblem(np.arange(n, dtype=float), E[: n], g[: n]))
    assert sol.status == "optimal"


def test_solution_invariants_on_random_problems():
    rng = np.random.default_rng(12)
    for _ in range(50):
        q, p = 3, 7
        E = rng.normal(size=(q - 1, p))
        E = np.vstack([E, np.ones((1, p))])  # sum row keeps the set bounded
        z0 = rng.uniform(0.1, 1.0, size=p)
        z0 /= z0.sum()
        g = E @ z0
        c = rng.normal(size=p)
        sol = solve_lp(LpProblem(c, E, g))
        assert sol.status == "optimal"
        assert np.abs(E @ sol.z - g).max() <= 1e-9 * (1 + np.abs(g).max())
        assert sol.z.min() >= -1e-9


def test_cross_validation_against_vertex_enumeration():
    rng = np.random.default_rng(99)
    for trial in range(1000):
        q = int(rng.integers(2, 4))
        p = int(rng.integers(q + 1, 8))
        E = rng.normal(size=(q - 1, p))
        E = np.vstack([E, np.ones((1, p))])
        z0 = rng.uniform(0.1, 1.0, size=p)
        g = E @ (z0 / z0.sum())
        c = rng.normal(size=p)
        sol = solve_lp(LpProblem(c, E, g))
        assert sol.status == "optimal", f"trial {trial}"
        expected = brute_lp_max(c, E, g)
        assert sol.value == pytest.approx(expected, abs=1e-7), f"trial {trial}"


def test_heavily_degenerate_problems_against_oracle():
    # Duplicated columns and zero right-hand sides force ties everywhere in
    # the ratio test; the degenerate-pivot counter and Bland fallback must
    # still deliver the optimum.
    rng = np.random.default_rng(7)
    for trial in range(100):
        q, base = 3, 4
        E0 = rng.integers(-2, 3, size=(q - 1, base)).astype(float)
        E = np.hstack([E0, E0])  # every column duplicated
        E = np.vstack([E, np.ones((1, 2 * base))])
        g = np.concatenate([np.zeros(q - 1), [1.0]])
        c = rng.integers(-3, 4, size=2 * base).astype(float)
        sol = solve_lp(LpProblem(c, E, g))
        if sol.status != "optimal":
            assert sol.status == "infeasible"
            continue
        expected = brute_lp_max(c, E, g)
        assert sol.value == pytest.approx(expected, abs=1e-7), f"trial {trial}"


def test_large_problem_exercises_eta_updates_and_refactorization():
    # Big enough that the solve takes well over fifty pivots, so the basis
    # factors go through several eta accumulations and refactorizations.
    rng = np.random.default_rng(21)
    q, p = 25, 90
    E = rng.normal(size=(q - 1, p))
    E = np.vstack([E, np.ones((1, p))])
    z0 = rng.uniform(0.1, 1.0, size=p)
    g = E @ (z0 / z0.sum())
    c = rng.normal(size=p)
    sol = solve_lp(LpProblem(c, E, g))  # internal audits check optimality
    assert sol.status == "optimal"
    assert np.abs(E @ sol.z - g).max() <= 1e-9 * (1 + np.abs(g).max())
    assert len(sol.basis) == q
