"""Exact one-dimensional minimizers used by every solver step.

Both searches minimize a convex quadratic in the step length theta over
[0, theta_max] and return the closed-form minimizer clamped to the interval.
The returned objective value is likewise taken from the closed form rather
than by re-evaluating the objective, so these formulas are themselves the
tested artifact; set ``cross_check`` to re-evaluate and compare on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instance import QuadraticObjective

# When True, every step re-evaluates the objective at the returned theta and
# asserts agreement with the closed-form value.  Meant for tests and debugging.
cross_check = False

_CROSS_CHECK_TOL = 1e-9


class PreconditionError(RuntimeError):
    """The search direction is not a descent direction.

    The solvers guarantee a negative directional derivative whenever they
    take a step, so hitting this means the caller selected the wrong
    direction, not that the data is bad.
    """


@dataclass(frozen=True)
class StepSolution:
    """Outcome of an exact line search.

    ``theta_star`` is the unconstrained minimizer, ``theta`` its clamp to
    [0, theta_max], and ``value`` the objective at ``theta`` (the norm for
    the norm search, f for the quadratic search).
    """

    theta_star: float
    theta: float
    clamped: bool
    value: float


def _validate_theta_max(theta_max: float) -> float:
    theta_max = float(theta_max)
    if not theta_max > 0.0:
        raise ValueError(f"theta_max must be positive, got {theta_max}")
    return theta_max


def exact_norm_step(y: np.ndarray, a: np.ndarray, theta_max: float = math.inf) -> StepSolution:
    """Minimize ||y + theta*a|| over theta in [0, theta_max].

    Requires <a, y> < 0 (a strict descent direction for the norm) and a != 0.
    Unclamped, the minimum is at theta = -<a,y>/||a||^2 with squared value
    ||y||^2 - <a,y>^2/||a||^2.
    """
    theta_max = _validate_theta_max(theta_max)
    ay = float(a @ y)
    aa = float(a @ a)
    if aa == 0.0:
        raise ValueError("direction a is the zero vector")
    if ay >= 0.0:
        raise PreconditionError(f"<a, y> = {ay} is not negative")
    theta_star = -ay / aa
    if theta_star > theta_max:
        theta = theta_max
        clamped = True
        value_sq = float(y @ y) + 2.0 * theta * ay + theta * theta * aa
    else:
        theta = theta_star
        clamped = False
        value_sq = float(y @ y) - ay * ay / aa
    value = math.sqrt(max(value_sq, 0.0))
    if cross_check:
        direct = float(np.linalg.norm(y + theta * a))
        assert abs(direct - value) <= _CROSS_CHECK_TOL * (1.0 + direct), (direct, value)
    return StepSolution(theta_star, theta, clamped, value)


def exact_quadratic_step(
    y: np.ndarray,
    a: np.ndarray,
    obj: QuadraticObjective,
    theta_max: float = math.inf,
) -> StepSolution:
    """Minimize f(y + theta*a) over theta in [0, theta_max].

    Requires <a, grad f(y)> < 0 and a != 0.  Unclamped, the minimum is at
    theta = -<a, grad f(y)> / <a, Qa> with value
    f(y) - <a, grad f(y)>^2 / (2 <a, Qa>).
    """
    theta_max = _validate_theta_max(theta_max)
    grad = obj.gradient(y)
    ag = float(a @ grad)
    aqa = float(a @ (obj.Q @ a))
    if float(a @ a) == 0.0:
        raise ValueError("direction a is the zero vector")
    if aqa <= 0.0:
        raise ValueError(f"<a, Qa> = {aqa} is not positive; Q is corrupt")
    if ag >= 0.0:
        raise PreconditionError(f"<a, grad f(y)> = {ag} is not negative")
    theta_star = -ag / aqa
    f0 = obj.value(y)
    if theta_star > theta_max:
        theta = theta_max
        clamped = True
        value = f0 + theta * ag + 0.5 * theta * theta * aqa
    else:
        theta = theta_star
        clamped = False
        value = f0 - ag * ag / (2.0 * aqa)
    if cross_check:
        direct = obj.value(y + theta * a)
        assert abs(direct - value) <= _CROSS_CHECK_TOL * (1.0 + abs(direct)), (direct, value)
    return StepSolution(theta_star, theta, clamped, value)
