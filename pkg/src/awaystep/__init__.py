"""Away-step descent over convex hulls of point sets.

Decides whether the origin lies in conv(a_1, ..., a_n), minimizes convex
quadratics over that hull, and computes (or certifiably bounds) the geometric
quantities that govern how fast the iterations converge.
"""

from .instance import (
    Instance,
    QuadraticObjective,
    SimplexIterate,
    load_instance,
    load_problem,
    named_instance,
    normalize_columns,
    random_instance,
    save_instance,
    zigzag_instance,
)
from .linesearch import StepSolution, exact_norm_step, exact_quadratic_step
from .simplexlp import LpFailure, LpProblem, LpSolution, solve_lp
from .solvers import (
    RunResult,
    StepRecord,
    certificate_check,
    fw_away_run,
    fw_away_step,
    observed_width,
    vn_away_run,
    vn_away_step,
    vn_run,
    vn_step,
    write_trace_csv,
)
from .conditioning import (
    ConditionReport,
    Partition,
    WidthCertificate,
    canonical_partition,
    condition_report,
    exposed_margin,
    hull_diameter,
    hull_margin,
    kernel_margin,
    metric_transform,
    min_norm_point,
    relative_width_estimate,
    restricted_width_at,
    restricted_width_estimate,
    width_lower_bound,
)

__all__ = [
    "Instance",
    "QuadraticObjective",
    "SimplexIterate",
    "load_instance",
    "load_problem",
    "save_instance",
    "normalize_columns",
    "zigzag_instance",
    "named_instance",
    "random_instance",
    "StepSolution",
    "exact_norm_step",
    "exact_quadratic_step",
    "LpProblem",
    "LpSolution",
    "LpFailure",
    "solve_lp",
    "StepRecord",
    "RunResult",
    "vn_step",
    "vn_run",
    "vn_away_step",
    "vn_away_run",
    "fw_away_step",
    "fw_away_run",
    "certificate_check",
    "observed_width",
    "write_trace_csv",
    "Partition",
    "WidthCertificate",
    "ConditionReport",
    "canonical_partition",
    "min_norm_point",
    "hull_margin",
    "kernel_margin",
    "exposed_margin",
    "restricted_width_at",
    "restricted_width_estimate",
    "relative_width_estimate",
    "hull_diameter",
    "metric_transform",
    "width_lower_bound",
    "condition_report",
]
