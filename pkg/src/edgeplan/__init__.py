"""edgeplan: joint service placement and deadline-constrained task scheduling
on a cloudlet/cloud platform.

Core pieces: scenario model and generator, completion-time model, exact
branch-and-bound solver (with a brute-force oracle and an external-MILP
adapter), local/global greedy heuristics, and a Monte-Carlo sweep harness.
"""

from .exact import (
    BUILTIN_BNB,
    EXTERNAL_MILP,
    INFEASIBLE,
    LIMIT_REACHED,
    OPTIMAL,
    QOS_AWARE,
    QOS_LESS,
    InstanceTooLargeError,
    SolveOptions,
    SolveOutcome,
    brute_force,
    candidate_nodes,
    lower_bound,
    solve,
)
from .experiments import (
    SweepResult,
    SweepRow,
    SweepSpec,
    SummaryRow,
    run_sweep,
    summarize,
)
from .generate import generate
from .heuristics import NodeBudget, global_serving, local_serving
from .model import (
    CLOUD,
    CLOUDLET,
    UNBOUNDED,
    Assignment,
    CostReport,
    DistanceMatrix,
    GenerationParams,
    Node,
    Scenario,
    Service,
    Task,
    UnknownIdError,
    Violation,
    evaluate_objective,
    induced_placements,
    validate,
)
from .timing import completion_time, feasible_targets, is_feasible

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BUILTIN_BNB",
    "CLOUD",
    "CLOUDLET",
    "CostReport",
    "DistanceMatrix",
    "EXTERNAL_MILP",
    "GenerationParams",
    "INFEASIBLE",
    "InstanceTooLargeError",
    "LIMIT_REACHED",
    "Node",
    "NodeBudget",
    "OPTIMAL",
    "QOS_AWARE",
    "QOS_LESS",
    "Scenario",
    "Service",
    "SolveOptions",
    "SolveOutcome",
    "SummaryRow",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "Task",
    "UNBOUNDED",
    "UnknownIdError",
    "Violation",
    "brute_force",
    "candidate_nodes",
    "completion_time",
    "evaluate_objective",
    "feasible_targets",
    "generate",
    "global_serving",
    "induced_placements",
    "is_feasible",
    "local_serving",
    "lower_bound",
    "run_sweep",
    "solve",
    "summarize",
    "validate",
]
