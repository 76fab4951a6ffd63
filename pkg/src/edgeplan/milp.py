"""Standard-form integer-program interchange for the external solver seam.

`build_problem` lowers a scenario to a 0/1 program over placement columns
("place", service, cloudlet) and schedule columns ("run", task, node):

    minimize    placement prices + schedule prices
    subject to  storage[j]:  sum of placed storage demands <= capacity   (finite j)
                compute[j]:  sum of scheduled compute times <= capacity  (finite j)
                assign[t]:   each task scheduled exactly once
                link[t,j]:   run(t, cloudlet j) <= place(service(t), j)

Only services requested by some task get columns, and under qos_aware mode
only deadline-feasible (task, node) pairs do. `to_document` emits the problem
as JSON (objective vector, column bounds/integrality, row bounds, constraint
matrix in sparse triplets) for out-of-process solvers; any object with a
``solve(problem) -> MilpSolution`` method works as a backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import Assignment, Scenario, induced_placements
from .timing import is_feasible

PLACE = "place"
RUN = "run"


@dataclass(frozen=True)
class MilpProblem:
    objective: tuple[float, ...]
    columns: tuple[tuple[str, int, int], ...]   # (PLACE, service, node) | (RUN, task, node)
    col_lower: tuple[float, ...]
    col_upper: tuple[float, ...]
    integrality: tuple[int, ...]                # 1 = integer column
    rows: tuple[tuple[str, float, float], ...]  # (name, lower, upper)
    entries: tuple[tuple[int, int, float], ...]  # (row, column, coefficient)

    def column_names(self) -> list[str]:
        return [f"{kind}[{a},{b}]" for kind, a, b in self.columns]

    def to_document(self) -> dict:
        return {
            "sense": "min",
            "objective": list(self.objective),
            "columns": [
                {"name": name, "lower": lo, "upper": up, "integer": bool(ig)}
                for name, lo, up, ig in zip(self.column_names(), self.col_lower,
                                            self.col_upper, self.integrality)
            ],
            "rows": [
                {"name": name,
                 "lower": None if lo == -math.inf else lo,
                 "upper": None if up == math.inf else up}
                for name, lo, up in self.rows
            ],
            "entries": [list(e) for e in self.entries],
        }


@dataclass(frozen=True)
class MilpSolution:
    status: str                                  # exact.OPTIMAL / INFEASIBLE / LIMIT_REACHED
    values: Optional[tuple[float, ...]]
    best_bound: Optional[float] = None
    nodes_explored: int = 0


def build_problem(scenario: Scenario, mode: str) -> MilpProblem:
    from .exact import QOS_AWARE

    check_deadline = mode == QOS_AWARE
    cloudlet_ids = [n.id for n in scenario.cloudlets]

    run_cols: list[tuple[str, int, int]] = []
    run_cost: list[float] = []
    for task in sorted(scenario.tasks, key=lambda t: t.id):
        service = scenario.service(task.service)
        for node in sorted(scenario.nodes, key=lambda n: n.id):
            if check_deadline and not is_feasible(task, node.id, scenario.distances):
                continue
            run_cols.append((RUN, task.id, node.id))
            run_cost.append(service.schedule_cost[node.id])

    # Placement columns only for pairs some schedulable task could use.
    needed_pairs = sorted({(scenario.task(t).service, j) for _, t, j in run_cols
                           if not scenario.node(j).is_cloud})
    place_cols = [(PLACE, m, j) for m, j in needed_pairs]
    place_cost = [scenario.service(m).placement_cost[j] for m, j in needed_pairs]

    columns = tuple(place_cols + run_cols)
    objective = tuple(place_cost + run_cost)
    col_index = {col: k for k, col in enumerate(columns)}

    rows: list[tuple[str, float, float]] = []
    entries: list[tuple[int, int, float]] = []

    for j in cloudlet_ids:
        cap = scenario.node(j).storage_capacity
        cols = [(m, jj) for m, jj in needed_pairs if jj == j]
        if math.isinf(cap) or not cols:
            continue
        row = len(rows)
        rows.append((f"storage[{j}]", -math.inf, cap))
        for m, jj in cols:
            entries.append((row, col_index[(PLACE, m, jj)],
                            scenario.service(m).storage_demand))

    for node in sorted(scenario.nodes, key=lambda n: n.id):
        if math.isinf(node.compute_capacity):
            continue
        cols = [(t, j) for _, t, j in run_cols if j == node.id]
        if not cols:
            continue
        row = len(rows)
        rows.append((f"compute[{node.id}]", -math.inf, node.compute_capacity))
        for t, j in cols:
            entries.append((row, col_index[(RUN, t, j)], scenario.task(t).compute_time))

    for task in sorted(scenario.tasks, key=lambda t: t.id):
        row = len(rows)
        rows.append((f"assign[{task.id}]", 1.0, 1.0))
        for kind, t, j in run_cols:
            if t == task.id:
                entries.append((row, col_index[(RUN, t, j)], 1.0))

    for kind, t, j in run_cols:
        if scenario.node(j).is_cloud:
            continue
        m = scenario.task(t).service
        row = len(rows)
        rows.append((f"link[{t},{j}]", -math.inf, 0.0))
        entries.append((row, col_index[(RUN, t, j)], 1.0))
        entries.append((row, col_index[(PLACE, m, j)], -1.0))

    n = len(columns)
    return MilpProblem(
        objective=objective,
        columns=columns,
        col_lower=(0.0,) * n,
        col_upper=(1.0,) * n,
        integrality=(1,) * n,
        rows=tuple(rows),
        entries=tuple(entries),
    )


def decode_solution(scenario: Scenario, problem: MilpProblem,
                    values: Sequence[float]) -> Assignment:
    """Turn solver column values into an Assignment. Placements are re-derived
    from the schedules, which keeps them minimal and never worse at an optimum
    with nonnegative placement prices."""
    schedules: dict[int, int] = {}
    for (kind, a, b), value in zip(problem.columns, values):
        if kind != RUN or value < 0.5:
            continue
        if a in schedules:
            raise ValueError(f"task {a} scheduled on two nodes in the solver output")
        schedules[a] = b
    missing = [t.id for t in scenario.tasks if t.id not in schedules]
    if missing:
        raise ValueError(f"solver output schedules nothing for tasks {missing}")
    return Assignment(placements=induced_placements(scenario, schedules),
                      schedules=schedules)


class ScipyMilpBackend:
    """Backend adapter over scipy.optimize.milp (the bundled HiGHS solver)."""

    def __init__(self, time_limit: Optional[float] = None,
                 mip_rel_gap: float = 0.0):
        self.time_limit = time_limit
        self.mip_rel_gap = mip_rel_gap

    def solve(self, problem: MilpProblem) -> MilpSolution:
        import numpy as np
        from scipy import sparse
        from scipy.optimize import Bounds, LinearConstraint, milp

        from .exact import INFEASIBLE, LIMIT_REACHED, OPTIMAL

        n = len(problem.columns)
        if problem.entries:
            r, c, v = zip(*problem.entries)
        else:
            r, c, v = (), (), ()
        a = sparse.coo_matrix((v, (r, c)), shape=(len(problem.rows), n))
        row_lower = np.array([lo for _, lo, _ in problem.rows])
        row_upper = np.array([up for _, _, up in problem.rows])
        options = {"mip_rel_gap": self.mip_rel_gap}
        if self.time_limit is not None:
            options["time_limit"] = self.time_limit
        result = milp(
            c=np.asarray(problem.objective),
            constraints=LinearConstraint(a, row_lower, row_upper),
            integrality=np.asarray(problem.integrality),
            bounds=Bounds(np.asarray(problem.col_lower), np.asarray(problem.col_upper)),
            options=options,
        )
        if result.status == 0:
            status = OPTIMAL
        elif result.status == 2:
            status = INFEASIBLE
        else:
            status = LIMIT_REACHED
        values = tuple(float(x) for x in result.x) if result.x is not None else None
        bound = getattr(result, "mip_dual_bound", None)
        nodes = int(getattr(result, "mip_node_count", 0) or 0)
        return MilpSolution(status=status, values=values, best_bound=bound,
                            nodes_explored=nodes)
