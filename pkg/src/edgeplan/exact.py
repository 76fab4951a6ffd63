"""Exact minimization of the joint placement/scheduling cost.

Two engines behind one interface: a builtin depth-first branch and bound
(desk-scale instances) and an adapter seam for an external MILP solver
(paper-scale instances). A brute-force enumerator serves as the correctness
oracle for both on tiny instances.

The branch and bound only branches on task schedules; placements are derived
from schedules at the leaves, which is lossless because placement costs are
nonnegative, so an optimal solution never places a service nobody uses there.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .model import (
    Assignment,
    CostReport,
    Scenario,
    evaluate_objective,
    induced_placements,
)
from .timing import completion_time, feasible_targets

QOS_AWARE = "qos_aware"
QOS_LESS = "qos_less"

BUILTIN_BNB = "builtin_bnb"
EXTERNAL_MILP = "external_milp"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
LIMIT_REACHED = "limit_reached"

#: Complete task->node maps the brute-force enumerator will walk before refusing.
DEFAULT_ENUMERATION_CAP = 4_000_000


class InstanceTooLargeError(ValueError):
    """Brute-force enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class SolveOptions:
    """Solver configuration. qos_less drops the deadline constraint entirely;
    the cost report then counts deadline misses as drops."""

    mode: str = QOS_AWARE
    time_limit: Optional[float] = None   # seconds
    node_limit: Optional[int] = None     # search-tree node budget
    backend: str = BUILTIN_BNB

    def __post_init__(self):
        if self.mode not in (QOS_AWARE, QOS_LESS):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.backend not in (BUILTIN_BNB, EXTERNAL_MILP):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be > 0")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be > 0")


@dataclass(frozen=True)
class SolveOutcome:
    """Result of a solve call. best_bound is a valid global lower bound on the
    optimum at termination; when status is "optimal" it equals report.total."""

    status: str
    assignment: Optional[Assignment]
    report: Optional[CostReport]
    nodes_explored: int
    runtime: float
    best_bound: float


def candidate_nodes(scenario: Scenario, task, mode: str) -> list[int]:
    """Nodes a task may be scheduled on under the given mode, fastest first
    (ties by ascending node id)."""
    if mode == QOS_AWARE:
        return feasible_targets(task, scenario)
    pool = [(completion_time(task, n.id, scenario.distances), n.id) for n in scenario.nodes]
    pool.sort()
    return [node_id for _, node_id in pool]


def lower_bound(scenario: Scenario, partial: Mapping[int, int],
                mode: str = QOS_AWARE) -> float:
    """Admissible lower bound for any completion of a partial schedule:
    the exact cost of the partial (schedules plus induced placements) plus,
    for every unassigned task, the cheapest schedule cost over its candidate
    nodes. Placements the completion has not committed yet contribute zero."""
    cost = 0.0
    for service_id, node_id in sorted(induced_placements(scenario, partial)):
        cost += scenario.service(service_id).placement_cost[node_id]
    for task_id in sorted(partial):
        task = scenario.task(task_id)
        cost += scenario.service(task.service).schedule_cost[partial[task_id]]
    for task in scenario.tasks:
        if task.id in partial:
            continue
        schedule_cost = scenario.service(task.service).schedule_cost
        cost += min(schedule_cost[j] for j in candidate_nodes(scenario, task, mode))
    return cost


def brute_force(scenario: Scenario, options: Optional[SolveOptions] = None,
                enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> SolveOutcome:
    """Exhaustive oracle: enumerate every complete task->node map, keep the
    cheapest feasible one. Ties resolve to the lexicographically smallest
    schedule vector (tasks in id order, node ids ascending), so the outcome is
    deterministic. Intended for tiny instances only."""
    options = options or SolveOptions()
    start = time.perf_counter()
    tasks = sorted(scenario.tasks, key=lambda t: t.id)
    node_ids = sorted(n.id for n in scenario.nodes)
    total_combos = len(node_ids) ** len(tasks)
    if total_combos > enumeration_cap:
        raise InstanceTooLargeError(
            f"{len(node_ids)}^{len(tasks)} = {total_combos} maps exceeds cap {enumeration_cap}")

    check_deadline = options.mode == QOS_AWARE
    feasible = {(t.id, j): completion_time(t, j, scenario.distances) <= t.qos_deadline
                for t in tasks for j in node_ids}
    sched_cost = {(t.id, j): scenario.service(t.service).schedule_cost[j]
                  for t in tasks for j in node_ids}
    storage_cap = {n.id: n.storage_capacity for n in scenario.nodes}
    compute_cap = {n.id: n.compute_capacity for n in scenario.nodes}
    is_cloud = {n.id: n.is_cloud for n in scenario.nodes}
    demand = {s.id: s.storage_demand for s in scenario.services}
    place_cost = {(s.id, j): c for s in scenario.services
                  for j, c in s.placement_cost.items()}

    best_cost = math.inf
    best_map: Optional[tuple[int, ...]] = None
    explored = 0
    for combo in itertools.product(node_ids, repeat=len(tasks)):
        explored += 1
        if check_deadline and any(not feasible[t.id, j] for t, j in zip(tasks, combo)):
            continue
        load: dict[int, float] = {}
        pairs: set[tuple[int, int]] = set()
        for t, j in zip(tasks, combo):
            load[j] = load.get(j, 0.0) + t.compute_time
            if not is_cloud[j]:
                pairs.add((t.service, j))
        if any(load[j] > compute_cap[j] for j in load):
            continue
        stored: dict[int, float] = {}
        for m, j in pairs:
            stored[j] = stored.get(j, 0.0) + demand[m]
        if any(stored[j] > storage_cap[j] for j in stored):
            continue
        cost = sum(sched_cost[t.id, j] for t, j in zip(tasks, combo))
        cost += sum(place_cost[m, j] for m, j in pairs)
        if cost < best_cost:
            best_cost = cost
            best_map = combo

    runtime = time.perf_counter() - start
    if best_map is None:
        return SolveOutcome(INFEASIBLE, None, None, explored, runtime, math.inf)
    schedules = {t.id: j for t, j in zip(tasks, best_map)}
    assignment = Assignment(placements=induced_placements(scenario, schedules),
                            schedules=schedules)
    report = evaluate_objective(scenario, assignment)
    return SolveOutcome(OPTIMAL, assignment, report, explored, runtime, report.total)


def solve(scenario: Scenario, options: Optional[SolveOptions] = None,
          milp_backend=None) -> SolveOutcome:
    """Minimize total provider cost over placements and schedules.

    Returns an optimal assignment, an infeasibility verdict, or (under a
    node/time limit) the best incumbent found plus a valid lower bound.
    """
    options = options or SolveOptions()
    if options.backend == EXTERNAL_MILP:
        return _solve_external(scenario, options, milp_backend)
    return _solve_builtin(scenario, options)


class _Frame:
    __slots__ = ("children", "next", "applied")

    def __init__(self, children):
        self.children = children
        self.next = 0
        self.applied = None


def _seed_incumbent(scenario: Scenario) -> Optional[tuple[float, dict[int, int]]]:
    """Cheapest heuristic schedule that serves every task, re-costed over its
    induced placements, or None when both heuristics strand something."""
    from .heuristics import global_serving, local_serving

    best = None
    for build in (global_serving, local_serving):
        answer = build(scenario)
        if answer.unserved or len(answer.schedules) != len(scenario.tasks):
            continue
        schedules = dict(answer.schedules)
        assignment = Assignment(placements=induced_placements(scenario, schedules),
                                schedules=schedules)
        total = evaluate_objective(scenario, assignment).total
        if best is None or total < best[0]:
            best = (total, schedules)
    return best


def _solve_builtin(scenario: Scenario, options: SolveOptions) -> SolveOutcome:
    start = time.perf_counter()
    nodes = sorted(scenario.nodes, key=lambda n: n.id)
    idx_of = {n.id: k for k, n in enumerate(nodes)}
    cloud_idx = next(k for k, n in enumerate(nodes) if n.is_cloud)
    rem_compute = [n.compute_capacity for n in nodes]
    rem_storage = [n.storage_capacity for n in nodes]

    # Per-task branching records: candidate (node index, schedule cost, node id)
    # triples fastest-first, plus the data the capacity checks need.
    records = []
    for task in sorted(scenario.tasks, key=lambda t: t.id):
        service = scenario.service(task.service)
        cands = [(idx_of[j], service.schedule_cost[j], j)
                 for j in candidate_nodes(scenario, task, options.mode)]
        place = {idx_of[j]: c for j, c in service.placement_cost.items()}
        needs_cloudlet = all(ci != cloud_idx for ci, _, _ in cands)
        records.append((task.id, task.compute_time, task.service,
                        service.storage_demand, cands, place, needs_cloudlet))

    # Presolve: a task whose cloud schedule cost is (weakly) the cheapest among
    # its candidates can be pinned to the unbounded, placement-free cloud --
    # moving it there never raises cost and only relaxes capacities.
    fixed: dict[int, int] = {}
    fixed_cost = 0.0
    branch = []
    for rec in records:
        cands = rec[4]
        cloud_cost = next((c for ci, c, _ in cands if ci == cloud_idx), None)
        if cloud_cost is not None and cloud_cost <= min(c for _, c, _ in cands):
            fixed[rec[0]] = nodes[cloud_idx].id
            fixed_cost += cloud_cost
        else:
            branch.append(rec)
    # Fewest-candidates-first, then same-service tasks adjacent, then larger
    # tasks; a pure performance ordering that cannot change the optimal total.
    branch.sort(key=lambda rec: (len(rec[4]), rec[2], -rec[1], rec[0]))
    num_branch = len(branch)

    min_place = {s.id: (min(s.placement_cost.values()) if s.placement_cost else 0.0)
                 for s in scenario.services}

    # Compute demand that can only go to cloudlets, summed over branch suffixes;
    # if it ever exceeds the cloudlets' total remaining compute, no completion
    # exists below the current search node.
    suffix_must_sigma = [0.0] * (num_branch + 1)
    for k in range(num_branch - 1, -1, -1):
        rec = branch[k]
        suffix_must_sigma[k] = suffix_must_sigma[k + 1] + (rec[1] if rec[6] else 0.0)
    cloudlet_indices = [k for k in range(len(nodes)) if k != cloud_idx]

    placed: set[tuple[int, int]] = set()
    placed_count: dict[int, int] = {}

    def suffix_min(depth: int) -> tuple[float, dict[int, float]]:
        # Admissible tail bound, monotone along a branch (capacities only
        # shrink, and a service placement always needs the storage that would
        # have unblocked it earlier):
        #   - cheapest still-available schedule cost of each unassigned task;
        #   - for each service that some unassigned cloudlet-only task needs and
        #     that is placed nowhere yet, its cheapest placement price (any
        #     completion must buy at least that one placement).
        if suffix_must_sigma[depth] > sum(rem_compute[k] for k in cloudlet_indices):
            return math.inf, {}
        total = 0.0
        bonus: dict[int, float] = {}
        for rec in branch[depth:]:
            _, sigma, svc, h, cands, _, needs_cloudlet = rec
            best = math.inf
            for ci, cost_c, _ in cands:
                if rem_compute[ci] < sigma:
                    continue
                if ci != cloud_idx and (svc, ci) not in placed and rem_storage[ci] < h:
                    continue
                if cost_c < best:
                    best = cost_c
            if best == math.inf:
                return math.inf, bonus
            total += best
            if needs_cloudlet and svc not in bonus and placed_count.get(svc, 0) == 0:
                bonus[svc] = min_place[svc]
        total += sum(bonus.values())
        return total, bonus

    def make_children(depth: int, parent_cost: float):
        _, sigma, svc, h, cands, place, _ = branch[depth]
        tail, bonus = suffix_min(depth + 1)
        children = []
        for ci, cost_c, node_id in cands:
            if rem_compute[ci] < sigma:
                continue
            if ci == cloud_idx:
                inc, new_place = cost_c, False
            elif (svc, ci) in placed:
                inc, new_place = cost_c, False
            elif rem_storage[ci] >= h:
                inc, new_place = cost_c + place[ci], True
            else:
                continue
            abs_cost = parent_cost + inc
            # A child that buys this service's first placement discharges the
            # suffix's placement obligation for it.
            tail_c = tail - bonus[svc] if new_place and svc in bonus else tail
            children.append((abs_cost + tail_c, abs_cost, ci, node_id, new_place))
        children.sort(key=lambda ch: (ch[0], ch[1], ch[3]))
        return children

    def apply_child(depth: int, child):
        _, sigma, svc, h, _, _, _ = branch[depth]
        _, _, ci, _, new_place = child
        rem_compute[ci] -= sigma
        if new_place:
            rem_storage[ci] -= h
            placed.add((svc, ci))
            placed_count[svc] = placed_count.get(svc, 0) + 1

    def revert_child(depth: int, child, saved):
        _, _, svc, _, _, _, _ = branch[depth]
        _, _, ci, _, new_place = child
        rem_compute[ci] = saved[0]
        if new_place:
            rem_storage[ci] = saved[1]
            placed.discard((svc, ci))
            placed_count[svc] -= 1

    best_cost = math.inf
    best_sched: Optional[dict[int, int]] = None
    if num_branch == 0:
        best_cost = fixed_cost
        best_sched = dict(fixed)
    else:
        # Seed the incumbent with the better fully-serving heuristic answer (a
        # valid upper bound in either mode); tight instances then have pruning
        # pressure from the first node on instead of only after the first dive.
        seeded = _seed_incumbent(scenario)
        if seeded is not None:
            best_cost, best_sched = seeded

    frames: list[_Frame] = []
    saves: list[tuple[float, float]] = []
    if num_branch:
        frames.append(_Frame(make_children(0, fixed_cost)))
        saves.append((0.0, 0.0))
    nodes_explored = 0
    limit_hit = False
    steps = 0

    while frames:
        steps += 1
        if options.node_limit is not None and nodes_explored >= options.node_limit:
            limit_hit = True
            break
        if (options.time_limit is not None and steps % 256 == 0
                and time.perf_counter() - start > options.time_limit):
            limit_hit = True
            break
        depth = len(frames) - 1
        frame = frames[-1]
        if frame.applied is not None:
            revert_child(depth, frame.applied, saves[depth])
            frame.applied = None
        if frame.next >= len(frame.children):
            frames.pop()
            saves.pop()
            continue
        child = frame.children[frame.next]
        frame.next += 1
        if child[0] >= best_cost:     # bound: cannot beat the incumbent
            continue
        nodes_explored += 1
        ci = child[2]
        saves[depth] = (rem_compute[ci], rem_storage[ci])
        apply_child(depth, child)
        frame.applied = child
        if len(frames) == num_branch:  # complete schedule
            if child[1] < best_cost:
                best_cost = child[1]
                best_sched = dict(fixed)
                for k, fr in enumerate(frames):
                    best_sched[branch[k][0]] = fr.applied[3]
            revert_child(depth, child, saves[depth])
            frame.applied = None
            continue
        frames.append(_Frame(make_children(len(frames), child[1])))
        saves.append((0.0, 0.0))

    runtime = time.perf_counter() - start

    assignment = None
    report = None
    if best_sched is not None:
        assignment = Assignment(placements=induced_placements(scenario, best_sched),
                                schedules=best_sched)
        report = evaluate_objective(scenario, assignment)

    if not limit_hit:
        if report is None:
            return SolveOutcome(INFEASIBLE, None, None, nodes_explored, runtime, math.inf)
        # Re-evaluated total is authoritative (same sum, fixed association order).
        return SolveOutcome(OPTIMAL, assignment, report, nodes_explored, runtime, report.total)

    pending = [c[0] for fr in frames for c in fr.children[fr.next:]]
    if report is not None:
        pending.append(report.total)
    best_bound = min(pending) if pending else math.inf
    return SolveOutcome(LIMIT_REACHED, assignment, report, nodes_explored, runtime, best_bound)


def _solve_external(scenario: Scenario, options: SolveOptions, backend) -> SolveOutcome:
    from .milp import ScipyMilpBackend, build_problem, decode_solution

    start = time.perf_counter()
    if backend is None:
        backend = ScipyMilpBackend(time_limit=options.time_limit)
    if not scenario.tasks:
        assignment = Assignment.empty()
        report = evaluate_objective(scenario, assignment)
        return SolveOutcome(OPTIMAL, assignment, report, 0,
                            time.perf_counter() - start, report.total)
    problem = build_problem(scenario, options.mode)
    solution = backend.solve(problem)
    runtime = time.perf_counter() - start
    if solution.values is None:
        status = solution.status if solution.status != OPTIMAL else INFEASIBLE
        bound = solution.best_bound if solution.best_bound is not None else math.inf
        return SolveOutcome(status, None, None, solution.nodes_explored, runtime, bound)
    assignment = decode_solution(scenario, problem, solution.values)
    report = evaluate_objective(scenario, assignment)
    if solution.status == OPTIMAL:
        bound = report.total
    else:
        bound = solution.best_bound if solution.best_bound is not None else -math.inf
    return SolveOutcome(solution.status, assignment, report,
                        solution.nodes_explored, runtime, bound)
