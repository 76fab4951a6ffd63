"""Completion-time model and deadline-feasibility tests.

A task's completion time on a node is transfer-in + execution + transfer-out,
with transfer priced per packet-size unit at the ping distance between the
task's local cloudlet and the serving node. Delay depends only on the task and
the distance, never on node load; capacity limits are the only congestion
proxy in the model.
"""

from __future__ import annotations

from .model import DistanceMatrix, Scenario, Task


def completion_time(task: Task, target: int, distances: DistanceMatrix) -> float:
    """Time for `task` to complete on node `target`. Equals compute_time when
    the target is the task's own cloudlet (zero distance)."""
    d = distances.distance(task.local_node, target)
    return d * task.input_size + task.compute_time + d * task.output_size


def is_feasible(task: Task, target: int, distances: DistanceMatrix) -> bool:
    """Whether `task` meets its deadline on `target`. Exact comparison, no epsilon:
    the deadline is a hard constraint."""
    return completion_time(task, target, distances) <= task.qos_deadline


def feasible_targets(task: Task, scenario: Scenario) -> list[int]:
    """All nodes that can serve `task` within its deadline, fastest first
    (ties broken by ascending node id). Never empty: the local cloudlet always
    qualifies because deadlines are at least the compute time."""
    candidates = [
        (completion_time(task, node.id, scenario.distances), node.id)
        for node in scenario.nodes
        if is_feasible(task, node.id, scenario.distances)
    ]
    candidates.sort()
    return [node_id for _, node_id in candidates]
