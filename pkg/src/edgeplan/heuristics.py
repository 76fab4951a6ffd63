"""Greedy approximation strategies: cloudlet-local serving and global serving.

Both build an assignment that always respects capacities, deadlines, and the
schedule-implies-placement rule; tasks nothing can serve end up in the
assignment's unserved set rather than scheduled in violation. All tie-breaks
are fixed (task id, then cloud before cloudlets, then node id, then service
id) so both heuristics are deterministic functions of the scenario.
"""

from __future__ import annotations

import math
from typing import Optional

from .model import UNBOUNDED, Assignment, Scenario, Service, Task
from .timing import is_feasible


class NodeBudget:
    """Remaining capacity of one node while a heuristic builds its answer.

    The cloud's budget is unbounded and it implicitly hosts every service, so
    `can_host` is always true there and `place` is a no-op.
    """

    def __init__(self, node):
        self.node_id = node.id
        self.is_cloud = node.is_cloud
        self.remaining_storage = node.storage_capacity
        self.remaining_compute = node.compute_capacity
        self.placed_services: set[int] = set()

    def can_host(self, service: Service) -> bool:
        if self.is_cloud or service.id in self.placed_services:
            return True
        return self.remaining_storage >= service.storage_demand

    def can_run(self, task: Task) -> bool:
        return self.remaining_compute >= task.compute_time

    def place(self, service: Service) -> None:
        if self.is_cloud or service.id in self.placed_services:
            return
        if self.remaining_storage < service.storage_demand:
            raise ValueError(f"node {self.node_id}: storage exhausted for service {service.id}")
        self.remaining_storage -= service.storage_demand
        self.placed_services.add(service.id)

    def schedule(self, task: Task) -> None:
        if self.remaining_compute < task.compute_time:
            raise ValueError(f"node {self.node_id}: compute exhausted for task {task.id}")
        if self.remaining_compute != UNBOUNDED:
            self.remaining_compute -= task.compute_time


def local_serving(scenario: Scenario) -> Assignment:
    """Serve each cloudlet's own users first, tightest deadline first.

    Per cloudlet (ascending id): among the attached unscheduled tasks that
    still fit (service hosted or hostable, compute available), pick the one
    with the smallest deadline, host its service, then schedule every attached
    unscheduled task of that same service that fits, again tightest first.
    Repeat until nothing attached fits. Leftover tasks go to the cloud when
    the cloud meets their deadline, otherwise they are left unserved.
    """
    budgets = {n.id: NodeBudget(n) for n in scenario.nodes}
    placements: set[tuple[int, int]] = set()
    schedules: dict[int, int] = {}

    for cloudlet in sorted(scenario.cloudlets, key=lambda n: n.id):
        budget = budgets[cloudlet.id]
        attached = [t for t in scenario.tasks if t.local_node == cloudlet.id]
        attached.sort(key=lambda t: (t.qos_deadline, t.id))
        while True:
            fitting = [t for t in attached
                       if t.id not in schedules
                       and budget.can_host(scenario.service(t.service))
                       and budget.can_run(t)]
            if not fitting:
                break
            tightest = fitting[0]
            service = scenario.service(tightest.service)
            budget.place(service)
            placements.add((service.id, cloudlet.id))
            for mate in attached:
                if mate.id in schedules or mate.service != service.id:
                    continue
                if budget.can_run(mate):
                    budget.schedule(mate)
                    schedules[mate.id] = cloudlet.id

    unserved = set()
    cloud = scenario.cloud
    for task in sorted(scenario.tasks, key=lambda t: t.id):
        if task.id in schedules:
            continue
        if is_feasible(task, cloud.id, scenario.distances):
            schedules[task.id] = cloud.id
        else:
            unserved.add(task.id)

    return Assignment(placements=frozenset(placements), schedules=schedules,
                      unserved=frozenset(unserved))


def global_serving(scenario: Scenario,
                   cloud_profit_divisor: float = 1.0,
                   reuse_is_free: bool = False) -> Assignment:
    """Repeatedly commit the (service, node) pair with the best profit.

    Profit of a pair is the number of its still-unscheduled, deadline-feasible
    tasks that fit the node's remaining compute (packed smallest compute time
    first), divided by the service's placement price there; the cloud divides
    by `cloud_profit_divisor` instead since it has no placement price. With
    `reuse_is_free`, a service already hosted on a cloudlet scores infinite
    profit there instead of re-paying its original price in the denominator.
    Stops when no pair can serve anything; whatever remains is unserved.
    """
    if cloud_profit_divisor <= 0:
        raise ValueError("cloud_profit_divisor must be > 0")

    budgets = {n.id: NodeBudget(n) for n in scenario.nodes}
    nodes_in_order = sorted(scenario.nodes, key=lambda n: (0 if n.is_cloud else 1, n.id))
    feasible_on = {(t.id, n.id): is_feasible(t, n.id, scenario.distances)
                   for t in scenario.tasks for n in scenario.nodes}
    # Open tasks grouped by service, kept in ascending (compute time, id)
    # order so the greedy packing below is a single pass.
    open_by_service: dict[int, list[Task]] = {}
    for t in sorted(scenario.tasks, key=lambda t: (t.compute_time, t.id)):
        open_by_service.setdefault(t.service, []).append(t)

    placements: set[tuple[int, int]] = set()
    schedules: dict[int, int] = {}

    def servable(service_id: int, node_id: int) -> list[Task]:
        chosen = []
        left = budgets[node_id].remaining_compute
        for t in open_by_service[service_id]:
            if feasible_on[t.id, node_id] and t.compute_time <= left:
                chosen.append(t)
                if left != UNBOUNDED:
                    left -= t.compute_time
        return chosen

    while open_by_service:
        best = None  # (profit, tie_key, service_id, node_id, tasks)
        for node in nodes_in_order:
            budget = budgets[node.id]
            for service_id in sorted(open_by_service):
                service = scenario.service(service_id)
                if not node.is_cloud and not budget.can_host(service):
                    continue
                tasks = servable(service_id, node.id)
                if not tasks:
                    continue
                if node.is_cloud:
                    profit = len(tasks) / cloud_profit_divisor
                elif reuse_is_free and service_id in budget.placed_services:
                    profit = math.inf
                else:
                    profit = len(tasks) / service.placement_cost[node.id]
                tie_key = (0 if node.is_cloud else 1, node.id, service_id)
                if best is None or profit > best[0] or (profit == best[0] and tie_key < best[1]):
                    best = (profit, tie_key, service_id, node.id, tasks)
        if best is None:
            break
        _, _, service_id, node_id, tasks = best
        budget = budgets[node_id]
        budget.place(scenario.service(service_id))
        if not budget.is_cloud:
            placements.add((service_id, node_id))
        taken = {t.id for t in tasks}
        for t in tasks:
            budget.schedule(t)
            schedules[t.id] = node_id
        kept = [t for t in open_by_service[service_id] if t.id not in taken]
        if kept:
            open_by_service[service_id] = kept
        else:
            del open_by_service[service_id]

    unserved = frozenset(t.id for group in open_by_service.values() for t in group)
    return Assignment(placements=frozenset(placements), schedules=schedules,
                      unserved=unserved)
