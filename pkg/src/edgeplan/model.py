"""Problem-instance and solution types, the objective evaluator, and the constraint validator.

Every solver in this package consumes a :class:`Scenario` and produces an
:class:`Assignment`; :func:`evaluate_objective` and :func:`validate` are the
shared ground truth for cost and feasibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

#: Sentinel capacity for the cloud (storage and compute are never binding there).
UNBOUNDED = math.inf

CLOUDLET = "cloudlet"
CLOUD = "cloud"

# Constraint tags carried by violation records. The numbering follows the
# optimization model's constraint list: storage capacity (1), compute capacity
# (2), schedule-exactly-once (3), deadline (4), schedule-implies-placement (7).
STORAGE = 1
COMPUTE = 2
ASSIGN_ONCE = 3
DEADLINE = 4
REQUIRES_PLACEMENT = 7


class UnknownIdError(KeyError):
    """An assignment or query referenced a node, service, or task id that does not exist."""


@dataclass(frozen=True)
class Service:
    """A deployable capability; tasks of this service can only run where it is hosted.

    placement_cost has one entry per cloudlet (the cloud hosts everything for
    free); schedule_cost has one entry per node, cloud included.
    """

    id: int
    storage_demand: float                    # storage units consumed per placement
    placement_cost: Mapping[int, float]      # cloudlet id -> price of installing
    schedule_cost: Mapping[int, float]       # node id -> price per task served there

    def __post_init__(self):
        if self.storage_demand < 0:
            raise ValueError(f"service {self.id}: storage_demand must be >= 0")
        for cost_map in (self.placement_cost, self.schedule_cost):
            for j, c in cost_map.items():
                if c < 0:
                    raise ValueError(f"service {self.id}: negative cost for node {j}")


@dataclass(frozen=True)
class Task:
    """One user request, entering the system at its local cloudlet."""

    id: int
    service: int          # id of the requested Service
    local_node: int       # id of the attached cloudlet (never the cloud)
    input_size: float     # packet-size units uploaded to the serving node
    output_size: float    # packet-size units returned to the user
    compute_time: float   # execution time on any node (time units)
    qos_deadline: float   # maximum acceptable completion time

    def __post_init__(self):
        if self.input_size <= 0 or self.output_size <= 0 or self.compute_time <= 0:
            raise ValueError(f"task {self.id}: sizes and compute_time must be > 0")
        if self.qos_deadline < self.compute_time:
            # Even zero-distance execution takes compute_time, so such a task
            # would be unservable anywhere.
            raise ValueError(f"task {self.id}: qos_deadline below compute_time")


@dataclass(frozen=True)
class Node:
    """A computational device: a capacity-limited cloudlet or the unbounded cloud."""

    id: int
    kind: str                                   # CLOUDLET or CLOUD
    position: Optional[tuple[float, float]]     # grid coordinates, cloudlets only
    storage_capacity: float                     # UNBOUNDED for the cloud
    compute_capacity: float                     # UNBOUNDED for the cloud

    def __post_init__(self):
        if self.kind not in (CLOUDLET, CLOUD):
            raise ValueError(f"node {self.id}: unknown kind {self.kind!r}")
        if self.kind == CLOUD:
            if self.storage_capacity != UNBOUNDED or self.compute_capacity != UNBOUNDED:
                raise ValueError(f"node {self.id}: cloud capacities must be UNBOUNDED")
            if self.position is not None:
                raise ValueError(f"node {self.id}: the cloud has no grid position")
        else:
            if math.isinf(self.storage_capacity) or math.isinf(self.compute_capacity):
                raise ValueError(f"node {self.id}: cloudlet capacities must be finite")
            if self.storage_capacity < 0 or self.compute_capacity < 0:
                raise ValueError(f"node {self.id}: negative capacity")
            if self.position is None:
                raise ValueError(f"node {self.id}: cloudlet needs a grid position")

    @property
    def is_cloud(self) -> bool:
        return self.kind == CLOUD


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric node-to-node ping time per packet-size unit.

    Rows/columns follow ascending node id order; the diagonal is zero.
    """

    ids: tuple[int, ...]
    matrix: tuple[tuple[float, ...], ...]
    _index: Mapping[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.ids)
        if tuple(sorted(self.ids)) != self.ids:
            raise ValueError("distance matrix ids must be in ascending order")
        if len(set(self.ids)) != n:
            raise ValueError("duplicate node id in distance matrix")
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ValueError(f"distance matrix must be {n}x{n}")
        for a in range(n):
            if self.matrix[a][a] != 0.0:
                raise ValueError(f"distance matrix diagonal must be zero (node {self.ids[a]})")
            for b in range(a + 1, n):
                if self.matrix[a][b] != self.matrix[b][a]:
                    raise ValueError(
                        f"distance matrix not symmetric at nodes {self.ids[a]},{self.ids[b]}")
                if self.matrix[a][b] < 0:
                    raise ValueError("negative distance")
        object.__setattr__(self, "_index", {node_id: k for k, node_id in enumerate(self.ids)})

    def distance(self, a: int, b: int) -> float:
        try:
            return self.matrix[self._index[a]][self._index[b]]
        except KeyError as exc:
            raise UnknownIdError(f"unknown node id {exc.args[0]}") from None


@dataclass(frozen=True)
class GenerationParams:
    """Knobs of the random-instance generator; recorded in every Scenario for provenance.

    cloudlet_compute_range=None means "derive from num_tasks": the cloudlet tier
    is sized to absorb roughly 25-50% of the expected total compute demand
    (mean compute time 3 per task, split across the cloudlets).
    """

    num_tasks: int = 400
    num_services: int = 1000
    num_cloudlets: int = 4
    beta: float = 3.0                  # cloudlet scheduling price cap, as a multiple of the cloud price
    qos_factor: float = 2.5            # deadline = qos_factor * compute_time
    grid_size: float = 100.0
    cloud_distance_multiple: float = 5.0   # cloud distance = multiple * grid diagonal
    distance_scale: float = 0.001      # time units per grid unit per packet-size unit
    packet_size_range: tuple[float, float] = (2.0, 4.0)
    compute_time_range: tuple[float, float] = (2.0, 4.0)
    cloud_schedule_cost_range: tuple[float, float] = (2.0, 4.0)
    placement_cost_range: tuple[float, float] = (2.0, 4.0)
    storage_demand_range: tuple[float, float] = (1.0, 2.0)
    cloudlet_storage_range: tuple[float, float] = (10.0, 20.0)
    cloudlet_compute_range: Optional[tuple[float, float]] = None
    draw_discrete: bool = False        # draw {lo,hi} two-point values instead of uniform [lo,hi]

    def __post_init__(self):
        if self.num_tasks < 0 or self.num_services < 1 or self.num_cloudlets < 1:
            raise ValueError("num_tasks must be >= 0; num_services and num_cloudlets >= 1")
        if self.beta < 1.0:
            raise ValueError("beta must be >= 1")
        if self.qos_factor < 1.0:
            raise ValueError("qos_factor must be >= 1")
        if self.grid_size <= 0 or self.cloud_distance_multiple <= 0 or self.distance_scale <= 0:
            raise ValueError("grid_size, cloud_distance_multiple, distance_scale must be > 0")
        for name in ("packet_size_range", "compute_time_range", "cloud_schedule_cost_range",
                     "placement_cost_range", "storage_demand_range", "cloudlet_storage_range",
                     "cloudlet_compute_range"):
            rng = getattr(self, name)
            if rng is None:
                continue
            lo, hi = rng
            if not (0 < lo <= hi):
                raise ValueError(f"{name}: need 0 < low <= high, got {rng}")

    def resolved_compute_range(self) -> tuple[float, float]:
        if self.cloudlet_compute_range is not None:
            return self.cloudlet_compute_range
        mean_sigma = 3.0
        lo = self.num_tasks * mean_sigma / (4.0 * self.num_cloudlets)
        hi = self.num_tasks * mean_sigma / (2.0 * self.num_cloudlets)
        return (lo, hi)


@dataclass(frozen=True)
class Scenario:
    """A complete problem instance. Immutable; all operations on it are pure."""

    nodes: tuple[Node, ...]
    services: tuple[Service, ...]
    tasks: tuple[Task, ...]
    distances: DistanceMatrix
    params: Optional[GenerationParams] = None
    seed: int = 0
    cloud: Node = field(init=False, repr=False, compare=False)
    _node_by_id: Mapping[int, Node] = field(init=False, repr=False, compare=False)
    _service_by_id: Mapping[int, Service] = field(init=False, repr=False, compare=False)
    _task_by_id: Mapping[int, Task] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        node_by_id = {n.id: n for n in self.nodes}
        service_by_id = {s.id: s for s in self.services}
        task_by_id = {t.id: t for t in self.tasks}
        if len(node_by_id) != len(self.nodes):
            raise ValueError("duplicate node id")
        if len(service_by_id) != len(self.services):
            raise ValueError("duplicate service id")
        if len(task_by_id) != len(self.tasks):
            raise ValueError("duplicate task id")
        clouds = [n for n in self.nodes if n.is_cloud]
        if len(clouds) != 1:
            raise ValueError(f"scenario needs exactly one cloud node, found {len(clouds)}")
        cloud = clouds[0]
        node_ids = set(node_by_id)
        cloudlet_ids = {n.id for n in self.nodes if not n.is_cloud}
        if set(self.distances.ids) != node_ids:
            raise ValueError("distance matrix must cover exactly the scenario's nodes")
        for s in self.services:
            if set(s.placement_cost) != cloudlet_ids:
                raise ValueError(
                    f"service {s.id}: placement_cost must cover every cloudlet and nothing else")
            if set(s.schedule_cost) != node_ids:
                raise ValueError(f"service {s.id}: schedule_cost must cover every node")
        for t in self.tasks:
            if t.service not in service_by_id:
                raise ValueError(f"task {t.id}: unknown service {t.service}")
            if t.local_node not in cloudlet_ids:
                raise ValueError(f"task {t.id}: local_node {t.local_node} is not a cloudlet")
        object.__setattr__(self, "_node_by_id", node_by_id)
        object.__setattr__(self, "_service_by_id", service_by_id)
        object.__setattr__(self, "_task_by_id", task_by_id)
        object.__setattr__(self, "cloud", cloud)

    @property
    def cloudlets(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if not n.is_cloud)

    def node(self, node_id: int) -> Node:
        try:
            return self._node_by_id[node_id]
        except KeyError:
            raise UnknownIdError(f"unknown node id {node_id}") from None

    def service(self, service_id: int) -> Service:
        try:
            return self._service_by_id[service_id]
        except KeyError:
            raise UnknownIdError(f"unknown service id {service_id}") from None

    def task(self, task_id: int) -> Task:
        try:
            return self._task_by_id[task_id]
        except KeyError:
            raise UnknownIdError(f"unknown task id {task_id}") from None

    def requested_services(self) -> tuple[int, ...]:
        """Ids of services requested by at least one task, ascending."""
        return tuple(sorted({t.service for t in self.tasks}))


@dataclass(frozen=True)
class Assignment:
    """A solution: explicit cloudlet placements, task schedules, and unserved tasks.

    Cloud placements are implicit (the cloud hosts every service at no cost),
    so `placements` holds cloudlet pairs only. Heuristics may leave tasks in
    `unserved`; the exact solver either schedules everything or reports the
    instance infeasible.
    """

    placements: frozenset[tuple[int, int]]   # (service id, cloudlet id)
    schedules: Mapping[int, int]             # task id -> node id
    unserved: frozenset[int] = frozenset()

    def __post_init__(self):
        overlap = set(self.schedules) & self.unserved
        if overlap:
            raise ValueError(f"tasks both scheduled and unserved: {sorted(overlap)}")

    @staticmethod
    def empty() -> "Assignment":
        return Assignment(frozenset(), {}, frozenset())


@dataclass(frozen=True)
class Violation:
    """One violated constraint instance; `constraint` is the model's constraint number."""

    constraint: int
    amount: float = 0.0
    node: Optional[int] = None
    task: Optional[int] = None
    service: Optional[int] = None
    message: str = ""


@dataclass(frozen=True)
class CostReport:
    """Objective breakdown plus per-task delays and drop statistics."""

    placement_cost: float
    scheduling_cost: float
    total: float
    per_task_delay: Mapping[int, float]
    violations: tuple[Violation, ...]
    drop_count: int
    drop_fraction: float


def induced_placements(scenario: Scenario,
                       schedules: Mapping[int, int]) -> frozenset[tuple[int, int]]:
    """The minimal placement set supporting `schedules`: one (service, cloudlet)
    pair per cloudlet actually serving a task of that service. Cloud schedules
    induce nothing. With positive placement costs this is also the placement
    set of any optimal solution."""
    pairs = set()
    for task_id, node_id in schedules.items():
        task = scenario.task(task_id)
        if not scenario.node(node_id).is_cloud:
            pairs.add((task.service, node_id))
    return frozenset(pairs)


def evaluate_objective(scenario: Scenario, assignment: Assignment) -> CostReport:
    """Total provider cost of an assignment: placement prices plus scheduling prices.

    Delays come from the completion-time model; a task counts as dropped when it
    is not scheduled at all or its delay exceeds its deadline (the latter only
    happens for deadline-ignoring solutions).

    Raises UnknownIdError (or ValueError for a placement on the cloud) if any
    reference dangles.
    """
    from .timing import completion_time  # local import to avoid a module cycle

    placement_total = 0.0
    for service_id, node_id in sorted(assignment.placements):
        service = scenario.service(service_id)
        node = scenario.node(node_id)
        if node.is_cloud:
            raise ValueError(f"service {service_id}: explicit placement on the cloud")
        placement_total += service.placement_cost[node_id]

    scheduling_total = 0.0
    per_task_delay: dict[int, float] = {}
    late = 0
    for task_id in sorted(assignment.schedules):
        node_id = assignment.schedules[task_id]
        task = scenario.task(task_id)
        scenario.node(node_id)
        scheduling_total += scenario.service(task.service).schedule_cost[node_id]
        delay = completion_time(task, node_id, scenario.distances)
        per_task_delay[task_id] = delay
        if delay > task.qos_deadline:
            late += 1

    for task_id in assignment.unserved:
        scenario.task(task_id)

    unscheduled = sum(1 for t in scenario.tasks if t.id not in assignment.schedules)
    drop_count = unscheduled + late
    drop_fraction = drop_count / len(scenario.tasks) if scenario.tasks else 0.0
    return CostReport(
        placement_cost=placement_total,
        scheduling_cost=scheduling_total,
        total=placement_total + scheduling_total,
        per_task_delay=per_task_delay,
        violations=tuple(validate(scenario, assignment)),
        drop_count=drop_count,
        drop_fraction=drop_fraction,
    )


def validate(scenario: Scenario, assignment: Assignment) -> list[Violation]:
    """Check an assignment against the capacity, assignment, deadline, and
    placement-linking constraints; return one record per violated instance.

    An empty list means the assignment is feasible for all served tasks and
    serves everything. Unbounded capacities never violate the capacity checks.
    """
    from .timing import completion_time

    records: list[Violation] = []

    # (1) storage per cloudlet, over the explicit placements
    storage_used: dict[int, float] = {}
    for service_id, node_id in assignment.placements:
        service = scenario.service(service_id)
        node = scenario.node(node_id)
        if node.is_cloud:
            raise ValueError(f"service {service_id}: explicit placement on the cloud")
        storage_used[node_id] = storage_used.get(node_id, 0.0) + service.storage_demand
    for node_id in sorted(storage_used):
        cap = scenario.node(node_id).storage_capacity
        if storage_used[node_id] > cap:
            records.append(Violation(
                constraint=STORAGE, node=node_id, amount=storage_used[node_id] - cap,
                message=f"storage {storage_used[node_id]:g} > capacity {cap:g}"))

    # (2) compute per node
    compute_used: dict[int, float] = {}
    for task_id, node_id in assignment.schedules.items():
        task = scenario.task(task_id)
        scenario.node(node_id)
        compute_used[node_id] = compute_used.get(node_id, 0.0) + task.compute_time
    for node_id in sorted(compute_used):
        cap = scenario.node(node_id).compute_capacity
        if compute_used[node_id] > cap:
            records.append(Violation(
                constraint=COMPUTE, node=node_id, amount=compute_used[node_id] - cap,
                message=f"compute {compute_used[node_id]:g} > capacity {cap:g}"))

    # (3) every task scheduled exactly once; explicitly unserved tasks are
    # reported here too, so an empty record list implies full service
    for task in scenario.tasks:
        if task.id in assignment.schedules:
            continue
        why = "explicitly unserved" if task.id in assignment.unserved else "not assigned"
        records.append(Violation(constraint=ASSIGN_ONCE, task=task.id, amount=1.0, message=why))

    # (4) deadline per scheduled task
    for task_id in sorted(assignment.schedules):
        node_id = assignment.schedules[task_id]
        task = scenario.task(task_id)
        delay = completion_time(task, node_id, scenario.distances)
        if delay > task.qos_deadline:
            records.append(Violation(
                constraint=DEADLINE, task=task_id, node=node_id,
                amount=delay - task.qos_deadline,
                message=f"delay {delay:g} > deadline {task.qos_deadline:g}"))

    # (7) a cloudlet schedule requires the matching placement
    for task_id in sorted(assignment.schedules):
        node_id = assignment.schedules[task_id]
        task = scenario.task(task_id)
        if scenario.node(node_id).is_cloud:
            continue
        if (task.service, node_id) not in assignment.placements:
            records.append(Violation(
                constraint=REQUIRES_PLACEMENT, task=task_id, node=node_id,
                service=task.service, amount=1.0,
                message=f"service {task.service} not placed on cloudlet {node_id}"))

    return records
