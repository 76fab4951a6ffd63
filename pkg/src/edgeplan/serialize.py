"""JSON interchange for scenarios, generation parameters, and solutions.

A scenario document is a single self-describing JSON object with top-level
keys "seed", "params", "nodes", "services", "tasks", "distances". Distances
are a full symmetric matrix in row-major order, rows/columns in ascending node
id order. Reals keep full precision (shortest round-trip repr), so
load(save(s)) == s exactly. Unbounded capacities serialize as null.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any, Mapping, Optional

from .model import (
    UNBOUNDED,
    Assignment,
    CostReport,
    DistanceMatrix,
    GenerationParams,
    Node,
    Scenario,
    Service,
    Task,
)


class ParseError(ValueError):
    """A document is malformed; the message names the offending key."""


def _require(doc: Mapping[str, Any], key: str, where: str = "document") -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing key {key!r}")
    return doc[key]


def _capacity_out(value: float) -> Optional[float]:
    return None if value == UNBOUNDED else value


def _capacity_in(value: Optional[float]) -> float:
    return UNBOUNDED if value is None else float(value)


def params_to_document(params: GenerationParams) -> dict:
    doc = dataclasses.asdict(params)
    for key, value in doc.items():
        if isinstance(value, tuple):
            doc[key] = list(value)
    return doc


def params_from_document(doc: Mapping[str, Any]) -> GenerationParams:
    known = {f.name for f in dataclasses.fields(GenerationParams)}
    for key in doc:
        if key not in known:
            raise ParseError(f"params: unknown key {key!r}")
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key.endswith("_range") and value is not None:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ParseError(f"params: key {key!r} must be a [low, high] pair")
            value = (float(value[0]), float(value[1]))
        kwargs[key] = value
    try:
        return GenerationParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"params: {exc}") from exc


def scenario_to_document(scenario: Scenario) -> dict:
    return {
        "seed": scenario.seed,
        "params": params_to_document(scenario.params) if scenario.params else None,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "position": list(n.position) if n.position is not None else None,
                "storage_capacity": _capacity_out(n.storage_capacity),
                "compute_capacity": _capacity_out(n.compute_capacity),
            }
            for n in scenario.nodes
        ],
        "services": [
            {
                "id": s.id,
                "storage_demand": s.storage_demand,
                "placement_cost": {str(j): c for j, c in sorted(s.placement_cost.items())},
                "schedule_cost": {str(j): c for j, c in sorted(s.schedule_cost.items())},
            }
            for s in scenario.services
        ],
        "tasks": [
            {
                "id": t.id,
                "service": t.service,
                "local_node": t.local_node,
                "input_size": t.input_size,
                "output_size": t.output_size,
                "compute_time": t.compute_time,
                "qos_deadline": t.qos_deadline,
            }
            for t in scenario.tasks
        ],
        "distances": [list(row) for row in scenario.distances.matrix],
    }


def scenario_from_document(doc: Mapping[str, Any]) -> Scenario:
    seed = _require(doc, "seed")
    params_doc = _require(doc, "params")
    params = params_from_document(params_doc) if params_doc is not None else None

    nodes = []
    for entry in _require(doc, "nodes"):
        position = _require(entry, "position", "node")
        nodes.append(Node(
            id=_require(entry, "id", "node"),
            kind=_require(entry, "kind", "node"),
            position=tuple(position) if position is not None else None,
            storage_capacity=_capacity_in(_require(entry, "storage_capacity", "node")),
            compute_capacity=_capacity_in(_require(entry, "compute_capacity", "node")),
        ))

    services = []
    for entry in _require(doc, "services"):
        services.append(Service(
            id=_require(entry, "id", "service"),
            storage_demand=_require(entry, "storage_demand", "service"),
            placement_cost={int(j): float(c)
                            for j, c in _require(entry, "placement_cost", "service").items()},
            schedule_cost={int(j): float(c)
                           for j, c in _require(entry, "schedule_cost", "service").items()},
        ))

    tasks = []
    for entry in _require(doc, "tasks"):
        tasks.append(Task(
            id=_require(entry, "id", "task"),
            service=_require(entry, "service", "task"),
            local_node=_require(entry, "local_node", "task"),
            input_size=_require(entry, "input_size", "task"),
            output_size=_require(entry, "output_size", "task"),
            compute_time=_require(entry, "compute_time", "task"),
            qos_deadline=_require(entry, "qos_deadline", "task"),
        ))

    matrix = _require(doc, "distances")
    ids = tuple(sorted(n.id for n in nodes))
    distances = DistanceMatrix(ids=ids, matrix=tuple(tuple(float(v) for v in row)
                                                     for row in matrix))
    return Scenario(nodes=tuple(nodes), services=tuple(services), tasks=tuple(tasks),
                    distances=distances, params=params, seed=seed)


def assignment_to_document(assignment: Assignment,
                           report: Optional[CostReport] = None) -> dict:
    doc: dict[str, Any] = {
        "placements": [list(pair) for pair in sorted(assignment.placements)],
        "schedules": {str(t): j for t, j in sorted(assignment.schedules.items())},
        "unserved": sorted(assignment.unserved),
    }
    if report is not None:
        doc["report"] = {
            "placement_cost": report.placement_cost,
            "scheduling_cost": report.scheduling_cost,
            "total": report.total,
            "drop_count": report.drop_count,
            "drop_fraction": report.drop_fraction,
            "violations": [
                {
                    "constraint": v.constraint,
                    "amount": v.amount,
                    "node": v.node,
                    "task": v.task,
                    "service": v.service,
                    "message": v.message,
                }
                for v in report.violations
            ],
        }
    return doc


def assignment_from_document(doc: Mapping[str, Any]) -> Assignment:
    return Assignment(
        placements=frozenset((int(m), int(j)) for m, j in _require(doc, "placements")),
        schedules={int(t): int(j) for t, j in _require(doc, "schedules").items()},
        unserved=frozenset(int(t) for t in _require(doc, "unserved")),
    )


def dump(doc: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    dump(scenario_to_document(scenario), path)


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_document(load(path))
