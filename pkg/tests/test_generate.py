"""Seeded scenario generation: determinism, ranges, structure."""

import json
import math

import pytest

from edgeplan.generate import generate
from edgeplan.model import UNBOUNDED, GenerationParams
from edgeplan.serialize import scenario_to_document

DESK = GenerationParams(num_tasks=40, num_services=20, num_cloudlets=4)


def test_default_shape_matches_parameter_table():
    scenario = generate(GenerationParams(), 123)
    assert len(scenario.tasks) == 400
    assert len(scenario.services) == 1000
    assert len(scenario.nodes) == 5  # 4 cloudlets + 1 cloud
    assert sum(1 for n in scenario.nodes if n.is_cloud) == 1


def test_same_seed_gives_byte_identical_documents():
    a = json.dumps(scenario_to_document(generate(DESK, 99)), sort_keys=True)
    b = json.dumps(scenario_to_document(generate(DESK, 99)), sort_keys=True)
    assert a == b


def test_different_seeds_differ():
    a = generate(DESK, 1)
    b = generate(DESK, 2)
    assert a != b


def test_adding_tasks_preserves_earlier_tasks():
    small = generate(DESK, 5)
    big = generate(GenerationParams(num_tasks=60, num_services=20, num_cloudlets=4), 5)
    assert big.tasks[:40] == small.tasks


def test_cost_and_size_ranges():
    scenario = generate(DESK, 321)
    cloud = scenario.cloud.id
    for service in scenario.services:
        cloud_cost = service.schedule_cost[cloud]
        assert 2.0 <= cloud_cost <= 4.0
        assert 1.0 <= service.storage_demand <= 2.0
        for j, cost in service.placement_cost.items():
            assert 2.0 <= cost <= 4.0
        for j, cost in service.schedule_cost.items():
            if j != cloud:
                assert cloud_cost <= cost <= 3.0 * cloud_cost
    for task in scenario.tasks:
        assert 2.0 <= task.input_size <= 4.0
        assert 2.0 <= task.output_size <= 4.0
        assert 2.0 <= task.compute_time <= 4.0
        assert task.qos_deadline == task.compute_time * 2.5
        assert task.local_node in {n.id for n in scenario.cloudlets}


def test_distance_matrix_structure():
    params = GenerationParams(num_tasks=10, num_services=5, num_cloudlets=4)
    scenario = generate(params, 7)
    d = scenario.distances
    cloud = scenario.cloud.id
    expected_cloud = 5 * 100 * math.sqrt(2) * 0.001
    diagonal_max = math.sqrt(2) * 100 * 0.001
    for a in d.ids:
        assert d.distance(a, a) == 0.0
        for b in d.ids:
            assert d.distance(a, b) == d.distance(b, a)
            if cloud in (a, b) and a != b:
                assert d.distance(a, b) == pytest.approx(expected_cloud)
            elif a != b:
                assert 0.0 <= d.distance(a, b) <= diagonal_max


def test_cloudlet_capacities_follow_derived_range():
    scenario = generate(DESK, 11)
    lo, hi = DESK.resolved_compute_range()
    assert (lo, hi) == (40 * 3 / 16, 40 * 3 / 8)
    for n in scenario.cloudlets:
        assert lo <= n.compute_capacity <= hi
        assert 10.0 <= n.storage_capacity <= 20.0
        assert n.position is not None
        assert 0.0 <= n.position[0] <= 100.0 and 0.0 <= n.position[1] <= 100.0
    assert scenario.cloud.storage_capacity == UNBOUNDED
    assert scenario.cloud.compute_capacity == UNBOUNDED


def test_explicit_compute_range_respected():
    params = GenerationParams(num_tasks=10, num_services=5, num_cloudlets=2,
                              cloudlet_compute_range=(7.0, 7.0))
    scenario = generate(params, 3)
    for n in scenario.cloudlets:
        assert n.compute_capacity == pytest.approx(7.0)


def test_discrete_draws_hit_range_endpoints_only():
    params = GenerationParams(num_tasks=60, num_services=30, num_cloudlets=3,
                              draw_discrete=True)
    scenario = generate(params, 17)
    cloud = scenario.cloud.id
    seen_sigma = set()
    for task in scenario.tasks:
        assert task.input_size in (2.0, 4.0)
        assert task.output_size in (2.0, 4.0)
        assert task.compute_time in (2.0, 4.0)
        seen_sigma.add(task.compute_time)
    assert seen_sigma == {2.0, 4.0}
    for service in scenario.services:
        cloud_cost = service.schedule_cost[cloud]
        assert cloud_cost in (2.0, 4.0)
        for j, cost in service.placement_cost.items():
            assert cost in (2.0, 4.0)
        for j, cost in service.schedule_cost.items():
            if j != cloud:
                assert cost in (cloud_cost, 3.0 * cloud_cost)
        # storage demand stays continuous under the flag
        assert 1.0 <= service.storage_demand <= 2.0


def test_zero_tasks_allowed():
    scenario = generate(
        GenerationParams(num_tasks=0, num_services=3, num_cloudlets=2), 1)
    assert scenario.tasks == ()


@pytest.mark.parametrize("kwargs", [
    {"beta": 0.5},
    {"qos_factor": 0.9},
    {"packet_size_range": (0.0, 4.0)},
    {"packet_size_range": (4.0, 2.0)},
    {"num_cloudlets": 0},
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ValueError):
        GenerationParams(num_tasks=5, num_services=3, **kwargs)


def test_bad_seed_rejected():
    with pytest.raises(ValueError):
        generate(DESK, -1)
    with pytest.raises(ValueError):
        generate(DESK, 2**64)
