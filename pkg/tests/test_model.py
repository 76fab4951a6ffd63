"""Core types, objective evaluation, and the constraint validator."""

import itertools

import pytest

from conftest import build_scenario
from edgeplan.model import (
    ASSIGN_ONCE,
    COMPUTE,
    DEADLINE,
    REQUIRES_PLACEMENT,
    STORAGE,
    UNBOUNDED,
    Assignment,
    Task,
    UnknownIdError,
    evaluate_objective,
    induced_placements,
    validate,
)


def small_scenario():
    # Two cloudlets + cloud; cloud delay for a (2,2)-packet task is 2.0 extra.
    return build_scenario(
        cloudlets=[(5.0, 10.0), (5.0, 10.0)],
        services=[(0, 3.0, 2.0, 4.0, 2.0),
                  (1, 3.0, 2.0, 4.0, 2.0)],
        tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 5.0),
               (1, 0, 1, 2.0, 2.0, 2.0, 5.0),
               (2, 1, 0, 2.0, 2.0, 2.0, 5.0)],
    )


class TestTypeInvariants:
    def test_deadline_below_compute_time_rejected(self):
        with pytest.raises(ValueError):
            Task(id=0, service=0, local_node=0, input_size=1, output_size=1,
                 compute_time=3.0, qos_deadline=2.0)

    def test_two_clouds_rejected(self):
        scenario = small_scenario()
        from edgeplan.model import CLOUD, Node, Scenario
        extra = Node(9, CLOUD, None, UNBOUNDED, UNBOUNDED)
        with pytest.raises(ValueError, match="exactly one cloud"):
            Scenario(scenario.nodes + (extra,), scenario.services, scenario.tasks,
                     scenario.distances)

    def test_assignment_overlap_rejected(self):
        with pytest.raises(ValueError):
            Assignment(frozenset(), {0: 1}, frozenset({0}))

    def test_schedule_cost_must_cover_cloud(self):
        scenario = small_scenario()
        from edgeplan.model import Scenario, Service
        bad = Service(id=0, storage_demand=1.0, placement_cost={0: 1.0, 1: 1.0},
                      schedule_cost={0: 1.0, 1: 1.0})  # no cloud entry
        with pytest.raises(ValueError, match="schedule_cost"):
            Scenario(scenario.nodes, (bad,) + scenario.services[1:], scenario.tasks,
                     scenario.distances)


class TestObjective:
    def test_empty_assignment(self):
        scenario = small_scenario()
        report = evaluate_objective(scenario, Assignment.empty())
        assert report.total == 0.0
        assert report.placement_cost == 0.0
        assert report.scheduling_cost == 0.0
        assert report.drop_fraction == 1.0
        assert report.drop_count == 3

    def test_two_term_sum(self):
        scenario = small_scenario()
        assignment = Assignment(frozenset({(0, 0)}), {0: 0})
        report = evaluate_objective(scenario, assignment)
        assert report.placement_cost == 2.0
        assert report.scheduling_cost == 4.0
        assert report.total == 6.0
        assert report.per_task_delay[0] == 2.0  # runs at its own cloudlet

    def test_cloud_schedules_have_zero_placement_cost(self):
        scenario = build_scenario(
            cloudlets=[(5.0, 10.0)],
            services=[(0, 1.0, 2.0, 4.0, 2.0),
                      (1, 1.0, 2.0, 4.0, 2.0),
                      (2, 1.0, 2.0, 4.0, 4.0)],
            tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 9.0),
                   (1, 1, 0, 2.0, 2.0, 2.0, 9.0),
                   (2, 2, 0, 2.0, 2.0, 2.0, 9.0)],
        )
        cloud = scenario.cloud.id
        assignment = Assignment(frozenset(), {0: cloud, 1: cloud, 2: cloud})
        report = evaluate_objective(scenario, assignment)
        assert report.placement_cost == 0.0
        assert report.total == 8.0
        assert report.drop_count == 0

    def test_total_is_sum_of_terms(self):
        scenario = small_scenario()
        assignment = Assignment(frozenset({(0, 0), (1, 0)}), {0: 0, 2: 0, 1: 2})
        report = evaluate_objective(scenario, assignment)
        assert report.total == report.placement_cost + report.scheduling_cost

    def test_unknown_task_id_raises(self):
        scenario = small_scenario()
        with pytest.raises(UnknownIdError):
            evaluate_objective(scenario, Assignment(frozenset(), {99: 0}))

    def test_unknown_node_id_raises(self):
        scenario = small_scenario()
        with pytest.raises(UnknownIdError):
            evaluate_objective(scenario, Assignment(frozenset(), {0: 99}))

    def test_placement_on_cloud_rejected(self):
        scenario = small_scenario()
        with pytest.raises(ValueError, match="cloud"):
            evaluate_objective(scenario, Assignment(frozenset({(0, 2)}), {}))

    def test_deadline_miss_counts_as_drop(self):
        # Cloud delay 2 + 0.5*4 = 4.0 > deadline 3.0.
        scenario = build_scenario(
            cloudlets=[(5.0, 10.0)],
            services=[(0, 1.0, 2.0, 4.0, 2.0)],
            tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 3.0)],
        )
        assignment = Assignment(frozenset(), {0: scenario.cloud.id})
        report = evaluate_objective(scenario, assignment)
        assert report.drop_count == 1
        assert report.drop_fraction == 1.0

    def test_linearity_over_disjoint_assignments(self):
        scenario = small_scenario()
        a = Assignment(frozenset({(0, 0)}), {0: 0})
        b = Assignment(frozenset({(0, 1)}), {1: 1}, frozenset({2}))
        merged = Assignment(a.placements | b.placements,
                            {**a.schedules, **b.schedules},
                            a.unserved | b.unserved)
        ra, rb, rm = (evaluate_objective(scenario, x) for x in (a, b, merged))
        assert rm.placement_cost == pytest.approx(ra.placement_cost + rb.placement_cost)
        assert rm.scheduling_cost == pytest.approx(ra.scheduling_cost + rb.scheduling_cost)
        assert rm.total == pytest.approx(ra.total + rb.total)


class TestValidate:
    def test_all_on_cloud_is_clean(self):
        scenario = small_scenario()
        cloud = scenario.cloud.id
        assignment = Assignment(frozenset(), {t.id: cloud for t in scenario.tasks})
        assert validate(scenario, assignment) == []

    def test_storage_excess_reported(self):
        scenario = small_scenario()  # S_0 = 5, two services of demand 3 each
        assignment = Assignment(frozenset({(0, 0), (1, 0)}), {})
        records = [v for v in validate(scenario, assignment) if v.constraint == STORAGE]
        assert len(records) == 1
        assert records[0].node == 0
        assert records[0].amount == pytest.approx(1.0)

    def test_missing_placement_reported(self):
        scenario = small_scenario()
        assignment = Assignment(frozenset(), {0: 0})
        records = [v for v in validate(scenario, assignment)
                   if v.constraint == REQUIRES_PLACEMENT]
        assert len(records) == 1
        assert records[0].task == 0 and records[0].node == 0 and records[0].service == 0

    def test_compute_excess_reported(self):
        scenario = build_scenario(
            cloudlets=[(5.0, 3.0)],
            services=[(0, 1.0, 2.0, 4.0, 2.0)],
            tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 9.0),
                   (1, 0, 0, 2.0, 2.0, 2.0, 9.0)],
        )
        assignment = Assignment(frozenset({(0, 0)}), {0: 0, 1: 0})
        records = [v for v in validate(scenario, assignment) if v.constraint == COMPUTE]
        assert len(records) == 1
        assert records[0].amount == pytest.approx(1.0)

    def test_unserved_and_unassigned_reported_as_assignment_violations(self):
        scenario = small_scenario()
        assignment = Assignment(frozenset(), {0: scenario.cloud.id}, frozenset({1}))
        records = [v for v in validate(scenario, assignment) if v.constraint == ASSIGN_ONCE]
        assert {v.task for v in records} == {1, 2}  # 1 unserved, 2 never assigned

    def test_deadline_violation_has_magnitude(self):
        scenario = build_scenario(
            cloudlets=[(5.0, 10.0)],
            services=[(0, 1.0, 2.0, 4.0, 2.0)],
            tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 3.0)],
        )
        assignment = Assignment(frozenset(), {0: scenario.cloud.id})
        records = [v for v in validate(scenario, assignment) if v.constraint == DEADLINE]
        assert len(records) == 1
        assert records[0].amount == pytest.approx(1.0)  # delay 4 vs deadline 3

    def test_unbounded_cloud_never_violates_capacity(self):
        scenario = small_scenario()
        cloud = scenario.cloud.id
        assignment = Assignment(frozenset(), {t.id: cloud for t in scenario.tasks})
        records = validate(scenario, assignment)
        assert all(v.constraint not in (STORAGE, COMPUTE) for v in records)


class TestInducedPlacements:
    def test_all_cloud_induces_nothing(self):
        scenario = small_scenario()
        cloud = scenario.cloud.id
        assert induced_placements(scenario, {0: cloud, 1: cloud}) == frozenset()

    def test_shared_service_deduplicates(self):
        scenario = small_scenario()
        assert induced_placements(scenario, {0: 0, 1: 0}) == frozenset({(0, 0)})

    def test_same_service_on_two_cloudlets(self):
        scenario = small_scenario()
        assert induced_placements(scenario, {0: 0, 1: 1}) == \
            frozenset({(0, 0), (0, 1)})

    def test_optimal_placements_equal_induced(self):
        """Independent mini-oracle: enumerate every (placement set, schedule map)
        pair on a small instance; the unique cheapest feasible pair uses exactly
        the placements induced by its schedules."""
        scenario = build_scenario(
            cloudlets=[(4.0, 6.0), (4.0, 6.0)],
            services=[(0, 3.0, 2.0, 3.0, 2.5),
                      (1, 3.0, 1.0, 3.5, 3.0)],
            tasks=[(0, 0, 0, 2.0, 2.0, 2.0, 4.0),   # cloud delay 4.4 > 4: cloudlets only
                   (1, 1, 1, 2.0, 2.0, 2.0, 3.0)],  # cloud delay 4.4 > 3: cloudlets only
            cloud_distance=0.6,
        )
        from edgeplan.timing import completion_time

        cloud = scenario.cloud.id
        node_ids = [n.id for n in scenario.nodes]
        pair_pool = [(m.id, j) for m in scenario.services for j in (0, 1)]
        best = None
        optima = 0
        for schedules in itertools.product(node_ids, repeat=2):
            sched_map = {t.id: j for t, j in zip(scenario.tasks, schedules)}
            for r in range(len(pair_pool) + 1):
                for placed in itertools.combinations(pair_pool, r):
                    placed = frozenset(placed)
                    ok = True
                    for t, j in zip(scenario.tasks, schedules):
                        if completion_time(t, j, scenario.distances) > t.qos_deadline:
                            ok = False
                        if j != cloud and (t.service, j) not in placed:
                            ok = False
                    for j in (0, 1):
                        demand = sum(scenario.service(m).storage_demand
                                     for m, jj in placed if jj == j)
                        load = sum(t.compute_time for t, jj in zip(scenario.tasks, schedules)
                                   if jj == j)
                        node = scenario.node(j)
                        if demand > node.storage_capacity or load > node.compute_capacity:
                            ok = False
                    if not ok:
                        continue
                    cost = sum(scenario.service(m).placement_cost[j] for m, j in placed)
                    cost += sum(scenario.service(t.service).schedule_cost[j]
                                for t, j in zip(scenario.tasks, schedules))
                    if best is None or cost < best[0] - 1e-12:
                        best = (cost, placed, sched_map)
                        optima = 1
                    elif abs(cost - best[0]) <= 1e-12:
                        optima += 1
        assert best is not None
        assert optima == 1, "test instance must have a unique optimum"
        _, placed, sched_map = best
        assert placed == induced_placements(scenario, sched_map)
