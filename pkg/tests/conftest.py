"""Shared builders for hand-crafted test instances."""

from edgeplan.model import (
    CLOUD,
    CLOUDLET,
    UNBOUNDED,
    DistanceMatrix,
    Node,
    Scenario,
    Service,
    Task,
)


def make_service(sid, demand, place, sched_edge, sched_cloud, cloudlet_ids, cloud_id):
    place_map = dict(place) if isinstance(place, dict) else {j: place for j in cloudlet_ids}
    sched_map = dict(sched_edge) if isinstance(sched_edge, dict) else \
        {j: sched_edge for j in cloudlet_ids}
    sched_map[cloud_id] = sched_cloud
    return Service(id=sid, storage_demand=demand,
                   placement_cost=place_map, schedule_cost=sched_map)


def build_scenario(cloudlets, services, tasks, edge_distance=0.05, cloud_distance=0.5):
    """Hand-built scenario.

    cloudlets: [(storage_capacity, compute_capacity)], ids 0..k-1; cloud id k.
    services:  [(id, storage_demand, placement, edge_schedule, cloud_schedule)]
               where placement/edge_schedule are scalars or per-cloudlet dicts.
    tasks:     [(id, service, local_node, t_in, t_out, sigma, deadline)].
    All cloudlet pairs sit at edge_distance; the cloud at cloud_distance.
    """
    k = len(cloudlets)
    cloud_id = k
    nodes = [Node(j, CLOUDLET, (float(j), 0.0), float(storage), float(compute))
             for j, (storage, compute) in enumerate(cloudlets)]
    nodes.append(Node(cloud_id, CLOUD, None, UNBOUNDED, UNBOUNDED))
    n = k + 1
    matrix = [[0.0] * n for _ in range(n)]
    for a in range(k):
        for b in range(a + 1, k):
            matrix[a][b] = matrix[b][a] = edge_distance
        matrix[a][cloud_id] = matrix[cloud_id][a] = cloud_distance
    distances = DistanceMatrix(tuple(range(n)), tuple(tuple(row) for row in matrix))
    service_objs = tuple(make_service(*spec, list(range(k)), cloud_id) for spec in services)
    task_objs = tuple(Task(*spec) for spec in tasks)
    return Scenario(nodes=tuple(nodes), services=service_objs, tasks=task_objs,
                    distances=distances)
