"""Seeded random scenario generation.

Determinism contract: `generate(params, seed)` is a pure function. Randomness
comes from NumPy's PCG64 bit generator seeded through SeedSequence with an
explicit stream path per entity, so the same (params, seed) reproduces the
same scenario across runs and platforms, and adding entities of one kind never
perturbs the draws of another:

    (seed, 0, j)  cloudlet j:  x, y position on the grid
    (seed, 1, j)  cloudlet j:  storage capacity, compute capacity
    (seed, 2, m)  service m:   storage demand, cloud schedule cost,
                               placement cost per cloudlet (ascending id),
                               cloudlet schedule cost per cloudlet (ascending id)
    (seed, 3, t)  task t:      service index, local cloudlet index,
                               input size, output size, compute time

Draw order within a stream is part of the contract. With draw_discrete=True
the quantities given as {low, high} pairs in the source parameter table
(packet sizes, compute time, and the three cost families) become fair
two-point draws over {low, high}; storage demands and cloudlet capacities stay
continuous either way.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    CLOUD,
    CLOUDLET,
    UNBOUNDED,
    DistanceMatrix,
    GenerationParams,
    Node,
    Scenario,
    Service,
    Task,
)

# Stream path categories (second SeedSequence entropy word).
_POSITIONS = 0
_CAPACITIES = 1
_SERVICES = 2
_TASKS = 3

_MAX_SEED = 2**64


def _stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *path))))


def _draw(rng: np.random.Generator, lo: float, hi: float, discrete: bool) -> float:
    if discrete:
        return lo if rng.integers(0, 2) == 0 else hi
    return float(rng.uniform(lo, hi))


def generate(params: GenerationParams, seed: int) -> Scenario:
    """Build a scenario: cloudlets placed uniformly on the grid, one cloud at a
    fixed multiple of the grid diagonal, services and tasks drawn per the
    parameter ranges. Deadlines are qos_factor * compute_time exactly."""
    if not (0 <= seed < _MAX_SEED):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")

    nc = params.num_cloudlets
    cloud_id = nc
    discrete = params.draw_discrete

    positions = []
    nodes = []
    w_lo, w_hi = params.resolved_compute_range()
    s_lo, s_hi = params.cloudlet_storage_range
    for j in range(nc):
        pos_rng = _stream(seed, _POSITIONS, j)
        x = float(pos_rng.uniform(0.0, params.grid_size))
        y = float(pos_rng.uniform(0.0, params.grid_size))
        positions.append((x, y))
        cap_rng = _stream(seed, _CAPACITIES, j)
        storage = float(cap_rng.uniform(s_lo, s_hi))
        compute = float(cap_rng.uniform(w_lo, w_hi))
        nodes.append(Node(id=j, kind=CLOUDLET, position=(x, y),
                          storage_capacity=storage, compute_capacity=compute))
    nodes.append(Node(id=cloud_id, kind=CLOUD, position=None,
                      storage_capacity=UNBOUNDED, compute_capacity=UNBOUNDED))

    cloud_distance = (params.cloud_distance_multiple
                      * params.grid_size * math.sqrt(2.0)
                      * params.distance_scale)
    n = nc + 1
    matrix = [[0.0] * n for _ in range(n)]
    for a in range(nc):
        ax, ay = positions[a]
        for b in range(a + 1, nc):
            bx, by = positions[b]
            d = math.hypot(ax - bx, ay - by) * params.distance_scale
            matrix[a][b] = matrix[b][a] = d
        matrix[a][cloud_id] = matrix[cloud_id][a] = cloud_distance
    distances = DistanceMatrix(ids=tuple(range(n)),
                               matrix=tuple(tuple(row) for row in matrix))

    services = []
    for m in range(params.num_services):
        rng = _stream(seed, _SERVICES, m)
        demand = float(rng.uniform(*params.storage_demand_range))
        cloud_cost = _draw(rng, *params.cloud_schedule_cost_range, discrete)
        placement = {j: _draw(rng, *params.placement_cost_range, discrete) for j in range(nc)}
        schedule = {j: _draw(rng, cloud_cost, params.beta * cloud_cost, discrete)
                    for j in range(nc)}
        schedule[cloud_id] = cloud_cost
        services.append(Service(id=m, storage_demand=demand,
                                placement_cost=placement, schedule_cost=schedule))

    tasks = []
    for t in range(params.num_tasks):
        rng = _stream(seed, _TASKS, t)
        service = int(rng.integers(0, params.num_services))
        local = int(rng.integers(0, nc))
        t_in = _draw(rng, *params.packet_size_range, discrete)
        t_out = _draw(rng, *params.packet_size_range, discrete)
        sigma = _draw(rng, *params.compute_time_range, discrete)
        tasks.append(Task(id=t, service=service, local_node=local,
                          input_size=t_in, output_size=t_out,
                          compute_time=sigma, qos_deadline=params.qos_factor * sigma))

    return Scenario(nodes=tuple(nodes), services=tuple(services), tasks=tuple(tasks),
                    distances=distances, params=params, seed=seed)
