"""Problem instances: movement/communication graphs, grid builder, distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

Adjacency = Mapping[int, Mapping[int, int]]


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    base_cell: tuple[int, int] = (0, 0)
    comm_range: float = 4
    transmission_time: int = 0

    def problems(self) -> list[str]:
        out = []
        if self.width < 1 or self.height < 1:
            out.append("grid must have width >= 1 and height >= 1")
        bx, by = self.base_cell
        if not (0 <= bx < self.width and 0 <= by < self.height):
            out.append("base_cell must lie inside the grid")
        if self.comm_range < 1:
            out.append("comm_range >= 1")
        if self.transmission_time < 0:
            out.append("transmission_time >= 0")
        return out

    def cell_id(self, x: int, y: int) -> int:
        return y * self.width + x


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Movement graph, communication graph, sensing set and mission parameters.

    ``movement`` and ``comm`` are symmetric adjacency maps ``u -> {v: weight}``.
    Instances are treated as immutable once built.
    """

    vertex_count: int
    movement: Adjacency
    comm: Adjacency
    base: int
    sensing: frozenset[int]
    num_uavs: int
    latency_bound: int
    coords: tuple[tuple[int, int], ...] | None = field(default=None)

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        movement_edges: Iterable[tuple[int, int, int]],
        comm_edges: Iterable[tuple[int, int, int]],
        base: int,
        sensing: Iterable[int],
        num_uavs: int,
        latency_bound: int,
        coords: Sequence[tuple[int, int]] | None = None,
    ) -> "ProblemInstance":
        return cls(
            vertex_count=vertex_count,
            movement=_symmetric(vertex_count, movement_edges),
            comm=_symmetric(vertex_count, comm_edges),
            base=base,
            sensing=frozenset(sensing),
            num_uavs=num_uavs,
            latency_bound=latency_bound,
            coords=tuple(tuple(c) for c in coords) if coords is not None else None,
        )

    def with_params(self, num_uavs: int | None = None, latency_bound: int | None = None) -> "ProblemInstance":
        """Copy sharing the graphs but with different mission parameters."""
        return ProblemInstance(
            vertex_count=self.vertex_count,
            movement=self.movement,
            comm=self.comm,
            base=self.base,
            sensing=self.sensing,
            num_uavs=self.num_uavs if num_uavs is None else num_uavs,
            latency_bound=self.latency_bound if latency_bound is None else latency_bound,
            coords=self.coords,
        )

    @cached_property
    def base_comm_set(self) -> frozenset[int]:
        return frozenset(v for v in self.sensing if self.base in self.comm.get(v, {}))

    @cached_property
    def sensing_order(self) -> tuple[int, ...]:
        return tuple(sorted(self.sensing))

    @cached_property
    def comm_matrix(self) -> np.ndarray:
        """Dense W^C matrix, ``inf`` where there is no communication edge."""
        mat = np.full((self.vertex_count, self.vertex_count), np.inf)
        for u, nbrs in self.comm.items():
            for v, w in nbrs.items():
                mat[u, v] = w
        return mat

    def movement_edge_list(self) -> list[tuple[int, int, int]]:
        return _edge_list(self.movement)

    def comm_edge_list(self) -> list[tuple[int, int, int]]:
        return _edge_list(self.comm)

    def to_dict(self) -> dict:
        out = {
            "vertex_count": self.vertex_count,
            "movement_edges": [list(e) for e in self.movement_edge_list()],
            "comm_edges": [list(e) for e in self.comm_edge_list()],
            "base": self.base,
            "sensing": sorted(self.sensing),
            "num_uavs": self.num_uavs,
            "latency_bound": self.latency_bound,
        }
        if self.coords is not None:
            out["coords"] = [list(c) for c in self.coords]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProblemInstance":
        return cls.from_edges(
            vertex_count=int(data["vertex_count"]),
            movement_edges=[tuple(e) for e in data["movement_edges"]],
            comm_edges=[tuple(e) for e in data["comm_edges"]],
            base=int(data["base"]),
            sensing=[int(v) for v in data["sensing"]],
            num_uavs=int(data["num_uavs"]),
            latency_bound=int(data["latency_bound"]),
            coords=data.get("coords"),
        )


def _symmetric(n: int, edges: Iterable[tuple[int, int, int]]) -> dict[int, dict[int, int]]:
    adj: dict[int, dict[int, int]] = {v: {} for v in range(n)}
    for u, v, w in edges:
        if u == v:
            continue
        adj.setdefault(u, {})[v] = w
        adj.setdefault(v, {})[u] = w
    return {u: dict(sorted(nbrs.items())) for u, nbrs in adj.items()}


def _edge_list(adj: Adjacency) -> list[tuple[int, int, int]]:
    return sorted((u, v, w) for u, nbrs in adj.items() for v, w in nbrs.items() if u < v)


def build_grid_instance(spec: GridSpec, num_uavs: int, latency_bound: int) -> ProblemInstance:
    """Grid world with 8-connected unit-time moves and a Euclidean radio range.

    Vertex ids are row-major cell indices (``y * width + x``). Every cell but
    the base cell is a sensing location.
    """
    problems = spec.problems()
    if problems:
        raise ValueError("invalid grid: " + "; ".join(problems))
    w, h = spec.width, spec.height
    coords = [(x, y) for y in range(h) for x in range(w)]
    movement = []
    for x, y in coords:
        u = spec.cell_id(x, y)
        for dx, dy in ((1, 0), (0, 1), (1, 1), (-1, 1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h:
                movement.append((u, spec.cell_id(nx, ny), 1))
    r = int(math.floor(spec.comm_range))
    r2 = spec.comm_range * spec.comm_range
    comm = []
    for x, y in coords:
        u = spec.cell_id(x, y)
        for dy in range(0, r + 1):
            for dx in range(-r, r + 1):
                if dy == 0 and dx <= 0:
                    continue
                if dx * dx + dy * dy > r2:
                    continue
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h:
                    comm.append((u, spec.cell_id(nx, ny), spec.transmission_time))
    base = spec.cell_id(*spec.base_cell)
    return ProblemInstance.from_edges(
        vertex_count=w * h,
        movement_edges=movement,
        comm_edges=comm,
        base=base,
        sensing=[v for v in range(w * h) if v != base],
        num_uavs=num_uavs,
        latency_bound=latency_bound,
        coords=coords,
    )


def validate_instance(instance: ProblemInstance) -> list[str]:
    """Return every violated instance invariant (empty list when valid)."""
    out = []
    n = instance.vertex_count
    if not 0 <= instance.base < n:
        out.append("base must be a vertex")
    if instance.base in instance.sensing:
        out.append("base must not be a sensing location")
    if any(not 0 <= v < n for v in instance.sensing):
        out.append("sensing locations must be vertices")
    for name, adj in (("movement", instance.movement), ("comm", instance.comm)):
        for u, nbrs in adj.items():
            if not 0 <= u < n or any(not 0 <= v < n for v in nbrs):
                out.append(f"{name} edges must join vertices")
                break
        for u, nbrs in adj.items():
            if any(adj.get(v, {}).get(u) != w for v, w in nbrs.items()):
                out.append(f"{name} edges must be symmetric")
                break
    if any(w < 1 for _, _, w in instance.movement_edge_list()):
        out.append("movement weight >= 1")
    if any(w < 0 for _, _, w in instance.comm_edge_list()):
        out.append("comm weight >= 0")
    if instance.num_uavs < 1:
        out.append("num_uavs >= 1")
    if instance.latency_bound < 0:
        out.append("latency_bound >= 0")
    if 0 <= instance.base < n and not out:
        reach = _reachable(instance.movement, instance.base)
        if not instance.sensing <= reach:
            out.append("movement graph must connect the base to every sensing location")
    return out


def _reachable(adj: Adjacency, src: int) -> set[int]:
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        for v in adj.get(u, {}):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """All-pairs movement distances with lowest-id next hops."""

    dist: np.ndarray
    next_hop: np.ndarray

    @cached_property
    def rows(self) -> list[list[float]]:
        # plain lists are much faster than numpy scalars in the planner's inner loops
        return self.dist.tolist()

    def __call__(self, s: int, d: int) -> float:
        return self.rows[s][d]

    def path(self, s: int, d: int) -> list[int]:
        if not math.isfinite(self.dist[s, d]):
            raise ValueError(f"vertex {d} is unreachable from {s}")
        out = [s]
        hops = self.next_hop
        while s != d:
            s = int(hops[s, d])
            out.append(s)
        return out


def all_pairs_shortest_paths(instance: ProblemInstance) -> DistanceTable:
    n = instance.vertex_count
    edges = instance.movement_edge_list()
    rows = [u for u, v, _ in edges] + [v for u, v, _ in edges]
    cols = [v for u, v, _ in edges] + [u for u, v, _ in edges]
    data = [float(w) for *_, w in edges] * 2
    graph = csr_matrix((data, (rows, cols)), shape=(n, n))
    dist = shortest_path(graph, method="D", directed=True)

    next_hop = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        # descending so the lowest-id neighbour on a shortest path wins
        for w, weight in sorted(instance.movement.get(s, {}).items(), reverse=True):
            mask = weight + dist[w] == dist[s]
            next_hop[s, mask & np.isfinite(dist[s])] = w
        next_hop[s, s] = s
    return DistanceTable(dist=dist, next_hop=next_hop)
