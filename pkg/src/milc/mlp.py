"""Minimum-latency store-and-forward paths (MLPs).

An MLP carries one datum from a source vertex to the base using at most
``budget`` UAVs. Each communication hand-off consumes one more UAV, except the
final transmission to the base, whose receiver is the base station itself.
The search runs on a layered state graph ``(vertex, uavs_used - 1)``.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .instance import DistanceTable, ProblemInstance, all_pairs_shortest_paths

State = tuple[int, int]
MOVE = "move"
COMM = "comm"


@dataclass(frozen=True)
class Leg:
    """Portion of an MLP carried by one UAV.

    ``st``/``et`` are relative to the start of the dispatch. ``tx`` is the
    transmission time of the outgoing hand-off (0 when the leg ends by flying
    into the base) and ``target`` the receiving vertex (``None`` in that case).
    """

    sv: int
    ev: int
    path: tuple[int, ...]
    st: int
    et: int
    tx: int = 0
    target: int | None = None

    @property
    def moves(self) -> int:
        return len(self.path) - 1

    def to_dict(self) -> dict:
        return {
            "sv": self.sv, "ev": self.ev, "path": list(self.path),
            "st": self.st, "et": self.et, "tx": self.tx, "target": self.target,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Leg":
        return cls(d["sv"], d["ev"], tuple(d["path"]), d["st"], d["et"], d["tx"], d["target"])


@dataclass(frozen=True)
class MlpSchedule:
    source: int
    legs: tuple[Leg, ...]
    total_latency: int

    def ready_offsets(self) -> list[int]:
        """Relative time by which each leg's UAV must be at its start vertex.

        The receiver has to be in place when the incoming transmission begins.
        """
        out = [0]
        for prev, leg in zip(self.legs, self.legs[1:]):
            out.append(leg.st - prev.tx)
        return out

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "total_latency": self.total_latency,
            "legs": [leg.to_dict() for leg in self.legs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpSchedule":
        return cls(d["source"], tuple(Leg.from_dict(x) for x in d["legs"]), d["total_latency"])


class ExpandedGraph:
    """Layered state graph for a fixed UAV budget.

    States are ``(v, j)`` with ``0 <= j <= budget - 1``, where ``j`` counts the
    hand-offs so far. Movement edges stay in a layer, communication edges move
    up one layer, and a transmission to the base stays in the current layer
    (the base's radio receives it). Base states are terminal. With
    ``lock_first_leg`` no movement leaves layer 0.
    """

    def __init__(self, instance: ProblemInstance, budget: int, lock_first_leg: bool = False):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.instance = instance
        self.budget = budget
        self.lock_first_leg = lock_first_leg
        self.destination = instance.base

    @property
    def num_states(self) -> int:
        return self.instance.vertex_count * self.budget

    def states(self) -> Iterator[State]:
        for j in range(self.budget):
            for v in range(self.instance.vertex_count):
                yield (v, j)

    def successors(self, state: State) -> list[tuple[State, int, str]]:
        v, j = state
        inst = self.instance
        if v == inst.base:
            return []
        out = []
        if not (self.lock_first_leg and j == 0):
            for w, weight in inst.movement.get(v, {}).items():
                out.append(((w, j), weight, MOVE))
        for w, weight in inst.comm.get(v, {}).items():
            if w == inst.base:
                out.append(((w, j), weight, COMM))
            elif j + 1 < self.budget:
                out.append(((w, j + 1), weight, COMM))
        return out

    def predecessors(self, state: State) -> list[tuple[State, int, str]]:
        w, j = state
        inst = self.instance
        out = []
        if not (self.lock_first_leg and j == 0):
            for v, weight in inst.movement.get(w, {}).items():
                if v != inst.base:
                    out.append(((v, j), weight, MOVE))
        if w == inst.base:
            for v, weight in inst.comm.get(w, {}).items():
                out.append(((v, j), weight, COMM))
        elif j >= 1:
            for v, weight in inst.comm.get(w, {}).items():
                if v != inst.base:
                    out.append(((v, j - 1), weight, COMM))
        return out

    def edges(self) -> Iterator[tuple[State, State, int, str]]:
        for s in self.states():
            for t, weight, kind in self.successors(s):
                yield s, t, weight, kind


def build_expanded_graph(instance: ProblemInstance, budget: int, lock_first_leg: bool = False) -> ExpandedGraph:
    if budget > instance.num_uavs:
        raise ValueError(f"budget {budget} exceeds the {instance.num_uavs} available UAVs")
    return ExpandedGraph(instance, budget, lock_first_leg)


def min_latency(instance: ProblemInstance, source: int, budget: int, lock_first_leg: bool = False) -> int | None:
    """Latency of the MLP from ``source`` to the base, or ``None`` if none exists."""
    graph = ExpandedGraph(instance, budget, lock_first_leg)
    base = instance.base
    if source == base:
        return 0
    best = {(source, 0): 0}
    heap = [(0, source, 0)]
    while heap:
        d, v, j = heapq.heappop(heap)
        if v == base:
            return d
        if d > best[(v, j)]:
            continue
        for state, weight, _ in graph.successors((v, j)):
            nd = d + weight
            if nd < best.get(state, math.inf):
                best[state] = nd
                heapq.heappush(heap, (nd, state[0], state[1]))
    return None


def cost_to_go(graph: ExpandedGraph) -> dict[State, int]:
    """Shortest distance from every state to a terminal base state."""
    base = graph.instance.base
    dist = {(base, j): 0 for j in range(graph.budget)}
    heap = [(0, base, j) for j in range(graph.budget)]
    while heap:
        d, w, j = heapq.heappop(heap)
        if d > dist[(w, j)]:
            continue
        for state, weight, _ in graph.predecessors((w, j)):
            nd = d + weight
            if nd < dist.get(state, math.inf):
                dist[state] = nd
                heapq.heappush(heap, (nd, state[0], state[1]))
    return dist


def _extract(graph: ExpandedGraph, source: int, ctg: Callable[[int, int], float]) -> MlpSchedule | None:
    """Walk the lexicographically smallest shortest state path and cut it into legs.

    Successor states are ordered by (vertex, layer); between a transmission and
    a flight into the base at equal cost, the transmission wins.
    """
    inst = graph.instance
    base = inst.base
    remaining = ctg(source, 0)
    if not math.isfinite(remaining):
        return None
    if source == base:
        return MlpSchedule(source, (Leg(base, base, (base,), 0, 0),), 0)

    legs: list[Leg] = []
    sv, path, st, t = source, [source], 0, 0
    v, j = source, 0
    while True:
        here = ctg(v, j)
        options = []
        for (w, jj), weight, kind in graph.successors((v, j)):
            if weight + ctg(w, jj) == here:
                options.append((w, jj, 0 if kind == COMM else 1, weight))
        w, jj, kind_rank, weight = min(options)
        t += weight
        if kind_rank == 1:
            path.append(w)
            if w == base:
                legs.append(Leg(sv, base, tuple(path), st, t, 0, None))
                break
        else:
            legs.append(Leg(sv, v, tuple(path), st, t, weight, w))
            if w == base:
                break
            sv, path, st = w, [w], t
        v, j = w, jj
    return MlpSchedule(source, tuple(legs), t)


def min_latency_path(
    instance: ProblemInstance, source: int, budget: int, lock_first_leg: bool = False
) -> MlpSchedule | None:
    """MLP with per-UAV legs; ``None`` when the base cannot be reached."""
    graph = ExpandedGraph(instance, budget, lock_first_leg)
    ctg = cost_to_go(graph)
    return _extract(graph, source, lambda v, j: ctg.get((v, j), math.inf))


class MlpSolver:
    """Batch MLP solver for planning.

    Latencies for every vertex and budget come from a min-plus recursion over
    the layers of the expanded graph: within a layer the carrier moves along a
    shortest path, so a whole layer is one min-plus product with the distance
    matrix. This is the O(|V|^2 * |R|) dynamic program; paths are then
    extracted on the expanded graph with those values as exact costs-to-go.
    """

    def __init__(self, instance: ProblemInstance, distances: DistanceTable | None = None,
                 max_budget: int | None = None):
        self.instance = instance
        self.distances = distances if distances is not None else all_pairs_shortest_paths(instance)
        self.max_budget = max_budget if max_budget is not None else instance.num_uavs
        self._moving, self._stopped = self._profile()
        self._paths: dict[tuple[int, int, bool], MlpSchedule | None] = {}

    def _profile(self) -> tuple[np.ndarray, np.ndarray]:
        inst = self.instance
        n, base = inst.vertex_count, inst.base
        dist = self.distances.dist
        comm = inst.comm_matrix
        to_base = comm[:, base].copy()
        moving = np.full((self.max_budget + 1, n), np.inf)
        stopped = np.full((self.max_budget + 1, n), np.inf)
        for k in range(1, self.max_budget + 1):
            g = to_base.copy()
            if k >= 2:
                relay = comm + moving[k - 1][None, :]
                relay[:, base] = np.inf
                g = np.minimum(g, relay.min(axis=1))
            g[base] = 0.0
            stopped[k] = g
            moving[k] = (dist + g[None, :]).min(axis=1)
        return moving, stopped

    def latency(self, source: int, budget: int, lock_first_leg: bool = False) -> int | None:
        budget = min(budget, self.max_budget)
        table = self._stopped if lock_first_leg else self._moving
        val = table[budget][source]
        if source == self.instance.base:
            return 0
        return int(val) if math.isfinite(val) else None

    def latencies(self, budget: int, lock_first_leg: bool = False) -> np.ndarray:
        table = self._stopped if lock_first_leg else self._moving
        return table[min(budget, self.max_budget)]

    def path(self, source: int, budget: int, lock_first_leg: bool = False) -> MlpSchedule | None:
        budget = min(budget, self.max_budget)
        key = (source, budget, lock_first_leg)
        if key not in self._paths:
            graph = ExpandedGraph(self.instance, budget, lock_first_leg)
            moving, stopped = self._moving, self._stopped

            def ctg(v: int, j: int) -> float:
                if lock_first_leg and j == 0:
                    return 0.0 if v == self.instance.base else stopped[budget][v]
                return moving[budget - j][v]

            self._paths[key] = _extract(graph, source, ctg)
        return self._paths[key]


ORACLE_MAX_VERTICES = 12
ORACLE_MAX_BUDGET = 4


def mlp_oracle(instance: ProblemInstance, source: int, budget: int, lock_first_leg: bool = False) -> int | None:
    """Exhaustive label-correcting search over (vertex, UAVs used) labels.

    Deliberately naive and independent of :class:`ExpandedGraph`; meant for
    small verification instances only.
    """
    if instance.vertex_count > ORACLE_MAX_VERTICES or budget > ORACLE_MAX_BUDGET:
        raise ValueError(
            f"oracle limited to {ORACLE_MAX_VERTICES} vertices and budget {ORACLE_MAX_BUDGET}"
        )
    if budget < 1:
        raise ValueError("budget must be >= 1")
    base = instance.base
    if source == base:
        return 0
    labels = {(source, 1): 0}
    queue = deque([(source, 1)])
    answer = None
    while queue:
        v, used = queue.popleft()
        t = labels[(v, used)]
        steps = []
        if not (lock_first_leg and used == 1):
            steps += [(w, used, c) for w, c in instance.movement[v].items()]
        steps += [(w, used if w == base else used + 1, c) for w, c in instance.comm[v].items()]
        for w, u2, c in steps:
            if u2 > budget:
                continue
            if w == base:
                if answer is None or t + c < answer:
                    answer = t + c
                continue
            if (w, u2) not in labels or t + c < labels[(w, u2)]:
                labels[(w, u2)] = t + c
                queue.append((w, u2))
    return answer
