"""Randomised cross-checks of the fast solvers against their brute-force oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import ProblemInstance
from .matching import matching_oracle, minmax_matching
from .mlp import min_latency, mlp_oracle


def random_small_instance(rng: np.random.Generator, max_vertices: int = 8, num_uavs: int = 3,
                          move_weights=(1, 2), comm_weights=(0, 1, 2)) -> ProblemInstance:
    """Connected random graph; vertex 0 is the base, all others sense."""
    n = int(rng.integers(2, max_vertices + 1))
    moves = {}
    for v in range(1, n):  # random spanning tree keeps every vertex reachable
        u = int(rng.integers(0, v))
        moves[(u, v)] = int(rng.choice(move_weights))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in moves and rng.random() < 0.25:
                moves[(u, v)] = int(rng.choice(move_weights))
    comm = [(u, v, int(rng.choice(comm_weights)))
            for u in range(n) for v in range(u + 1, n) if rng.random() < 0.3]
    return ProblemInstance.from_edges(
        vertex_count=n,
        movement_edges=[(u, v, w) for (u, v), w in moves.items()],
        comm_edges=comm,
        base=0,
        sensing=range(1, n),
        num_uavs=num_uavs,
        latency_bound=0,
    )


@dataclass
class SuiteResult:
    name: str
    checked: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return not self.mismatches


def mlp_suite(trials: int = 200, seed: int = 0, max_budget: int = 3) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad, checked = [], 0
    for t in range(trials):
        inst = random_small_instance(rng, num_uavs=max_budget)
        budget = int(rng.integers(1, max_budget + 1))
        for lock in (False, True):
            for src in inst.sensing_order:
                fast = min_latency(inst, src, budget, lock)
                slow = mlp_oracle(inst, src, budget, lock)
                checked += 1
                if fast != slow:
                    bad.append({"trial": t, "source": src, "budget": budget, "lock": lock, "fast": fast, "oracle": slow})
    return SuiteResult("mlp", checked, bad)


def matching_suite(trials: int = 500, seed: int = 0, max_size: int = 7) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad = []
    for t in range(trials):
        cols = int(rng.integers(1, max_size + 1))
        rows = int(rng.integers(1, cols + 1))
        A = rng.integers(0, 20, size=(rows, cols))
        got = minmax_matching(A).bottleneck
        want = matching_oracle(A)
        if got != want:
            bad.append({"trial": t, "matrix": A.tolist(), "fast": got, "oracle": want})
    return SuiteResult("matching", trials, bad)
