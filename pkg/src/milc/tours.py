"""TSP tours over the sensing locations, k-way tour splitting, shortcutting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InfeasibleError
from .instance import DistanceTable, ProblemInstance


def _matrix(distances) -> np.ndarray:
    if isinstance(distances, DistanceTable):
        return distances.dist
    return np.asarray(distances, dtype=float)


def _cost(seq: Sequence[int], mat: np.ndarray) -> int:
    idx = np.asarray(seq)
    return int(mat[idx[:-1], idx[1:]].sum()) if len(seq) > 1 else 0


@dataclass(frozen=True)
class Tour:
    """Closed walk ``(base, v1, ..., vm, base)`` measured in the metric closure."""

    sequence: tuple[int, ...]
    cost: int

    @classmethod
    def from_sequence(cls, sequence: Iterable[int], distances) -> "Tour":
        seq = tuple(int(v) for v in sequence)
        return cls(seq, _cost(seq, _matrix(distances)))

    @property
    def base(self) -> int:
        return self.sequence[0]

    @property
    def interior(self) -> tuple[int, ...]:
        return self.sequence[1:-1]

    def cumulative(self, distances) -> list[int]:
        """Along-tour cost from the base to each position of ``sequence``."""
        mat = _matrix(distances)
        out = [0]
        for a, b in zip(self.sequence, self.sequence[1:]):
            out.append(out[-1] + int(mat[a, b]))
        return out


@dataclass(frozen=True)
class SubtourSet:
    k: int
    subtours: tuple[Tour, ...]
    c_max: int
    tour_cost: int
    requested_k: int

    def bound(self) -> float:
        """Construction bound every subtour cost respects."""
        return (self.tour_cost - 2 * self.c_max) / self.requested_k + 2 * self.c_max


def _nearest_neighbour(mat: np.ndarray, rng: np.random.Generator) -> list[int]:
    n = len(mat)
    unvisited = np.ones(n, dtype=bool)
    unvisited[0] = False
    order = [0]
    cur = 0
    for _ in range(n - 1):
        row = np.where(unvisited, mat[cur], np.inf)
        ties = np.flatnonzero(row == row.min())
        cur = int(ties[rng.integers(len(ties))]) if len(ties) > 1 else int(ties[0])
        unvisited[cur] = False
        order.append(cur)
    return order


def two_opt(order: list[int], mat: np.ndarray) -> list[int]:
    """First-improvement 2-opt on a closed tour; position 0 stays fixed."""
    t = np.asarray(order)
    n = len(t)
    if n < 4:
        return list(t)
    improved = True
    while improved:
        improved = False
        i = 0
        while i < n - 2:
            a, b = t[i], t[i + 1]
            c = t[i + 2:]
            d = np.append(t[i + 3:], t[0])
            delta = mat[a, c] + mat[b, d] - mat[a, b] - mat[c, d]
            if i == 0:
                delta[-1] = 0  # edge (t[n-1], t[0]) touches a
            hits = np.flatnonzero(delta < 0)
            if len(hits):
                j = i + 2 + int(hits[0])
                t[i + 1:j + 1] = t[i + 1:j + 1][::-1].copy()
                improved = True
            else:
                i += 1
    return list(t)


def tsp_tour(instance: ProblemInstance, distances: DistanceTable, seed: int = 0, restarts: int = 1,
             improve: bool = True) -> Tour:
    """Nearest-neighbour tour from the base, improved by 2-opt.

    Ties in the nearest-neighbour step are broken by a generator seeded with
    ``(seed, restart)``; the cheapest restart wins, earliest on ties.
    """
    nodes = [instance.base] + list(instance.sensing_order)
    mat = distances.dist[np.ix_(nodes, nodes)]
    bad = [nodes[i] for i in np.flatnonzero(~np.isfinite(mat[0]))]
    if bad:
        raise InfeasibleError(bad[0], "sensing location unreachable from the base")
    if len(nodes) == 1:
        return Tour((instance.base, instance.base), 0)
    best = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng([seed, r])
        order = _nearest_neighbour(mat, rng)
        if improve:
            order = two_opt(order, mat)
        seq = [nodes[i] for i in order] + [instance.base]
        tour = Tour.from_sequence(seq, distances)
        if best is None or tour.cost < best.cost:
            best = tour
    return best


def k_splitour(tour: Tour, k: int, distances) -> SubtourSet:
    """Split a tour into at most ``k`` base-anchored subtours.

    Split point j is the last tour vertex whose along-tour cost does not exceed
    ``(j/k) * (L - 2*c_max) + c_max``. Empty pieces are dropped, so the
    returned ``k`` may be smaller than requested.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mat = _matrix(distances)
    base = tour.base
    interior = list(tour.interior)
    c_max = int(max((mat[base, v] for v in interior), default=0))
    L = tour.cost
    if k == 1 or not interior:
        return SubtourSet(1, (tour,), c_max, L, k)
    cum = tour.cumulative(mat)
    cuts = [0]
    for j in range(1, k):
        limit = j / k * (L - 2 * c_max) + c_max
        last = cuts[-1]
        for pos in range(max(1, last), len(interior) + 1):
            if cum[pos] <= limit:
                last = pos
            else:
                break
        cuts.append(last)
    cuts.append(len(interior))
    pieces = []
    for lo, hi in zip(cuts, cuts[1:]):
        seg = interior[lo:hi]
        if seg:
            pieces.append(Tour.from_sequence([base, *seg, base], mat))
    return SubtourSet(len(pieces), tuple(pieces), c_max, L, k)


def shortcut(subtour: Tour, covered: Iterable[int], distances) -> Tour:
    covered = set(covered)
    if not covered:
        return subtour
    seq = [subtour.sequence[0]] + [v for v in subtour.interior if v not in covered] + [subtour.sequence[-1]]
    return Tour.from_sequence(seq, distances)
