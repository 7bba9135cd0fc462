"""Bottleneck (min-max) assignment of UAVs to MLP legs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Assignment:
    mapping: dict[int, int]  # leg index -> UAV id
    bottleneck: float


def _augment(leg: int, allowed: list[list[int]], owner: dict[int, int], seen: set[int]) -> bool:
    for col in allowed[leg]:
        if col in seen:
            continue
        seen.add(col)
        if col not in owner or _augment(owner[col], allowed, owner, seen):
            owner[col] = leg
            return True
    return False


def _saturates(allowed: list[list[int]], legs: Sequence[int], banned: set[int] = frozenset()) -> bool:
    owner: dict[int, int] = {c: -1 for c in banned}
    sub = {leg: [c for c in allowed[leg] if c not in banned] for leg in legs}
    for leg in legs:
        if not _augment(leg, sub, owner, set(banned)):
            return False
    return True


def minmax_matching(costs, uav_ids: Sequence[int] | None = None) -> Assignment:
    """Injective leg -> UAV assignment minimising the largest selected cost.

    Binary search over the sorted distinct entries with a bipartite matching
    feasibility test. Among optimal assignments the one whose leg-ordered
    sequence of column positions is lexicographically smallest is returned.
    """
    A = np.asarray(costs, dtype=float)
    if A.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    rows, cols = A.shape
    if rows > cols:
        raise ValueError(f"{rows} legs cannot be matched to {cols} UAVs")
    ids = list(range(cols)) if uav_ids is None else list(uav_ids)
    if rows == 0:
        return Assignment({}, 0.0)

    values = np.unique(A)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        allowed = [list(np.flatnonzero(A[r] <= values[mid])) for r in range(rows)]
        if _saturates(allowed, range(rows)):
            hi = mid
        else:
            lo = mid + 1
    threshold = values[lo]
    allowed = [[int(c) for c in np.flatnonzero(A[r] <= threshold)] for r in range(rows)]

    chosen: dict[int, int] = {}
    used: set[int] = set()
    for r in range(rows):
        for c in allowed[r]:
            if c in used:
                continue
            if _saturates(allowed, range(r + 1, rows), used | {c}):
                chosen[r] = c
                used.add(c)
                break
    return Assignment({r: ids[c] for r, c in chosen.items()}, float(threshold))


ORACLE_MAX = 7


def matching_oracle(costs) -> float:
    """Bottleneck value by enumerating every injection (small matrices only)."""
    A = np.asarray(costs, dtype=float)
    rows, cols = A.shape
    if rows > ORACLE_MAX or cols > ORACLE_MAX:
        raise ValueError(f"oracle limited to {ORACLE_MAX}x{ORACLE_MAX} matrices")
    if rows > cols:
        raise ValueError(f"{rows} legs cannot be matched to {cols} UAVs")
    if rows == 0:
        return 0.0
    return float(min(max(A[r, c] for r, c in enumerate(perm))
                     for perm in itertools.permutations(range(cols), rows)))
