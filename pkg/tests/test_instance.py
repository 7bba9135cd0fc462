import math

import numpy as np
import pytest

from milc import GridSpec, ProblemInstance, all_pairs_shortest_paths, build_grid_instance, validate_instance
from milc.checks import random_small_instance


def comm_pairs(w, h, r):
    """Closed-form count of unordered cell pairs within Euclidean range r."""
    total = 0
    k = int(math.floor(r))
    for dx in range(-k, k + 1):
        for dy in range(0, k + 1):
            if (dy == 0 and dx <= 0) or dx * dx + dy * dy > r * r:
                continue
            total += max(0, w - abs(dx)) * max(0, h - dy)
    return total


class TestGrid:
    def test_edge_counts_20x20(self, grid20):
        assert len(grid20.movement_edge_list()) == 2 * 19 * 20 + 2 * 19 * 19
        assert len(grid20.comm_edge_list()) == comm_pairs(20, 20, 4)

    @pytest.mark.parametrize("w,h,r", [(3, 3, 1), (5, 1, 2), (7, 4, 2.5), (6, 6, 3)])
    def test_comm_counts(self, w, h, r):
        inst = build_grid_instance(GridSpec(w, h, (0, 0), r, 2), 1, 0)
        assert len(inst.comm_edge_list()) == comm_pairs(w, h, r)
        assert all(wt == 2 for _, _, wt in inst.comm_edge_list())

    def test_center_cell_moves(self, grid20):
        c = grid20.coords.index((5, 5))
        assert len(grid20.movement[c]) == 8
        assert set(grid20.movement[c].values()) == {1}

    def test_corner_distance(self, grid20, grid20_dist):
        far = grid20.coords.index((19, 19))
        assert grid20_dist(grid20.base, far) == 19

    def test_sensing_excludes_base(self):
        inst = build_grid_instance(GridSpec(4, 3, (2, 1)), 2, 5)
        assert inst.base == 1 * 4 + 2
        assert inst.base not in inst.sensing
        assert len(inst.sensing) == 11

    def test_bad_base_cell(self):
        with pytest.raises(ValueError, match="base_cell"):
            build_grid_instance(GridSpec(3, 3, (5, 0)), 1, 0)


class TestValidation:
    def test_valid_grid(self, grid20):
        assert validate_instance(grid20) == []

    def test_base_sensing(self):
        inst = ProblemInstance.from_edges(2, [(0, 1, 1)], [], 0, [0, 1], 1, 0)
        assert "base must not be a sensing location" in validate_instance(inst)

    def test_zero_move_weight(self):
        inst = ProblemInstance.from_edges(2, [(0, 1, 0)], [], 0, [1], 1, 0)
        assert "movement weight >= 1" in validate_instance(inst)

    def test_disconnected(self):
        inst = ProblemInstance.from_edges(3, [(0, 1, 1)], [], 0, [1, 2], 1, 0)
        assert any("connect" in p for p in validate_instance(inst))

    def test_roundtrip(self, grid20):
        again = ProblemInstance.from_dict(grid20.to_dict())
        assert again.to_dict() == grid20.to_dict()
        assert again.coords == grid20.coords


def floyd_warshall(inst):
    n = inst.vertex_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v, w in inst.movement_edge_list():
        d[u, v] = d[v, u] = min(d[u, v], w)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


class TestDistances:
    def test_matches_floyd_warshall(self, rng):
        for _ in range(20):
            inst = random_small_instance(rng, max_vertices=10, move_weights=(1, 2, 3))
            table = all_pairs_shortest_paths(inst)
            np.testing.assert_array_equal(table.dist, floyd_warshall(inst))

    def test_paths_realise_distances(self, rng):
        for _ in range(20):
            inst = random_small_instance(rng, max_vertices=10, move_weights=(1, 2, 3))
            table = all_pairs_shortest_paths(inst)
            for s in range(inst.vertex_count):
                for d in range(inst.vertex_count):
                    p = table.path(s, d)
                    assert p[0] == s and p[-1] == d
                    assert sum(inst.movement[a][b] for a, b in zip(p, p[1:])) == table(s, d)
