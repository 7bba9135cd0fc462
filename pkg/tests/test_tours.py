import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from milc import (
    GridSpec,
    InfeasibleError,
    ProblemInstance,
    Tour,
    all_pairs_shortest_paths,
    build_grid_instance,
    k_splitour,
    shortcut,
    tsp_tour,
)
from milc.tours import two_opt


def random_metric(rng, n):
    pts = rng.integers(0, 30, size=(n, 2))
    return np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)  # L1 metric


class TestTsp:
    def test_unit_square(self):
        inst = build_grid_instance(GridSpec(2, 2), 1, 0)
        tour = tsp_tour(inst, all_pairs_shortest_paths(inst))
        assert tour.cost == 4
        assert tour.sequence[0] == tour.sequence[-1] == inst.base
        assert sorted(tour.interior) == sorted(inst.sensing)

    def test_visits_every_location_once(self, grid20, grid20_tour):
        assert sorted(grid20_tour.interior) == sorted(grid20.sensing)

    def test_cost_is_recomputable(self, grid20_dist, grid20_tour):
        again = Tour.from_sequence(grid20_tour.sequence, grid20_dist)
        assert again.cost == grid20_tour.cost

    def test_deterministic(self, grid20, grid20_dist, grid20_tour):
        assert tsp_tour(grid20, grid20_dist, seed=0) == grid20_tour

    def test_grid_tour_near_optimal(self, grid20_tour):
        # 399 locations with unit moves: any closed tour costs at least 400
        assert 400 <= grid20_tour.cost <= 440

    def test_restarts_never_worse(self, grid20, grid20_dist, grid20_tour):
        assert tsp_tour(grid20, grid20_dist, seed=0, restarts=3).cost <= grid20_tour.cost

    def test_unreachable(self):
        inst = ProblemInstance.from_edges(3, [(0, 1, 1)], [], 0, [1, 2], 1, 0)
        with pytest.raises(InfeasibleError) as err:
            tsp_tour(inst, all_pairs_shortest_paths(inst))
        assert err.value.vertex == 2

    def test_two_opt_improves(self, rng):
        for _ in range(20):
            mat = random_metric(rng, 12)
            order = list(range(12))
            better = two_opt(order, mat)
            cost = lambda o: sum(mat[a, b] for a, b in zip(o, o[1:] + o[:1]))
            assert better[0] == 0 and sorted(better) == order
            assert cost(better) <= cost(order)


class TestSplit:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.sampled_from([2, 3, 4]), n=st.integers(2, 25))
    def test_bound_and_cover(self, seed, k, n):
        mat = random_metric(np.random.default_rng(seed), n)
        tour = Tour.from_sequence([0, *np.random.default_rng(seed).permutation(np.arange(1, n)), 0], mat)
        split = k_splitour(tour, k, mat)
        assert split.k <= k
        for piece in split.subtours:
            assert piece.cost <= split.bound() + 1e-9
            assert piece.base == 0 and piece.sequence[-1] == 0 and piece.interior
        joined = [v for piece in split.subtours for v in piece.interior]
        assert joined == list(tour.interior)

    def test_k1_is_identity(self, grid20_dist, grid20_tour):
        split = k_splitour(grid20_tour, 1, grid20_dist)
        assert split.subtours == (grid20_tour,)

    def test_more_pieces_than_locations(self):
        mat = np.array([[0, 1], [1, 0]])
        split = k_splitour(Tour.from_sequence([0, 1, 0], mat), 4, mat)
        assert split.k == 1 and split.requested_k == 4

    def test_grid_split(self, grid20_dist, grid20_tour):
        split = k_splitour(grid20_tour, 6, grid20_dist)
        assert split.k == 6
        assert split.c_max == 19


class TestShortcut:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_never_longer(self, seed):
        rng = np.random.default_rng(seed)
        mat = random_metric(rng, 10)
        tour = Tour.from_sequence([0, *rng.permutation(np.arange(1, 10)), 0], mat)
        covered = set(rng.choice(np.arange(1, 10), size=int(rng.integers(0, 9)), replace=False).tolist())
        short = shortcut(tour, covered, mat)
        assert short.cost <= tour.cost
        assert [v for v in tour.interior if v not in covered] == list(short.interior)

    def test_nothing_covered(self, grid20_dist, grid20_tour):
        assert shortcut(grid20_tour, [], grid20_dist) is grid20_tour
