"""Acceptance criteria 1-9, each run at its stated size and tolerance."""

import time

import numpy as np
import pytest

from conftest import RELAY_SOURCE, random_feasible_grid, relay_chain
from milc import (
    GridSpec,
    Tour,
    all_pairs_shortest_paths,
    build_grid_instance,
    build_plan,
    k_splitour,
    matching_oracle,
    min_latency,
    min_latency_path,
    minmax_matching,
    mlp_oracle,
    plan_h1,
    simulate,
    tsp_tour,
)
from milc.checks import random_small_instance
from milc.experiments import SweepConfig, mean_subtours, mean_wi, run_sweep, summarize
from milc.scenario import Scenario

SEEDS = list(range(10))
TWO_LEG_OPTIMA = [
    ((8, (8, 5, 6), 7), (7, (7, 1), 0)),
    ((8, (8,), 4), (4, (4, 3, 2, 1), 0)),
]


def grid_base(rcom, bound, n=6, wc=0):
    return Scenario(num_uavs=n, latency_bound=bound, grid=GridSpec(20, 20, (0, 0), rcom, wc), rounds=4)


def test_criterion_1_relay_golden(criterion):
    t0 = time.perf_counter()
    inst = relay_chain()
    lats = [min_latency(inst, RELAY_SOURCE, b) for b in (1, 2, 3)]
    sched = min_latency_path(inst, RELAY_SOURCE, 2)
    legs = tuple((leg.sv, leg.path, leg.target) for leg in sched.legs)
    elapsed = time.perf_counter() - t0
    ok = lats == [5, 3, 1] and len(sched.legs) == 2 and sched.total_latency == 3 and legs in TWO_LEG_OPTIMA \
        and elapsed < 1
    assert criterion(1, ok, f"latencies {lats}, budget-2 legs {legs}, {elapsed:.3f}s")


def test_criterion_2_mlp_oracle(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked, bad = 0, []
    for trial in range(200):
        # movement weights must be >= 1; communication weights span {0, 1, 2}
        inst = random_small_instance(rng, max_vertices=8, num_uavs=3, move_weights=(1, 2), comm_weights=(0, 1, 2))
        for src in inst.sensing_order:
            for budget in (1, 2, 3):
                for lock in (False, True):
                    checked += 1
                    fast, slow = min_latency(inst, src, budget, lock), mlp_oracle(inst, src, budget, lock)
                    if fast != slow:
                        bad.append((trial, src, budget, lock, fast, slow))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    assert criterion(2, ok, f"{checked} comparisons on 200 instances, {len(bad)} mismatches, {elapsed:.1f}s")


def test_criterion_3_matching_oracle(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    bad = 0
    for _ in range(500):
        cols = int(rng.integers(1, 8))
        rows = int(rng.integers(1, cols + 1))
        A = rng.integers(0, 25, size=(rows, cols))
        bad += minmax_matching(A).bottleneck != matching_oracle(A)
    elapsed = time.perf_counter() - t0
    assert criterion(3, bad == 0 and elapsed < 10, f"500 matrices, {bad} mismatches, {elapsed:.2f}s")


def test_criterion_4_split_bound(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst, pieces = -np.inf, 0
    for _ in range(100):
        n = int(rng.integers(3, 40))
        pts = rng.uniform(0, 100, size=(n, 2)).round()
        mat = np.abs(pts[:, None] - pts[None]).sum(axis=2)
        tour = Tour.from_sequence([0, *rng.permutation(np.arange(1, n)), 0], mat)
        for k in (2, 3, 4):
            split = k_splitour(tour, k, mat)
            limit = (tour.cost - 2 * split.c_max) / k + 2 * split.c_max
            for piece in split.subtours:
                worst = max(worst, piece.cost - limit)
                pieces += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5
    assert criterion(4, ok, f"{pieces} subtours, max excess over bound {worst:.3f}, {elapsed:.2f}s")


def test_criterion_5_latency_safety(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    failures = []
    for i in range(50):
        inst, dist = random_feasible_grid(rng, size=10)
        tour = tsp_tour(inst, dist, seed=i)
        for h in ("h1", "h2", "h3"):
            rep = simulate(inst, build_plan(inst, tour, h, distances=dist), 4, dist)
            if rep.violations or rep.coverage_gaps:
                failures.append((i, h, len(rep.violations), len(rep.coverage_gaps)))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    assert criterion(5, ok, f"150 simulations, {len(failures)} with violations or gaps, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def bound_sweep():
    t0 = time.perf_counter()
    rows = run_sweep(SweepConfig(grid_base(4, 10), "latency_bound", list(range(10, 27, 2)), SEEDS))
    return summarize(rows), time.perf_counter() - t0


def test_criterion_6_bound_sweep(criterion, bound_sweep):
    summary, elapsed = bound_sweep
    h2 = mean_wi(summary, "h2")
    values = sorted(h2)
    wi = [h2[v] for v in values]
    a = all(x >= y for x, y in zip(wi, wi[1:]))
    b_lo = abs(h2[10] - 1328) <= 0.25 * 1328
    b_hi = abs(h2[26] - 412) <= 0.25 * 412
    ks = {h: mean_subtours(summary, h) for h in ("h1", "h2", "h3")}
    c = ks["h1"][26] == 6 and ks["h3"][26] == 6 and all(k == 1 for k in ks["h2"].values())
    detail = (f"(a) H2 mean WI non-increasing {a} [{', '.join(f'{x:.0f}' for x in wi)}]; "
              f"(b) L=10 {h2[10]:.0f} vs 1328+-25% {b_lo}, L=26 {h2[26]:.0f} vs 412+-25% {b_hi}; "
              f"(c) subtours at L=26 h1={ks['h1'][26]:.0f} h3={ks['h3'][26]:.0f}, h2 always 1 {c}; {elapsed:.0f}s")
    assert criterion(6, a and b_lo and b_hi and c and elapsed < 600, detail)


def test_criterion_7_fleet_ordering(criterion):
    t0 = time.perf_counter()
    rows = run_sweep(SweepConfig(grid_base(8, 14), "num_uavs", [2, 4, 6, 8, 10, 12], SEEDS, ("h1", "h2")))
    elapsed = time.perf_counter() - t0
    summary = summarize(rows)
    h1, h2 = mean_wi(summary, "h1"), mean_wi(summary, "h2")
    pairs = [(n, h1[n], h2[n]) for n in sorted(h1)]
    ok = all(a is not None and b is not None and a >= b for _, a, b in pairs) and elapsed < 600
    detail = "; ".join(f"n={n} h1 {a:.0f} h2 {b:.0f}" for n, a, b in pairs)
    assert criterion(7, ok, f"{detail}; {elapsed:.0f}s")


def test_criterion_8_transmission_time(criterion):
    t0 = time.perf_counter()
    rows = run_sweep(SweepConfig(grid_base(8, 24), "transmission_time", [0, 1, 2, 3, 4, 5], SEEDS, ("h2", "h3")))
    elapsed = time.perf_counter() - t0
    summary = summarize(rows)
    h2, h3 = mean_wi(summary, "h2"), mean_wi(summary, "h3")
    r2, r3 = h2[4] / h2[0], h3[4] / h3[0]
    ok = r2 > r3 and elapsed < 600
    detail = (f"WI(4)/WI(0) h2 {h2[4]:.0f}/{h2[0]:.0f}={r2:.2f}, h3 {h3[4]:.0f}/{h3[0]:.0f}={r3:.2f}; "
              f"h2 subtours {[mean_subtours(summary, 'h2')[w] for w in range(6)]}; {elapsed:.0f}s")
    assert criterion(8, ok, detail)


def test_criterion_9_performance(criterion):
    inst = build_grid_instance(GridSpec(20, 20, (0, 0), 4, 0), 6, 10)
    far = inst.coords.index((19, 19))
    t0 = time.perf_counter()
    lat = min_latency(inst, far, 6)
    solve = time.perf_counter() - t0
    t0 = time.perf_counter()
    dist = all_pairs_shortest_paths(inst)
    plan = plan_h1(inst, tsp_tour(inst, dist, seed=0), distances=dist)
    full = time.perf_counter() - t0
    ok = solve < 0.1 and full < 60 and lat is not None and plan.k >= 1
    assert criterion(9, ok, f"budget-6 MLP solve {solve * 1000:.1f} ms (latency {lat}); H1 plan {full:.2f}s")
