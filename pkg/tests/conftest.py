import numpy as np
import pytest

from milc import GridSpec, ProblemInstance, all_pairs_shortest_paths, build_grid_instance, tsp_tour

# relay chain: base d=0, relays 1..7, source s=8
RELAY_MOVES = [(8, 5, 1), (5, 4, 1), (4, 3, 1), (3, 2, 1), (2, 1, 1), (5, 6, 1), (7, 1, 1)]
RELAY_COMMS = [(8, 4, 0), (8, 6, 0), (6, 7, 0), (1, 0, 0)]
RELAY_SOURCE = 8


def relay_chain(num_uavs: int = 3) -> ProblemInstance:
    return ProblemInstance.from_edges(9, RELAY_MOVES, RELAY_COMMS, base=0, sensing=[RELAY_SOURCE],
                                      num_uavs=num_uavs, latency_bound=5)


@pytest.fixture
def relay():
    return relay_chain()


@pytest.fixture(scope="session")
def grid20():
    return build_grid_instance(GridSpec(20, 20, (0, 0), 4, 0), num_uavs=6, latency_bound=10)


@pytest.fixture(scope="session")
def grid20_dist(grid20):
    return all_pairs_shortest_paths(grid20)


@pytest.fixture(scope="session")
def grid20_tour(grid20, grid20_dist):
    return tsp_tour(grid20, grid20_dist, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_feasible_grid(rng, size: int = 10):
    """10x10-style grid with n in 2..6, range in 2..6 and a latency bound above the threshold."""
    from milc import MlpSolver

    n = int(rng.integers(2, 7))
    rcom = int(rng.integers(2, 7))
    wc = int(rng.integers(0, 3))
    base = tuple(int(c) for c in rng.integers(0, size, size=2))
    inst = build_grid_instance(GridSpec(size, size, base, rcom, wc), n, 0)
    dist = all_pairs_shortest_paths(inst)
    solver = MlpSolver(inst, dist)
    threshold = int(solver.latencies(n).max())
    bound = threshold + int(rng.integers(0, 12))
    return inst.with_params(latency_bound=bound), dist


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record ``(number, ok, detail)`` and echo one PASS/FAIL line per acceptance criterion."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
