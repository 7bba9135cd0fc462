"""MILC-H1/H2/H3 patrol planning.

Each group of UAVs walks one subtour per round. Data captured at a sensing
location travels to the base on an MLP whose legs are handed to group members
by bottleneck matching. Two rounds are planned greedily (round 1 starts with
every UAV at the base); round 2 is then repeated with a fixed period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

from .errors import InfeasibleError
from .instance import DistanceTable, ProblemInstance, all_pairs_shortest_paths
from .matching import minmax_matching
from .mlp import Leg, MlpSchedule, MlpSolver
from .tours import SubtourSet, Tour, k_splitour, shortcut

HEURISTICS = ("h1", "h2", "h3")
DISPATCH = "dispatch"
RETURN = "return"


@dataclass(frozen=True)
class DispatchRecord:
    group: int
    round: int
    kind: str
    location: int
    batch: tuple[int, ...]
    schedule: MlpSchedule
    assignment: dict[int, int]
    start_time: int
    capture_times: dict[int, int]
    passthrough: dict[int, int] = field(default_factory=dict)
    # (vertex, time) stops of the leg-1 UAV before it reaches ``location``
    approach: tuple[tuple[int, int], ...] = ()

    @property
    def delivery_time(self) -> int:
        return self.start_time + self.schedule.total_latency

    def shifted(self, dt: int, round_: int) -> "DispatchRecord":
        return replace(
            self,
            round=round_,
            start_time=self.start_time + dt,
            capture_times={v: t + dt for v, t in self.capture_times.items()},
            passthrough={v: t + dt for v, t in self.passthrough.items()},
            approach=tuple((v, t + dt) for v, t in self.approach),
        )

    def duties(self) -> Iterator[tuple[int, int, int, int, int]]:
        """``(uav, ready_vertex, ready_time, end_vertex, end_time)`` per leg."""
        offsets = self.schedule.ready_offsets()
        for l, leg in enumerate(self.schedule.legs):
            if l not in self.assignment:
                continue
            ready_v, ready_t = leg.sv, self.start_time + offsets[l]
            if l == 0 and self.approach:
                ready_v, ready_t = self.approach[0]
            yield self.assignment[l], ready_v, ready_t, leg.ev, self.start_time + leg.et

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "round": self.round,
            "kind": self.kind,
            "location": self.location,
            "batch": list(self.batch),
            "legs": [leg.to_dict() for leg in self.schedule.legs],
            "total_latency": self.schedule.total_latency,
            "assignment": {str(l): m for l, m in self.assignment.items()},
            "start_time": self.start_time,
            "capture_times": {str(v): t for v, t in self.capture_times.items()},
            "passthrough": {str(v): t for v, t in self.passthrough.items()},
            "approach": [list(a) for a in self.approach],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DispatchRecord":
        schedule = MlpSchedule(d["location"], tuple(Leg.from_dict(x) for x in d["legs"]), d["total_latency"])
        return cls(
            group=d["group"],
            round=d["round"],
            kind=d["kind"],
            location=d["location"],
            batch=tuple(d["batch"]),
            schedule=schedule,
            assignment={int(l): m for l, m in d["assignment"].items()},
            start_time=d["start_time"],
            capture_times={int(v): t for v, t in d["capture_times"].items()},
            passthrough={int(v): t for v, t in d.get("passthrough", {}).items()},
            approach=tuple(tuple(a) for a in d.get("approach", [])),
        )


@dataclass
class Plan:
    heuristic: str
    groups: list[list[int]]
    subtours: SubtourSet
    dispatches: list[list[DispatchRecord]]  # per group: rounds 1 and 2
    required: dict[int, int]
    round_period: list[int]
    idle_uavs: list[int]
    latency_bound: int
    sensing_uavs: list[int | None] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.groups)

    def round_origin(self, group: int) -> int:
        """Start time of the first round-2 record, the origin of the periodic part."""
        return min(r.start_time for r in self.dispatches[group] if r.round == 2)

    def records(self, group: int, rounds: int) -> list[DispatchRecord]:
        first = [r for r in self.dispatches[group] if r.round == 1]
        template = [r for r in self.dispatches[group] if r.round == 2]
        out = first[:]
        for rnd in range(2, rounds + 1):
            dt = (rnd - 2) * self.round_period[group]
            out += template if dt == 0 else [r.shifted(dt, rnd) for r in template]
        return out

    def to_dict(self) -> dict:
        return {
            "heuristic": self.heuristic,
            "latency_bound": self.latency_bound,
            "groups": self.groups,
            "sensing_uavs": self.sensing_uavs,
            "idle_uavs": self.idle_uavs,
            "required": {str(v): r for v, r in sorted(self.required.items())},
            "round_period": self.round_period,
            "subtours": {
                "k": self.subtours.k,
                "requested_k": self.subtours.requested_k,
                "c_max": self.subtours.c_max,
                "tour_cost": self.subtours.tour_cost,
                "tours": [{"sequence": list(t.sequence), "cost": t.cost} for t in self.subtours.subtours],
            },
            "dispatches": [[r.to_dict() for r in recs] for recs in self.dispatches],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Plan":
        st = d["subtours"]
        subtours = SubtourSet(
            k=st["k"],
            subtours=tuple(Tour(tuple(t["sequence"]), t["cost"]) for t in st["tours"]),
            c_max=st["c_max"],
            tour_cost=st["tour_cost"],
            requested_k=st["requested_k"],
        )
        return cls(
            heuristic=d["heuristic"],
            groups=[list(g) for g in d["groups"]],
            subtours=subtours,
            dispatches=[[DispatchRecord.from_dict(r) for r in recs] for recs in d["dispatches"]],
            required={int(v): r for v, r in d["required"].items()},
            round_period=list(d["round_period"]),
            idle_uavs=list(d["idle_uavs"]),
            latency_bound=d["latency_bound"],
            sensing_uavs=list(d.get("sensing_uavs", [])),
        )


def required_uavs_min(instance: ProblemInstance, v: int, lock_first_leg: bool = False,
                      solver: MlpSolver | None = None) -> int | None:
    """Fewest UAVs whose MLP from ``v`` meets the latency bound (``None`` if impossible).

    Bisection over budgets, valid because latency is non-increasing in budget.
    """
    solver = solver or MlpSolver(instance)
    bound = instance.latency_bound

    def ok(b: int) -> bool:
        lat = solver.latency(v, b, lock_first_leg)
        return lat is not None and lat <= bound

    lo, hi = 1, instance.num_uavs
    if not ok(hi):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def required_uavs_saturation(instance: ProblemInstance, v: int, lock_first_leg: bool = False,
                             solver: MlpSolver | None = None) -> int | None:
    """Fewest UAVs beyond which more relays no longer shorten the MLP from ``v``."""
    solver = solver or MlpSolver(instance)
    best = solver.latency(v, instance.num_uavs, lock_first_leg)
    if best is None:
        return None
    lo, hi = 1, instance.num_uavs
    while lo < hi:
        mid = (lo + hi) // 2
        if solver.latency(v, mid, lock_first_leg) == best:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass
class FleetState:
    """Where each UAV is and when it becomes free there."""

    pos: dict[int, int]
    free: dict[int, int]

    @classmethod
    def at_base(cls, uavs: Sequence[int], base: int) -> "FleetState":
        return cls({m: base for m in uavs}, {m: 0 for m in uavs})

    def copy(self) -> "FleetState":
        return FleetState(dict(self.pos), dict(self.free))


@dataclass
class BatchPreview:
    members: list[int]
    arrivals: list[int]
    schedule: MlpSchedule
    assignment: dict[int, int]
    start_time: int

    @property
    def delivery_time(self) -> int:
        return self.start_time + self.schedule.total_latency


def _match_legs(schedule: MlpSchedule, legs: Sequence[int], uavs: Sequence[int], state: FleetState,
                dist: list[list[float]]) -> tuple[dict[int, int], int]:
    """Assign ``legs`` to ``uavs`` and return the earliest feasible dispatch start."""
    if not legs:
        return {}, 0
    offsets = schedule.ready_offsets()
    arrive = [[state.free[m] + dist[state.pos[m]][schedule.legs[l].sv] for m in uavs] for l in legs]
    result = minmax_matching(arrive, uavs)
    col = {m: i for i, m in enumerate(uavs)}
    start = 0
    for row, l in enumerate(legs):
        start = max(start, arrive[row][col[result.mapping[row]]] - offsets[l])
    return {l: result.mapping[row] for row, l in enumerate(legs)}, int(start)


def max_batch_prefix(solver: MlpSolver, required: dict[int, int], candidates: Sequence[int],
                     state: FleetState, sensing_uav: int, transports: Sequence[int],
                     latency_bound: int, lock_first_leg: bool = False, not_before: int = 0) -> BatchPreview:
    """Longest prefix of ``candidates`` one sensing UAV can collect before a single dispatch.

    The sensing UAV flies through the candidates in order; the dispatch leaves
    from the last member once the transport UAVs can be in place. The first
    member is captured on arrival, the last right before the dispatch starts.
    Extension stops at the first prefix whose oldest datum would miss the bound.
    """
    dist = solver.distances.rows
    t, p = state.free[sensing_uav], state.pos[sensing_uav]
    arrivals: list[int] = []
    best: BatchPreview | None = None
    for j, u in enumerate(candidates):
        t += int(dist[p][u])
        p = u
        arrivals.append(t)
        schedule = solver.path(u, required[u], lock_first_leg)
        legs = list(range(1, len(schedule.legs)))
        assignment, start = _match_legs(schedule, legs, transports, state, dist)
        start = max(start, t, not_before)
        assignment[0] = sensing_uav
        preview = BatchPreview(list(candidates[:j + 1]), arrivals[:], schedule, assignment, start)
        if j > 0 and preview.delivery_time - arrivals[0] > latency_bound:
            break
        best = preview
    return best


class _GroupPlanner:
    def __init__(self, heuristic: str, group: int, uavs: list[int], subtour: Tour, instance: ProblemInstance,
                 solver: MlpSolver, required: dict[int, int], lock_first_leg: bool):
        self.heuristic = heuristic
        self.group = group
        self.uavs = uavs
        self.subtour = subtour
        self.instance = instance
        self.solver = solver
        self.required = required
        self.lock = lock_first_leg
        self.dist = solver.distances.rows
        self.sensing_uav = uavs[0] if heuristic != "h1" else None

    def _passthrough(self, schedule: MlpSchedule, start: int, pending: set[int]) -> dict[int, int]:
        out = {}
        for leg in schedule.legs:
            t = start + leg.st
            prev = None
            for v in leg.path:
                if prev is not None:
                    t += self.instance.movement[prev][v]
                prev = v
                if v in pending and v not in out:
                    out[v] = t
        return out

    def _commit(self, state: FleetState, schedule: MlpSchedule, assignment: dict[int, int], start: int) -> None:
        for l, m in assignment.items():
            leg = schedule.legs[l]
            state.pos[m] = leg.ev
            state.free[m] = start + leg.et

    def _return(self, state: FleetState, rnd: int, last_start: int) -> DispatchRecord:
        base = self.instance.base
        schedule = MlpSchedule(base, (Leg(base, base, (base,), 0, 0),), 0)
        uavs = [self.sensing_uav] if self.sensing_uav is not None else self.uavs
        assignment, start = _match_legs(schedule, [0], uavs, state, self.dist)
        start = max(start, last_start)
        self._commit(state, schedule, assignment, start)
        return DispatchRecord(self.group, rnd, RETURN, base, (), schedule, assignment, start, {})

    def run_round(self, state: FleetState, rnd: int) -> list[DispatchRecord]:
        if self.heuristic == "h1":
            return self._round_single(state, rnd)
        return self._round_batched(state, rnd)

    def _round_single(self, state: FleetState, rnd: int) -> list[DispatchRecord]:
        order = list(self.subtour.interior)
        covered: set[int] = set()
        records = []
        last_start = 0
        for idx, v in enumerate(order):
            if v in covered:
                continue
            schedule = self.solver.path(v, self.required[v])
            assignment, start = _match_legs(schedule, range(len(schedule.legs)), self.uavs, state, self.dist)
            start = max(start, last_start)
            pending = set(order[idx + 1:]) - covered
            passthrough = self._passthrough(schedule, start, pending)
            covered |= passthrough.keys()
            self._commit(state, schedule, assignment, start)
            records.append(DispatchRecord(self.group, rnd, DISPATCH, v, (v,), schedule, assignment, start,
                                          {v: start}, passthrough))
            last_start = start
        records.append(self._return(state, rnd, last_start))
        return records

    def _round_batched(self, state: FleetState, rnd: int) -> list[DispatchRecord]:
        order = list(self.subtour.interior)
        covered: set[int] = set()
        records = []
        last_start = 0
        transports = self.uavs[1:]
        idx = 0
        while True:
            todo = [v for v in order[idx:] if v not in covered]
            if not todo:
                break
            preview = max_batch_prefix(self.solver, self.required, todo, state, self.sensing_uav, transports,
                                       self.instance.latency_bound, self.lock, last_start)
            members = preview.members
            idx = order.index(members[-1]) + 1
            start = preview.start_time
            covered |= set(members)
            captures = dict(zip(members[:-1], preview.arrivals[:-1]))
            captures[members[-1]] = start
            pending = set(order[idx:]) - covered
            passthrough = self._passthrough(preview.schedule, start, pending)
            covered |= passthrough.keys()
            approach = tuple(zip(members[:-1], preview.arrivals[:-1]))
            self._commit(state, preview.schedule, preview.assignment, start)
            records.append(DispatchRecord(self.group, rnd, DISPATCH, members[-1], tuple(members), preview.schedule,
                                          preview.assignment, start, captures, passthrough, approach))
            last_start = start
        records.append(self._return(state, rnd, last_start))
        return records

    def period(self, template: list[DispatchRecord]) -> int:
        """Smallest shift that lets every UAV go from its last duty to its next-round first duty."""
        first: dict[int, tuple[int, int]] = {}
        last: dict[int, tuple[int, int]] = {}
        for rec in template:
            for m, rv, rt, ev, et in rec.duties():
                if m not in first or rt < first[m][1]:
                    first[m] = (rv, rt)
                if m not in last or et >= last[m][1]:
                    last[m] = (ev, et)
        starts = [r.start_time for r in template]
        period = max(1, max(starts) - min(starts))
        for m, (fv, ft) in first.items():
            lv, lt = last[m]
            period = max(period, int(lt + self.dist[lv][fv] - ft))
        return period


def _requirements(instance: ProblemInstance, solver: MlpSolver, mode: str, lock: bool) -> dict[int, int]:
    required = {}
    for v in instance.sensing_order:
        if mode == "min":
            r = required_uavs_min(instance, v, lock, solver)
        else:
            best = solver.latency(v, instance.num_uavs, lock)
            if best is None or best > instance.latency_bound:
                r = None
            else:
                r = required_uavs_saturation(instance, v, lock, solver)
        if r is None:
            raise InfeasibleError(v, f"no MLP with {instance.num_uavs} UAVs meets latency {instance.latency_bound}")
        required[v] = r
    return required


def build_plan(instance: ProblemInstance, tour: Tour, heuristic: str, distances: DistanceTable | None = None,
               solver: MlpSolver | None = None, lock_first_leg: bool = False) -> Plan:
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    if solver is None:
        solver = MlpSolver(instance, distances or all_pairs_shortest_paths(instance))
    lock = lock_first_leg and heuristic != "h1"
    required = _requirements(instance, solver, "saturation" if heuristic == "h2" else "min", lock)

    far = [required[v] for v in instance.sensing if v not in instance.base_comm_set]
    r = max(far, default=max(required.values(), default=1))
    k = instance.num_uavs // r
    split = k_splitour(tour, k, solver.distances)

    groups = [list(range(i * r, (i + 1) * r)) for i in range(split.k)]
    idle = list(range(split.k * r, instance.num_uavs))
    dispatches, periods = [], []
    for gi, (uavs, subtour) in enumerate(zip(groups, split.subtours)):
        gp = _GroupPlanner(heuristic, gi, uavs, subtour, instance, solver, required, lock)
        state = FleetState.at_base(uavs, instance.base)
        round1 = gp.run_round(state, 1)
        round2 = gp.run_round(state, 2)
        dispatches.append(round1 + round2)
        periods.append(gp.period(round2))
    return Plan(
        heuristic=heuristic,
        groups=groups,
        subtours=split,
        dispatches=dispatches,
        required=required,
        round_period=periods,
        idle_uavs=idle,
        latency_bound=instance.latency_bound,
        sensing_uavs=[g[0] if heuristic != "h1" else None for g in groups],
    )


def plan_h1(instance: ProblemInstance, tour: Tour, **kwargs) -> Plan:
    """H1: minimum UAVs per location, every capture dispatched at once."""
    return build_plan(instance, tour, "h1", **kwargs)


def plan_h2(instance: ProblemInstance, tour: Tour, **kwargs) -> Plan:
    """H2: latency-saturating budgets, one sensing UAV per subtour collecting batches."""
    return build_plan(instance, tour, "h2", **kwargs)


def plan_h3(instance: ProblemInstance, tour: Tour, **kwargs) -> Plan:
    """H3: minimum budgets as in H1, batching with a sensing UAV as in H2."""
    return build_plan(instance, tour, "h3", **kwargs)
