"""Discrete-time replay of a plan with independent latency and idleness checks."""

from __future__ import annotations

import bisect
import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .errors import SimulationError
from .instance import DistanceTable, ProblemInstance, all_pairs_shortest_paths
from .planner import DISPATCH, Plan

ACTION_PRIORITY = {"deliver": 0, "transmit": 1, "receive": 2, "sense": 3, "move": 4, "wait": 5}


@dataclass
class TraceEvent:
    time: int
    uav: int
    vertex: int
    action: str
    payload: frozenset[str] = frozenset()


@dataclass
class Capture:
    vertex: int
    capture_time: int
    delivery_time: int
    group: int
    round: int

    @property
    def latency(self) -> int:
        return self.delivery_time - self.capture_time


@dataclass
class IdlenessResult:
    idleness: dict[int, int | None]
    wi: int | None
    flagged: list[int]


@dataclass
class SimulationReport:
    rounds: int
    visit_times: dict[int, list[int]]
    captures: list[Capture]
    idleness: dict[int, int | None]
    wi: int | None
    mean_idleness: float | None
    max_latency: int
    violations: list[dict]
    wi_captures: int | None
    flagged: list[int]
    coverage_gaps: list[dict]
    windows: dict[int, tuple[int, int]]
    round_period: list[int]
    trace: list[TraceEvent] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "WI": self.wi,
            "WI_captures": self.wi_captures,
            "mean_idleness": self.mean_idleness,
            "max_latency": self.max_latency,
            "violations": self.violations,
            "flagged": self.flagged,
            "coverage_gaps": self.coverage_gaps,
            "round_period": self.round_period,
            "windows": {str(g): list(w) for g, w in self.windows.items()},
            "idleness": {str(v): i for v, i in sorted(self.idleness.items())},
            "captures": [
                {"vertex": c.vertex, "capture_time": c.capture_time, "delivery_time": c.delivery_time,
                 "group": c.group, "round": c.round}
                for c in self.captures
            ],
            "visit_times": {str(v): ts for v, ts in sorted(self.visit_times.items())},
        }


def compute_idleness(visit_times: Mapping[int, list[int]],
                     steady_window: tuple[int, int] | Mapping[int, tuple[int, int]]) -> IdlenessResult:
    """Largest gap between consecutive visits inside a periodic window.

    ``steady_window`` is ``(start, span)``, either shared or per vertex. The
    wrap-around gap ``first + span - last`` is included. Vertices with fewer
    than two visits in their window are flagged; with none, WI is undefined.
    """
    idleness: dict[int, int | None] = {}
    flagged = []
    for v, times in visit_times.items():
        start, span = steady_window[v] if isinstance(steady_window, Mapping) else steady_window
        lo = bisect.bisect_left(times, start)
        hi = bisect.bisect_left(times, start + span)
        inside = times[lo:hi]
        if len(inside) < 2:
            flagged.append(v)
        if not inside:
            idleness[v] = None
            continue
        gap = inside[0] + span - inside[-1]
        for a, b in zip(inside, inside[1:]):
            gap = max(gap, b - a)
        idleness[v] = gap
    values = list(idleness.values())
    wi = None if any(g is None for g in values) or not values else max(values)
    return IdlenessResult(idleness, wi, sorted(flagged))


def verify_latency(captures: list[Capture], latency_bound: int) -> list[dict]:
    out = []
    for c in captures:
        if c.latency > latency_bound:
            out.append({"vertex": c.vertex, "capture_time": c.capture_time, "delivery_time": c.delivery_time,
                        "latency": c.latency, "slack": latency_bound - c.latency})
    return out


class _Timeline:
    """Presence intervals ``[arrive, leave]`` of one UAV at vertices."""

    def __init__(self, uav: int, start_vertex: int):
        self.uav = uav
        self.starts: list[int] = [0]
        self.ends: list[int] = [0]
        self.vertices: list[int] = [start_vertex]
        self.arrived_by_move: list[bool] = [False]

    @property
    def pos(self) -> int:
        return self.vertices[-1]

    @property
    def now(self) -> int:
        return self.ends[-1]

    def stay(self, until: int) -> None:
        self.ends[-1] = max(self.ends[-1], until)

    def arrive(self, vertex: int, t: int) -> None:
        self.starts.append(t)
        self.ends.append(t)
        self.vertices.append(vertex)
        self.arrived_by_move.append(True)

    def where(self, t: int) -> int | None:
        i = bisect.bisect_right(self.starts, t) - 1
        if i >= 0 and self.ends[i] >= t:
            return self.vertices[i]
        return None

    def present(self, vertex: int, t0: int, t1: int) -> bool:
        i = bisect.bisect_right(self.starts, t0) - 1
        return i >= 0 and self.vertices[i] == vertex and self.ends[i] >= t1


class _Simulation:
    def __init__(self, instance: ProblemInstance, plan: Plan, rounds: int, distances: DistanceTable):
        self.instance = instance
        self.plan = plan
        self.rounds = rounds
        self.distances = distances
        self.records = [rec for g in range(plan.k) for rec in plan.records(g, rounds)]

    def _appointments(self) -> dict[int, list[tuple[int, int, int, bool]]]:
        """Per UAV: ``(vertex, ready_by, stay_until, along_edge)`` in time order."""
        inst = self.instance
        appts: dict[int, list] = defaultdict(list)
        for rec in self.records:
            offsets = rec.schedule.ready_offsets()
            for l, leg in enumerate(rec.schedule.legs):
                if l not in rec.assignment:
                    continue
                m = rec.assignment[l]
                if l == 0:
                    for u, a in rec.approach:
                        appts[m].append((u, a, a, False))
                t = rec.start_time + leg.st
                appts[m].append((leg.sv, rec.start_time + offsets[l], t, False))
                for a, b in zip(leg.path, leg.path[1:]):
                    t += inst.movement[a][b]
                    appts[m].append((b, t, t, True))
                if leg.target is not None:
                    appts[m].append((leg.ev, t, t + leg.tx, True))
        for m in appts:
            appts[m].sort(key=lambda a: (a[1], a[2]))
        return appts

    def replay(self) -> dict[int, _Timeline]:
        inst = self.instance
        uavs = range(inst.num_uavs)
        timelines = {m: _Timeline(m, inst.base) for m in uavs}
        for m, items in self._appointments().items():
            tl = timelines[m]
            for vertex, ready_by, until, along_edge in items:
                if ready_by < tl.now and vertex != tl.pos:
                    raise SimulationError(
                        f"UAV {m} is busy at {tl.pos} until {tl.now} but is needed at {vertex} by {ready_by}",
                        {"uav": m, "vertex": vertex, "time": ready_by},
                    )
                if vertex != tl.pos:
                    if along_edge and vertex in inst.movement[tl.pos]:
                        hops = [tl.pos, vertex]
                    else:
                        hops = self.distances.path(tl.pos, vertex)
                    t = tl.now
                    for a, b in zip(hops, hops[1:]):
                        t += inst.movement[a][b]
                        tl.arrive(b, t)
                    if t > ready_by:
                        raise SimulationError(
                            f"UAV {m} reaches {vertex} at {t}, after the required time {ready_by}",
                            {"uav": m, "vertex": vertex, "time": t},
                        )
                tl.stay(until)
        horizon = max(tl.now for tl in timelines.values())
        for tl in timelines.values():
            tl.stay(horizon)
        return timelines

    def run(self, with_trace: bool) -> SimulationReport:
        inst = self.instance
        plan = self.plan
        timelines = self.replay()
        marks: dict[tuple[int, int], list] = defaultdict(list)

        def need(ok: bool, msg: str, **event) -> None:
            if not ok:
                raise SimulationError(msg, event)

        captures: list[Capture] = []
        captured_in: dict[tuple[int, int], set[int]] = defaultdict(set)
        for rec in self.records:
            if rec.kind != DISPATCH:
                continue
            legs = rec.schedule.legs
            carrier = timelines[rec.assignment[0]]
            taken: dict[int, int] = {}
            for u, a in rec.approach:
                need(carrier.where(a) == u, f"sensing UAV not at {u} at {a}", uav=carrier.uav, time=a)
                taken[u] = a
            t = rec.start_time
            need(carrier.where(t) == rec.location, f"UAV not at dispatch point {rec.location} at {t}",
                 uav=carrier.uav, time=t)
            taken[rec.location] = t
            payload = {f"{u}@{c}" for u, c in taken.items()}
            for u, c in taken.items():
                marks[(carrier.uav, c)].append(("sense", {f"{u}@{c}"}))
            delivery = None
            for l, leg in enumerate(legs):
                tl = timelines[rec.assignment[l]]
                need(tl.where(t) == leg.sv, f"leg {l} UAV not at {leg.sv} at {t}", uav=tl.uav, time=t)
                if leg.sv in rec.passthrough and leg.sv not in taken:
                    taken[leg.sv] = t
                for a, b in zip(leg.path, leg.path[1:]):
                    need(b in inst.movement[a], f"{a}-{b} is not a movement edge", uav=tl.uav, time=t)
                    t += inst.movement[a][b]
                    need(tl.where(t) == b, f"leg {l} UAV not at {b} at {t}", uav=tl.uav, time=t)
                    if b in rec.passthrough and b not in taken:
                        taken[b] = t
                if leg.target is None:
                    need(leg.ev == inst.base, f"leg {l} ends at {leg.ev} without transmitting", uav=tl.uav, time=t)
                    delivery = t
                    break
                need(leg.target in inst.comm[leg.ev], f"{leg.ev}-{leg.target} is not a comm edge",
                     uav=tl.uav, time=t)
                w = inst.comm[leg.ev][leg.target]
                need(tl.present(leg.ev, t, t + w), f"sender left {leg.ev} during transmission", uav=tl.uav, time=t)
                if leg.target == inst.base:
                    marks[(tl.uav, t + w)].append(("deliver", payload))
                    delivery = t + w
                    break
                rx = timelines[rec.assignment[l + 1]]
                need(rx.present(leg.target, t, t + w), f"receiver not at {leg.target} during transmission",
                     uav=rx.uav, time=t)
                for tau in range(t, t + w + 1):
                    marks[(tl.uav, tau)].append(("transmit", payload))
                    marks[(rx.uav, tau)].append(("receive", payload))
                t += w
            if legs[-1].target is None:
                marks[(timelines[rec.assignment[len(legs) - 1]].uav, delivery)].append(("deliver", payload))
            need(delivery is not None, "datum never reached the base", time=t)
            for u, c in taken.items():
                captures.append(Capture(u, c, delivery, rec.group, rec.round))
                captured_in[(rec.group, rec.round)].add(u)

        coverage_gaps = []
        for g, subtour in enumerate(plan.subtours.subtours):
            for rnd in range(1, self.rounds + 1):
                missing = set(subtour.interior) - captured_in[(g, rnd)]
                if missing:
                    coverage_gaps.append({"group": g, "round": rnd, "missing": sorted(missing)})

        visit_times: dict[int, list[int]] = {v: [] for v in inst.sensing_order}
        for tl in timelines.values():
            for a, b, v in zip(tl.starts, tl.ends, tl.vertices):
                if v in visit_times:
                    visit_times[v].extend(range(a, b + 1))
        for v in visit_times:
            visit_times[v] = sorted(set(visit_times[v]))

        windows = {g: (plan.round_origin(g), (self.rounds - 2) * plan.round_period[g]) for g in range(plan.k)}
        owner = {v: g for g, st in enumerate(plan.subtours.subtours) for v in st.interior}
        per_vertex = {v: windows[owner[v]] for v in visit_times}
        idle = compute_idleness(visit_times, per_vertex)

        capture_times: dict[int, list[int]] = {v: [] for v in inst.sensing_order}
        for c in captures:
            capture_times[c.vertex].append(c.capture_time)
        by_capture = compute_idleness({v: sorted(ts) for v, ts in capture_times.items()}, per_vertex)

        defined = [g for g in idle.idleness.values() if g is not None]
        report = SimulationReport(
            rounds=self.rounds,
            visit_times=visit_times,
            captures=captures,
            idleness=idle.idleness,
            wi=idle.wi,
            mean_idleness=sum(defined) / len(defined) if defined else None,
            max_latency=max((c.latency for c in captures), default=0),
            violations=verify_latency(captures, inst.latency_bound),
            wi_captures=by_capture.wi,
            flagged=idle.flagged,
            coverage_gaps=coverage_gaps,
            windows=windows,
            round_period=list(plan.round_period),
        )
        if with_trace:
            report.trace = self._trace(timelines, marks)
        return report

    def _trace(self, timelines: dict[int, _Timeline], marks) -> list[TraceEvent]:
        events = []
        for m, tl in timelines.items():
            for a, b, v, moved in zip(tl.starts, tl.ends, tl.vertices, tl.arrived_by_move):
                for t in range(a, b + 1):
                    action = "move" if moved and t == a else "wait"
                    payload: set[str] = set()
                    for act, load in marks.get((m, t), ()):
                        if ACTION_PRIORITY[act] < ACTION_PRIORITY[action]:
                            action = act
                        payload |= load
                    events.append(TraceEvent(t, m, v, action, frozenset(payload)))
        events.sort(key=lambda e: (e.time, e.uav))
        return events


def simulate(instance: ProblemInstance, plan: Plan, rounds: int = 4, distances: DistanceTable | None = None,
             with_trace: bool = False) -> SimulationReport:
    """Replay ``rounds`` rounds of ``plan``; round 1 is warm-up.

    Raises :class:`SimulationError` when the plan cannot be flown as written.
    """
    if rounds < 3:
        raise ValueError("rounds must be >= 3 (round 1 is warm-up)")
    if plan.latency_bound != instance.latency_bound:
        raise SimulationError("plan was made for a different latency bound")
    planned = {v for st in plan.subtours.subtours for v in st.interior}
    if planned != set(instance.sensing):
        raise SimulationError("plan subtours do not cover the instance's sensing locations")
    if max((m for g in plan.groups for m in g), default=-1) >= instance.num_uavs:
        raise SimulationError("plan uses more UAVs than the instance has")
    distances = distances or all_pairs_shortest_paths(instance)
    return _Simulation(instance, plan, rounds, distances).run(with_trace)


def write_trace_csv(path, instance: ProblemInstance, trace: list[TraceEvent]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "uav", "x", "y", "action", "payload"])
        for e in trace:
            if instance.coords is not None:
                x, y = instance.coords[e.vertex]
            else:
                x, y = e.vertex, ""
            writer.writerow([e.time, e.uav, x, y, e.action, ";".join(sorted(e.payload))])
