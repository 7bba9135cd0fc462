"""Single-scenario runs and parameter sweeps with CSV / .dat output."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .errors import InfeasibleError, SimulationError
from .instance import GridSpec, all_pairs_shortest_paths
from .mlp import MlpSolver
from .planner import HEURISTICS, Plan, build_plan
from .scenario import Scenario, ScenarioError, TspConfig, save_json
from .simulator import SimulationReport, simulate, write_trace_csv
from .tours import tsp_tour

SWEEP_PARAMS = ("latency_bound", "comm_range", "num_uavs", "transmission_time")
ROW_FIELDS = ["heuristic", "param", "value", "seed", "status", "wi", "wi_captures", "mean_idleness",
              "max_latency", "subtours", "plan_seconds", "sim_seconds"]
SUMMARY_FIELDS = ["heuristic", "param", "value", "runs", "infeasible", "wi_mean", "wi_stderr",
                  "mean_idleness_mean", "max_latency_max", "subtours_mean"]
INFEASIBLE = "infeasible"


@dataclass
class RunResult:
    plan: Plan
    report: SimulationReport
    plan_seconds: float
    sim_seconds: float


def run_scenario(scenario: Scenario, with_trace: bool = False) -> RunResult:
    """Plan with the scenario's heuristic and simulate its rounds.

    Raises InfeasibleError (with a witness vertex) when the latency bound
    cannot be met.
    """
    inst = scenario.instance()
    t0 = time.perf_counter()
    dist = all_pairs_shortest_paths(inst)
    tour = tsp_tour(inst, dist, scenario.tsp.seed, scenario.tsp.restarts, scenario.tsp.two_opt)
    plan = build_plan(inst, tour, scenario.heuristic, distances=dist)
    t1 = time.perf_counter()
    report = simulate(inst, plan, scenario.rounds, dist, with_trace=with_trace)
    return RunResult(plan, report, t1 - t0, time.perf_counter() - t1)


def write_artifacts(scenario: Scenario, result: RunResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"plan": out / "plan.json", "report": out / "report.json", "trace": out / "trace.csv"}
    save_json(paths["plan"], result.plan.to_dict())
    save_json(paths["report"], result.report.to_dict())
    write_trace_csv(paths["trace"], scenario.instance(), result.report.trace)
    return paths


@dataclass
class SweepConfig:
    base: Scenario
    param: str
    values: list
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    heuristics: tuple[str, ...] = HEURISTICS
    output: str | None = None

    def problems(self) -> list[str]:
        out = []
        if self.param not in SWEEP_PARAMS:
            out.append(f"param must be one of {', '.join(SWEEP_PARAMS)}")
        if not self.values:
            out.append("value list must be non-empty")
        if not self.seeds:
            out.append("seed list must be non-empty")
        if any(h not in HEURISTICS for h in self.heuristics):
            out.append(f"heuristics must be drawn from {', '.join(HEURISTICS)}")
        if not out:
            for v in self.values:
                try:
                    out += self.base.with_param(self.param, v).problems()
                except (ScenarioError, ValueError) as exc:
                    out.append(str(exc))
        return sorted(set(out))


def _cell(args) -> list[dict]:
    """All heuristics for one (value, seed); the tour and MLP tables are shared."""
    base, param, value, seed, heuristics = args
    sc = replace(base.with_param(param, value), tsp=replace(base.tsp, seed=seed))
    inst = sc.instance()
    t0 = time.perf_counter()
    dist = all_pairs_shortest_paths(inst)
    tour = tsp_tour(inst, dist, seed, sc.tsp.restarts, sc.tsp.two_opt)
    solver = MlpSolver(inst, dist)
    shared = time.perf_counter() - t0
    rows = []
    for h in heuristics:
        row = {"heuristic": h, "param": param, "value": value, "seed": seed}
        t1 = time.perf_counter()
        try:
            plan = build_plan(inst, tour, h, distances=dist, solver=solver)
        except InfeasibleError as exc:
            row.update(status=INFEASIBLE, witness=exc.vertex)
            rows.append(row)
            continue
        t2 = time.perf_counter()
        try:
            rep = simulate(inst, plan, sc.rounds, dist)
        except SimulationError as exc:
            row.update(status=f"error: {exc}")
            rows.append(row)
            continue
        t3 = time.perf_counter()
        row.update(status="ok", wi=rep.wi, wi_captures=rep.wi_captures, mean_idleness=rep.mean_idleness,
                   max_latency=rep.max_latency, subtours=plan.k,
                   plan_seconds=shared + t2 - t1, sim_seconds=t3 - t2)
        rows.append(row)
    return rows


def run_sweep(sweep: SweepConfig, workers: int = 1) -> list[dict]:
    """One row per (heuristic, value, seed), in that order.

    Infeasible combinations are kept with ``status == "infeasible"``.
    """
    problems = sweep.problems()
    if problems:
        raise ScenarioError("; ".join(problems))
    cells = [(sweep.base, sweep.param, v, s, tuple(sweep.heuristics)) for v in sweep.values for s in sweep.seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    order = {h: i for i, h in enumerate(sweep.heuristics)}
    vpos = {v: i for i, v in enumerate(sweep.values)}
    rows = [r for cell in results for r in cell]
    rows.sort(key=lambda r: (order[r["heuristic"]], vpos[r["value"]], sweep.seeds.index(r["seed"])))
    if sweep.output:
        write_rows(sweep.output, rows, summarize(rows))
    return rows


def _stderr(xs: Sequence[float]) -> float:
    if len(xs) < 2:
        return 0.0
    m = sum(xs) / len(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1) / len(xs))


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and standard error of WI per (heuristic, value), over feasible runs."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["heuristic"], r["param"], r["value"]), []).append(r)
    out = []
    for (h, p, v), rs in groups.items():
        ok = [r for r in rs if r["status"] == "ok" and r.get("wi") is not None]
        wis = [r["wi"] for r in ok]
        row = {"heuristic": h, "param": p, "value": v, "runs": len(ok),
               "infeasible": sum(r["status"] == INFEASIBLE for r in rs)}
        if ok:
            row.update(
                wi_mean=sum(wis) / len(wis),
                wi_stderr=_stderr(wis),
                mean_idleness_mean=sum(r["mean_idleness"] for r in ok) / len(ok),
                max_latency_max=max(r["max_latency"] for r in ok),
                subtours_mean=sum(r["subtours"] for r in ok) / len(ok),
            )
        out.append(row)
    return out


def write_rows(path, rows: list[dict], summary: list[dict]) -> tuple[Path, Path, Path]:
    """Raw rows to ``path``, the summary next to it as ``*_summary.csv`` and ``.dat``."""
    raw = Path(path)
    raw.parent.mkdir(parents=True, exist_ok=True)
    summ = raw.with_name(raw.stem + "_summary.csv")
    dat = raw.with_suffix(".dat")
    with open(raw, "w", newline="") as fh:
        w = csv.DictWriter(fh, ROW_FIELDS + ["witness"], extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    with open(summ, "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_FIELDS, extrasaction="ignore")
        w.writeheader()
        w.writerows(summary)
    write_dat(dat, summary)
    return raw, summ, dat


def write_dat(path, summary: list[dict]) -> None:
    """gnuplot-friendly table: one line per value, mean/stderr column pairs per heuristic."""
    heuristics = list(dict.fromkeys(r["heuristic"] for r in summary))
    values = list(dict.fromkeys(r["value"] for r in summary))
    index = {(r["heuristic"], r["value"]): r for r in summary}
    param = summary[0]["param"] if summary else "value"
    lines = ["# " + " ".join([param] + [f"{h}_wi_mean {h}_wi_stderr" for h in heuristics])]
    for v in values:
        cols = [str(v)]
        for h in heuristics:
            r = index.get((h, v), {})
            if "wi_mean" in r:
                cols += [f"{r['wi_mean']:.3f}", f"{r['wi_stderr']:.3f}"]
            else:
                cols += ["NaN", "NaN"]
        lines.append(" ".join(cols))
    Path(path).write_text("\n".join(lines) + "\n")


def mean_wi(summary: list[dict], heuristic: str) -> dict:
    """``value -> mean WI`` for one heuristic (None where every run was infeasible)."""
    return {r["value"]: r.get("wi_mean") for r in summary if r["heuristic"] == heuristic}


def mean_subtours(summary: list[dict], heuristic: str) -> dict:
    return {r["value"]: r.get("subtours_mean") for r in summary if r["heuristic"] == heuristic}


def fig4_base(latency_bound: int = 10, seed: int = 0) -> Scenario:
    return Scenario(num_uavs=6, latency_bound=latency_bound, grid=GridSpec(20, 20, (0, 0), 4, 0),
                    tsp=TspConfig(seed=seed), rounds=4)
