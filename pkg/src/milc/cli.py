"""Command-line front end: ``milc plan|simulate|sweep|oracle``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .checks import matching_suite, mlp_suite
from .errors import InfeasibleError, SimulationError
from .experiments import SWEEP_PARAMS, SweepConfig, run_scenario, run_sweep, summarize, write_artifacts
from .instance import GridSpec, all_pairs_shortest_paths
from .mlp import MlpSolver
from .planner import HEURISTICS, build_plan
from .scenario import Scenario, ScenarioError, TspConfig, load_scenario, save_json
from .tours import tsp_tour

EXIT_INVALID = 1
EXIT_INFEASIBLE = 3


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", nargs="?", help="scenario JSON; flags below override its fields")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--base", type=int, nargs=2, metavar=("X", "Y"))
    p.add_argument("--comm-range", type=float)
    p.add_argument("--transmission-time", type=int)
    p.add_argument("--num-uavs", "-n", type=int)
    p.add_argument("--latency-bound", "-L", type=int)
    p.add_argument("--heuristic", choices=HEURISTICS)
    p.add_argument("--seed", type=int, help="TSP tie-break seed")
    p.add_argument("--restarts", type=int)
    p.add_argument("--no-two-opt", action="store_true")
    p.add_argument("--rounds", type=int)
    p.add_argument("--out", default="out", help="output directory (default: %(default)s)")


def scenario_from_args(args) -> Scenario:
    if args.scenario:
        sc = load_scenario(args.scenario)
    else:
        sc = Scenario(num_uavs=6, latency_bound=10, grid=GridSpec(20, 20))
    grid = sc.grid
    if grid is not None:
        updates = {k: v for k, v in (("width", args.width), ("height", args.height),
                                     ("comm_range", args.comm_range), ("transmission_time", args.transmission_time))
                   if v is not None}
        if args.base is not None:
            updates["base_cell"] = tuple(args.base)
        grid = replace(grid, **updates)
    elif any(v is not None for v in (args.width, args.height, args.base, args.comm_range, args.transmission_time)):
        raise ScenarioError("grid flags do not apply to an explicit edge-list scenario")
    tsp = TspConfig(
        seed=sc.tsp.seed if args.seed is None else args.seed,
        restarts=sc.tsp.restarts if args.restarts is None else args.restarts,
        two_opt=sc.tsp.two_opt and not args.no_two_opt,
    )
    return replace(
        sc,
        grid=grid,
        num_uavs=sc.num_uavs if args.num_uavs is None else args.num_uavs,
        latency_bound=sc.latency_bound if args.latency_bound is None else args.latency_bound,
        heuristic=args.heuristic or sc.heuristic,
        rounds=sc.rounds if args.rounds is None else args.rounds,
        tsp=tsp,
    )


def cmd_plan(args) -> int:
    sc = scenario_from_args(args)
    inst = sc.instance()
    dist = all_pairs_shortest_paths(inst)
    tour = tsp_tour(inst, dist, sc.tsp.seed, sc.tsp.restarts, sc.tsp.two_opt)
    plan = build_plan(inst, tour, sc.heuristic, distances=dist)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_json(out / "plan.json", plan.to_dict())
    print(f"{sc.heuristic}: {plan.k} subtour(s), tour cost {tour.cost}, periods {plan.round_period}")
    print(f"wrote {out / 'plan.json'}")
    return 0


def cmd_simulate(args) -> int:
    sc = scenario_from_args(args)
    result = run_scenario(sc, with_trace=True)
    paths = write_artifacts(sc, result, args.out)
    rep = result.report
    print(f"{sc.heuristic}: WI={rep.wi} mean_idleness={rep.mean_idleness} max_latency={rep.max_latency} "
          f"violations={len(rep.violations)} subtours={result.plan.k}")
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def _parse_values(param: str, raw: list[str]) -> list:
    cast = float if param == "comm_range" else int
    return [cast(v) for v in raw]


def cmd_sweep(args) -> int:
    sc = scenario_from_args(args)
    seeds = args.seeds if args.seeds else list(range(10))
    out = Path(args.out) / f"sweep_{args.param}.csv"
    cfg = SweepConfig(sc, args.param, _parse_values(args.param, args.values), seeds,
                      tuple(args.heuristics or HEURISTICS), str(out))
    rows = run_sweep(cfg, workers=args.workers)
    for r in summarize(rows):
        wi = f"{r['wi_mean']:.1f} +- {r['wi_stderr']:.1f}" if "wi_mean" in r else "infeasible"
        print(f"{r['heuristic']} {args.param}={r['value']}: WI {wi} ({r['runs']} runs, {r['infeasible']} infeasible)")
    print(f"wrote {out}")
    return 0


def cmd_oracle(args) -> int:
    if args.scenario:
        # budget sweep for one source on the given instance
        sc = scenario_from_args(args)
        inst = sc.instance(validate=False)  # relay-only graphs need not be flyable from the base
        solver = MlpSolver(inst)
        sources = [args.source] if args.source is not None else list(inst.sensing_order)
        for v in sources:
            for b in range(1, (args.max_budget or inst.num_uavs) + 1):
                lat = solver.latency(v, b)
                print(f"source {v} budget {b}: latency {'unreachable' if lat is None else lat}")
        return 0
    status = 0
    for res in (mlp_suite(args.trials or 200, args.seed or 0), matching_suite(args.trials or 500, args.seed or 0)):
        print(f"{res.name}: {res.checked} checks, {len(res.mismatches)} mismatches")
        for m in res.mismatches[:5]:
            print(f"  {m}")
        status |= 0 if res.ok else 1
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="milc", description="Latency-constrained persistent UAV monitoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="build a plan and write plan.json")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="plan, simulate and write plan/report/trace")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one parameter over seeds and heuristics")
    _add_scenario_args(p)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, nargs="+")
    p.add_argument("--seeds", type=int, nargs="+", help="tour seeds (default 0..9)")
    p.add_argument("--heuristics", nargs="+", choices=HEURISTICS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="random oracle suites, or a budget sweep on a scenario")
    _add_scenario_args(p)
    p.add_argument("--source", type=int)
    p.add_argument("--max-budget", type=int)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: witness vertex {exc.vertex} ({exc.reason})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
