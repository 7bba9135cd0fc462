"""Scenario files: a grid (or explicit graph) plus planner and simulation settings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .instance import GridSpec, ProblemInstance, build_grid_instance, validate_instance
from .planner import HEURISTICS


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class TspConfig:
    seed: int = 0
    restarts: int = 1
    two_opt: bool = True


@dataclass(frozen=True)
class Scenario:
    num_uavs: int
    latency_bound: int
    heuristic: str = "h1"
    grid: GridSpec | None = None
    graph: Mapping[str, Any] | None = None  # explicit edge-list instance
    tsp: TspConfig = field(default_factory=TspConfig)
    rounds: int = 4

    def problems(self) -> list[str]:
        out = []
        if (self.grid is None) == (self.graph is None):
            out.append("exactly one of 'grid' and explicit edges must be given")
        if self.grid is not None:
            out += self.grid.problems()
        if self.heuristic not in HEURISTICS:
            out.append(f"heuristic must be one of {', '.join(HEURISTICS)}")
        if self.num_uavs < 1:
            out.append("num_uavs >= 1")
        if self.latency_bound < 0:
            out.append("latency_bound >= 0")
        if self.rounds < 3:
            out.append("rounds >= 3")
        if self.tsp.restarts < 1:
            out.append("tsp.restarts >= 1")
        return out

    def instance(self, validate: bool = True) -> ProblemInstance:
        problems = self.problems()
        if problems:
            raise ScenarioError("; ".join(problems))
        if self.grid is not None:
            inst = build_grid_instance(self.grid, self.num_uavs, self.latency_bound)
        else:
            data = dict(self.graph)
            data.update(num_uavs=self.num_uavs, latency_bound=self.latency_bound)
            try:
                inst = ProblemInstance.from_dict(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"bad explicit instance: {exc}") from exc
        problems = validate_instance(inst) if validate else []
        if problems:
            raise ScenarioError("; ".join(problems))
        return inst

    def with_param(self, name: str, value) -> "Scenario":
        """Copy with one sweepable parameter replaced."""
        if name in ("latency_bound", "num_uavs"):
            return replace(self, **{name: int(value)})
        if name in ("comm_range", "transmission_time"):
            if self.grid is None:
                raise ScenarioError(f"{name} can only be swept on grid scenarios")
            cast = float if name == "comm_range" else int
            return replace(self, grid=replace(self.grid, **{name: cast(value)}))
        raise ScenarioError(f"unknown sweep parameter {name!r}")

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "num_uavs": self.num_uavs,
            "latency_bound": self.latency_bound,
            "heuristic": self.heuristic,
            "tsp": {"seed": self.tsp.seed, "restarts": self.tsp.restarts, "two_opt": self.tsp.two_opt},
            "rounds": self.rounds,
        }
        if self.grid is not None:
            g = self.grid
            out["grid"] = {"width": g.width, "height": g.height, "base": list(g.base_cell),
                           "comm_range": g.comm_range, "transmission_time": g.transmission_time}
        else:
            out.update({k: v for k, v in self.graph.items() if k not in ("num_uavs", "latency_bound")})
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "Scenario":
        try:
            grid = None
            graph = None
            if "grid" in data:
                g = data["grid"]
                grid = GridSpec(
                    width=int(g["width"]),
                    height=int(g["height"]),
                    base_cell=tuple(int(c) for c in g.get("base", (0, 0))),
                    comm_range=float(g.get("comm_range", 4)),
                    transmission_time=int(g.get("transmission_time", 0)),
                )
            elif "movement_edges" in data:
                graph = {k: data[k] for k in ("vertex_count", "movement_edges", "comm_edges", "base", "sensing", "coords")
                         if k in data}
            t = data.get("tsp", {})
            return cls(
                num_uavs=int(data["num_uavs"]),
                latency_bound=int(data["latency_bound"]),
                heuristic=str(data.get("heuristic", "h1")).lower(),
                grid=grid,
                graph=graph,
                tsp=TspConfig(int(t.get("seed", 0)), int(t.get("restarts", 1)), bool(t.get("two_opt", True))),
                rounds=int(data.get("rounds", 4)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid scenario: {exc}") from exc


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    return Scenario.from_dict(data)


def save_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
