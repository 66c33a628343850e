"""Benchmark harness: scenarios, episode sweeps, and result files.

Episodes are described by picklable jobs so sweeps can run across worker
processes; per-process caches share maps and distance oracles between
episodes of the same map. All outputs (results CSV, stop-count heatmap
grids, traces) are plain text files with stable layouts.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Plan
from .grid import DistanceOracle, GridMap, MapFormatError, parse_map
from .guidance import WarmStart
from .runner import EpisodeConfig, EpisodeResult, Refiner, Solver, run_episode

RESULT_COLUMNS = [
    "map",
    "agents",
    "solver",
    "scheme",
    "w_phi",
    "w_pi",
    "m",
    "alpha",
    "refiner",
    "seed",
    "steps",
    "throughput",
    "runtime_mean_s",
    "runtime_max_s",
    "fallbacks",
    "completed_tasks",
]

# runtime columns vary run to run; everything else is reproducible under
# expansion-cap budgets
NON_DETERMINISTIC_COLUMNS = {"runtime_mean_s", "runtime_max_s"}


@dataclass(frozen=True)
class ScenarioRow:
    bucket: int
    map_name: str
    map_width: int
    map_height: int
    start_col: int
    start_row: int
    goal_col: int
    goal_row: int
    optimal_length: float


def parse_scenario(text: str) -> list[ScenarioRow]:
    """Parse a version-1 scenario file into rows."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("version"):
        raise MapFormatError("scenario file missing 'version' header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 9:
            raise MapFormatError(f"scenario row has {len(parts)} fields, expected 9")
        rows.append(
            ScenarioRow(
                bucket=int(parts[0]),
                map_name=parts[1],
                map_width=int(parts[2]),
                map_height=int(parts[3]),
                start_col=int(parts[4]),
                start_row=int(parts[5]),
                goal_col=int(parts[6]),
                goal_row=int(parts[7]),
                optimal_length=float(parts[8]),
            )
        )
    return rows


def scenario_starts(grid: GridMap, rows: list[ScenarioRow], n: int) -> tuple[int, ...]:
    """Vertex ids of the first n start cells; goals in the file are ignored.

    Rejects rows outside the map or on obstacles, and duplicate starts among
    the first n rows.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    if len(rows) < n:
        raise ValueError(f"scenario provides {len(rows)} rows, need {n}")
    starts = []
    seen = set()
    for idx in range(n):
        r = rows[idx]
        if not (0 <= r.start_row < grid.height and 0 <= r.start_col < grid.width):
            raise MapFormatError(
                f"scenario row {idx} start ({r.start_row}, {r.start_col}) outside map"
            )
        v = grid.vertex_at(r.start_row, r.start_col)
        if v in seen:
            raise MapFormatError(f"scenario row {idx} duplicates an earlier start")
        seen.add(v)
        starts.append(v)
    return tuple(starts)


@dataclass(frozen=True)
class EpisodeJob:
    """Picklable description of one episode run."""

    map_path: str
    scen_path: str
    agents: int
    steps: int
    solver: str = "lllg"
    scheme: str = "pi"
    w_phi: int = 20
    w_pi: int = 10
    m: int = 2
    alpha: float = 5.0
    refiner: str = "none"
    budget_ms: Optional[float] = 10000.0
    budget_expansions: Optional[int] = None
    k_lns: int = 8
    seed: int = 0
    hindrance: str = "auto"
    trace_path: Optional[str] = None
    heatmap_path: Optional[str] = None


@dataclass
class RunRecord:
    map: str
    agents: int
    solver: str
    scheme: str
    w_phi: int
    w_pi: int
    m: int
    alpha: float
    refiner: str
    seed: int
    steps: int
    throughput: float
    runtime_mean_s: float
    runtime_max_s: float
    fallbacks: int
    completed_tasks: int

    def as_row(self) -> list[str]:
        return [str(getattr(self, c)) for c in RESULT_COLUMNS]


@lru_cache(maxsize=16)
def _load_grid(path: str) -> GridMap:
    return parse_map(Path(path).read_text())


@lru_cache(maxsize=16)
def _load_rows(path: str) -> tuple[ScenarioRow, ...]:
    return tuple(parse_scenario(Path(path).read_text()))


_oracles: dict[str, DistanceOracle] = {}


def _shared_oracle(map_path: str, grid: GridMap) -> DistanceOracle:
    oracle = _oracles.get(map_path)
    if oracle is None:
        oracle = DistanceOracle(grid)
        _oracles[map_path] = oracle
    return oracle


def episode_config(job: EpisodeJob) -> EpisodeConfig:
    grid = _load_grid(job.map_path)
    starts = scenario_starts(grid, list(_load_rows(job.scen_path)), job.agents)
    hindrance = None if job.hindrance == "auto" else job.hindrance == "on"
    return EpisodeConfig(
        grid=grid,
        starts=starts,
        num_steps=job.steps,
        solver=Solver(job.solver),
        scheme=WarmStart(job.scheme),
        w_phi=job.w_phi,
        w_pi=job.w_pi,
        m=job.m,
        alpha=job.alpha,
        refiner=Refiner(job.refiner),
        budget_s=None if job.budget_ms is None else job.budget_ms / 1000.0,
        budget_expansions=job.budget_expansions,
        k_lns=job.k_lns,
        task_seed=job.seed,
        planner_seed=job.seed + 1_000_003,
        hindrance=hindrance,
    )


def run_job(job: EpisodeJob) -> RunRecord:
    cfg = episode_config(job)
    oracle = _shared_oracle(job.map_path, cfg.grid)
    result = run_episode(cfg, oracle)
    if job.trace_path:
        write_trace(result.trace, cfg.grid, job.trace_path)
    if job.heatmap_path:
        write_heatmap(result.trace, cfg.grid, job.heatmap_path)
    runtimes = result.metrics.per_step_runtime or [0.0]
    return RunRecord(
        map=Path(job.map_path).stem,
        agents=job.agents,
        solver=job.solver,
        scheme=job.scheme,
        w_phi=job.w_phi,
        w_pi=job.w_pi,
        m=job.m,
        alpha=job.alpha,
        refiner=job.refiner,
        seed=job.seed,
        steps=job.steps,
        throughput=result.metrics.throughput,
        runtime_mean_s=float(np.mean(runtimes)),
        runtime_max_s=float(np.max(runtimes)),
        fallbacks=result.fallback_count,
        completed_tasks=result.metrics.completed_tasks,
    )


def run_matrix(jobs: list[EpisodeJob], num_workers: int = 1) -> list[RunRecord]:
    """Run all jobs, preserving job order in the returned records."""
    if num_workers <= 1 or len(jobs) <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=num_workers) as pool:
        return list(pool.map(run_job, jobs))


def write_results(records: list[RunRecord], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RESULT_COLUMNS)
        for rec in records:
            writer.writerow(rec.as_row())


def stop_count_grid(trace: Plan, grid: GridMap) -> np.ndarray:
    """(height, width) stop counts; -1 on obstacles.

    A stop is an executed step in which an agent did not move, goal or not.
    """
    stops = np.zeros(grid.num_vertices, dtype=np.int64)
    for t in range(len(trace) - 1):
        for u, v in zip(trace[t], trace[t + 1]):
            if u == v:
                stops[u] += 1
    out = np.full((grid.height, grid.width), -1, dtype=np.int64)
    rows = grid.cell_of_vertex[:, 0]
    cols = grid.cell_of_vertex[:, 1]
    out[rows, cols] = stops
    return out


def write_heatmap(trace: Plan, grid: GridMap, path: str) -> None:
    """Write the stop-count grid CSV and its companion histogram CSV.

    The histogram file (path stem + '_histogram') maps each stop-count value
    to the number of passable cells with that count; its frequency column
    sums to the passable-cell count.
    """
    out = stop_count_grid(trace, grid)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for r in range(grid.height):
            writer.writerow(out[r].tolist())
    values = out[out >= 0]
    uniq, freq = np.unique(values, return_counts=True)
    p = Path(path)
    hist_path = p.with_name(p.stem + "_histogram" + (p.suffix or ".csv"))
    with open(hist_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["stops", "vertices"])
        for value, count in zip(uniq.tolist(), freq.tolist()):
            writer.writerow([value, count])


def write_trace(trace: Plan, grid: GridMap, path: str) -> None:
    """One line per configuration: each agent's vertex as an (row,col) pair."""
    with open(path, "w") as f:
        for config in trace:
            cells = (grid.cell_at(v) for v in config)
            f.write(" ".join(f"({r},{c})" for r, c in cells))
            f.write("\n")
