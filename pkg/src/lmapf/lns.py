"""Large neighborhood search over a windowed plan.

Each iteration removes a random subset of agents, freezes everyone else as
space-time obstacles, and replans the subset one agent at a time with
finite-horizon A*. A batch is kept only when the total plan cost strictly
drops; otherwise it is reverted, so cost never increases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from .budget import Budget
from .core import Config, Plan
from .grid import DistanceOracle, GridMap


@dataclass
class ReservationTable:
    """Space-time occupancy of the frozen agents over one window.

    Vertex lookups and directed-edge lookups both run in constant expected
    time: counts per (t, v) plus a traversal dict keyed (t*V + a)*V + b.
    """

    num_vertices: int
    window: int
    vcount: np.ndarray
    edges: "K.Dict"

    @classmethod
    def empty(cls, grid: GridMap, window: int) -> "ReservationTable":
        return cls(
            grid.num_vertices,
            window,
            np.zeros((window + 1, grid.num_vertices), dtype=np.int32),
            K.new_edge_dict(),
        )

    @classmethod
    def from_paths(
        cls, grid: GridMap, window: int, paths: Iterable[Iterable[int]]
    ) -> "ReservationTable":
        table = cls.empty(grid, window)
        for path in paths:
            table.add_path(path)
        return table

    def add_path(self, path: Iterable[int]) -> None:
        row = np.asarray(path, dtype=np.int32)
        if row.shape[0] != self.window + 1:
            raise ValueError(f"path length {row.shape[0]} != window+1 ({self.window + 1})")
        K.index_apply_row(row, self.vcount, self.edges, 1)

    def is_vertex_occupied(self, v: int, t: int) -> bool:
        return bool(self.vcount[t, v] > 0)

    def is_edge_swapped(self, u: int, v: int, t: int) -> bool:
        """Does moving u -> v during step t oppose a frozen traversal?"""
        key = (np.int64(t) * self.num_vertices + v) * self.num_vertices + u
        return key in self.edges and self.edges[key] > 0


def walk_cost(path: Iterable[int], goal: int) -> int:
    """Steps spent before finally parking on the goal (window-capped)."""
    path = list(path)
    cost = 0
    for t in range(len(path) - 1):
        if not (path[t] == goal and path[t + 1] == goal):
            cost += 1
    return cost


def plan_cost(plan: Plan, goals: Config) -> int:
    """Total per-step cost over all agents."""
    total = 0
    for t in range(len(plan) - 1):
        for i in range(len(goals)):
            if not (plan[t][i] == goals[i] and plan[t + 1][i] == goals[i]):
                total += 1
    return total


def replan_agent(
    grid: GridMap,
    oracle: DistanceOracle,
    i: int,
    start: int,
    goal: int,
    table: ReservationTable,
    w_pi: int,
    workspace: Optional[K.AStarWorkspace] = None,
) -> Optional[list[int]]:
    """Min-cost collision-free walk of length w_pi+1, or None if blocked.

    The per-step cost is 1 until the agent is parked on its goal and 0 while
    it stays there; leaving the goal resumes cost. The heuristic is the BFS
    goal distance, which is 0 exactly while parked.
    """
    ws = workspace or K.AStarWorkspace()
    path = np.empty(w_pi + 1, dtype=np.int32)
    (gp, gs, par, stamp, cstamp), epoch = ws.lease((w_pi + 1) * grid.num_vertices)
    cost = K.reservation_astar(
        grid.adj_indptr,
        grid.adj_indices,
        oracle.table(goal),
        start,
        goal,
        w_pi,
        table.vcount,
        table.edges,
        gs,
        par,
        stamp,
        cstamp,
        epoch,
        path,
    )
    if cost < 0:
        return None
    return path.tolist()


def refine_lns(
    grid: GridMap,
    oracle: DistanceOracle,
    plan: Plan,
    goals: Config,
    k: int,
    budget: Budget,
    rng: np.random.Generator,
    workspace: Optional[K.AStarWorkspace] = None,
) -> Plan:
    """Destroy-and-replan loop; returns a plan costing no more than the input.

    One budget expansion is charged per iteration, so an expansion-capped
    budget doubles as a deterministic iteration cap. Unselected agents keep
    their paths bit for bit.
    """
    n = len(goals)
    if not 1 <= k <= n:
        raise ValueError(f"neighborhood size {k} outside [1, {n}]")
    w = len(plan) - 1
    if w < 1:
        return plan
    ws = workspace or K.AStarWorkspace()
    rows = np.array(plan, dtype=np.int32).T.copy()  # (n, w + 1)
    total = plan_cost(plan, goals)

    while not budget.exhausted():
        budget.charge()
        selected = np.sort(rng.choice(n, size=k, replace=False))
        candidate = rows.copy()
        marked = candidate.copy()
        marked[selected, 0] = -1
        table = ReservationTable.empty(grid, w)
        K.build_collision_index(marked, table.vcount, table.edges, -1)

        feasible = True
        for i in selected:
            path = replan_agent(
                grid, oracle, int(i), int(rows[i, 0]), goals[i], table, w, ws
            )
            if path is None:
                feasible = False
                break
            candidate[i] = path
            table.add_path(candidate[i])
        if not feasible:
            continue
        new_total = sum(walk_cost(candidate[i], goals[i]) for i in range(n))
        if new_total < total:
            rows = candidate
            total = new_total

    return [tuple(int(v) for v in rows[:, t]) for t in range(w + 1)]
