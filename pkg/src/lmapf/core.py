"""Joint configurations, conflict semantics, plans, and episode metrics.

A configuration is a tuple of vertex ids, one per agent. A plan is a list of
configurations whose consecutive pairs are legal, collision-free transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridMap

Config = tuple[int, ...]
Plan = list[Config]


@dataclass(frozen=True)
class Conflict:
    """One violation in a transition.

    kind: 'move' (target not adjacent or self), 'vertex' (two agents on one
    target), or 'swap' (two agents traversing one edge in opposite
    directions). Agent j is -1 for move conflicts.
    """

    kind: str
    i: int
    j: int
    vertex: int

    def relabeled(self, perm: list[int]) -> "Conflict":
        j = perm[self.j] if self.j >= 0 else -1
        i = perm[self.i]
        if self.kind != "move" and j < i:
            i, j = j, i
        return Conflict(self.kind, i, j, self.vertex)


def validate_config(grid: GridMap, Q: Config) -> None:
    """Raise unless all positions are valid vertices and pairwise distinct."""
    for v in Q:
        grid._check_vertex(v)
    if len(set(Q)) != len(Q):
        raise ValueError("configuration has agents sharing a vertex")


def validate_transition(grid: GridMap, Q: Config, Q2: Config) -> list[Conflict]:
    """Every conflict of the joint move Q -> Q2 (empty list iff collision-free).

    Checks move legality (target in neighbors or wait), vertex conflicts
    (shared target), and swap conflicts (edge traversed both ways).
    """
    if len(Q) != len(Q2):
        raise ValueError(f"configuration lengths differ: {len(Q)} vs {len(Q2)}")
    conflicts: list[Conflict] = []
    for i, (u, v) in enumerate(zip(Q, Q2)):
        if v != u and v not in grid.neighbors(u):
            conflicts.append(Conflict("move", i, -1, v))
    by_target: dict[int, list[int]] = {}
    for i, v in enumerate(Q2):
        by_target.setdefault(v, []).append(i)
    for v, agents in sorted(by_target.items()):
        if len(agents) > 1:
            for a in range(len(agents)):
                for b in range(a + 1, len(agents)):
                    conflicts.append(Conflict("vertex", agents[a], agents[b], v))
    pos = {v: i for i, v in enumerate(Q)}
    for i, v in enumerate(Q2):
        j = pos.get(v)
        if j is not None and j != i and Q2[j] == Q[i] and i < j:
            conflicts.append(Conflict("swap", i, j, v))
    return conflicts


def transition_ok(grid: GridMap, Q: Config, Q2: Config) -> bool:
    """Boolean fast path used inside planners."""
    n = len(Q)
    if len(set(Q2)) != n:
        return False
    pos = {v: i for i, v in enumerate(Q)}
    for i in range(n):
        u, v = Q[i], Q2[i]
        if v != u and v not in grid.neighbors(u):
            return False
        j = pos.get(v)
        if j is not None and j != i and Q2[j] == u:
            return False
    return True


def validate_plan(grid: GridMap, plan: Plan) -> list[tuple[int, Conflict]]:
    """All conflicts across the plan as (step, conflict); empty iff valid.

    Step s refers to the transition plan[s-1] -> plan[s].
    """
    if not plan:
        raise ValueError("plan is empty")
    out: list[tuple[int, Conflict]] = []
    for s in range(1, len(plan)):
        for c in validate_transition(grid, plan[s - 1], plan[s]):
            out.append((s, c))
    return out


@dataclass
class EpisodeMetrics:
    """Counters accumulated over one lifelong episode."""

    num_vertices: int
    completed_tasks: int = 0
    executed_steps: int = 0
    per_step_runtime: list[float] = field(default_factory=list)
    stop_counts: np.ndarray = field(default=None)  # type: ignore[assignment]
    task_log: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.stop_counts is None:
            self.stop_counts = np.zeros(self.num_vertices, dtype=np.int64)

    @property
    def throughput(self) -> float:
        if self.executed_steps == 0:
            return 0.0
        return self.completed_tasks / self.executed_steps


def accumulate_metrics(
    metrics: EpisodeMetrics,
    Q: Config,
    Q2: Config,
    goals: Config,
    runtime: float,
) -> EpisodeMetrics:
    """Record one executed transition: completions, stops, and runtime.

    An agent completes a task when its executed position equals its goal; it
    stops whenever it does not move, goal or not.
    """
    metrics.executed_steps += 1
    step = metrics.executed_steps
    for i, (u, v) in enumerate(zip(Q, Q2)):
        if v == goals[i]:
            metrics.completed_tasks += 1
            metrics.task_log.append((i, step, goals[i]))
        if v == u:
            metrics.stop_counts[u] += 1
    metrics.per_step_runtime.append(runtime)
    return metrics
