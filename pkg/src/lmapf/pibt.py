"""One-step configuration generation via priority inheritance with backtracking.

Each agent ranks its move candidates (stay plus 4-neighbors) by the
lexicographic key (guidance mismatch, goal distance, hindrance, random
tiebreak) and the classic PIBT recursion resolves collisions: a blocked
high-priority agent lends its priority to the blocker, which must replan
first; if every candidate fails the agent backtracks and waits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .core import Config
from .grid import DistanceOracle, GridMap
from .guidance import GuidancePaths


@dataclass(frozen=True)
class PositiveConstraint:
    """Force one agent onto a vertex in the next configuration."""

    agent: int
    vertex: int


def hindrance(
    grid: GridMap,
    oracle: DistanceOracle,
    u: int,
    i: int,
    Q: Config,
    goals: Config,
) -> int:
    """How many neighboring agents the move of agent i onto u would block.

    Counts agents j != i sitting adjacent to u whose shortest path toward
    their goal runs through u (dist(u, g_j) < dist(Q[j], g_j)).
    """
    pos = {v: j for j, v in enumerate(Q)}
    return _hindrance_at(grid, oracle, u, i, Q, goals, pos)


def _hindrance_at(grid, oracle, u, i, Q, goals, pos) -> int:
    count = 0
    for nb in grid.neighbors(u):
        j = pos.get(nb)
        if j is not None and j != i:
            if oracle.dist(u, goals[j]) < oracle.dist(Q[j], goals[j]):
                count += 1
    return count


def planning_order(priorities: Sequence[float]) -> list[int]:
    """Agents sorted by (priority, index) descending."""
    return sorted(range(len(priorities)), key=lambda i: (priorities[i], i), reverse=True)


def rank_candidates(
    grid: GridMap,
    oracle: DistanceOracle,
    Q: Config,
    goals: Config,
    guidance: Optional[GuidancePaths],
    i: int,
    rng: np.random.Generator,
    use_hindrance: bool = True,
) -> list[int]:
    """Candidate vertices of agent i in preference-key order."""
    cands = [Q[i]] + grid.neighbors(Q[i])
    pos = {v: j for j, v in enumerate(Q)}
    guide = guidance.next_vertex(i) if guidance is not None else -1
    keyed = []
    for u in cands:
        flag = int(guide >= 0 and guide != u)
        h = _hindrance_at(grid, oracle, u, i, Q, goals, pos) if use_hindrance else 0
        keyed.append(((flag, oracle.dist(u, goals[i]), h, rng.random()), u))
    keyed.sort()
    return [u for _, u in keyed]


def plan_step(
    grid: GridMap,
    oracle: DistanceOracle,
    Q: Config,
    goals: Config,
    guidance: Optional[GuidancePaths],
    constraints: Sequence[PositiveConstraint],
    priorities: Sequence[float],
    rng: np.random.Generator,
    use_hindrance: bool = True,
) -> Optional[Config]:
    """One collision-free joint step, or None if the constraints are unsatisfiable.

    Constrained agents are placed first, in constraint order; the remaining
    agents are assigned by PIBT in priority order. The result always passes
    transition validation when not None.
    """
    n = len(Q)
    if len(goals) != n or len(priorities) != n:
        raise ValueError("Q, goals, and priorities must have equal length")
    V = grid.num_vertices

    occ_now = np.full(V, -1, dtype=np.int32)
    for i, v in enumerate(Q):
        occ_now[v] = i
    occ_nxt = np.full(V, -1, dtype=np.int32)
    q_to = np.full(n, -1, dtype=np.int32)
    forced = np.zeros(V, dtype=np.uint8)

    seen = set()
    for c in constraints:
        if c.agent in seen:
            raise ValueError(f"duplicate constraint for agent {c.agent}")
        seen.add(c.agent)
        u = c.vertex
        if u != Q[c.agent] and u not in grid.neighbors(Q[c.agent]):
            return None
        if occ_nxt[u] != -1:
            return None
        j = occ_now[u]
        if j != -1 and q_to[j] == Q[c.agent]:
            return None
        q_to[c.agent] = u
        occ_nxt[u] = c.agent
        forced[u] = 1

    goal_rows = oracle.ensure_rows(goals)
    tables = oracle.table_matrix()
    guide_next = np.full(n, -1, dtype=np.int32)
    if guidance is not None:
        guide_next = guidance.next_vertices()
    eps = rng.random((n, 5))
    order = np.array(planning_order(priorities), dtype=np.int32)
    q_arr = np.array(Q, dtype=np.int32)

    status = K.pibt_assign(
        grid.adj_indptr,
        grid.adj_indices,
        tables,
        goal_rows,
        q_arr,
        order,
        guide_next,
        use_hindrance,
        eps,
        occ_now,
        occ_nxt,
        q_to,
        forced,
    )
    if status != 0:
        return None
    return tuple(int(v) for v in q_to)
