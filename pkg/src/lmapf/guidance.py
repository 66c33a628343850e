"""Agent-wise guidance paths: construction, refinement, warm starts, shifts.

A guidance path is a short single-agent walk that biases PIBT's move
ranking. Paths are built per agent by exact space-time A* against the other
stored paths, trading steps and collision penalties lexicographically:
each step costs (1 + alpha if it collides else 1, collision count) and the
endpoint adds (distance to goal, 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels as K
from .core import Config, Plan
from .grid import DistanceOracle, GridMap


class WarmStart(Enum):
    EMPTY = "empty"
    PHI = "phi"
    PI = "pi"


class LexCost(NamedTuple):
    """Guidance path cost, compared lexicographically."""

    primary: float
    secondary: int

    def __add__(self, other):  # type: ignore[override]
        return LexCost(self.primary + other[0], self.secondary + other[1])


@dataclass
class GuidancePaths:
    """n guidance rows of length window+1; row i starts at agent i's vertex.

    A row whose first entry is -1 marks an absent agent and is ignored by
    collision counting.
    """

    verts: np.ndarray  # (n, window + 1) int32

    @classmethod
    def all_wait(cls, Q: Config, window: int) -> "GuidancePaths":
        col = np.array(Q, dtype=np.int32).reshape(-1, 1)
        return cls(np.repeat(col, window + 1, axis=1))

    @classmethod
    def absent(cls, n: int, window: int) -> "GuidancePaths":
        return cls(np.full((n, window + 1), -1, dtype=np.int32))

    @property
    def num_agents(self) -> int:
        return self.verts.shape[0]

    @property
    def window(self) -> int:
        return self.verts.shape[1] - 1

    def row(self, i: int) -> list[int]:
        return self.verts[i].tolist()

    def is_present(self, i: int) -> bool:
        return bool(self.verts[i, 0] >= 0)

    def next_vertex(self, i: int) -> int:
        """Second vertex of row i (the move the guidance suggests), -1 if absent."""
        if not self.is_present(i):
            return -1
        return int(self.verts[i, 1])

    def next_vertices(self) -> np.ndarray:
        out = self.verts[:, 1].astype(np.int32).copy()
        out[self.verts[:, 0] < 0] = -1
        return out

    def set_row(self, i: int, row: Sequence[int]) -> None:
        self.verts[i] = np.asarray(row, dtype=np.int32)

    def copy(self) -> "GuidancePaths":
        return GuidancePaths(self.verts.copy())


def transition_collisions(
    phi: GuidancePaths, i: int, t: int, frm: int, to: int
) -> int:
    """Collisions of moving frm@t -> to@t+1 against the other stored rows.

    A vertex collision is a row sitting on `to` at t+1; a swap collision is a
    row traversing the same edge the opposite way (only when frm != to).
    The two are mutually exclusive per row.
    """
    if not 0 <= t < phi.window:
        raise ValueError(f"step {t} outside window [0, {phi.window})")
    count = 0
    verts = phi.verts
    for j in range(phi.num_agents):
        if j == i or verts[j, 0] < 0:
            continue
        if verts[j, t + 1] == to:
            count += 1
        elif frm != to and verts[j, t] == to and verts[j, t + 1] == frm:
            count += 1
    return count


def guidance_path_cost(
    oracle: DistanceOracle,
    goal: int,
    path: Sequence[int],
    phi: GuidancePaths,
    i: int,
    alpha: float,
) -> LexCost:
    """LexCost of a candidate path for agent i against the stored rows."""
    w = len(path) - 1
    cost = LexCost(float(oracle.dist(path[w], goal)), 0)
    for t in range(w):
        chi = transition_collisions(phi, i, t, path[t], path[t + 1])
        cost = cost + LexCost(1.0 + (alpha if chi > 0 else 0.0), chi)
    return cost


class _CollisionIndex:
    """Incremental occupancy/traversal counts over the rows of one Phi."""

    def __init__(self, num_vertices: int, window: int):
        self.vcount = np.zeros((window + 1, num_vertices), dtype=np.int32)
        self.edges = K.new_edge_dict()

    def build(self, phi: GuidancePaths, skip: int = -1) -> None:
        K.build_collision_index(phi.verts, self.vcount, self.edges, skip)

    def remove(self, row: np.ndarray) -> None:
        if row[0] >= 0:
            K.index_apply_row(row, self.vcount, self.edges, -1)

    def add(self, row: np.ndarray) -> None:
        if row[0] >= 0:
            K.index_apply_row(row, self.vcount, self.edges, 1)


def _solve_row(
    grid: GridMap,
    oracle: DistanceOracle,
    start: int,
    goal: int,
    alpha: float,
    window: int,
    index: _CollisionIndex,
    ws: K.AStarWorkspace,
) -> np.ndarray:
    path = np.empty(window + 1, dtype=np.int32)
    (gp, gs, par, stamp, cstamp), epoch = ws.lease((window + 1) * grid.num_vertices)
    K.guidance_astar(
        grid.adj_indptr,
        grid.adj_indices,
        oracle.table(goal),
        start,
        window,
        float(alpha),
        index.vcount,
        index.edges,
        gp,
        gs,
        par,
        stamp,
        cstamp,
        epoch,
        path,
    )
    return path


def best_guidance_path(
    grid: GridMap,
    oracle: DistanceOracle,
    i: int,
    start: int,
    goal: int,
    phi: GuidancePaths,
    alpha: float,
    w_phi: int,
    workspace: Optional[K.AStarWorkspace] = None,
) -> list[int]:
    """Minimum-LexCost walk of length w_phi+1 from start, by space-time A*.

    The search is exact; ties in f are broken toward larger t, then smaller
    vertex id. Agent i's own stored row is excluded from collision counting.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if w_phi < 1:
        raise ValueError("w_phi must be at least 1")
    index = _CollisionIndex(grid.num_vertices, w_phi)
    if phi.window == w_phi:
        index.build(phi, skip=i)
    else:
        # windows differ: count only the overlapping prefix of stored rows
        tmp = GuidancePaths.absent(phi.num_agents, w_phi)
        for j in range(phi.num_agents):
            if j != i and phi.is_present(j):
                row = phi.verts[j]
                k = min(phi.window, w_phi) + 1
                padded = np.concatenate(
                    [row[:k], np.repeat(row[k - 1], w_phi + 1 - k)]
                )
                tmp.verts[j] = padded
        index.build(tmp)
    ws = workspace or K.AStarWorkspace()
    return _solve_row(grid, oracle, start, goal, alpha, w_phi, index, ws).tolist()


def refine_guidance(
    grid: GridMap,
    oracle: DistanceOracle,
    Q: Config,
    goals: Config,
    phi_init: GuidancePaths,
    alpha: float,
    w_phi: int,
    m: int,
    workspace: Optional[K.AStarWorkspace] = None,
) -> GuidancePaths:
    """Re-solve every row against the evolving Phi, m rounds in index order.

    Multiple rounds wash out the bias the sequential update order induces.
    m == 0 returns phi_init untouched.
    """
    if m == 0:
        return phi_init
    phi = phi_init.copy()
    ws = workspace or K.AStarWorkspace()
    index = _CollisionIndex(grid.num_vertices, w_phi)
    index.build(phi)
    for _ in range(m):
        for i in range(phi.num_agents):
            index.remove(phi.verts[i])
            row = _solve_row(grid, oracle, Q[i], goals[i], alpha, w_phi, index, ws)
            phi.verts[i] = row
            index.add(phi.verts[i])
    return phi


def repair_diverged(
    grid: GridMap,
    oracle: DistanceOracle,
    Q: Config,
    goals: Config,
    phi: GuidancePaths,
    alpha: float,
    workspace: Optional[K.AStarWorkspace] = None,
) -> GuidancePaths:
    """One repair pass over agents whose position left their row start.

    Mutates and returns phi; untouched rows keep their walks.
    """
    diverged = [i for i in range(phi.num_agents) if phi.verts[i, 0] != Q[i]]
    if not diverged:
        return phi
    ws = workspace or K.AStarWorkspace()
    index = _CollisionIndex(grid.num_vertices, phi.window)
    index.build(phi)
    for i in diverged:
        index.remove(phi.verts[i])
        row = _solve_row(grid, oracle, Q[i], goals[i], alpha, phi.window, index, ws)
        phi.verts[i] = row
        index.add(phi.verts[i])
    return phi


def rebuild_exhausted(
    grid: GridMap,
    oracle: DistanceOracle,
    Q: Config,
    goals: Config,
    phi: GuidancePaths,
    alpha: float,
    workspace: Optional[K.AStarWorkspace] = None,
) -> GuidancePaths:
    """Rebuild rows that have degenerated to waiting at a non-goal vertex.

    This is the whole update policy when refinement is disabled (m == 0):
    a row is only re-solved once shifting has consumed it. Rows that no
    longer start at the agent's position count as consumed too.
    """
    stale = []
    for i in range(phi.num_agents):
        row = phi.verts[i]
        if row[0] != Q[i]:
            stale.append(i)
        elif (row == row[0]).all() and row[0] != goals[i]:
            stale.append(i)
    if not stale:
        return phi
    ws = workspace or K.AStarWorkspace()
    index = _CollisionIndex(grid.num_vertices, phi.window)
    index.build(phi)
    for i in stale:
        index.remove(phi.verts[i])
        row = _solve_row(grid, oracle, Q[i], goals[i], alpha, phi.window, index, ws)
        phi.verts[i] = row
        index.add(phi.verts[i])
    return phi


def shift_guidance(phi: GuidancePaths) -> GuidancePaths:
    """Advance every row one step: drop the head, repeat the tail vertex."""
    v = phi.verts
    return GuidancePaths(np.concatenate([v[:, 1:], v[:, -1:]], axis=1))


def warm_start(
    scheme: WarmStart,
    prev_phi: Optional[GuidancePaths],
    prev_plan: Optional[Plan],
    Q: Config,
    w_phi: int,
    w_pi: int,
) -> GuidancePaths:
    """Initial guidance for the current step from the previous step's artifacts.

    EMPTY ignores history (all-wait rows, rebuilt by refinement). PHI shifts
    the previous guidance, resetting rows that no longer start at the agent.
    PI seeds each row with the tail of the previous windowed plan, padded
    with its last vertex.
    """
    n = len(Q)
    if scheme is WarmStart.EMPTY:
        return GuidancePaths.all_wait(Q, w_phi)
    if scheme is WarmStart.PHI:
        if prev_phi is None:
            raise ValueError("PHI warm start requires the previous guidance")
        phi = shift_guidance(prev_phi)
        for i in range(n):
            if phi.verts[i, 0] != Q[i]:
                phi.verts[i] = Q[i]
        return phi
    if scheme is WarmStart.PI:
        if prev_plan is None:
            raise ValueError("PI warm start requires the previous plan")
        arr = np.array(prev_plan, dtype=np.int32)  # (steps + 1, n)
        k = min(arr.shape[0] - 1, w_pi, w_phi)
        verts = np.empty((n, w_phi + 1), dtype=np.int32)
        for i in range(n):
            prefix = arr[1 : 1 + k, i]
            if k == 0:
                verts[i] = Q[i]
                continue
            if prefix[0] != Q[i]:
                raise ValueError(
                    f"previous plan step 1 for agent {i} does not match its position"
                )
            verts[i, :k] = prefix
            verts[i, k:] = prefix[-1]
        return GuidancePaths(verts)
    raise ValueError(f"unknown warm start scheme: {scheme!r}")
