"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately re-derive everything from first principles
(path enumeration, joint-space dynamic programming) so tests never compare
an implementation against itself.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest

from lmapf import DistanceOracle, GridMap, parse_map

BENCH_DIR = Path(__file__).resolve().parent.parent / "benchmarks"


def grid_from_rows(rows: list[str]) -> GridMap:
    text = f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows) + "\n"
    return parse_map(text)


def open_grid(width: int, height: int) -> GridMap:
    return grid_from_rows(["." * width] * height)


def corridor(length: int) -> GridMap:
    return grid_from_rows(["." * length])


def random_grid(rng: np.random.Generator, max_side: int = 16, min_passable: int = 2) -> GridMap:
    while True:
        h = int(rng.integers(2, max_side + 1))
        w = int(rng.integers(2, max_side + 1))
        density = float(rng.uniform(0.0, 0.35))
        cells = rng.random((h, w)) >= density
        if cells.sum() >= min_passable:
            rows = ["".join("." if cells[r, c] else "@" for c in range(w)) for r in range(h)]
            return grid_from_rows(rows)


@pytest.fixture
def grid3() -> GridMap:
    return open_grid(3, 3)


# ---------------------------------------------------------------------------
# guidance-path oracle: exhaustive enumeration of legal windowed walks


def oracle_guidance_best(
    grid: GridMap,
    oracle: DistanceOracle,
    start: int,
    goal: int,
    rows: list[list[int] | None],
    skip_agent: int,
    alpha: float,
    w: int,
) -> tuple[float, int]:
    """Minimum (primary, secondary) cost over every legal length-(w+1) walk."""

    def chi(t: int, frm: int, to: int) -> int:
        c = 0
        for j, row in enumerate(rows):
            if j == skip_agent or row is None:
                continue
            if row[t + 1] == to:
                c += 1
            elif frm != to and row[t] == to and row[t + 1] == frm:
                c += 1
        return c

    best: tuple[float, int] | None = None

    def rec(v: int, t: int, p: float, s: int) -> None:
        nonlocal best
        if t == w:
            total = (p + float(oracle.dist(v, goal)), s)
            if best is None or total < best:
                best = total
            return
        for u in [v] + grid.neighbors(v):
            c = chi(t, v, u)
            rec(u, t + 1, p + 1.0 + (alpha if c > 0 else 0.0), s + c)

    rec(start, 0, 0.0, 0)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# joint-space oracle: all collision-free successor configurations and the
# optimal windowed cost by dynamic programming


def joint_moves(grid: GridMap, Q: tuple[int, ...]) -> list[tuple[int, ...]]:
    n = len(Q)
    out = []
    cands = [[Q[i]] + grid.neighbors(Q[i]) for i in range(n)]
    for combo in itertools.product(*cands):
        if len(set(combo)) != n:
            continue
        swap = False
        for i in range(n):
            for j in range(i + 1, n):
                if combo[i] == Q[j] and combo[j] == Q[i] and combo[i] != Q[i]:
                    swap = True
        if not swap:
            out.append(tuple(combo))
    return out


def oracle_windowed_optimum(
    grid: GridMap,
    oracle: DistanceOracle,
    Q0: tuple[int, ...],
    goals: tuple[int, ...],
    w: int,
) -> int:
    """Optimal windowed cost: transition costs plus terminal goal distances."""

    def step_cost(Q, Q2):
        return sum(1 for i in range(len(Q)) if Q2[i] != Q[i] or Q[i] != goals[i])

    def heur(Q):
        return sum(oracle.dist(Q[i], goals[i]) for i in range(len(Q)))

    layer = {Q0: 0}
    best = heur(Q0) if all(Q0[i] == goals[i] for i in range(len(Q0))) else None
    for _ in range(w):
        nxt: dict[tuple[int, ...], int] = {}
        for Q, g in layer.items():
            for Q2 in joint_moves(grid, Q):
                ng = g + step_cost(Q, Q2)
                if Q2 not in nxt or ng < nxt[Q2]:
                    nxt[Q2] = ng
        layer = nxt
    candidates = [g + heur(Q) for Q, g in layer.items()]
    if best is not None:
        candidates.append(best)
    return min(candidates)


# ---------------------------------------------------------------------------
# reservation-walk oracle: enumerate every walk of the window


def oracle_min_walk_cost(
    grid: GridMap,
    start: int,
    goal: int,
    w: int,
    blocked_vertices: set[tuple[int, int]],
    blocked_edges: set[tuple[int, int, int]],
) -> int | None:
    """Min walk cost around reservations, or None when everything is blocked.

    blocked_vertices holds (t, v); blocked_edges holds (t, a, b) for a frozen
    traversal a@t -> b@t+1 (conflicting with our move b -> a at t).
    """
    best: int | None = None

    def rec(v: int, t: int, cost: int) -> None:
        nonlocal best
        if t == w:
            if best is None or cost < best:
                best = cost
            return
        for u in [v] + grid.neighbors(v):
            if (t + 1, u) in blocked_vertices:
                continue
            if u != v and (t, u, v) in blocked_edges:
                continue
            c = 0 if (v == goal and u == goal) else 1
            rec(u, t + 1, cost + c)

    rec(start, 0, 0)
    return best
