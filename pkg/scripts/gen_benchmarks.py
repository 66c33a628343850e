"""Generate the bundled benchmark maps and scenario files.

The maps follow the MovingAI format and the standard family layouts
(empty, random with given obstacle density, parametric warehouse). Start
cells are sampled from the largest connected component so every agent can
move. Deterministic per seed; run from the repo root:

    python scripts/gen_benchmarks.py
"""

from __future__ import annotations

import sys
from collections import deque
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lmapf.grid import parse_map  # noqa: E402

OUT = Path(__file__).resolve().parent.parent / "benchmarks"


def empty_map(side: int) -> np.ndarray:
    return np.ones((side, side), dtype=bool)


def random_map(side: int, density: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    passable = rng.random((side, side)) >= density
    return passable


def warehouse_map(
    shelf_cols: int = 10,
    shelf_rows: int = 20,
    shelf_len: int = 10,
    shelf_h: int = 2,
    aisle: int = 2,
) -> np.ndarray:
    block_w = shelf_cols * shelf_len + (shelf_cols - 1) * aisle
    block_h = shelf_rows * shelf_h + (shelf_rows - 1) * aisle
    width = block_w + 2 * 25 + 2
    height = block_h + 2 * 2 + 2
    passable = np.ones((height, width), dtype=bool)
    passable[0, :] = passable[-1, :] = False
    passable[:, 0] = passable[:, -1] = False
    x0 = 1 + 25
    y0 = 1 + 2
    for sr in range(shelf_rows):
        for sc in range(shelf_cols):
            r = y0 + sr * (shelf_h + aisle)
            c = x0 + sc * (shelf_len + aisle)
            passable[r : r + shelf_h, c : c + shelf_len] = False
    return passable


def largest_component(passable: np.ndarray) -> list[tuple[int, int]]:
    h, w = passable.shape
    seen = np.zeros_like(passable, dtype=bool)
    best: list[tuple[int, int]] = []
    for r0 in range(h):
        for c0 in range(w):
            if not passable[r0, c0] or seen[r0, c0]:
                continue
            comp = []
            dq = deque([(r0, c0)])
            seen[r0, c0] = True
            while dq:
                r, c = dq.popleft()
                comp.append((r, c))
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and passable[rr, cc] and not seen[rr, cc]:
                        seen[rr, cc] = True
                        dq.append((rr, cc))
            if len(comp) > len(best):
                best = comp
    return best


def map_text(passable: np.ndarray) -> str:
    h, w = passable.shape
    rows = ["".join("." if passable[r, c] else "@" for c in range(w)) for r in range(h)]
    return f"type octile\nheight {h}\nwidth {w}\nmap\n" + "\n".join(rows) + "\n"


def scen_text(name: str, passable: np.ndarray, n: int, seed: int) -> str:
    h, w = passable.shape
    comp = largest_component(passable)
    if len(comp) < n:
        raise SystemExit(f"{name}: component has {len(comp)} cells, need {n}")
    rng = np.random.default_rng(seed)
    start_idx = rng.choice(len(comp), size=n, replace=False)
    goal_idx = rng.integers(0, len(comp), size=n)
    lines = ["version 1"]
    for k in range(n):
        sr, sc = comp[start_idx[k]]
        gr, gc = comp[goal_idx[k]]
        lines.append(f"0\t{name}.map\t{w}\t{h}\t{sc}\t{sr}\t{gc}\t{gr}\t0")
    return "\n".join(lines) + "\n"


def emit(name: str, passable: np.ndarray, n_starts: int, seed: int) -> None:
    OUT.mkdir(exist_ok=True)
    text = map_text(passable)
    grid = parse_map(text)  # validates the emitted format
    (OUT / f"{name}.map").write_text(text)
    (OUT / f"{name}-random-1.scen").write_text(scen_text(name, passable, n_starts, seed))
    comp = largest_component(passable)
    print(
        f"{name}: {grid.width}x{grid.height}, {grid.num_vertices} passable, "
        f"{len(comp)} in main component, {n_starts} starts"
    )


def main() -> None:
    emit("empty-48-48", empty_map(48), 1500, seed=101)
    emit("empty-8-8", empty_map(8), 32, seed=102)
    emit("random-32-32-10", random_map(32, 0.10, seed=4), 830, seed=103)
    emit("random-64-64-10", random_map(64, 0.10, seed=5), 2000, seed=104)
    emit("warehouse-10-20-10-2-2", warehouse_map(), 2500, seed=105)


if __name__ == "__main__":
    main()
