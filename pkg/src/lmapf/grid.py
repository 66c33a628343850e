"""Grid maps in the MovingAI benchmark format and BFS distance oracles.

Vertices are dense indices over passable cells only (row-major order), so
configuration arrays and distance tables stay compact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ._kernels import bfs_distances

# Sentinel distance for unreachable pairs; orders above every finite distance.
UNREACHABLE = 1 << 30

_PASSABLE = frozenset(".G")
_BLOCKED = frozenset("@TO")


@dataclass(frozen=True)
class GridMap:
    """4-connected grid graph over the passable cells of a map.

    Attributes:
        width: Number of columns.
        height: Number of rows.
        passable: Boolean (height, width) array, True where traversable.
        vertex_of_cell: (height, width) int32 array; dense vertex id of each
            passable cell, -1 on obstacles.
        cell_of_vertex: (num_vertices, 2) int32 array of (row, col) per vertex.
        adj_indptr / adj_indices: CSR adjacency over vertices (4-neighborhood).
    """

    width: int
    height: int
    passable: np.ndarray
    vertex_of_cell: np.ndarray
    cell_of_vertex: np.ndarray
    adj_indptr: np.ndarray
    adj_indices: np.ndarray

    @property
    def num_vertices(self) -> int:
        return len(self.cell_of_vertex)

    def vertex_at(self, row: int, col: int) -> int:
        """Dense vertex id of a passable cell; raises on obstacles/bounds."""
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise IndexError(f"cell ({row}, {col}) outside {self.height}x{self.width} map")
        v = int(self.vertex_of_cell[row, col])
        if v < 0:
            raise ValueError(f"cell ({row}, {col}) is not passable")
        return v

    def cell_at(self, v: int) -> tuple[int, int]:
        """(row, col) of a vertex."""
        self._check_vertex(v)
        r, c = self.cell_of_vertex[v]
        return int(r), int(c)

    def neighbors(self, v: int) -> list[int]:
        """4-adjacent passable vertices of v, ascending; never contains v."""
        self._check_vertex(v)
        return self.adj_indices[self.adj_indptr[v] : self.adj_indptr[v + 1]].tolist()

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.adj_indptr[v + 1] - self.adj_indptr[v])

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range [0, {self.num_vertices})")

    def to_text(self) -> str:
        """Serialize back to the MovingAI map format (obstacles as '@')."""
        rows = ["".join("." if self.passable[r, c] else "@" for c in range(self.width))
                for r in range(self.height)]
        header = f"type octile\nheight {self.height}\nwidth {self.width}\nmap\n"
        return header + "\n".join(rows) + "\n"


class MapFormatError(ValueError):
    """Raised when map or scenario text violates the MovingAI grammar."""


def parse_map(text: str) -> GridMap:
    """Parse MovingAI map text into a GridMap.

    Expects the header lines ``type ...``, ``height H``, ``width W``, ``map``
    followed by H rows of W characters. '.' and 'G' are passable; '@', 'T',
    'O' are obstacles.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise MapFormatError("truncated header")
    if not lines[0].startswith("type"):
        raise MapFormatError(f"expected 'type' header, got {lines[0]!r}")
    try:
        height = int(lines[1].split()[1])
        width = int(lines[2].split()[1])
    except (IndexError, ValueError) as e:
        raise MapFormatError(f"malformed height/width header: {e}") from e
    if lines[1].split()[0] != "height" or lines[2].split()[0] != "width":
        raise MapFormatError("expected 'height' then 'width' header lines")
    if lines[3].strip() != "map":
        raise MapFormatError(f"expected 'map' header, got {lines[3]!r}")
    rows = [ln for ln in lines[4:] if ln.strip() != ""]
    if len(rows) != height:
        raise MapFormatError(f"expected {height} map rows, got {len(rows)}")

    passable = np.zeros((height, width), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"row {r} has length {len(row)}, expected {width}")
        for c, ch in enumerate(row):
            if ch in _PASSABLE:
                passable[r, c] = True
            elif ch in _BLOCKED:
                passable[r, c] = False
            else:
                raise MapFormatError(f"unknown cell character {ch!r} at row {r}, col {c}")
    return _build_grid(width, height, passable)


def _build_grid(width: int, height: int, passable: np.ndarray) -> GridMap:
    vertex_of_cell = np.full((height, width), -1, dtype=np.int32)
    rr, cc = np.nonzero(passable)
    n = len(rr)
    vertex_of_cell[rr, cc] = np.arange(n, dtype=np.int32)
    cell_of_vertex = np.stack([rr, cc], axis=1).astype(np.int32)

    indptr = np.zeros(n + 1, dtype=np.int32)
    indices: list[int] = []
    for v in range(n):
        r, c = int(rr[v]), int(cc[v])
        nbs = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            r2, c2 = r + dr, c + dc
            if 0 <= r2 < height and 0 <= c2 < width and passable[r2, c2]:
                nbs.append(int(vertex_of_cell[r2, c2]))
        nbs.sort()
        indices.extend(nbs)
        indptr[v + 1] = len(indices)
    return GridMap(
        width=width,
        height=height,
        passable=passable,
        vertex_of_cell=vertex_of_cell,
        cell_of_vertex=cell_of_vertex,
        adj_indptr=indptr,
        adj_indices=np.array(indices, dtype=np.int32),
    )


@dataclass
class DistanceOracle:
    """Per-goal shortest-path distance tables, built lazily by BFS.

    Tables are stored as rows of a growing int32 matrix so planners can hand
    a single array into compiled kernels. Concurrent first queries of the
    same goal build the table exactly once (double-checked under a lock);
    reads of existing rows are lock-free.
    """

    grid: GridMap
    _row_of_goal: dict[int, int] = field(default_factory=dict, init=False, repr=False)
    _tables: np.ndarray = field(init=False, repr=False)
    _used_rows: int = field(default=0, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        self._tables = np.empty((8, self.grid.num_vertices), dtype=np.int32)

    @property
    def table_count(self) -> int:
        """Number of goal tables built so far."""
        return len(self._row_of_goal)

    def dist(self, v: int, g: int) -> int:
        """Exact BFS hop count from v to g; UNREACHABLE if disconnected."""
        self.grid._check_vertex(v)
        row = self.table_row(g)
        return int(self._tables[row, v])

    def table_row(self, g: int) -> int:
        """Row index of goal g's table inside table_matrix(), building it if needed."""
        row = self._row_of_goal.get(g)
        if row is not None:
            return row
        self.grid._check_vertex(g)
        with self._lock:
            row = self._row_of_goal.get(g)
            if row is not None:
                return row
            if self._used_rows == len(self._tables):
                grown = np.empty((2 * len(self._tables), self.grid.num_vertices), dtype=np.int32)
                grown[: self._used_rows] = self._tables[: self._used_rows]
                self._tables = grown
            row = self._used_rows
            bfs_distances(
                self.grid.adj_indptr, self.grid.adj_indices, g, self._tables[row]
            )
            self._used_rows += 1
            self._row_of_goal[g] = row
            return row

    def table(self, g: int) -> np.ndarray:
        """Distance table of goal g (view; do not mutate)."""
        row = self.table_row(g)  # may grow the backing matrix
        return self._tables[row]

    def table_matrix(self) -> np.ndarray:
        """Current (num_tables, num_vertices) matrix view for kernel calls.

        Row indices returned by table_row remain valid for this view; fetch a
        fresh view after ensuring all rows needed by a kernel call exist.
        """
        return self._tables[: self._used_rows]

    def ensure_rows(self, goals) -> np.ndarray:
        """Table row index per goal, building any missing tables."""
        return np.array([self.table_row(int(g)) for g in goals], dtype=np.int32)
