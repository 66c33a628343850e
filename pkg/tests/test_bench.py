import csv
from pathlib import Path

import numpy as np
import pytest

from lmapf import MapFormatError, parse_map
from lmapf.bench import (
    RESULT_COLUMNS,
    EpisodeJob,
    parse_scenario,
    run_job,
    scenario_starts,
    stop_count_grid,
    write_heatmap,
    write_trace,
)
from lmapf.cli import main

from .conftest import grid_from_rows

MAP_TEXT = "type octile\nheight 3\nwidth 4\nmap\n....\n.@..\n....\n"

SCEN_TEXT = """version 1
0\ttiny.map\t4\t3\t0\t0\t3\t2\t5
0\ttiny.map\t4\t3\t3\t0\t0\t2\t5
0\ttiny.map\t4\t3\t0\t2\t3\t0\t5
0\ttiny.map\t4\t3\t3\t2\t0\t0\t5
"""


@pytest.fixture
def bench_files(tmp_path):
    map_path = tmp_path / "tiny.map"
    scen_path = tmp_path / "tiny.scen"
    map_path.write_text(MAP_TEXT)
    scen_path.write_text(SCEN_TEXT)
    return map_path, scen_path


def test_scenario_parse_and_starts(bench_files):
    map_path, scen_path = bench_files
    grid = parse_map(map_path.read_text())
    rows = parse_scenario(scen_path.read_text())
    assert len(rows) == 4
    assert rows[0].start_col == 0 and rows[0].start_row == 0
    starts = scenario_starts(grid, rows, 2)
    assert starts == (grid.vertex_at(0, 0), grid.vertex_at(0, 3))


def test_scenario_rejects_bad_rows():
    grid = parse_map(MAP_TEXT)
    with pytest.raises(MapFormatError):
        parse_scenario("no version header\n")
    with pytest.raises(MapFormatError):
        parse_scenario("version 1\n0 tiny.map 4 3 0 0 3\n")
    rows = parse_scenario("version 1\n0 t 4 3 9 9 0 0 0\n")
    with pytest.raises(MapFormatError):
        scenario_starts(grid, rows, 1)  # out of bounds
    rows = parse_scenario("version 1\n0 t 4 3 1 1 0 0 0\n")
    with pytest.raises(ValueError):
        scenario_starts(grid, rows, 1)  # obstacle cell
    rows = parse_scenario("version 1\n0 t 4 3 0 0 3 2 0\n0 t 4 3 0 0 0 2 0\n")
    with pytest.raises(MapFormatError):
        scenario_starts(grid, rows, 2)  # duplicate start
    rows = parse_scenario("version 1\n0 t 4 3 0 0 3 2 0\n")
    with pytest.raises(ValueError):
        scenario_starts(grid, rows, 5)  # not enough rows


def test_run_job_produces_record(bench_files):
    map_path, scen_path = bench_files
    job = EpisodeJob(
        map_path=str(map_path), scen_path=str(scen_path), agents=2, steps=8,
        solver="lllg", w_phi=4, w_pi=3, budget_ms=None, budget_expansions=200,
        seed=1,
    )
    rec = run_job(job)
    assert rec.map == "tiny"
    assert rec.agents == 2
    assert rec.steps == 8
    assert 0.0 <= rec.throughput <= 2.0
    assert rec.completed_tasks == round(rec.throughput * rec.steps)


def test_csv_header_is_pinned(bench_files, tmp_path):
    map_path, scen_path = bench_files
    out = tmp_path / "results.csv"
    code = main([
        "--map", str(map_path), "--scen", str(scen_path), "--agents", "2",
        "--steps", "5", "--solver", "pibt", "--out", str(out),
    ])
    assert code == 0
    with open(out) as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    assert header == RESULT_COLUMNS
    assert header == [
        "map", "agents", "solver", "scheme", "w_phi", "w_pi", "m", "alpha",
        "refiner", "seed", "steps", "throughput", "runtime_mean_s",
        "runtime_max_s", "fallbacks", "completed_tasks",
    ]
    assert len(rows) == 1


def test_sweep_cartesian_row_count(bench_files, tmp_path):
    map_path, scen_path = bench_files
    out = tmp_path / "results.csv"
    code = main([
        "--map", str(map_path), "--scen", str(scen_path), "--agents", "2",
        "--steps", "2", "--solver", "pibt",
        "--sweep", "agents=1,2", "--sweep", "seed=1..10",
        "--out", str(out),
    ])
    assert code == 0
    with open(out) as f:
        rows = list(csv.reader(f))[1:]
    assert len(rows) == 20
    # stable order: agents varies slowest, seed fastest
    assert [r[1] for r in rows] == ["1"] * 10 + ["2"] * 10
    assert [r[9] for r in rows][:10] == [str(s) for s in range(1, 11)]


def test_usage_errors(bench_files, tmp_path):
    map_path, scen_path = bench_files
    base = ["--map", str(map_path), "--scen", str(scen_path)]
    assert main(base + ["--agents", "0"]) == 2
    assert main(base + ["--agents", "1", "--solver", "pibt", "--scheme", "pi"]) == 2
    assert main(base + ["--agents", "1", "--solver", "pibt", "--refine", "lns"]) == 2
    assert main(["--map", "missing.map", "--scen", str(scen_path), "--agents", "1"]) == 2
    assert main(base + ["--agents", "1", "--sweep", "bogus=1,2"]) == 2
    assert main(base) == 2  # agents required


def test_heatmap_and_histogram(tmp_path):
    grid = grid_from_rows(["..", ".@"])
    trace = [(0,), (0,), (0,), (0,), (0,), (0,)]  # 5 waits at vertex 0
    out = tmp_path / "stops.csv"
    write_heatmap(trace, grid, str(out))
    with open(out) as f:
        rows = [list(map(int, r)) for r in csv.reader(f)]
    assert rows == [[5, 0], [0, -1]]
    with open(tmp_path / "stops_histogram.csv") as f:
        hist = list(csv.reader(f))
    assert hist[0] == ["stops", "vertices"]
    body = [(int(a), int(b)) for a, b in hist[1:]]
    assert body == [(0, 2), (5, 1)]
    assert sum(b for _, b in body) == grid.num_vertices


def test_stop_counts_match_grid_layout():
    grid = grid_from_rows(["...", "@.."])
    trace = [(0, 3), (1, 3), (1, 4), (1, 4)]
    out = stop_count_grid(trace, grid)
    assert out.shape == (2, 3)
    assert out[1, 0] == -1
    # agent 0 stops twice at 1=(0,1); agent 1 once each at 3=(1,1), 4=(1,2)
    assert out[0, 1] == 2
    assert out[1, 1] == 1
    assert out[1, 2] == 1


def test_trace_format(tmp_path):
    grid = grid_from_rows(["..."])
    out = tmp_path / "trace.txt"
    write_trace([(0, 2), (1, 2)], grid, str(out))
    assert out.read_text() == "(0,0) (0,2)\n(0,1) (0,2)\n"


def test_cli_reproducible_with_expansion_budget(bench_files, tmp_path):
    map_path, scen_path = bench_files
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        trace = tmp_path / f"t{k}.txt"
        code = main([
            "--map", str(map_path), "--scen", str(scen_path), "--agents", "3",
            "--steps", "10", "--solver", "lllg", "--w-phi", "4", "--w-pi", "3",
            "--budget-ms", "0", "--budget-expansions", "200", "--seed", "5",
            "--out", str(out), "--trace", str(trace),
        ])
        assert code == 0
        outs.append((out.read_text(), trace.read_text()))
    csv_a, trace_a = outs[0]
    csv_b, trace_b = outs[1]
    assert trace_a == trace_b

    def strip_runtime(text):
        rows = [r.split(",") for r in text.strip().splitlines()]
        drop = [RESULT_COLUMNS.index("runtime_mean_s"), RESULT_COLUMNS.index("runtime_max_s")]
        return [[c for i, c in enumerate(r) if i not in drop] for r in rows]

    assert strip_runtime(csv_a) == strip_runtime(csv_b)


def test_cli_multi_episode_output_suffixes(bench_files, tmp_path):
    map_path, scen_path = bench_files
    out = tmp_path / "results.csv"
    code = main([
        "--map", str(map_path), "--scen", str(scen_path), "--agents", "2",
        "--steps", "3", "--solver", "pibt", "--instances", "2",
        "--out", str(out), "--heatmap", str(tmp_path / "h.csv"),
    ])
    assert code == 0
    assert (tmp_path / "h_e000.csv").exists()
    assert (tmp_path / "h_e001.csv").exists()
    assert (tmp_path / "h_e000_histogram.csv").exists()


def test_parallel_jobs_match_serial(bench_files, tmp_path):
    map_path, scen_path = bench_files
    texts = []
    for jobs in ("1", "2"):
        out = tmp_path / f"j{jobs}.csv"
        code = main([
            "--map", str(map_path), "--scen", str(scen_path), "--agents", "2",
            "--steps", "5", "--solver", "pibt", "--instances", "3",
            "--jobs", jobs, "--out", str(out),
        ])
        assert code == 0
        texts.append(out.read_text())

    def strip_runtime(text):
        rows = [r.split(",") for r in text.strip().splitlines()]
        drop = [RESULT_COLUMNS.index("runtime_mean_s"), RESULT_COLUMNS.index("runtime_max_s")]
        return [[c for i, c in enumerate(r) if i not in drop] for r in rows]

    assert strip_runtime(texts[0]) == strip_runtime(texts[1])
