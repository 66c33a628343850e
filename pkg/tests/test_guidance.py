import numpy as np
import pytest

from lmapf import (
    DistanceOracle,
    GuidancePaths,
    WarmStart,
    best_guidance_path,
    guidance_path_cost,
    refine_guidance,
    shift_guidance,
    transition_collisions,
    warm_start,
)

from .conftest import corridor, open_grid, oracle_guidance_best, random_grid


def row_is_legal(grid, row, start=None):
    if start is not None and row[0] != start:
        return False
    for a, b in zip(row, row[1:]):
        if a != b and b not in grid.neighbors(a):
            return False
    return True


# ---------------------------------------------------------------------------
# transition_collisions


def test_collisions_empty_phi():
    phi = GuidancePaths.absent(3, 2)
    assert transition_collisions(phi, 0, 0, 0, 1) == 0


def test_collisions_vertex_occupancy():
    phi = GuidancePaths(np.array([[0, 0, 0], [1, 1, 1]], dtype=np.int32))
    assert transition_collisions(phi, 0, 0, 0, 1) == 1
    assert transition_collisions(phi, 0, 1, 0, 1) == 1
    assert transition_collisions(phi, 1, 0, 1, 0) == 1  # vs row 0 parked at 0


def test_collisions_two_path_enumeration_on_edge():
    # 1x2 corridor: enumerate every (our transition, other row) pair and
    # check vertex/swap mutual exclusivity per row
    moves = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for frm, to in moves:
        for other in moves:
            phi = GuidancePaths(np.array([[-1, -1], list(other)], dtype=np.int32))
            vertex = other[1] == to
            swap = frm != to and other[0] == to and other[1] == frm
            assert not (vertex and swap)  # mutually exclusive per transition
            assert transition_collisions(phi, 0, 0, frm, to) == int(vertex) + int(swap)


def test_collisions_skips_absent_rows():
    phi = GuidancePaths(np.array([[0, 0, 0], [-1, -1, -1]], dtype=np.int32))
    assert transition_collisions(phi, 2, 0, 1, 0) == 1  # row 0 only


def test_collisions_step_out_of_range():
    phi = GuidancePaths.absent(1, 2)
    with pytest.raises(ValueError):
        transition_collisions(phi, 0, 2, 0, 1)


# ---------------------------------------------------------------------------
# best_guidance_path: frozen corridor cases (values from the enumeration
# oracle) and random equivalence


def corridor_ctx():
    g = corridor(3)
    return g, DistanceOracle(g)


def test_corridor_empty_phi_shortest():
    g, o = corridor_ctx()
    phi = GuidancePaths.absent(1, 2)
    path = best_guidance_path(g, o, 0, 0, 2, phi, 5.0, 2)
    assert path == [0, 1, 2]
    assert guidance_path_cost(o, 2, path, phi, 0, 5.0) == (2.0, 0)


def test_corridor_blocked_prefers_wait_when_alpha_high():
    g, o = corridor_ctx()
    phi = GuidancePaths(np.array([[-1, -1, -1], [2, 1, 2]], dtype=np.int32))
    path = best_guidance_path(g, o, 0, 0, 2, phi, 5.0, 2)
    cost = guidance_path_cost(o, 2, path, phi, 0, 5.0)
    assert cost == (3.0, 0)  # frozen from enumeration oracle
    assert path == [0, 0, 1]


def test_corridor_blocked_alpha_zero_pushes_through():
    g, o = corridor_ctx()
    phi = GuidancePaths(np.array([[-1, -1, -1], [2, 1, 2]], dtype=np.int32))
    path = best_guidance_path(g, o, 0, 0, 2, phi, 0.0, 2)
    cost = guidance_path_cost(o, 2, path, phi, 0, 0.0)
    assert cost == (2.0, 2)  # frozen from enumeration oracle
    assert path == [0, 1, 2]


def test_invalid_parameters():
    g, o = corridor_ctx()
    phi = GuidancePaths.absent(1, 2)
    with pytest.raises(ValueError):
        best_guidance_path(g, o, 0, 0, 2, phi, -1.0, 2)
    with pytest.raises(ValueError):
        best_guidance_path(g, o, 0, 0, 2, phi, 1.0, 0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 10.0])
def test_exactness_against_enumeration(alpha):
    rng = np.random.default_rng(int(alpha * 7 + 1))
    for _ in range(60):
        g = random_grid(rng, max_side=4, min_passable=3)
        o = DistanceOracle(g)
        w = int(rng.integers(1, 5))
        n_other = int(rng.integers(0, 3))
        rows: list = [None]
        arr = np.full((1 + n_other, w + 1), -1, dtype=np.int32)
        for j in range(n_other):
            v = int(rng.integers(0, g.num_vertices))
            row = [v]
            for _ in range(w):
                nb = [v] + g.neighbors(v)
                v = int(nb[rng.integers(0, len(nb))])
                row.append(v)
            rows.append(row)
            arr[1 + j] = row
        phi = GuidancePaths(arr)
        start = int(rng.integers(0, g.num_vertices))
        goal = int(rng.integers(0, g.num_vertices))
        path = best_guidance_path(g, o, 0, start, goal, phi, alpha, w)
        assert row_is_legal(g, path, start)
        got = guidance_path_cost(o, goal, path, phi, 0, alpha)
        want = oracle_guidance_best(g, o, start, goal, rows, 0, alpha, w)
        assert (got.primary, got.secondary) == want


# ---------------------------------------------------------------------------
# refine_guidance


def test_refine_zero_rounds_returns_input_unchanged():
    g = open_grid(2, 2)
    o = DistanceOracle(g)
    phi = GuidancePaths.all_wait((0, 3), 3)
    out = refine_guidance(g, o, (0, 3), (3, 0), phi, 5.0, 3, 0)
    assert out is phi


def test_refine_solo_agent_equals_solo_optimum():
    g = corridor(4)
    o = DistanceOracle(g)
    phi = GuidancePaths.all_wait((0,), 3)
    out = refine_guidance(g, o, (0,), (3,), phi, 5.0, 3, 1)
    assert out.row(0) == [0, 1, 2, 3]


def test_refine_head_on_corridor_reaches_zero_collisions():
    g = corridor(4)
    o = DistanceOracle(g)
    Q = (0, 3)
    goals = (3, 0)
    phi = refine_guidance(g, o, Q, goals, GuidancePaths.all_wait(Q, 4), 50.0, 4, 2)
    chi_sum = sum(
        transition_collisions(phi, i, t, int(phi.verts[i, t]), int(phi.verts[i, t + 1]))
        for i in range(2)
        for t in range(4)
    )
    assert chi_sum == 0
    for i, q in enumerate(Q):
        assert row_is_legal(g, phi.row(i), q)


def test_refine_never_worsens_own_row_against_frozen_context():
    rng = np.random.default_rng(5)
    for _ in range(40):
        g = random_grid(rng, max_side=5, min_passable=4)
        o = DistanceOracle(g)
        n = int(rng.integers(2, min(4, g.num_vertices) + 1))
        Q = tuple(int(v) for v in rng.choice(g.num_vertices, size=n, replace=False))
        goals = tuple(int(v) for v in rng.integers(0, g.num_vertices, size=n))
        w = 3
        phi = GuidancePaths.all_wait(Q, w)
        for i in range(n):
            old = guidance_path_cost(o, goals[i], phi.row(i), phi, i, 2.0)
            new_row = best_guidance_path(g, o, i, Q[i], goals[i], phi, 2.0, w)
            new = guidance_path_cost(o, goals[i], new_row, phi, i, 2.0)
            assert (new.primary, new.secondary) <= (old.primary, old.secondary)
            phi.set_row(i, new_row)


def test_refined_rows_always_legal_walks():
    rng = np.random.default_rng(6)
    for _ in range(20):
        g = random_grid(rng, max_side=6, min_passable=5)
        o = DistanceOracle(g)
        n = int(rng.integers(2, min(5, g.num_vertices) + 1))
        Q = tuple(int(v) for v in rng.choice(g.num_vertices, size=n, replace=False))
        goals = tuple(int(v) for v in rng.integers(0, g.num_vertices, size=n))
        phi = refine_guidance(g, o, Q, goals, GuidancePaths.all_wait(Q, 4), 5.0, 4, 2)
        for i in range(n):
            assert row_is_legal(g, phi.row(i), Q[i])


# ---------------------------------------------------------------------------
# shift_guidance / warm_start


def test_shift_drops_head_and_pads_tail():
    phi = GuidancePaths(np.array([[0, 1, 2]], dtype=np.int32))
    assert shift_guidance(phi).row(0) == [1, 2, 2]


def test_shift_all_wait_fixed_point():
    phi = GuidancePaths(np.array([[4, 4, 4]], dtype=np.int32))
    assert shift_guidance(phi).row(0) == [4, 4, 4]


def test_shift_w_times_parks_at_terminal():
    phi = GuidancePaths(np.array([[0, 1, 2, 3]], dtype=np.int32))
    for _ in range(3):
        phi = shift_guidance(phi)
    assert phi.row(0) == [3, 3, 3, 3]


def test_warm_start_empty():
    phi = warm_start(WarmStart.EMPTY, None, None, (2, 7), 3, 2)
    assert phi.row(0) == [2, 2, 2, 2]
    assert phi.row(1) == [7, 7, 7, 7]


def test_warm_start_phi_shifts_and_resets_mismatches():
    prev = GuidancePaths(np.array([[0, 1, 2], [5, 5, 5]], dtype=np.int32))
    phi = warm_start(WarmStart.PHI, prev, None, (1, 6), 2, 2)
    assert phi.row(0) == [1, 2, 2]  # shifted row still starts at the agent
    assert phi.row(1) == [6, 6, 6]  # diverged row reset to all-wait


def test_warm_start_pi_suffix_and_pad():
    # plan rows (a, b, c, d) with w_pi = w_phi = 3 -> (b, c, d, d)
    plan = [(0, 9), (1, 9), (2, 9), (3, 9)]
    phi = warm_start(WarmStart.PI, None, plan, (1, 9), 3, 3)
    assert phi.row(0) == [1, 2, 3, 3]
    assert phi.row(1) == [9, 9, 9, 9]


def test_warm_start_pi_short_window_pads_terminal():
    # w_pi = 2 < w_phi = 4, plan row (a, b, c) -> (b, c, c, c, c)
    plan = [(0,), (1,), (2,)]
    phi = warm_start(WarmStart.PI, None, plan, (1,), 4, 2)
    assert phi.row(0) == [1, 2, 2, 2, 2]


def test_warm_start_pi_prefix_matches_plan_exactly():
    rng = np.random.default_rng(8)
    g = open_grid(4, 4)
    from .conftest import joint_moves

    Q = (0, 5, 10)
    plan = [Q]
    for _ in range(4):
        moves = joint_moves(g, plan[-1])
        plan.append(moves[int(rng.integers(0, len(moves)))])
    phi = warm_start(WarmStart.PI, None, plan, plan[1], 6, 4)
    for i in range(3):
        row = phi.row(i)
        for t in range(1, 5):
            assert row[t - 1] == plan[t][i]


def test_warm_start_missing_artifacts_raise():
    with pytest.raises(ValueError):
        warm_start(WarmStart.PHI, None, None, (0,), 2, 2)
    with pytest.raises(ValueError):
        warm_start(WarmStart.PI, None, None, (0,), 2, 2)


def test_warm_start_pi_mismatched_position_raises():
    plan = [(0,), (1,)]
    with pytest.raises(ValueError):
        warm_start(WarmStart.PI, None, plan, (5,), 2, 2)
