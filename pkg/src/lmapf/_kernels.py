"""Numba kernels for the planner hot loops.

Everything here operates on flat int32/float64 arrays so the per-step work
(BFS tables, space-time A*, PIBT assignment) runs at compiled speed. The
wrapping modules own all validation and object plumbing; kernels assume
well-formed inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.core import types
from numba.typed import Dict

UNREACHABLE = 1 << 30

# Packed heap tiebreak key layout: secondary cost (17 bits) | remaining
# steps (6) | clamped goal distance (18) | vertex (17). Remaining steps
# instead of t so larger t sorts first; goal distance next so equal-cost
# ties resolve toward progress now rather than drifting while the window
# has slack; vertex id last for determinism.
_FS_MAX = (1 << 17) - 1
_D_MAX = (1 << 18) - 1


@njit(cache=True, inline="always")
def _tie_key(fs, rem, d, v):
    dd = d if d < _D_MAX else _D_MAX
    return ((fs << 6 | rem) << 18 | dd) << 17 | v


def new_edge_dict() -> Dict:
    """Empty directed-traversal count dict keyed by (t * V + a) * V + b."""
    return Dict.empty(types.int64, types.int64)


@njit(cache=True)
def bfs_distances(indptr, indices, src, out):
    """Fill `out` with BFS hop counts from src; UNREACHABLE where disconnected."""
    out[:] = UNREACHABLE
    n = out.shape[0]
    queue = np.empty(n, np.int32)
    head = 0
    tail = 1
    queue[0] = src
    out[src] = 0
    while head < tail:
        u = queue[head]
        head += 1
        d = out[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if out[w] > d:
                out[w] = d
                queue[tail] = w
                tail += 1


@njit(cache=True, inline="always")
def _heap_push(hk1, hk2, hpay, m, k1, k2, pay):
    i = m
    hk1[i] = k1
    hk2[i] = k2
    hpay[i] = pay
    while i > 0:
        p = (i - 1) >> 1
        if hk1[i] < hk1[p] or (hk1[i] == hk1[p] and hk2[i] < hk2[p]):
            hk1[i], hk1[p] = hk1[p], hk1[i]
            hk2[i], hk2[p] = hk2[p], hk2[i]
            hpay[i], hpay[p] = hpay[p], hpay[i]
            i = p
        else:
            break
    return m + 1


@njit(cache=True, inline="always")
def _heap_pop(hk1, hk2, hpay, m):
    k1 = hk1[0]
    k2 = hk2[0]
    pay = hpay[0]
    m -= 1
    if m > 0:
        hk1[0] = hk1[m]
        hk2[0] = hk2[m]
        hpay[0] = hpay[m]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            s = i
            if left < m and (
                hk1[left] < hk1[s] or (hk1[left] == hk1[s] and hk2[left] < hk2[s])
            ):
                s = left
            if right < m and (
                hk1[right] < hk1[s] or (hk1[right] == hk1[s] and hk2[right] < hk2[s])
            ):
                s = right
            if s == i:
                break
            hk1[i], hk1[s] = hk1[s], hk1[i]
            hk2[i], hk2[s] = hk2[s], hk2[i]
            hpay[i], hpay[s] = hpay[s], hpay[i]
            i = s
    return m, k1, k2, pay


@njit(cache=True)
def index_apply_row(row, vcount, edges, delta):
    """Add (delta=+1) or remove (delta=-1) one stored path from the collision index."""
    w = row.shape[0] - 1
    V = vcount.shape[1]
    for t in range(w + 1):
        vcount[t, row[t]] += delta
    for t in range(w):
        a = row[t]
        b = row[t + 1]
        if a != b:
            key = (np.int64(t) * V + a) * V + b
            if key in edges:
                edges[key] += delta
            else:
                edges[key] = np.int64(delta)


@njit(cache=True)
def build_collision_index(rows, vcount, edges, skip):
    """(Re)build the index from all present rows except `skip` (-1 = none).

    Rows whose first entry is negative mark absent agents and are skipped.
    """
    vcount[:, :] = 0
    edges.clear()
    for i in range(rows.shape[0]):
        if i != skip and rows[i, 0] >= 0:
            index_apply_row(rows[i], vcount, edges, 1)


@njit(cache=True, inline="always")
def _chi(vcount, edges, V, t, v, u):
    """Collisions of moving v@t -> u@t+1 against the indexed paths."""
    c = np.int64(vcount[t + 1, u])
    if u != v:
        key = (np.int64(t) * V + u) * V + v
        if key in edges:
            c += edges[key]
    return c


@njit(cache=True)
def guidance_astar(
    indptr,
    indices,
    dist_g,
    start,
    w,
    alpha,
    vcount,
    edges,
    gp,
    gs,
    par,
    stamp,
    cstamp,
    epoch,
    path_out,
):
    """Exact space-time A* for one guidance path.

    States are (vertex, t) with t in 0..w; every step costs
    (1 + alpha if it collides else 1, collision count) and reaching t == w
    adds (dist to goal, 0). Lexicographic f = g + h with
    h = (max(w - t, dist), 0); ties broken by larger t, then smaller vertex,
    then push order. Returns the path's (primary, secondary) cost.
    """
    V = dist_g.shape[0]

    # Fast path: the canonical greedy descent (argmin dist, tie smaller id,
    # park at goal) is optimal whenever it is collision-free.
    v = start
    ok = True
    for t in range(w):
        best = v
        bd = dist_g[v]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if dist_g[u] < bd:
                bd = dist_g[u]
                best = u
        if _chi(vcount, edges, V, t, v, best) > 0:
            ok = False
            break
        path_out[t] = v
        v = best
    if ok:
        path_out[w] = v
        return float(w) + float(dist_g[v]), np.int64(0)

    ns = (w + 1) * V
    cap = 4096
    hk1 = np.empty(cap, np.float64)
    hk2 = np.empty(cap, np.int64)
    hpay = np.empty(cap, np.int32)
    m = 0

    gp[start] = 0.0
    gs[start] = 0
    par[start] = -1
    stamp[start] = epoch
    d0 = np.int64(dist_g[start])
    h0 = float(w if w > d0 else d0)
    k2 = _tie_key(np.int64(0), np.int64(w), d0, np.int64(start))
    m = _heap_push(hk1, hk2, hpay, m, h0, k2, start)

    while m > 0:
        m, fp, fk, s = _heap_pop(hk1, hk2, hpay, m)
        if cstamp[s] == epoch:
            continue
        cstamp[s] = epoch
        t = s // V
        v = s - t * V
        if t == w:
            cur = s
            for i in range(w, -1, -1):
                path_out[i] = cur % V
                cur = par[cur]
            return gp[s] + float(dist_g[v]), gs[s]
        bp = gp[s]
        bs = gs[s]
        tn = t + 1
        rem = w - tn
        for k in range(indptr[v], indptr[v + 1] + 1):
            u = indices[k] if k < indptr[v + 1] else v
            si = tn * V + u
            if cstamp[si] == epoch:
                continue
            c = _chi(vcount, edges, V, t, v, u)
            np_ = bp + 1.0 + (alpha if c > 0 else 0.0)
            ns_ = bs + c
            known = stamp[si] == epoch
            if known and (gp[si] < np_ or (gp[si] == np_ and gs[si] <= ns_)):
                continue
            gp[si] = np_
            gs[si] = ns_
            par[si] = s
            stamp[si] = epoch
            du = np.int64(dist_g[u])
            h = float(rem if rem > du else du)
            fs = ns_ if ns_ < _FS_MAX else _FS_MAX
            k2 = _tie_key(fs, np.int64(rem), du, np.int64(u))
            if m == cap:
                cap *= 2
                nk1 = np.empty(cap, np.float64)
                nk2 = np.empty(cap, np.int64)
                npay = np.empty(cap, np.int32)
                nk1[:m] = hk1
                nk2[:m] = hk2
                npay[:m] = hpay
                hk1 = nk1
                hk2 = nk2
                hpay = npay
            m = _heap_push(hk1, hk2, hpay, m, np_ + h, k2, si)
    # unreachable: waiting in place is always a legal completion
    return -1.0, np.int64(-1)


@njit(cache=True)
def reservation_astar(
    indptr,
    indices,
    dist_g,
    start,
    goal,
    w,
    vblocked,
    eblocked,
    g,
    par,
    stamp,
    cstamp,
    epoch,
    path_out,
):
    """Min-cost length-(w+1) walk around space-time reservations.

    A step costs 0 only while parked on the goal (source and target both the
    goal), else 1; h is the BFS distance to the goal. Returns the walk cost,
    or -1 when every walk is blocked.
    """
    V = dist_g.shape[0]
    cap = 4096
    hk1 = np.empty(cap, np.float64)
    hk2 = np.empty(cap, np.int64)
    hpay = np.empty(cap, np.int32)
    m = 0

    g[start] = 0
    par[start] = -1
    stamp[start] = epoch
    k2 = _tie_key(np.int64(0), np.int64(w), np.int64(dist_g[start]), np.int64(start))
    m = _heap_push(hk1, hk2, hpay, m, float(dist_g[start]), k2, start)

    while m > 0:
        m, f, fk, s = _heap_pop(hk1, hk2, hpay, m)
        if cstamp[s] == epoch:
            continue
        cstamp[s] = epoch
        t = s // V
        v = s - t * V
        if t == w:
            cur = s
            for i in range(w, -1, -1):
                path_out[i] = cur % V
                cur = par[cur]
            return g[s]
        base = g[s]
        tn = t + 1
        rem = w - tn
        for k in range(indptr[v], indptr[v + 1] + 1):
            u = indices[k] if k < indptr[v + 1] else v
            if vblocked[tn, u] != 0:
                continue
            if u != v:
                key = (np.int64(t) * V + u) * V + v
                if key in eblocked:
                    continue
            si = tn * V + u
            if cstamp[si] == epoch:
                continue
            c = 0 if (v == goal and u == goal) else 1
            ng = base + c
            if stamp[si] == epoch and g[si] <= ng:
                continue
            g[si] = ng
            par[si] = s
            stamp[si] = epoch
            du = np.int64(dist_g[u])
            k2 = _tie_key(np.int64(0), np.int64(rem), du, np.int64(u))
            if m == cap:
                cap *= 2
                nk1 = np.empty(cap, np.float64)
                nk2 = np.empty(cap, np.int64)
                npay = np.empty(cap, np.int32)
                nk1[:m] = hk1
                nk2[:m] = hk2
                npay[:m] = hpay
                hk1 = nk1
                hk2 = nk2
                hpay = npay
            m = _heap_push(hk1, hk2, hpay, m, float(ng + du), k2, si)
    return np.int64(-1)


@njit(cache=True)
def pibt_assign(
    indptr,
    indices,
    tables,
    goal_row,
    Q,
    order,
    guide_next,
    hindrance_on,
    eps,
    occ_now,
    occ_nxt,
    q_to,
    forced,
):
    """One PIBT pass: rank candidates and assign via priority inheritance.

    q_to / occ_nxt may arrive pre-seeded with forced assignments (their
    target cells flagged in `forced`); those agents are skipped. Candidate
    ranking is the lexicographic key (guidance mismatch, goal distance,
    hindrance, epsilon). Returns 0, or -1 when a displaced agent can only
    park on a cell a forced assignment already claimed, which makes the
    whole forced set unsatisfiable.
    """
    n = Q.shape[0]
    cand_v = np.empty((n, 5), np.int32)
    cand_f = np.empty((n, 5), np.int64)
    cand_d = np.empty((n, 5), np.int64)
    cand_h = np.empty((n, 5), np.int64)
    cand_e = np.empty((n, 5), np.float64)
    cand_n = np.zeros(n, np.int32)

    for i in range(n):
        if q_to[i] != -1:
            continue
        v0 = Q[i]
        cnt = 0
        for k in range(indptr[v0], indptr[v0 + 1] + 1):
            u = indices[k] if k < indptr[v0 + 1] else v0
            flag = np.int64(0)
            if guide_next[i] >= 0 and guide_next[i] != u:
                flag = 1
            hind = np.int64(0)
            if hindrance_on:
                for e in range(indptr[u], indptr[u + 1]):
                    nb = indices[e]
                    j = occ_now[nb]
                    if j >= 0 and j != i:
                        gr = goal_row[j]
                        if tables[gr, u] < tables[gr, nb]:
                            hind += 1
            cand_v[i, cnt] = u
            cand_f[i, cnt] = flag
            cand_d[i, cnt] = tables[goal_row[i], u]
            cand_h[i, cnt] = hind
            cand_e[i, cnt] = eps[i, cnt]
            cnt += 1
        cand_n[i] = cnt
        # insertion sort on (flag, dist, hindrance, eps)
        for a in range(1, cnt):
            vv = cand_v[i, a]
            ff = cand_f[i, a]
            dd = cand_d[i, a]
            hh = cand_h[i, a]
            ee = cand_e[i, a]
            b = a - 1
            while b >= 0:
                worse = False
                if cand_f[i, b] != ff:
                    worse = cand_f[i, b] > ff
                elif cand_d[i, b] != dd:
                    worse = cand_d[i, b] > dd
                elif cand_h[i, b] != hh:
                    worse = cand_h[i, b] > hh
                else:
                    worse = cand_e[i, b] > ee
                if not worse:
                    break
                cand_v[i, b + 1] = cand_v[i, b]
                cand_f[i, b + 1] = cand_f[i, b]
                cand_d[i, b + 1] = cand_d[i, b]
                cand_h[i, b + 1] = cand_h[i, b]
                cand_e[i, b + 1] = cand_e[i, b]
                b -= 1
            cand_v[i, b + 1] = vv
            cand_f[i, b + 1] = ff
            cand_d[i, b + 1] = dd
            cand_h[i, b + 1] = hh
            cand_e[i, b + 1] = ee

    # priority inheritance with backtracking, recursion as an explicit stack
    stack_agent = np.empty(n + 1, np.int32)
    stack_cur = np.empty(n + 1, np.int32)
    for idx in range(n):
        root = order[idx]
        if q_to[root] != -1:
            continue
        sp = 0
        stack_agent[0] = root
        stack_cur[0] = 0
        ret = -1
        while sp >= 0:
            if ret == 1:
                sp -= 1
                continue
            a = stack_agent[sp]
            cur = stack_cur[sp]
            ret = -1
            descend = False
            success = False
            while cur < cand_n[a]:
                u = cand_v[a, cur]
                cur += 1
                if occ_nxt[u] != -1:
                    continue
                j = occ_now[u]
                if j != -1 and q_to[j] == Q[a]:
                    continue
                q_to[a] = u
                occ_nxt[u] = a
                if j != -1 and j != a and q_to[j] == -1:
                    stack_cur[sp] = cur
                    sp += 1
                    stack_agent[sp] = j
                    stack_cur[sp] = 0
                    descend = True
                    break
                success = True
                break
            if descend:
                continue
            if success:
                ret = 1
                sp -= 1
                continue
            # backtrack: park in place. Overwriting another agent's claim is
            # sound only when that agent is a mid-recursion ancestor whose
            # claim the failure voids; a forced claim has no fallback.
            if forced[Q[a]] != 0:
                return -1
            q_to[a] = Q[a]
            occ_nxt[Q[a]] = a
            ret = 0
            sp -= 1

    return 0


class AStarWorkspace:
    """Reusable state arrays for the space-time searches.

    Stamp arrays mark which entries belong to the current call (epoch), so
    nothing needs clearing between calls.
    """

    def __init__(self) -> None:
        self._arrays: dict[int, tuple] = {}
        self._epoch = 0

    def lease(self, num_states: int):
        arrs = self._arrays.get(num_states)
        if arrs is None:
            arrs = (
                np.empty(num_states, np.float64),  # g primary
                np.empty(num_states, np.int64),  # g secondary / g integer
                np.empty(num_states, np.int32),  # parent
                np.zeros(num_states, np.int64),  # g stamp
                np.zeros(num_states, np.int64),  # closed stamp
            )
            self._arrays[num_states] = arrs
        self._epoch += 1
        return arrs, self._epoch
