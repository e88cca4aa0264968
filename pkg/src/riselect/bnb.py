"""Exact branch-and-bound core shared by the deterministic and master solvers.

Minimizes the pointwise maximum of a family of linear forms over the feasible
selections of an instance. With one form this is the plain deterministic
selection problem; with one form per adversary cut it solves the relaxed
min-max regret master problem exactly, without an external MIP engine.

Search design: depth-first, branching on the cheapest undecided item of the
most constrained set (include first). Node lower bound = max over forms of
(value of fixed items + per-set sum of the smallest remaining coefficients
honoring only already-forced exclusions). The bound is admissible because the
per-form relaxed minimum never exceeds the best completion, and a max of such
minima never exceeds the min over completions of the max. Selecting an item
forbids its conflict partners; a set whose available items drop below its
remaining quota prunes the node.

The search itself is compiled with numba; a wall-clock limit is enforced by a
timer thread flipping a stop flag the kernel polls every few thousand nodes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .model import INFEASIBLE, OPTIMAL, Instance, Selection, item_offsets

STATUS_DONE = 0
STATUS_EMPTY = 1
STATUS_STOPPED = 2

_HUGE = np.int64(2**62)


class SearchTimeout(Exception):
    """A time-limited search ran out of budget."""


@dataclass(frozen=True)
class LinearForm:
    """The linear function coeffs . x - offset over flat item positions."""

    coeffs: tuple[int, ...]
    offset: int

    def value_at(self, instance: Instance, x: Selection) -> int:
        offsets, _ = item_offsets(instance)
        total = -self.offset
        for ref in x.items():
            total += self.coeffs[offsets[ref.set_index] + ref.item_index]
        return total


def flatten_selection(instance: Instance, x: Selection) -> list[int]:
    """Flat item positions chosen by x, ascending."""
    offsets, _ = item_offsets(instance)
    return [offsets[i] + j for i, js in enumerate(x.chosen) for j in js]


def max_form_value(instance: Instance, forms: Sequence[LinearForm], x: Selection) -> int:
    return max(f.value_at(instance, x) for f in forms)


@njit(cache=True, nogil=True)
def _relax_row(A, stat, set_lo, set_hi, k, out_row, buf):  # pragma: no cover - jit
    """Per form, sum of the k smallest coefficients of available items in one
    set, written into out_row. Returns False when fewer than k are available."""
    nforms = A.shape[0]
    if k == 0:
        for f in range(nforms):
            out_row[f] = 0
        return True
    cnt = 0
    for e in range(set_lo, set_hi):
        if stat[e] == 0:
            cnt += 1
    if cnt < k:
        return False
    for f in range(nforms):
        filled = 0
        for e in range(set_lo, set_hi):
            if stat[e] != 0:
                continue
            v = A[f, e]
            if filled < k:
                pos = filled
                while pos > 0 and buf[pos - 1] > v:
                    buf[pos] = buf[pos - 1]
                    pos -= 1
                buf[pos] = v
                filled += 1
            elif v < buf[k - 1]:
                pos = k - 1
                while pos > 0 and buf[pos - 1] > v:
                    buf[pos] = buf[pos - 1]
                    pos -= 1
                buf[pos] = v
        total = 0
        for q in range(k):
            total += buf[q]
        out_row[f] = total
    return True


@njit(cache=True, nogil=True)
def _search(  # pragma: no cover - jit
    A,
    b,
    set_start,
    set_end,
    set_of,
    adj_ptr,
    adj_dat,
    quota,
    branch_key,
    inc_mask,
    has_inc,
    prune_above,
    has_prune,
    stop_flag,
    best_mask,
):
    """Iterative depth-first search. Returns (status, best_value, has_best,
    node_count); the best selection mask is written into best_mask."""
    nforms, n = A.shape
    m = quota.shape[0]

    stat = np.zeros(n, dtype=np.int8)
    need = quota.copy()
    avail = np.empty(m, dtype=np.int64)
    for i in range(m):
        avail[i] = set_end[i] - set_start[i]
    unmet = 0
    for i in range(m):
        if need[i] > 0:
            unmet += 1
    fixed = np.zeros(nforms, dtype=np.int64)
    relax = np.zeros((m, nforms), dtype=np.int64)
    buf = np.empty(n + 1, dtype=np.int64)

    for i in range(m):
        if not _relax_row(A, stat, set_start[i], set_end[i], need[i], relax[i], buf):
            return (STATUS_EMPTY, 0, False, 0)

    best_val = np.int64(0)
    has_best = False
    if has_inc:
        val = np.int64(0)
        for f in range(nforms):
            acc = -b[f]
            for e in range(n):
                if inc_mask[e] == 1:
                    acc += A[f, e]
            if f == 0 or acc > val:
                val = acc
        best_val = val
        has_best = True
        for e in range(n):
            best_mask[e] = inc_mask[e]

    # explicit DFS stack: item, phase (0 include next, 1 exclude next, 2 pop),
    # and the trail mark of the currently applied branch
    frame_item = np.empty(n + 2, dtype=np.int64)
    frame_phase = np.empty(n + 2, dtype=np.int8)
    frame_mark = np.empty(n + 2, dtype=np.int64)
    cap_trail = (n + 2) * (n + m + 8)
    tr_kind = np.empty(cap_trail, dtype=np.int8)
    tr_val = np.empty(cap_trail, dtype=np.int64)
    tr_top = 0
    touched = np.empty(m, dtype=np.int64)

    # compute root bound
    bound = np.int64(-_HUGE)
    for f in range(nforms):
        acc = fixed[f] - b[f]
        for i in range(m):
            acc += relax[i, f]
        if acc > bound:
            bound = acc

    cap = _HUGE
    if has_best:
        cap = best_val
    if has_prune and prune_above + 1 < cap:
        cap = prune_above + 1

    if bound >= cap:
        return (STATUS_DONE, best_val, has_best, 1)
    if unmet == 0:
        for e in range(n):
            best_mask[e] = 1 if stat[e] == 1 else 0
        return (STATUS_DONE, bound, True, 1)

    # choose branch item of the most constrained unmet set
    bs = -1
    bslack = _HUGE
    for i in range(m):
        if need[i] > 0:
            slack = avail[i] - need[i]
            if slack < bslack:
                bslack = slack
                bs = i
    be = -1
    bkey = _HUGE
    for e in range(set_start[bs], set_end[bs]):
        if stat[e] == 0 and branch_key[e] < bkey:
            bkey = branch_key[e]
            be = e
    frame_item[0] = be
    frame_phase[0] = 0
    frame_mark[0] = 0
    sp = 1
    nodes = 1

    while sp > 0:
        f_idx = sp - 1
        phase = frame_phase[f_idx]
        if phase == 2:
            # undo the exclude branch and pop
            mark = frame_mark[f_idx]
            ntouch = 0
            pos = tr_top - 1
            while pos >= mark:
                kind = tr_kind[pos]
                v = tr_val[pos]
                if kind == 0:
                    stat[v] = 0
                elif kind == 1:
                    need[v] += 1
                    avail[v] += 1
                elif kind == 2:
                    avail[v] += 1
                elif kind == 3:
                    unmet += 1
                elif kind == 4:
                    for ff in range(nforms):
                        fixed[ff] -= A[ff, v]
                else:
                    touched[ntouch] = v
                    ntouch += 1
                pos -= 1
            tr_top = mark
            for t in range(ntouch):
                i = touched[t]
                _relax_row(A, stat, set_start[i], set_end[i], need[i], relax[i], buf)
            sp -= 1
            continue

        if phase == 1:
            # undo the include branch first
            mark = frame_mark[f_idx]
            ntouch = 0
            pos = tr_top - 1
            while pos >= mark:
                kind = tr_kind[pos]
                v = tr_val[pos]
                if kind == 0:
                    stat[v] = 0
                elif kind == 1:
                    need[v] += 1
                    avail[v] += 1
                elif kind == 2:
                    avail[v] += 1
                elif kind == 3:
                    unmet += 1
                elif kind == 4:
                    for ff in range(nforms):
                        fixed[ff] -= A[ff, v]
                else:
                    touched[ntouch] = v
                    ntouch += 1
                pos -= 1
            tr_top = mark
            for t in range(ntouch):
                i = touched[t]
                _relax_row(A, stat, set_start[i], set_end[i], need[i], relax[i], buf)

        include = phase == 0
        frame_phase[f_idx] = phase + 1
        frame_mark[f_idx] = tr_top
        e = frame_item[f_idx]
        s = set_of[e]

        nodes += 1
        if nodes % 1024 == 0 and stop_flag[0] != 0:
            return (STATUS_STOPPED, best_val, has_best, nodes)

        # apply the branch, collecting touched sets for relax refresh
        ok = True
        ntouch = 0
        touched[ntouch] = s
        ntouch += 1
        if include:
            stat[e] = 1
            tr_kind[tr_top] = 0
            tr_val[tr_top] = e
            tr_top += 1
            need[s] -= 1
            avail[s] -= 1
            tr_kind[tr_top] = 1
            tr_val[tr_top] = s
            tr_top += 1
            if need[s] == 0:
                unmet -= 1
                tr_kind[tr_top] = 3
                tr_val[tr_top] = 0
                tr_top += 1
            for ff in range(nforms):
                fixed[ff] += A[ff, e]
            tr_kind[tr_top] = 4
            tr_val[tr_top] = e
            tr_top += 1
            for ap in range(adj_ptr[e], adj_ptr[e + 1]):
                p = adj_dat[ap]
                if stat[p] == 0:
                    stat[p] = -1
                    tr_kind[tr_top] = 0
                    tr_val[tr_top] = p
                    tr_top += 1
                    ps = set_of[p]
                    avail[ps] -= 1
                    tr_kind[tr_top] = 2
                    tr_val[tr_top] = ps
                    tr_top += 1
                    present = False
                    for t in range(ntouch):
                        if touched[t] == ps:
                            present = True
                            break
                    if not present:
                        touched[ntouch] = ps
                        ntouch += 1
        else:
            stat[e] = -1
            tr_kind[tr_top] = 0
            tr_val[tr_top] = e
            tr_top += 1
            avail[s] -= 1
            tr_kind[tr_top] = 2
            tr_val[tr_top] = s
            tr_top += 1

        # refresh relax rows of touched sets (ascending for determinism)
        for a_idx in range(ntouch):
            for b_idx in range(a_idx + 1, ntouch):
                if touched[b_idx] < touched[a_idx]:
                    tmp = touched[a_idx]
                    touched[a_idx] = touched[b_idx]
                    touched[b_idx] = tmp
        for t in range(ntouch):
            i = touched[t]
            tr_kind[tr_top] = 5
            tr_val[tr_top] = i
            tr_top += 1
            if not _relax_row(A, stat, set_start[i], set_end[i], need[i], relax[i], buf):
                ok = False
                break

        if not ok:
            continue  # the pending-phase undo cleans up

        bound = np.int64(-_HUGE)
        for ff in range(nforms):
            acc = fixed[ff] - b[ff]
            for i in range(m):
                acc += relax[i, ff]
            if acc > bound:
                bound = acc
        cap = _HUGE
        if has_best:
            cap = best_val
        if has_prune and prune_above + 1 < cap:
            cap = prune_above + 1
        if bound >= cap:
            continue
        if unmet == 0:
            best_val = bound
            has_best = True
            for ee in range(n):
                best_mask[ee] = 1 if stat[ee] == 1 else 0
            continue

        bs = -1
        bslack = _HUGE
        for i in range(m):
            if need[i] > 0:
                slack = avail[i] - need[i]
                if slack < bslack:
                    bslack = slack
                    bs = i
        be = -1
        bkey = _HUGE
        for ee in range(set_start[bs], set_end[bs]):
            if stat[ee] == 0 and branch_key[ee] < bkey:
                bkey = branch_key[ee]
                be = ee
        frame_item[sp] = be
        frame_phase[sp] = 0
        frame_mark[sp] = tr_top
        sp += 1

    return (STATUS_DONE, best_val, has_best, nodes)


def minimize_max_forms(
    instance: Instance,
    forms: Sequence[LinearForm],
    *,
    incumbent: Optional[Selection] = None,
    prune_above: Optional[int] = None,
    time_limit: Optional[float] = None,
) -> tuple[str, Optional[Selection], Optional[int]]:
    """Exact minimizer of max over forms, returned as (status, selection, value).

    ``incumbent`` must be feasible and seeds the upper bound; it is returned
    unchanged when nothing strictly better exists. ``prune_above`` discards
    every solution of value above it (caller promises the optimum does not
    exceed it). Raises SearchTimeout when ``time_limit`` seconds elapse.
    """
    if not forms:
        raise ValueError("at least one linear form is required")
    offsets, n = item_offsets(instance)
    m = instance.m
    A = np.array([f.coeffs for f in forms], dtype=np.int64)
    if A.shape != (len(forms), n):
        raise ValueError("form coefficient length does not match the instance")
    b = np.array([f.offset for f in forms], dtype=np.int64)

    set_start = np.array(offsets, dtype=np.int64)
    set_end = np.array(
        [offsets[i] + instance.sets[i].size for i in range(m)], dtype=np.int64
    )
    set_of = np.empty(n, dtype=np.int64)
    for i in range(m):
        set_of[set_start[i] : set_end[i]] = i
    adj_lists: list[list[int]] = [[] for _ in range(n)]
    for pair in instance.forbidden:
        u = offsets[pair.a.set_index] + pair.a.item_index
        v = offsets[pair.b.set_index] + pair.b.item_index
        adj_lists[u].append(v)
        adj_lists[v].append(u)
    adj_ptr = np.zeros(n + 1, dtype=np.int64)
    for e in range(n):
        adj_ptr[e + 1] = adj_ptr[e] + len(adj_lists[e])
    adj_dat = np.array(
        [p for lst in adj_lists for p in sorted(lst)] or [0], dtype=np.int64
    )
    quota = np.array([s.quota for s in instance.sets], dtype=np.int64)
    # single form: branch on the cheapest item. Several forms: branch on the
    # item the forms disagree on most, which splits flat max-of-forms bounds.
    if len(forms) == 1:
        branch_key = A[0].copy()
    else:
        branch_key = -(A.max(axis=0) - A.min(axis=0))

    inc_mask = np.zeros(n, dtype=np.int8)
    if incumbent is not None:
        inc_mask[flatten_selection(instance, incumbent)] = 1
    stop_flag = np.zeros(1, dtype=np.int64)
    best_mask = np.zeros(n, dtype=np.int8)

    timer = None
    if time_limit is not None:
        timer = threading.Timer(time_limit, lambda: stop_flag.__setitem__(0, 1))
        timer.daemon = True
        timer.start()
    try:
        status, value, has_best, _nodes = _search(
            A,
            b,
            set_start,
            set_end,
            set_of,
            adj_ptr,
            adj_dat,
            quota,
            branch_key,
            inc_mask,
            incumbent is not None,
            np.int64(prune_above if prune_above is not None else 0),
            prune_above is not None,
            stop_flag,
            best_mask,
        )
    finally:
        if timer is not None:
            timer.cancel()

    if status == STATUS_STOPPED:
        raise SearchTimeout()
    if not has_best:
        return (INFEASIBLE, None, None)
    per_set = [
        [e - offsets[i] for e in range(set_start[i], set_end[i]) if best_mask[e] == 1]
        for i in range(m)
    ]
    return (OPTIMAL, Selection.of(per_set), int(value))
