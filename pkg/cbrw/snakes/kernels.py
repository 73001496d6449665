"""
Compiled depth-first traversal of snakes.

Trees are never stored: a vertex is a (position, ancestor-visited flag) pair
on an explicit stack, and its children are drawn when it is popped. Children
are pushed right-to-left so the leftmost child is explored first, which fixes
the depth-first order used for first and last visits.

Kernels take arrays and scalars only, seed numba's generator on entry and
release the GIL, so a batch is a pure function of its inputs and seed.

Per-sample status codes: DONE, FIRST (aborted at the first visit), SIZE_CAP,
SPINE_CAP.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DONE = 0
FIRST = 1
SIZE_CAP = 2
SPINE_CAP = 3

_INITIAL_STACK = 64

# tally slots
_COUNT = 0
_FIRST = 1
_LAST = 2
_SIZE = 3


@njit(cache=True, nogil=True)
def _draw(prob, alias):
    n = prob.shape[0]
    u = np.random.random() * n
    column = int(u)
    if column >= n:
        column = n - 1
    if u - column < prob[column]:
        return column
    return alias[column]


@njit(cache=True, nogil=True)
def _atom(pos, lo, shape, table):
    flat = 0
    for j in range(pos.shape[0]):
        c = pos[j] - lo[j]
        if c < 0 or c >= shape[j]:
            return -1
        flat = flat * shape[j] + c
    return table[flat] - 1


@njit(cache=True, nogil=True)
def _norm2(pos, metric):
    d = pos.shape[0]
    total = 0.0
    for i in range(d):
        for j in range(d):
            total += pos[i] * metric[i, j] * pos[j]
    return total


@njit(cache=True, nogil=True)
def _record(pos, flag, lo, shape, table, tally, visits, entering):
    idx = _atom(pos, lo, shape, table)
    if idx >= 0:
        tally[_COUNT] += 1
        visits[idx] += 1
        if tally[_FIRST] < 0:
            tally[_FIRST] = idx
        tally[_LAST] = idx
        if flag == 0:
            entering[idx] += 1
    return idx


@njit(cache=True, nogil=True)
def _grow(
    root, root_prob, root_alias, child_prob, child_alias,
    steps, step_prob, step_alias,
    lo, shape, table, metric, prune2,
    skip_root, root_flag, stop_first, max_size,
    tally, visits, entering,
):
    """Depth-first traversal of one tree rooted at `root`; returns a status code."""
    d = root.shape[0]
    stack = np.empty((_INITIAL_STACK, d), np.int64)
    flags = np.empty(_INITIAL_STACK, np.uint8)
    here = np.empty(d, np.int64)
    for j in range(d):
        stack[0, j] = root[j]
    flags[0] = root_flag
    top = 1
    at_root = True

    while top > 0:
        top -= 1
        for j in range(d):
            here[j] = stack[top, j]
        flag = flags[top]
        if at_root:
            prob = root_prob
            alias = root_alias
            counted = not skip_root
        else:
            prob = child_prob
            alias = child_alias
            counted = True
        at_root = False

        if counted:
            tally[_SIZE] += 1
            if tally[_SIZE] > max_size:
                return SIZE_CAP
            if _record(here, flag, lo, shape, table, tally, visits, entering) >= 0:
                if stop_first:
                    return FIRST
                flag = 1
        if prune2 > 0.0 and _norm2(here, metric) > prune2:
            continue

        n = _draw(prob, alias)
        if n == 0:
            continue
        if top + n > stack.shape[0]:
            capacity = max(2 * stack.shape[0], top + n)
            bigger = np.empty((capacity, d), np.int64)
            bigger[:top] = stack[:top]
            stack = bigger
            more = np.empty(capacity, np.uint8)
            more[:top] = flags[:top]
            flags = more
        for c in range(n):
            k = _draw(step_prob, step_alias)
            slot = top + n - 1 - c
            for j in range(d):
                stack[slot, j] = here[j] + steps[k, j]
            flags[slot] = flag
        top += n
    return DONE


@njit(cache=True, nogil=True)
def finite_batch(
    seed, n, start,
    root_prob, root_alias, child_prob, child_alias,
    steps, step_prob, step_alias,
    lo, shape, table, n_atoms, metric, prune2,
    skip_root, stop_first, max_size, record,
):
    """n independent finite snakes from `start`."""
    np.random.seed(seed)
    status = np.zeros(n, np.int8)
    count = np.zeros(n, np.int64)
    first = np.empty(n, np.int64)
    last = np.empty(n, np.int64)
    size = np.zeros(n, np.int64)
    rows = n if record else 0
    entering_rows = np.zeros((rows, n_atoms), np.int64)
    visit_rows = np.zeros((rows, n_atoms), np.int64)
    tally = np.empty(4, np.int64)
    visits = np.empty(n_atoms, np.int64)
    entering = np.empty(n_atoms, np.int64)

    for s in range(n):
        tally[_COUNT] = 0
        tally[_FIRST] = -1
        tally[_LAST] = -1
        tally[_SIZE] = 0
        visits[:] = 0
        entering[:] = 0
        status[s] = _grow(
            start, root_prob, root_alias, child_prob, child_alias,
            steps, step_prob, step_alias,
            lo, shape, table, metric, prune2,
            skip_root, 0, stop_first, max_size,
            tally, visits, entering,
        )
        count[s] = tally[_COUNT]
        first[s] = tally[_FIRST]
        last[s] = tally[_LAST]
        size[s] = tally[_SIZE]
        if record:
            entering_rows[s] = entering
            visit_rows[s] = visits
    return status, count, first, last, size, entering_rows, visit_rows


@njit(cache=True, nogil=True)
def infinite_batch(
    seed, n, start, spine_sign,
    root_prob, root_alias, bush_prob, bush_alias, child_prob, child_alias,
    steps, step_prob, step_alias,
    lo, shape, table, n_atoms, metric, far2, prune2,
    ignore_root_bush, ignore_spine, stop_first, max_size, max_spine, record,
):
    """n independent spine-and-bush snakes from `start`.

    The spine steps by spine_sign * theta; bush edges step by theta. Vertex i
    of the spine is followed in depth-first order by its bush and then by
    spine vertex i + 1. The walk stops once the spine leaves the far radius.
    """
    np.random.seed(seed)
    d = start.shape[0]
    status = np.zeros(n, np.int8)
    count = np.zeros(n, np.int64)
    first = np.empty(n, np.int64)
    last = np.empty(n, np.int64)
    size = np.zeros(n, np.int64)
    spine = np.zeros(n, np.int64)
    rows = n if record else 0
    entering_rows = np.zeros((rows, n_atoms), np.int64)
    visit_rows = np.zeros((rows, n_atoms), np.int64)
    tally = np.empty(4, np.int64)
    visits = np.empty(n_atoms, np.int64)
    entering = np.empty(n_atoms, np.int64)
    pos = np.empty(d, np.int64)

    for s in range(n):
        tally[_COUNT] = 0
        tally[_FIRST] = -1
        tally[_LAST] = -1
        tally[_SIZE] = 0
        visits[:] = 0
        entering[:] = 0
        for j in range(d):
            pos[j] = start[j]
        spine_flag = 0
        state = DONE
        i = 0
        while True:
            if _norm2(pos, metric) > far2:
                break
            if i >= max_spine:
                state = SPINE_CAP
                break
            if not (i == 0 and ignore_root_bush):
                if not ignore_spine:
                    tally[_SIZE] += 1
                    if tally[_SIZE] > max_size:
                        state = SIZE_CAP
                        break
                    if _record(pos, spine_flag, lo, shape, table, tally, visits, entering) >= 0:
                        if stop_first:
                            state = FIRST
                            break
                        spine_flag = 1
                if i == 0:
                    state = _grow(
                        pos, root_prob, root_alias, child_prob, child_alias,
                        steps, step_prob, step_alias,
                        lo, shape, table, metric, prune2,
                        True, spine_flag, stop_first, max_size,
                        tally, visits, entering,
                    )
                else:
                    state = _grow(
                        pos, bush_prob, bush_alias, child_prob, child_alias,
                        steps, step_prob, step_alias,
                        lo, shape, table, metric, prune2,
                        True, spine_flag, stop_first, max_size,
                        tally, visits, entering,
                    )
                if state != DONE:
                    break
            k = _draw(step_prob, step_alias)
            for j in range(d):
                pos[j] += spine_sign * steps[k, j]
            i += 1
        status[s] = state
        count[s] = tally[_COUNT]
        first[s] = tally[_FIRST]
        last[s] = tally[_LAST]
        size[s] = tally[_SIZE]
        spine[s] = i
        if record:
            entering_rows[s] = entering
            visit_rows[s] = visits
    return status, count, first, last, size, spine, entering_rows, visit_rows
