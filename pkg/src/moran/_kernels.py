"""Numba kernels for the Moran step rule.

State layout shared by every kernel: ``order`` is a permutation of the vertices
whose first ``m`` entries are the mutants and ``pos`` is its inverse, so a
vertex ``v`` is a mutant iff ``pos[v] < m``. Flipping a vertex swaps it across
the boundary in O(1).

Every step consumes exactly two ``random()`` draws (reproducer, then
neighbour), lazy steps and absorbing states included. The Python-level
``step`` and the trajectory kernel therefore consume identical streams.
"""

import numpy as np
from numba import njit

FIXATION = 0
EXTINCTION = 1
TRUNCATED = 2


@njit(cache=True, inline="always")
def _pick_reproducer(order, m, n, r, gen):
    rm = r * m
    u = gen.random() * (rm + (n - m))
    if u < rm:
        i = int(u / r)
        if i >= m:
            i = m - 1
    else:
        i = m + int(u - rm)
        if i >= n:
            i = n - 1
    return order[i]


@njit(cache=True, inline="always")
def _pick_neighbour(indptr, indices, x, gen):
    lo = indptr[x]
    d = indptr[x + 1] - lo
    j = int(gen.random() * d)
    if j >= d:
        j = d - 1
    return indices[lo + j]


@njit(cache=True, inline="always")
def _add(order, pos, m, v):
    p = pos[v]
    w = order[m]
    order[p] = w
    pos[w] = p
    order[m] = v
    pos[v] = m
    return m + 1


@njit(cache=True, inline="always")
def _remove(order, pos, m, v):
    p = pos[v]
    last = order[m - 1]
    order[p] = last
    pos[last] = p
    order[m - 1] = v
    pos[v] = m - 1
    return m - 1


@njit(cache=True)
def step_state(indptr, indices, r, order, pos, m, gen):
    """One Moran step in place; returns the new mutant count."""
    n = order.shape[0]
    x = _pick_reproducer(order, m, n, r, gen)
    y = _pick_neighbour(indptr, indices, x, gen)
    x_mut = pos[x] < m
    y_mut = pos[y] < m
    if x_mut and not y_mut:
        m = _add(order, pos, m, y)
    elif y_mut and not x_mut:
        m = _remove(order, pos, m, y)
    return m


@njit(cache=True, nogil=True)
def run_from(indptr, indices, r, start, max_steps, gen):
    """Run from the single mutant ``start`` until absorption or ``max_steps``.

    Returns ``(outcome code, steps taken)``.
    """
    n = indptr.shape[0] - 1
    order = np.arange(n)
    pos = np.arange(n)
    m = _add(order, pos, 0, start)
    steps = 0
    while 0 < m < n and steps < max_steps:
        x = _pick_reproducer(order, m, n, r, gen)
        y = _pick_neighbour(indptr, indices, x, gen)
        x_mut = pos[x] < m
        y_mut = pos[y] < m
        if x_mut and not y_mut:
            m = _add(order, pos, m, y)
        elif y_mut and not x_mut:
            m = _remove(order, pos, m, y)
        steps += 1
    if m == n:
        return FIXATION, steps
    if m == 0:
        return EXTINCTION, steps
    return TRUNCATED, steps


@njit(cache=True, nogil=True)
def replicate(indptr, indices, r, max_steps, gen):
    """Uniform start vertex drawn from ``gen``, then :func:`run_from`.

    Returns ``(start, outcome code, steps taken)``.
    """
    n = indptr.shape[0] - 1
    start = int(gen.random() * n)
    if start >= n:
        start = n - 1
    outcome, steps = run_from(indptr, indices, r, start, max_steps, gen)
    return start, outcome, steps


@njit(cache=True, nogil=True)
def drift_increments(indptr, indices, inv_degree, r, order, pos, m, trials, gen):
    """Potential increments of ``trials`` independent single steps from one fixed state."""
    n = order.shape[0]
    out = np.zeros(trials)
    for t in range(trials):
        x = _pick_reproducer(order, m, n, r, gen)
        y = _pick_neighbour(indptr, indices, x, gen)
        x_mut = pos[x] < m
        y_mut = pos[y] < m
        if x_mut and not y_mut:
            out[t] = inv_degree[y]
        elif y_mut and not x_mut:
            out[t] = -inv_degree[y]
    return out


@njit(cache=True, nogil=True)
def replicate_batch(indptr, indices, r, max_steps, count, gen):
    """``count`` consecutive replicates drawn from one stream."""
    starts = np.empty(count, dtype=np.int64)
    outcomes = np.empty(count, dtype=np.int64)
    steps = np.empty(count, dtype=np.int64)
    for k in range(count):
        starts[k], outcomes[k], steps[k] = replicate(indptr, indices, r, max_steps, gen)
    return starts, outcomes, steps
