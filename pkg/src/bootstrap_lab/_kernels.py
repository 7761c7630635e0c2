"""Numba kernels for the work-queue closure. Internal module.

The window kernel runs on a grid padded by the family diameter: offsets then
never leave the array, border cells read as permanently uninfected, and the
border's in_queue flags are pre-set so it can never be enqueued. That removes
every bounds check from the hot loop.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _closure_flat(grid, in_queue, deltas, rule_ptr, uni_deltas, y0, y1, x0, x1, wp):
    """Work-queue closure on a flat padded uint8 grid (window geometry)."""
    n_rules = rule_ptr.shape[0] - 1
    n_uni = uni_deltas.shape[0]
    cap = (y1 - y0) * (x1 - x0) + 1
    queue = np.empty(cap, dtype=np.int32)
    head = 0
    tail = 0

    for y in range(y0, y1):
        base = y * wp
        for x in range(x0, x1):
            i = base + x
            if grid[i] == 0:
                continue
            for k in range(n_uni):
                j = i - uni_deltas[k]
                if grid[j] == 0 and in_queue[j] == 0:
                    in_queue[j] = 1
                    queue[tail] = np.int32(j)
                    tail += 1
                    if tail == cap:
                        tail = 0

    while head != tail:
        i = np.int64(queue[head])
        head += 1
        if head == cap:
            head = 0
        in_queue[i] = 0
        if grid[i] == 1:
            continue
        fired = False
        for r in range(n_rules):
            ok = True
            for k in range(rule_ptr[r], rule_ptr[r + 1]):
                if grid[i + deltas[k]] == 0:
                    ok = False
                    break
            if ok:
                fired = True
                break
        if not fired:
            continue
        grid[i] = 1
        for k in range(n_uni):
            j = i - uni_deltas[k]
            if grid[j] == 0 and in_queue[j] == 0:
                in_queue[j] = 1
                queue[tail] = np.int32(j)
                tail += 1
                if tail == cap:
                    tail = 0


@njit(cache=True, nogil=True)
def _closure_torus(grid, off_x, off_y, rule_ptr, uoff_x, uoff_y):
    """Work-queue closure on a torus (2D indexing with wraparound)."""
    h, w = grid.shape
    n_rules = rule_ptr.shape[0] - 1
    n_uni = uoff_x.shape[0]
    cap = h * w + 1
    qx = np.empty(cap, dtype=np.int32)
    qy = np.empty(cap, dtype=np.int32)
    in_queue = np.zeros((h, w), dtype=np.uint8)
    head = 0
    tail = 0

    for y in range(h):
        for x in range(w):
            if grid[y, x] == 0:
                continue
            for k in range(n_uni):
                cx = (x - uoff_x[k]) % w
                cy = (y - uoff_y[k]) % h
                if grid[cy, cx] == 0 and in_queue[cy, cx] == 0:
                    in_queue[cy, cx] = 1
                    qx[tail] = cx
                    qy[tail] = cy
                    tail = (tail + 1) % cap

    while head != tail:
        x = qx[head]
        y = qy[head]
        head = (head + 1) % cap
        in_queue[y, x] = 0
        if grid[y, x] == 1:
            continue
        fired = False
        for r in range(n_rules):
            ok = True
            for k in range(rule_ptr[r], rule_ptr[r + 1]):
                if grid[(y + off_y[k]) % h, (x + off_x[k]) % w] == 0:
                    ok = False
                    break
            if ok:
                fired = True
                break
        if not fired:
            continue
        grid[y, x] = 1
        for k in range(n_uni):
            cx = (x - uoff_x[k]) % w
            cy = (y - uoff_y[k]) % h
            if grid[cy, cx] == 0 and in_queue[cy, cx] == 0:
                in_queue[cy, cx] = 1
                qx[tail] = cx
                qy[tail] = cy
                tail = (tail + 1) % cap


def closure_window_grid(grid: np.ndarray, off_x, off_y, rule_ptr, uoff_x, uoff_y,
                        pad: int) -> np.ndarray:
    """Run the flat kernel on a freshly padded copy; returns the closed interior."""
    h, w = grid.shape
    hp, wp = h + 2 * pad, w + 2 * pad
    work = np.zeros((hp, wp), dtype=np.uint8)
    work[pad:pad + h, pad:pad + w] = grid
    in_queue = np.ones(hp * wp, dtype=np.uint8)
    in_queue.reshape(hp, wp)[pad:pad + h, pad:pad + w] = 0
    deltas = (off_y * wp + off_x).astype(np.int64)
    uni_deltas = (uoff_y * wp + uoff_x).astype(np.int64)
    _closure_flat(work.reshape(-1), in_queue, deltas, rule_ptr, uni_deltas,
                  pad, pad + h, pad, pad + w, wp)
    return work[pad:pad + h, pad:pad + w]


def warm_up():
    """Trigger JIT compilation with trivial instances."""
    one = np.asarray([0], dtype=np.int64)
    ptr = np.asarray([0, 1], dtype=np.int64)
    g = np.zeros((2, 2), dtype=np.uint8)
    g[0, 0] = 1
    closure_window_grid(g, one, one, ptr, one, one, 2)
    _closure_torus(g, one, one, ptr, one, one)
