"""Lattice states and bootstrap dynamics: synchronous step, closure, percolation.

States live on a finite geometry, either a torus (offsets wrap) or a window
(sites outside are permanently uninfected). The synchronous step is computed
with vectorised shifted masks; the closure uses a sparse work queue so that
the cost is proportional to the number of infections, not to the number of
sweeps times the lattice size.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .families import Site, UpdateFamily
from ._kernels import _closure_torus, closure_window_grid


@dataclass(frozen=True)
class Torus:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("torus side must be >= 1")

    @property
    def width(self) -> int:
        return self.n

    @property
    def height(self) -> int:
        return self.n

    def index(self, site: Site) -> tuple[int, int]:
        x, y = site
        return y % self.n, x % self.n


@dataclass(frozen=True)
class Window:
    """Inclusive axis-aligned rectangle [x_min..x_max] x [y_min..y_max]."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("empty window")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    def contains(self, site: Site) -> bool:
        x, y = site
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def index(self, site: Site) -> tuple[int, int]:
        x, y = site
        if not self.contains(site):
            raise ValueError(f"site {site} outside window {self}")
        return y - self.y_min, x - self.x_min


Geometry = Torus | Window


class LatticeState:
    """An immutable infected-site set over a finite geometry.

    The infected set is stored as a row-major boolean grid indexed
    ``grid[y - y0, x - x0]``; the array is frozen after construction so
    states can be shared freely between threads.
    """

    __slots__ = ("geometry", "grid")

    def __init__(self, geometry: Geometry, grid: np.ndarray):
        if grid.shape != (geometry.height, geometry.width):
            raise ValueError("grid shape does not match geometry")
        grid = np.ascontiguousarray(grid, dtype=np.bool_)
        grid.flags.writeable = False
        self.geometry = geometry
        self.grid = grid

    @staticmethod
    def empty(geometry: Geometry) -> "LatticeState":
        return LatticeState(geometry, np.zeros((geometry.height, geometry.width), dtype=np.bool_))

    @staticmethod
    def from_sites(geometry: Geometry, sites) -> "LatticeState":
        grid = np.zeros((geometry.height, geometry.width), dtype=np.bool_)
        for s in sites:
            if isinstance(geometry, Window) and not geometry.contains(s):
                raise ValueError(f"seed {s} outside window")
            r, c = geometry.index(s)
            grid[r, c] = True
        return LatticeState(geometry, grid)

    @property
    def origin(self) -> Site:
        if isinstance(self.geometry, Window):
            return (self.geometry.x_min, self.geometry.y_min)
        return (0, 0)

    def count(self) -> int:
        return int(self.grid.sum())

    def is_full(self) -> bool:
        return bool(self.grid.all())

    def __contains__(self, site: Site) -> bool:
        if isinstance(self.geometry, Window) and not self.geometry.contains(site):
            return False
        r, c = self.geometry.index(site)
        return bool(self.grid[r, c])

    def sites(self) -> set[Site]:
        x0, y0 = self.origin
        rows, cols = np.nonzero(self.grid)
        return {(int(c) + x0, int(r) + y0) for r, c in zip(rows, cols)}

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatticeState)
                and self.geometry == other.geometry
                and bool(np.array_equal(self.grid, other.grid)))

    def __hash__(self):
        return hash((self.geometry, self.grid.tobytes()))

    def is_subset_of(self, other: "LatticeState") -> bool:
        if self.geometry != other.geometry:
            raise ValueError("geometry mismatch")
        return not bool((self.grid & ~other.grid).any())

    def to_pbm(self) -> str:
        """Plain text grid, one row per line ('1'/'0'), top row = largest y."""
        lines = []
        for row in self.grid[::-1]:
            lines.append("".join("1" if v else "0" for v in row))
        return "\n".join(lines) + "\n"


def _shift_window(grid: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """grid shifted so that out[r, c] = grid[r+dy, c+dx], zero-filled outside."""
    h, w = grid.shape
    out = np.zeros_like(grid)
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    yt = slice(max(0, dy), min(h, h + dy))
    xt = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = grid[yt, xt]
    return out


def step(state: LatticeState, family: UpdateFamily) -> LatticeState:
    """One synchronous update: every site whose rule translate is infected joins."""
    grid = state.grid
    new = grid.copy()
    torus = isinstance(state.geometry, Torus)
    for rule in family:
        mask = None
        for (dx, dy) in rule:
            if torus:
                shifted = np.roll(grid, shift=(-dy, -dx), axis=(0, 1))
            else:
                shifted = _shift_window(grid, dy, dx)
            mask = shifted if mask is None else (mask & shifted)
        new |= mask
    return LatticeState(state.geometry, new)


def closure_by_sweeps(state: LatticeState, family: UpdateFamily) -> LatticeState:
    """Reference closure: iterate `step` to its fixed point by full sweeps.

    Kept as the independent oracle for the queue-based closure; quadratic in
    the worst case, use only on small instances.
    """
    cur = state
    while True:
        nxt = step(cur, family)
        if np.array_equal(nxt.grid, cur.grid):
            return cur
        cur = nxt


@functools.lru_cache(maxsize=None)
def _family_arrays(family: UpdateFamily):
    off_x, off_y, rule_ptr = [], [], [0]
    for rule in family:
        for (dx, dy) in rule:
            off_x.append(dx)
            off_y.append(dy)
        rule_ptr.append(len(off_x))
    uni = family.all_offsets()
    return (np.asarray(off_x, dtype=np.int64), np.asarray(off_y, dtype=np.int64),
            np.asarray(rule_ptr, dtype=np.int64),
            np.asarray([o[0] for o in uni], dtype=np.int64),
            np.asarray([o[1] for o in uni], dtype=np.int64))


def closure_grid(grid: np.ndarray, family: UpdateFamily, torus: bool) -> np.ndarray:
    """Closure of a raw boolean grid; returns a fresh bool grid.

    Low-overhead entry point for Monte Carlo loops; ``closure`` is the
    state-level wrapper around the same kernels.
    """
    off_x, off_y, rule_ptr, uoff_x, uoff_y = _family_arrays(family)
    if torus:
        work = grid.astype(np.uint8)
        _closure_torus(work, off_x, off_y, rule_ptr, uoff_x, uoff_y)
        return work.view(np.bool_)
    closed = closure_window_grid(grid.astype(np.uint8), off_x, off_y, rule_ptr,
                                 uoff_x, uoff_y, family.diameter)
    return closed.view(np.bool_)


def closure(state: LatticeState, family: UpdateFamily) -> LatticeState:
    """Least fixed point of `step` containing the state (work-queue algorithm).

    A candidate queue is seeded with every site that could fire because of an
    already infected site (x such that x - s is infected for an offset s of
    some rule); each infection re-enqueues its possible dependents.
    """
    return LatticeState(state.geometry,
                        closure_grid(state.grid, family,
                                     isinstance(state.geometry, Torus)))


def closure_touches_frame(state: LatticeState) -> bool:
    """True if any infected site lies on the outermost frame of a window."""
    g = state.grid
    return bool(g[0, :].any() or g[-1, :].any() or g[:, 0].any() or g[:, -1].any())


def percolates(seed_sites, family: UpdateFamily, n: int) -> bool:
    """Does the seed set infect the whole n x n torus?"""
    state = LatticeState.from_sites(Torus(n), seed_sites)
    return closure(state, family).is_full()
