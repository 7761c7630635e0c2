"""Stable directions, difficulties, and the family classification.

The stable set of a family is computed exactly: the unstable directions form
a finite union of open arcs whose endpoints are perpendiculars of rule
offsets, so splitting the circle at those perpendiculars gives atomic pieces
on which stability is constant. Difficulties of isolated stable directions
are estimated by a bounded helper-set search around the boundary line.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .directions import (Dir, angle_sorted, arc_length_ge_pi, cross, dot,
                         in_closed_arc, in_open_arc, midpoint_dir, neg, perp,
                         primitive)
from .families import Site, UpdateFamily
from .lattice import LatticeState, Window, closure

INF = math.inf


@dataclass(frozen=True)
class Arc:
    """Closed CCW arc of directions; start == end denotes the full circle."""

    start: Dir
    end: Dir

    def contains(self, u: Dir) -> bool:
        return in_closed_arc(u, self.start, self.end)


@dataclass(frozen=True)
class StableSetDescription:
    arcs: tuple[Arc, ...]
    points: tuple[Dir, ...]

    @property
    def is_empty(self) -> bool:
        return not self.arcs and not self.points

    @property
    def is_full_circle(self) -> bool:
        return any(a.start == a.end for a in self.arcs)

    def contains(self, u: Dir) -> bool:
        return u in self.points or any(a.contains(u) for a in self.arcs)

    def to_dict(self) -> dict:
        return {"arcs": [[list(a.start), list(a.end)] for a in self.arcs],
                "points": [list(p) for p in self.points]}


@dataclass(frozen=True)
class SearchBudget:
    max_helpers: int = 2
    window_radius: int = 10
    max_candidate_sets: int = 200_000

    def describe(self) -> str:
        return (f"max_helpers={self.max_helpers}, window_radius={self.window_radius}, "
                f"max_candidate_sets={self.max_candidate_sets}")


@dataclass(frozen=True)
class DifficultyEstimate:
    """Difficulty of a direction: exact finite value, structural infinity, or
    a budget-limited lower bound ("unknown": the search certified that no
    helper set of size <= bound-1 works inside its window)."""

    side: str  # "plus" | "minus" | "both" | "family"
    kind: str  # "finite" | "infinite" | "unknown"
    bound: int
    witness: tuple[Site, ...] = ()
    note: str = ""

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def interval(self) -> tuple[float, float]:
        if self.kind == "finite":
            return (float(self.bound), float(self.bound))
        if self.kind == "infinite":
            return (INF, INF)
        return (float(self.bound), INF)

    def to_dict(self) -> dict:
        return {"side": self.side, "kind": self.kind, "bound": self.bound,
                "witness": [list(s) for s in self.witness], "note": self.note}


@dataclass(frozen=True)
class FamilyClassification:
    kind: str     # "supercritical" | "critical" | "subcritical"
    balance: str  # "balanced" | "unbalanced" | "indeterminate" | "not_applicable"
    family_difficulty: DifficultyEstimate
    stable: StableSetDescription
    point_difficulties: dict[Dir, DifficultyEstimate] = field(default_factory=dict)

    def to_dict(self) -> dict:
        alpha = self.family_difficulty
        return {"kind": self.kind, "balance": self.balance,
                "alpha": alpha.to_dict(),
                "stable_set": self.stable.to_dict(),
                "witnesses": {f"{p[0]},{p[1]}": e.to_dict()
                              for p, e in self.point_difficulties.items()}}


def is_stable(family: UpdateFamily, u: Dir) -> bool:
    """Is the closed discrete half-plane with outer normal u closed under updates?

    Unstable exactly when some rule fits strictly inside the half-plane,
    i.e. <x, u> < 0 for every offset x of the rule.
    """
    a, b = u
    for rule in family:
        if all(a * x + b * y < 0 for (x, y) in rule):
            return False
    return True


def _boundary_dirs(family: UpdateFamily) -> list[Dir]:
    dirs: set[Dir] = set()
    for rule in family:
        for s in rule:
            p = primitive(*perp(s))
            dirs.add(p)
            dirs.add(neg(p))
    return angle_sorted(dirs)


@functools.lru_cache(maxsize=None)
def stable_set(family: UpdateFamily) -> StableSetDescription:
    """Exact arc/point decomposition of the stable set."""
    bdirs = _boundary_dirs(family)
    m = len(bdirs)
    pt_stable = [is_stable(family, d) for d in bdirs]
    gap_stable = [is_stable(family, midpoint_dir(bdirs[i], bdirs[(i + 1) % m]))
                  for i in range(m)]

    if all(pt_stable) and all(gap_stable):
        anchor = bdirs[0]
        return StableSetDescription(arcs=(Arc(anchor, anchor),), points=())
    if not any(pt_stable) and not any(gap_stable):
        return StableSetDescription(arcs=(), points=())

    # alternating circular sequence: point 0, gap 0, point 1, gap 1, ...
    seq = []
    for i in range(m):
        seq.append(("pt", i, pt_stable[i]))
        seq.append(("gap", i, gap_stable[i]))
    k = len(seq)
    start_idx = next(i for i in range(k) if not seq[i][2])

    arcs: list[Arc] = []
    points: list[Dir] = []
    run: list = []
    for j in range(1, k + 1):
        item = seq[(start_idx + j) % k]
        if item[2]:
            run.append(item)
        elif run:
            # maximal stable run; bounded by unstable gaps, so it starts and
            # ends at boundary points
            first, last = run[0], run[-1]
            assert first[0] == "pt" and last[0] == "pt"
            if len(run) == 1:
                points.append(bdirs[first[1]])
            else:
                arcs.append(Arc(bdirs[first[1]], bdirs[last[1]]))
            run = []
    return StableSetDescription(arcs=tuple(arcs), points=tuple(angle_sorted(points)))


def _sorted_objects(desc: StableSetDescription) -> list[tuple[Dir, Dir]]:
    """Arcs and points as (start, end) pairs, in circular order."""
    objs = [(a.start, a.end) for a in desc.arcs] + [(p, p) for p in desc.points]
    order = {d: i for i, d in enumerate(angle_sorted([o[0] for o in objs]))}
    return sorted(objs, key=lambda o: order[o[0]])


def _complement_gaps(objs: list[tuple[Dir, Dir]]) -> list[tuple[Dir, Dir]]:
    """Open arcs between consecutive objects (end of one to start of next)."""
    gaps = []
    for i in range(len(objs)):
        end = objs[i][1]
        start = objs[(i + 1) % len(objs)][0]
        if end == start and len(objs) == 1:
            return []  # single object covering the whole circle
        gaps.append((end, start))
    return gaps


def _open_semicircle_hits_arc(m: Dir, a: Arc) -> bool:
    """Does the open semicircle (m, -m) meet the closed arc a?"""
    if a.start == a.end:
        return True
    mm = neg(m)
    if in_open_arc(a.start, m, mm) or in_open_arc(a.end, m, mm):
        return True
    return a.contains(perp(m))  # arc covers the whole semicircle


def _closed_semicircle_hits_arc(m: Dir, a: Arc) -> bool:
    if a.start == a.end:
        return True
    mm = neg(m)
    if in_closed_arc(a.start, m, mm) or in_closed_arc(a.end, m, mm):
        return True
    return a.contains(perp(m))


def _interval_max(parts: list[tuple[float, float]]) -> tuple[float, float]:
    if not parts:
        return (0.0, 0.0)
    return (max(p[0] for p in parts), max(p[1] for p in parts))


def _anchor_set(desc: StableSetDescription) -> list[Dir]:
    base: set[Dir] = set()
    for a in desc.arcs:
        base.add(a.start)
        base.add(a.end)
    base.update(desc.points)
    base.update(neg(d) for d in list(base))
    ordered = angle_sorted(base)
    mids = [midpoint_dir(ordered[i], ordered[(i + 1) % len(ordered)])
            for i in range(len(ordered))]
    return angle_sorted(set(ordered) | set(mids))


def classify(family: UpdateFamily, budget: SearchBudget = SearchBudget()) -> FamilyClassification:
    """Supercritical/critical/subcritical kind, family difficulty, and balance.

    The kind is decided exactly from the stable-set decomposition. The family
    difficulty min-max over open semicircles is evaluated on the finite set of
    anchor directions (object endpoints, their antipodes, and midpoints), at
    which the combinatorial content of a rotating semicircle can only change.
    """
    desc = stable_set(family)

    if desc.is_empty:
        return FamilyClassification(
            kind="supercritical", balance="not_applicable",
            family_difficulty=DifficultyEstimate("family", "finite", 0, note="empty stable set"),
            stable=desc)

    objs = _sorted_objects(desc)
    gaps_all = _complement_gaps(objs)
    if any(arc_length_ge_pi(g[0], g[1]) for g in gaps_all):
        return FamilyClassification(
            kind="supercritical", balance="not_applicable",
            family_difficulty=DifficultyEstimate(
                "family", "finite", 0, note="an open semicircle avoids the stable set"),
            stable=desc)

    arc_objs = [(a.start, a.end) for a in desc.arcs]
    if arc_objs:
        arc_gaps = _complement_gaps(arc_objs)
        critical = bool(arc_gaps) and any(arc_length_ge_pi(g[0], g[1]) for g in arc_gaps)
    else:
        critical = True
    if not critical:
        return FamilyClassification(
            kind="subcritical", balance="not_applicable",
            family_difficulty=DifficultyEstimate(
                "family", "infinite", 0, note="every semicircle meets a stable arc"),
            stable=desc)

    point_diffs = {p: difficulty(family, p, budget) for p in desc.points}
    anchors = _anchor_set(desc)

    open_vals: list[tuple[float, float]] = []
    closed_vals: list[tuple[float, float]] = []
    for mdir in anchors:
        mm = neg(mdir)
        parts_open, parts_closed = [], []
        for a in desc.arcs:
            if _open_semicircle_hits_arc(mdir, a):
                parts_open.append((INF, INF))
            if _closed_semicircle_hits_arc(mdir, a):
                parts_closed.append((INF, INF))
        for p in desc.points:
            if in_open_arc(p, mdir, mm):
                parts_open.append(point_diffs[p].interval())
            if in_closed_arc(p, mdir, mm):
                parts_closed.append(point_diffs[p].interval())
        open_vals.append(_interval_max(parts_open))
        closed_vals.append(_interval_max(parts_closed))

    alpha_lo = min(v[0] for v in open_vals)
    alpha_hi = min(v[1] for v in open_vals)
    if alpha_lo == alpha_hi:
        if math.isinf(alpha_lo):
            alpha = DifficultyEstimate("family", "infinite", 0)
        else:
            alpha = DifficultyEstimate("family", "finite", int(alpha_lo))
    else:
        alpha = DifficultyEstimate("family", "unknown", int(alpha_lo),
                                   note=f"budget-limited ({budget.describe()})")

    # balanced iff some closed semicircle has all difficulties <= alpha
    surely_balanced = any(v[1] <= alpha_lo for v in closed_vals)
    surely_unbalanced = all(v[0] > alpha_hi for v in closed_vals)
    if surely_balanced:
        balance = "balanced"
    elif surely_unbalanced:
        balance = "unbalanced"
    else:
        balance = "indeterminate"

    return FamilyClassification(kind="critical", balance=balance,
                                family_difficulty=alpha, stable=desc,
                                point_difficulties=point_diffs)


# ---------------------------------------------------------------------------
# difficulty search


def difficulty(family: UpdateFamily, u: Dir, budget: SearchBudget = SearchBudget()) -> DifficultyEstimate:
    """Difficulty of direction u: 0 for unstable directions, structural
    infinity on stable arcs (endpoints included), else min of the two
    one-sided bounded searches, infinite only if certified structurally.
    """
    u = primitive(*u)
    if not is_stable(family, u):
        return DifficultyEstimate("both", "finite", 0, note="unstable direction")
    desc = stable_set(family)
    if any(a.contains(u) for a in desc.arcs):
        return DifficultyEstimate("both", "infinite", 0,
                                  note="direction lies on a stable arc; one-sided "
                                       "difficulty is infinite there")
    plus = directional_difficulty(family, u, "plus", budget)
    minus = directional_difficulty(family, u, "minus", budget)
    if plus.is_finite and minus.is_finite:
        best = plus if plus.bound <= minus.bound else minus
        return DifficultyEstimate("both", "finite", best.bound, witness=best.witness,
                                  note=f"alpha+={plus.bound}, alpha-={minus.bound}")
    bounds = [e.bound for e in (plus, minus)]
    return DifficultyEstimate("both", "unknown", min(bounds),
                              note=f"one-sided searches exhausted ({budget.describe()})")


def directional_difficulty(family: UpdateFamily, u: Dir, side: str,
                           budget: SearchBudget = SearchBudget()) -> DifficultyEstimate:
    """Bounded search for the one-sided difficulty along the boundary line.

    Simulates closures on a window with the half-plane slice pre-infected and
    candidate helper sets near the line; declares success when the line stays
    infected well beyond the helpers on the requested side.
    """
    u = primitive(*u)
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    if not is_stable(family, u):
        return DifficultyEstimate(side, "finite", 0, note="unstable direction")

    a, b = u
    d_line = (b, -a) if side == "plus" else (-b, a)
    norm2 = a * a + b * b
    radius = budget.window_radius
    guard = 2 * family.diameter + 2
    extent = (2 * radius + guard + 2) * (abs(a) + abs(b))
    win = Window(-extent, -extent, extent, extent)

    base = np.zeros((win.height, win.width), dtype=np.bool_)
    xs = np.arange(win.x_min, win.x_max + 1)
    ys = np.arange(win.y_min, win.y_max + 1)
    xg, yg = np.meshgrid(xs, ys)
    base[(a * xg + b * yg) < 0] = True

    margin = max(1, radius // 2)

    def propagates(helpers: tuple[Site, ...]) -> bool:
        grid = base.copy()
        for (hx, hy) in helpers:
            grid[hy - win.y_min, hx - win.x_min] = True
        closed = closure(LatticeState(win, grid), family)
        c_hi = 0
        for z in helpers:
            c_hi = max(c_hi, -(-dot(z, d_line) // norm2))  # ceil division
        for c in range(c_hi + 1, c_hi + margin + 1):
            if (c * d_line[0], c * d_line[1]) not in closed:
                return False
        return True

    if propagates(()):
        raise RuntimeError("half-plane alone propagates along a stable direction; "
                           "guard band too small")

    # candidate helpers: on or above the line, within `radius` of it, with a
    # bounded extent along it; helper sets are canonicalized by translation
    # along the line so that their least line-coordinate lies in [0, 1)
    cands: list[Site] = []
    for y in range(-extent, extent + 1):
        for x in range(-extent, extent + 1):
            du = a * x + b * y
            if du < 0 or du * du > radius * radius * norm2:
                continue
            dl = dot((x, y), d_line)
            if dl < 0 or dl > radius * norm2:
                continue
            cands.append((x, y))
    cands.sort()

    checked = 0
    for size in range(1, budget.max_helpers + 1):
        for combo in itertools.combinations(cands, size):
            if min(dot(z, d_line) for z in combo) >= norm2:
                continue  # not translation-canonical
            checked += 1
            if checked > budget.max_candidate_sets:
                return DifficultyEstimate(
                    side, "unknown", size,
                    note=f"candidate-set budget exhausted after {checked - 1} sets "
                         f"({budget.describe()})")
            if propagates(combo):
                return DifficultyEstimate(
                    side, "finite", size, witness=combo,
                    note=f"witness found; sizes < {size} exhausted in window")
    return DifficultyEstimate(
        side, "unknown", budget.max_helpers + 1,
        note=f"no helper set of size <= {budget.max_helpers} in the searched strip "
             f"({budget.describe()})")
