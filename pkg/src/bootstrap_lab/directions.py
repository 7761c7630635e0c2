"""Exact arithmetic on rational directions of the circle.

Directions are primitive integer vectors (a, b), standing for (a,b)/|(a,b)|.
All comparisons are done with integer cross and dot products; no angle is
ever represented in floating point. Circular arcs are oriented
counter-clockwise.
"""

from __future__ import annotations

import functools
import math

Dir = tuple[int, int]


def primitive(a: int, b: int) -> Dir:
    if a == 0 and b == 0:
        raise ValueError("zero vector has no direction")
    g = math.gcd(abs(a), abs(b))
    return (a // g, b // g)


def cross(u: Dir, v: Dir) -> int:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Dir, v: Dir) -> int:
    return u[0] * v[0] + u[1] * v[1]


def neg(u: Dir) -> Dir:
    return (-u[0], -u[1])


def perp(u: Dir) -> Dir:
    """u rotated by +90 degrees (counter-clockwise)."""
    return (-u[1], u[0])


def _half(u: Dir) -> int:
    """0 for angles in [0, pi), 1 for [pi, 2*pi)."""
    return 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1


def _angle_cmp(u: Dir, v: Dir) -> int:
    if u == v:
        return 0
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return -1 if hu < hv else 1
    c = cross(u, v)
    # same open half-turn: primitive vectors there are never parallel
    return -1 if c > 0 else 1


def angle_sorted(dirs) -> list[Dir]:
    """Directions sorted by angle in [0, 2*pi), starting from (1, 0)."""
    return sorted(set(dirs), key=functools.cmp_to_key(_angle_cmp))


def _pos_class(c: Dir, x: Dir) -> int:
    """Coarse CCW position of x relative to anchor c: 0 at c, 1 in (0,pi),
    2 at the antipode, 3 in (pi, 2*pi)."""
    if x == c:
        return 0
    cr = cross(c, x)
    if cr > 0:
        return 1
    if cr < 0:
        return 3
    return 2  # antiparallel: primitive and not equal


def ccw_cmp_from(c: Dir, x: Dir, y: Dir) -> int:
    """Compare the CCW angular distances from c to x and from c to y."""
    px, py = _pos_class(c, x), _pos_class(c, y)
    if px != py:
        return -1 if px < py else 1
    if x == y:
        return 0
    cr = cross(x, y)
    return -1 if cr > 0 else 1


def in_open_arc(x: Dir, start: Dir, end: Dir) -> bool:
    """Is x strictly inside the CCW arc from start to end (start != end)?"""
    if start == end:
        raise ValueError("degenerate arc")
    if x == start or x == end:
        return False
    return ccw_cmp_from(start, x, end) < 0


def in_closed_arc(x: Dir, start: Dir, end: Dir) -> bool:
    """Is x on the closed CCW arc from start to end?

    start == end denotes the full circle.
    """
    if start == end:
        return True
    return x == start or x == end or ccw_cmp_from(start, x, end) < 0


def arc_length_ge_pi(start: Dir, end: Dir) -> bool:
    """Does the CCW arc from start to end have angular length >= pi?"""
    if start == end:
        return True  # full circle
    a = neg(start)
    return end == a or in_open_arc(a, start, end)


def midpoint_dir(start: Dir, end: Dir) -> Dir:
    """A rational direction strictly inside the CCW arc from start to end.

    Valid whenever the arc length is at most pi (always the case for arcs
    between circularly consecutive members of an antipode-closed set).
    """
    if end == neg(start):
        return perp(start)
    s = (start[0] + end[0], start[1] + end[1])
    return primitive(*s)
