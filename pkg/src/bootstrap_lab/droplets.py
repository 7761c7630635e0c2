"""Duarte regions and droplets.

A region is a source point plus the area swept between the curves
y = b +- f(x - a) for 0 <= x - a <= w, where f is a slowly flattening
logarithmic profile depending on the growth parameters. A droplet is the
set of lattice points of a region; heights and widths are always read from
the region, never from the lattice set.

All real comparisons in this module use the absolute tolerance TOL; the
minimal-region search inflates its result by TOL so that containment of the
input points is guaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .families import Site

TOL = 1e-9


@dataclass(frozen=True)
class GrowthParams:
    epsilon: float
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError("p must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    @property
    def _slope(self) -> float:
        # inner linear coefficient of the profile
        return self.epsilon ** 3 * self.p / math.log(1.0 / self.p)

    def f(self, x: float) -> float:
        """Boundary profile f(x) = log(1 + eps^3 p x / log(1/p)) / (2p)."""
        if x < 0:
            raise ValueError("f is defined for x >= 0")
        return math.log1p(self._slope * x) / (2.0 * self.p)

    def f_inverse(self, h: float) -> float:
        """Exact inverse: the x with f(x) = h."""
        if h < 0:
            raise ValueError("f_inverse is defined for h >= 0")
        return math.expm1(2.0 * self.p * h) / self._slope

    def f_prime(self, x: float) -> float:
        """Closed-form derivative eps^3 (2 log 1/p)^-1 exp(-2 p f(x))."""
        return (self.epsilon ** 3 / (2.0 * math.log(1.0 / self.p))
                * math.exp(-2.0 * self.p * self.f(x)))

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "p": self.p}


@dataclass(frozen=True)
class DuarteRegion:
    """Region (a,b) + {(x,y): 0 <= x <= w, |y| <= f(x)}."""

    params: GrowthParams
    a: float
    b: float
    w: float

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("width must be nonnegative")

    @property
    def source(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def width(self) -> float:
        return self.w

    @property
    def height(self) -> float:
        return 2.0 * self.params.f(self.w) + 1.0

    @property
    def right_edge_x(self) -> float:
        return self.a + self.w

    def right_edge_interval(self) -> tuple[float, tuple[float, float]]:
        """The right edge as (x, (y_lo, y_hi))."""
        half = self.params.f(self.w)
        return (self.right_edge_x, (self.b - half, self.b + half))

    def _half_height_at(self, x: float) -> float:
        rel = min(max(x - self.a, 0.0), self.w)
        return self.params.f(rel)

    def contains_point(self, x: float, y: float, tol: float = TOL) -> bool:
        if x < self.a - tol or x > self.a + self.w + tol:
            return False
        return abs(y - self.b) <= self._half_height_at(x) + tol

    def column_range(self) -> range:
        return range(math.ceil(self.a - TOL), math.floor(self.a + self.w + TOL) + 1)

    def column_interval(self, x: int) -> tuple[int, int] | None:
        """Inclusive lattice y-interval of column x, or None if empty."""
        if x < self.a - TOL or x > self.a + self.w + TOL:
            return None
        half = self._half_height_at(float(x))
        lo = math.ceil(self.b - half - TOL)
        hi = math.floor(self.b + half + TOL)
        return (lo, hi) if lo <= hi else None

    def lattice_sites(self) -> Iterator[Site]:
        for x in self.column_range():
            iv = self.column_interval(x)
            if iv is None:
                continue
            for y in range(iv[0], iv[1] + 1):
                yield (x, y)

    def lattice_count(self) -> int:
        total = 0
        for x in self.column_range():
            iv = self.column_interval(x)
            if iv is not None:
                total += iv[1] - iv[0] + 1
        return total

    def to_dict(self) -> dict:
        return {"epsilon": self.params.epsilon, "p": self.params.p,
                "source": [self.a, self.b], "width": self.w}

    @staticmethod
    def from_dict(d: dict) -> "DuarteRegion":
        return DuarteRegion(GrowthParams(d["epsilon"], d["p"]),
                            d["source"][0], d["source"][1], d["width"])


@dataclass(frozen=True)
class Droplet:
    """A region together with its lattice intersection (materialised lazily)."""

    region: DuarteRegion

    @property
    def height(self) -> float:
        return self.region.height

    @property
    def width(self) -> float:
        return self.region.width

    def sites(self) -> set[Site]:
        return set(self.region.lattice_sites())

    def __contains__(self, site: Site) -> bool:
        x, y = site
        iv = self.region.column_interval(x)
        return iv is not None and iv[0] <= y <= iv[1]

    def count_in(self, sites: Iterable[Site]) -> int:
        return sum(1 for s in sites if s in self)


def height(d) -> float:
    return d.height


def width(d) -> float:
    return d.width


def right_edge_interval(d):
    region = d.region if isinstance(d, Droplet) else d
    return region.right_edge_interval()


def minimal_region(params: GrowthParams, points: Iterable[tuple[float, float]]) -> DuarteRegion:
    """The minimal region containing the given points.

    The right edge sits at the largest x of the points; the width is the least
    value making the constraints |y_i - b| <= f(x_i - a) feasible for some b
    (feasibility is monotone in w because f is increasing), found by binary
    search and inflated by TOL; b is the midpoint of the surviving interval.
    """
    pts = [(float(x), float(y)) for (x, y) in points]
    if not pts:
        raise ValueError("minimal_region needs at least one point")
    px = np.asarray([x for x, _ in pts])
    py = np.asarray([y for _, y in pts])
    c = float(px.max())
    w_lo = float(px.max() - px.min())
    inv_2p = 1.0 / (2.0 * params.p)
    slope = params._slope

    def b_interval(w: float) -> tuple[float, float]:
        fv = np.log1p(slope * (px - (c - w))) * inv_2p
        return float((py - fv).max()), float((py + fv).min())

    def feasible(w: float) -> bool:
        lo, hi = b_interval(w)
        return lo <= hi

    if feasible(w_lo):
        w = w_lo
    else:
        hi_w = max(w_lo, 1.0)
        for _ in range(400):
            if feasible(hi_w):
                break
            hi_w *= 2.0
        else:
            raise RuntimeError("minimal_region: no feasible width found")
        lo_w = w_lo
        for _ in range(200):
            if hi_w - lo_w <= 1e-12:
                break
            mid = 0.5 * (lo_w + hi_w)
            if feasible(mid):
                hi_w = mid
            else:
                lo_w = mid
        w = hi_w + TOL

    lo_b, hi_b = b_interval(w)
    return DuarteRegion(params, c - w, 0.5 * (lo_b + hi_b), w)


def column_extremes(sites: Iterable[Site]) -> list[Site]:
    """Topmost and bottommost site of each column; the only points that can
    bind the minimal-region constraints."""
    cols: dict[int, tuple[int, int]] = {}
    for (x, y) in sites:
        lo_hi = cols.get(x)
        if lo_hi is None:
            cols[x] = (y, y)
        else:
            cols[x] = (min(lo_hi[0], y), max(lo_hi[1], y))
    out = []
    for x, (lo, hi) in cols.items():
        out.append((x, lo))
        if hi != lo:
            out.append((x, hi))
    return out


def minimal_droplet(params: GrowthParams, sites: Iterable[Site]) -> Droplet:
    return Droplet(minimal_region(params, column_extremes(sites)))


def region_contains(outer: DuarteRegion, inner: DuarteRegion, tol: float = TOL) -> bool:
    """Region containment via the right-edge criterion.

    Regions are vertically convex and grow with f, so the inner region is
    contained whenever both endpoints of its right edge lie in the outer one.
    """
    if outer.params != inner.params:
        raise ValueError("regions with different growth parameters are not comparable")
    x, (y_lo, y_hi) = inner.right_edge_interval()
    return outer.contains_point(x, y_lo, tol) and outer.contains_point(x, y_hi, tol)


def regions_close(r1: DuarteRegion, r2: DuarteRegion, tol: float = TOL) -> bool:
    """Equality of region parameters up to tol (same growth parameters)."""
    return (r1.params == r2.params
            and abs(r1.a - r2.a) <= tol
            and abs(r1.b - r2.b) <= tol
            and abs(r1.w - r2.w) <= tol)


# ---------------------------------------------------------------------------
# shape counting (test oracle)


@dataclass(frozen=True)
class ShapeCensus:
    width: int
    count: int
    grid_k: int
    top_profiles: tuple[tuple[int, ...], ...]

    def top_profile_bitsets(self) -> tuple[list[set[int]], int]:
        """Profiles as subsets of [1..width]: per column, 0 for the lower of
        the two observed top values and 1 for the higher."""
        tops = np.asarray(self.top_profiles, dtype=np.int64)
        lo = tops.min(axis=0)
        spread = tops.max(axis=0) - lo
        if spread.max(initial=0) > 1:
            raise RuntimeError("top profile spans more than two values per column")
        bits = tops - lo
        sets = [{int(x) + 1 for x in np.nonzero(row)[0]} for row in bits]
        return sets, self.width


def _census_at(params: GrowthParams, w: int, k: int):
    a = np.arange(1, k + 1, dtype=np.float64) / k       # sources in (0, 1]
    b = np.arange(1, k + 1, dtype=np.float64) / k
    xs = np.arange(1, w + 1, dtype=np.float64)
    rel = xs[None, :] - a[:, None]                       # (k, w), values in [0, w)
    fv = np.log1p(params._slope * rel) / (2.0 * params.p)

    # per (a, b): tops = floor(b + f), bottoms = ceil(b - f), empty columns
    # normalised to the sentinel (1, 0)
    tops = np.floor(b[:, None, None] + fv[None, :, :] + TOL).astype(np.int32)
    bots = np.ceil(b[:, None, None] - fv[None, :, :] - TOL).astype(np.int32)
    empty = bots > tops
    tops_n = np.where(empty, 0, tops)
    bots_n = np.where(empty, 1, bots)

    flat = np.concatenate([bots_n.reshape(-1, w), tops_n.reshape(-1, w)], axis=1)
    nonempty = ~empty.reshape(-1, w).all(axis=1)
    count = int(np.unique(flat[nonempty], axis=0).shape[0]) if nonempty.any() else 0

    raw_tops = np.unique(tops.reshape(-1, w), axis=0)
    return count, tuple(tuple(int(v) for v in row) for row in raw_tops)


def droplet_shape_census(params: GrowthParams, w: int,
                         start_k: int = 4, max_k: int = 512) -> ShapeCensus:
    """Count distinct lattice droplets over sources in (0,1]^2 at right edge w.

    The source square is sampled on a k x k grid with k doubling until two
    successive counts agree (the true count is a finite step function of the
    source). Raises if the refinement does not converge by max_k.
    """
    if w < 1:
        raise ValueError("census needs w >= 1")
    if params.f_prime(0.0) >= 1.0:
        raise ValueError("profile slope must stay below 1 for the census")
    prev = None
    k = start_k
    while k <= max_k:
        count, tops = _census_at(params, w, k)
        if prev is not None and count == prev:
            return ShapeCensus(width=w, count=count, grid_k=k, top_profiles=tops)
        prev = count
        k *= 2
    raise RuntimeError(f"shape census did not stabilise by grid {max_k}")


def enumerate_droplet_shapes(params: GrowthParams, w: int) -> int:
    return droplet_shape_census(params, w).count


def is_bichain(sets: Iterable[Iterable[int]], n: int) -> bool:
    """Literal bi-chain check over subsets of {1..n}: for every distinct pair
    there is a k in [n] with nested prefixes (up to k) and nested suffixes."""
    masks = []
    for s in sets:
        m = 0
        for i in s:
            if not 1 <= i <= n:
                raise ValueError(f"element {i} outside 1..{n}")
            m |= 1 << (i - 1)
        masks.append(m)
    masks = sorted(set(masks))
    full = (1 << n) - 1
    for ai in range(len(masks)):
        for bi in range(ai + 1, len(masks)):
            a_m, b_m = masks[ai], masks[bi]
            for k in range(1, n + 1):
                pm = (1 << k) - 1
                sm = full & ~pm
                ap, bp = a_m & pm, b_m & pm
                if not (ap & ~bp == 0 or bp & ~ap == 0):
                    continue
                as_, bs = a_m & sm, b_m & sm
                if as_ & ~bs == 0 or bs & ~as_ == 0:
                    break
            else:
                return False
    return True
