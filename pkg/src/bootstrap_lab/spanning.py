"""Strong connectivity, the spanning merge loop, and droplet extraction.

The span of a seed set is computed by the merge algorithm: repeatedly fuse
any two current seed groups whose joint closure is strongly connected, then
return the minimal droplets of the final groups' closures. The full fusion
history is kept as a binary forest (the trace) for sub-droplet extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .droplets import (TOL, Droplet, GrowthParams, column_extremes,
                       minimal_droplet, minimal_region, regions_close)
from .errors import WindowBudgetError
from .families import Site, UpdateFamily
from .lattice import LatticeState, Window, closure, closure_touches_frame

# neighbour offsets of the strong-adjacency graph: |dx| <= 1 and |dx|+|dy| <= 2
STRONG_OFFSETS: tuple[Site, ...] = (
    (0, 1), (0, 2), (1, 0), (1, 1), (1, -1),
    (0, -1), (0, -2), (-1, 0), (-1, 1), (-1, -1),
)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def _strong_union(sites: set[Site]) -> tuple[_UnionFind, dict[Site, int]]:
    index = {s: i for i, s in enumerate(sorted(sites))}
    uf = _UnionFind(len(index))
    for (x, y), i in index.items():
        for (dx, dy) in STRONG_OFFSETS[:5]:  # one direction of each edge suffices
            j = index.get((x + dx, y + dy))
            if j is not None:
                uf.union(i, j)
    return uf, index


def strongly_connected(sites) -> bool:
    """Is the set connected in the strong-adjacency graph?"""
    sites = set(sites)
    if len(sites) <= 1:
        return True
    uf, index = _strong_union(sites)
    root = uf.find(0)
    return all(uf.find(i) == root for i in range(len(index)))


def strong_components(sites) -> list[set[Site]]:
    sites = set(sites)
    if not sites:
        return []
    uf, index = _strong_union(sites)
    comps: dict[int, set[Site]] = {}
    for s, i in index.items():
        comps.setdefault(uf.find(i), set()).add(s)
    return [comps[r] for r in sorted(comps, key=lambda r: min(comps[r]))]


def closure_of_sites(sites, family: UpdateFamily, pad_cap: int = 2 ** 14) -> LatticeState:
    """Closure of a finite set in an adaptive window.

    The window is the bounding box padded by the family diameter; while the
    closure touches the window frame the pad doubles, up to pad_cap.
    """
    sites = set(sites)
    if not sites:
        raise ValueError("empty site set")
    xs = [x for x, _ in sites]
    ys = [y for _, y in sites]
    pad = family.diameter + 1
    while True:
        win = Window(min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)
        closed = closure(LatticeState.from_sites(win, sites), family)
        if not closure_touches_frame(closed):
            return closed
        pad *= 2
        if pad > pad_cap:
            raise WindowBudgetError(
                f"closure kept growing into the pad margin (pad cap {pad_cap}); "
                f"the family may have unbounded closures of finite sets")


@dataclass(frozen=True)
class SpanComponent:
    seeds: frozenset[Site]
    closure: LatticeState
    droplet: Droplet


class SpanNode:
    """A node of the merge forest: a component plus the pair it was fused from."""

    __slots__ = ("component", "children")

    def __init__(self, component: SpanComponent, children: tuple["SpanNode", ...] = ()):
        if children and len(children) != 2:
            raise ValueError("a merge node has exactly two children")
        self.component = component
        self.children = children

    @property
    def height(self) -> float:
        return self.component.droplet.height

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        yield self
        for ch in self.children:
            yield from ch.walk()


@dataclass(frozen=True)
class SpanTrace:
    roots: tuple[SpanNode, ...]

    def nodes(self):
        for r in self.roots:
            yield from r.walk()

    def merges(self):
        for node in self.nodes():
            if not node.is_leaf:
                yield node

    def leaves(self):
        for node in self.nodes():
            if node.is_leaf:
                yield node

    def to_dict(self) -> dict:
        ids: dict[int, int] = {}
        nodes = []
        for node in self.nodes():
            ids[id(node)] = len(nodes)
            nodes.append(node)
        return {
            "roots": [ids[id(r)] for r in self.roots],
            "nodes": [{
                "id": ids[id(n)],
                "children": [ids[id(c)] for c in n.children],
                "seeds": sorted(map(list, n.component.seeds)),
                "droplet": n.component.droplet.region.to_dict(),
                "height": n.height,
            } for n in nodes],
        }

    def to_dot(self) -> str:
        d = self.to_dict()
        lines = ["digraph span {"]
        for n in d["nodes"]:
            label = f"h={n['height']:.3f}, seeds={len(n['seeds'])}"
            lines.append(f'  n{n["id"]} [label="{label}"];')
            for c in n["children"]:
                lines.append(f'  n{n["id"]} -> n{c};')
        lines.append("}")
        return "\n".join(lines)


def _bbox(state: LatticeState) -> tuple[int, int, int, int]:
    xs = [x for x, _ in state.sites()]
    ys = [y for _, y in state.sites()]
    return min(xs), min(ys), max(xs), max(ys)


def _bbox_gap(b1, b2) -> int:
    dx = max(b1[0] - b2[2], b2[0] - b1[2], 0)
    dy = max(b1[1] - b2[3], b2[1] - b1[3], 0)
    return max(dx, dy)


class _MergeEngine:
    """The merge loop, shared by span and critical-pair extraction.

    Pairs are fused in lexicographic order of their components' minimal seed
    sites (the final droplet multiset does not depend on this order; the
    order only pins the trace for reproducibility).
    """

    def __init__(self, seeds, family: UpdateFamily, params: GrowthParams,
                 pad_cap: int = 2 ** 14):
        self.family = family
        self.params = params
        self.pad_cap = pad_cap
        self.active: dict[Site, SpanNode] = {}
        self._elig: dict[tuple[Site, Site], tuple[bool, LatticeState | None]] = {}
        for s in sorted(set(seeds)):
            self.active[s] = SpanNode(self._component(frozenset([s])))

    def _component(self, seed_set: frozenset[Site]) -> SpanComponent:
        closed = closure_of_sites(seed_set, self.family, self.pad_cap)
        droplet = minimal_droplet(self.params, closed.sites())
        return SpanComponent(seed_set, closed, droplet)

    def _eligible(self, ka: Site, kb: Site) -> tuple[bool, LatticeState | None]:
        key = (ka, kb) if ka < kb else (kb, ka)
        hit = self._elig.get(key)
        if hit is not None:
            return hit
        na, nb = self.active[ka], self.active[kb]
        gap = _bbox_gap(_bbox(na.component.closure), _bbox(nb.component.closure))
        if gap > 2 * self.family.diameter:
            # too far apart to interact: the joint closure is the disjoint
            # union and cannot be strongly connected
            result: tuple[bool, LatticeState | None] = (False, None)
        else:
            joint = closure_of_sites(na.component.seeds | nb.component.seeds,
                                     self.family, self.pad_cap)
            result = (strongly_connected(joint.sites()), joint)
        self._elig[key] = result
        return result

    def merge_events(self):
        """Yield (parent, child_a, child_b) until no pair is eligible."""
        while True:
            best = None
            for ka in sorted(self.active):
                for kb in sorted(self.active):
                    if kb <= ka:
                        continue
                    if self._eligible(ka, kb)[0]:
                        best = (ka, kb)
                        break
                if best:
                    break
            if not best:
                return
            ka, kb = best
            na, nb = self.active.pop(ka), self.active.pop(kb)
            joint = self._eligible(ka, kb)[1]
            seed_set = na.component.seeds | nb.component.seeds
            droplet = minimal_droplet(self.params, joint.sites())
            parent = SpanNode(SpanComponent(seed_set, joint, droplet), (na, nb))
            self._elig = {k: v for k, v in self._elig.items()
                          if ka not in k and kb not in k}
            self.active[min(seed_set)] = parent
            yield parent, na, nb

    def finish(self) -> SpanTrace:
        roots = tuple(self.active[k] for k in sorted(self.active))
        return SpanTrace(roots=roots)


def span(seeds, family: UpdateFamily, params: GrowthParams,
         pad_cap: int = 2 ** 14) -> tuple[list[Droplet], SpanTrace]:
    """Run the merge algorithm to completion.

    Returns the minimal droplets of the final components' closures plus the
    full merge trace.
    """
    engine = _MergeEngine(seeds, family, params, pad_cap)
    for _ in engine.merge_events():
        pass
    trace = engine.finish()
    return [r.component.droplet for r in trace.roots], trace


def span_via_components(seeds, family: UpdateFamily, params: GrowthParams,
                        pad_cap: int = 2 ** 14) -> list[Droplet]:
    """Independent characterisation of the span: the minimal droplets of the
    strongly connected components of the closure of the whole seed set."""
    seeds = set(seeds)
    if not seeds:
        return []
    closed = closure_of_sites(seeds, family, pad_cap)
    return [minimal_droplet(params, comp) for comp in strong_components(closed.sites())]


def canonical_droplet(d: Droplet) -> Droplet:
    """Re-derive the droplet from its own lattice sites (identity on droplets,
    up to float tolerance)."""
    return Droplet(minimal_region(d.region.params, column_extremes(d.region.lattice_sites())))


def internally_spanned(d: Droplet, seeds, family: UpdateFamily,
                       params: GrowthParams) -> bool:
    """Is d the droplet of one of the span components of its own seeds?"""
    inside = {s for s in seeds if s in d}
    if not inside:
        return False
    droplets, _ = span(inside, family, params)
    target = canonical_droplet(d).region
    return any(regions_close(out.region, target) for out in droplets)


def extract_subdroplet(d: Droplet, seeds, family: UpdateFamily,
                       params: GrowthParams, k: float) -> Droplet:
    """An internally spanned sub-droplet with height in [k, 2k].

    Walks the merge tree below the component realising d, depth first with
    the taller child first, and returns the first node whose height falls in
    the window; the result is re-verified to be internally spanned.
    """
    if not 1.0 - TOL <= k <= d.height + TOL:
        raise ValueError(f"k={k} outside [1, h(d)={d.height}]")
    inside = {s for s in seeds if s in d}
    _, trace = span(inside, family, params)
    target = canonical_droplet(d).region
    root = next((r for r in trace.roots
                 if regions_close(r.component.droplet.region, target)), None)
    if root is None:
        raise ValueError("droplet is not internally spanned by the seeds")

    def dfs(node: SpanNode):
        if k - TOL <= node.height <= 2.0 * k + TOL:
            return node
        for child in sorted(node.children, key=lambda c: -c.height):
            found = dfs(child)
            if found is not None:
                return found
        return None

    found = dfs(root)
    if found is None:
        raise RuntimeError(f"no trace node with height in [{k}, {2 * k}]")
    sub = found.component.droplet
    if not internally_spanned(sub, seeds, family, params):
        raise RuntimeError("extracted sub-droplet failed the spanning re-check")
    return sub


def droplet_distance(d1: Droplet, d2: Droplet) -> int:
    """Minimum Chebyshev distance between the lattice sites of two droplets."""
    cols1 = {x: iv for x in d1.region.column_range()
             if (iv := d1.region.column_interval(x)) is not None}
    cols2 = {x: iv for x in d2.region.column_range()
             if (iv := d2.region.column_interval(x)) is not None}
    if not cols1 or not cols2:
        raise ValueError("empty droplet")
    xs2 = sorted(cols2)
    best = None
    for x1, (lo1, hi1) in cols1.items():
        for x2 in xs2:
            dx = abs(x1 - x2)
            if best is not None and dx >= best:
                if x2 > x1:
                    break
                continue
            lo2, hi2 = cols2[x2]
            gap = max(lo2 - hi1, lo1 - hi2, 0)
            dist = max(dx, gap)
            if best is None or dist < best:
                best = dist
    return best


@dataclass(frozen=True)
class CriticalPair:
    d1: Droplet
    d2: Droplet
    seeds1: frozenset[Site]
    seeds2: frozenset[Site]
    distance: int
    merged_height: float


def critical_pair(seeds, family: UpdateFamily, params: GrowthParams,
                  threshold: float, pad_cap: int = 2 ** 14) -> CriticalPair | None:
    """First merge whose result exceeds the height threshold.

    Returns the two pre-merge droplets (disjointly spanned, heights at most
    the threshold, combined heights at least threshold - 1, within distance
    2 for range-1 families), or None if no component ever gets that tall.
    """
    if threshold < 1.0:
        raise ValueError("threshold must be at least 1 (singleton height)")
    engine = _MergeEngine(seeds, family, params, pad_cap)
    for parent, na, nb in engine.merge_events():
        if parent.height > threshold:
            h1, h2 = na.height, nb.height
            if max(h1, h2) > threshold + TOL:
                raise RuntimeError("a pre-merge component already exceeded the threshold")
            if h1 + h2 < threshold - 1.0 - TOL:
                raise RuntimeError("combined pre-merge heights below threshold - 1")
            dist = droplet_distance(na.component.droplet, nb.component.droplet)
            if family.diameter == 1 and dist > 2:
                raise RuntimeError(f"critical pair at distance {dist} > 2")
            return CriticalPair(na.component.droplet, nb.component.droplet,
                                na.component.seeds, nb.component.seeds,
                                dist, parent.height)
    return None
