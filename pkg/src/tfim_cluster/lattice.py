"""Discretized space-time lattice, slit boxes, polymers and clusters.

Sites live on the integer lattice (x1 = spatial index, x2 = temporal index,
physical time = delta * x2).  A box covers a spatial interval Lambda and the
temporal levels -n/2 .. n/2 with n = beta/delta (n must be even so that the
time-0 row is on the grid).  The slit variant doubles the time-0 row over a
designated block into layers "slit_plus" / "slit_minus" and rewires the
adjacent edges.

A polymer is a connected subgraph such that every horizontal edge e carries
its closure graph G_e (e plus the two vertical edges to the sites one level
up), every maximal run of extra vertical edges forms a complete connecting
path between consecutive horizontal levels (or down to the bottom row / up
to the top row), and any polymer touching a temporal boundary row contains
that full row.  Compatibility of polymers is vertex-disjointness; a cluster
is a set of polymers whose incompatibility graph is connected.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

__all__ = [
    "Site",
    "Edge",
    "make_edge",
    "Box",
    "build_box",
    "Polymer",
    "Cluster",
    "g_of_edge",
    "is_polymer",
    "compatible",
    "enumerate_polymers",
    "enumerate_clusters",
    "polymer_to_json",
    "polymer_from_json",
    "cluster_to_json",
]

BULK = "bulk"
SLIT_PLUS = "slit_plus"
SLIT_MINUS = "slit_minus"


class Site(NamedTuple):
    x1: int
    x2: int
    layer: str = BULK


class Edge(NamedTuple):
    a: Site
    b: Site

    @property
    def is_vertical(self):
        return self.a.x1 == self.b.x1

    @property
    def is_horizontal(self):
        return not self.is_vertical


def make_edge(a, b):
    """Edge with canonically ordered endpoints."""
    if a == b:
        raise ValueError("degenerate edge")
    return Edge(a, b) if a < b else Edge(b, a)


@dataclass(frozen=True)
class Box:
    lam: tuple                 # contiguous spatial indices
    beta: float
    delta: float
    slit_block: tuple          # () when there is no slit
    sites: frozenset
    edges: frozenset           # edges with both endpoints in `sites`
    v_plus: frozenset          # sites one level above the top row
    v_plus_edges: frozenset    # vertical edges from the top row into v_plus
    boundary_plus: frozenset   # top row
    boundary_minus: frozenset  # bottom row
    boundary: frozenset        # temporal rows plus spatially adjacent columns

    @property
    def level_min(self):
        return -int(round(self.beta / self.delta)) // 2

    @property
    def level_max(self):
        return int(round(self.beta / self.delta)) // 2

    @property
    def polymer_edges(self):
        return self.edges | self.v_plus_edges

    @property
    def horizontal_edges(self):
        return frozenset(e for e in self.edges if e.is_horizontal)


def build_box(lambda_interval, beta, delta, slit_block=None):
    """Construct the box over Lambda x [-beta/2, beta/2] on the delta grid."""
    lam = tuple(sorted(int(x) for x in lambda_interval))
    if not lam:
        raise ValueError("empty spatial interval")
    if lam != tuple(range(lam[0], lam[-1] + 1)):
        raise ValueError("spatial interval must be contiguous")
    if beta <= 0 or delta <= 0:
        raise ValueError("beta and delta must be positive")
    n = beta / delta
    n_steps = int(round(n))
    if abs(n - n_steps) > 1e-9 or n_steps < 1:
        raise ValueError("beta must be an integral multiple of delta")
    if n_steps % 2:
        raise ValueError("beta/delta must be even so the time-0 row is on the grid")
    block = tuple(sorted(int(x) for x in slit_block)) if slit_block else ()
    if block and not set(block) <= set(lam):
        raise ValueError("slit block must lie inside the spatial interval")
    if block and block != tuple(range(block[0], block[-1] + 1)):
        raise ValueError("slit block must be contiguous")

    half = n_steps // 2
    levels = range(-half, half + 1)
    in_block = set(block)

    sites = set()
    for x1 in lam:
        for x2 in levels:
            if x2 == 0 and x1 in in_block:
                sites.add(Site(x1, 0, SLIT_PLUS))
                sites.add(Site(x1, 0, SLIT_MINUS))
            else:
                sites.add(Site(x1, x2))

    def site_at(x1, x2, approach):
        """Resolve (x1, x2) to a site; `approach` picks the slit copy."""
        if x2 == 0 and x1 in in_block:
            return Site(x1, 0, SLIT_PLUS if approach == "above" else SLIT_MINUS)
        return Site(x1, x2)

    edges = set()
    for x1 in lam:
        for x2 in range(-half, half):
            # the lower endpoint is approached from above, the upper from below
            edges.add(make_edge(site_at(x1, x2, "above"), site_at(x1, x2 + 1, "below")))
    for x1a, x1b in zip(lam[:-1], lam[1:]):
        for x2 in levels:
            if x2 == 0 and (x1a in in_block or x1b in in_block):
                # the time-0 row over the block is doubled; horizontal edges
                # at that level connect to both copies
                edges.add(make_edge(site_at(x1a, 0, "above"), site_at(x1b, 0, "above")))
                edges.add(make_edge(site_at(x1a, 0, "below"), site_at(x1b, 0, "below")))
            else:
                edges.add(make_edge(Site(x1a, x2), Site(x1b, x2)))

    v_plus = frozenset(Site(x1, half + 1) for x1 in lam)
    v_plus_edges = frozenset(make_edge(Site(x1, half), Site(x1, half + 1))
                             for x1 in lam)
    boundary_plus = frozenset(s for s in sites if s.x2 == half)
    boundary_minus = frozenset(s for s in sites if s.x2 == -half)
    side = frozenset(Site(x1, x2) for x1 in (lam[0] - 1, lam[-1] + 1)
                     for x2 in levels)
    return Box(lam=lam, beta=float(beta), delta=float(delta), slit_block=block,
               sites=frozenset(sites), edges=frozenset(edges),
               v_plus=v_plus, v_plus_edges=v_plus_edges,
               boundary_plus=boundary_plus, boundary_minus=boundary_minus,
               boundary=boundary_plus | boundary_minus | side)


@dataclass(frozen=True)
class Polymer:
    vertices: frozenset
    edges: frozenset

    def __post_init__(self):
        if not self.edges:
            raise ValueError("a polymer has at least one edge")
        covered = set()
        for e in self.edges:
            covered.update((e.a, e.b))
        if not covered <= self.vertices or not self.vertices <= covered:
            raise ValueError("vertex set must equal the set of edge endpoints")

    @property
    def norm(self):
        return len(self.edges)

    def sort_key(self):
        return (self.norm, tuple(sorted(self.vertices)))


@dataclass(frozen=True)
class Cluster:
    polymers: frozenset

    @property
    def total_norm(self):
        return sum(r.norm for r in self.polymers)


def g_of_edge(e, box):
    """Closure graph G_e of a horizontal edge: e plus the two vertical edges
    to the sites one time-step above its endpoints."""
    if e.is_vertical:
        raise ValueError("G_e is defined for horizontal edges only")
    if e not in box.edges:
        raise ValueError("edge does not belong to the box")
    if e.a.layer != BULK or e.b.layer != BULK:
        raise ValueError("slit-layer closures are not supported")
    up_a, up_b = Site(e.a.x1, e.a.x2 + 1), Site(e.b.x1, e.b.x2 + 1)
    allowed = box.sites | box.v_plus
    if up_a not in allowed or up_b not in allowed:
        raise ValueError("shifted vertices fall outside the box")
    vertices = frozenset((e.a, e.b, up_a, up_b))
    edges = frozenset((e, make_edge(e.a, up_a), make_edge(e.b, up_b)))
    return Polymer(vertices, edges)


def compatible(r1, r2):
    """Polymers are compatible iff their vertex sets are disjoint."""
    return not (r1.vertices & r2.vertices)


def _connected(vertices, edges):
    if not vertices:
        return False
    adj = {v: [] for v in vertices}
    for e in edges:
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    seen = set()
    stack = [next(iter(vertices))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v])
    return len(seen) == len(vertices)


def _column_segments(marked, lo, hi):
    """Complete vertical connecting paths available in one column.

    Each segment is the set of levels l such that the edge [l, l+1] belongs
    to the path.  `marked` holds the levels of horizontal-edge endpoints in
    the column; the edge [m, m+1] above each marked level is part of the
    closure graph and is not a segment.
    """
    segments = []
    ms = sorted(marked)
    if not ms:
        if hi > lo:
            segments.append(frozenset(range(lo, hi)))
        return segments
    if ms[0] > lo:
        segments.append(frozenset(range(lo, ms[0])))
    for m_a, m_b in zip(ms[:-1], ms[1:]):
        if m_b > m_a + 1:
            segments.append(frozenset(range(m_a + 1, m_b)))
    if ms[-1] + 1 < hi:
        segments.append(frozenset(range(ms[-1] + 1, hi)))
    return [s for s in segments if s]


def is_polymer(subgraph, box):
    """Predicate for the polymer conditions (connectivity, closures,
    vertical-path structure, temporal boundary rule)."""
    if box.slit_block:
        raise ValueError("polymer machinery is implemented for non-slit boxes")
    vertices, edges = subgraph.vertices, subgraph.edges
    if not edges:
        return False
    if not vertices <= box.sites | box.v_plus:
        return False
    if not edges <= box.polymer_edges:
        return False
    if not _connected(vertices, edges):
        return False

    horizontal = [e for e in edges if e.is_horizontal]
    for e in horizontal:
        g = g_of_edge(e, box)
        if not (g.vertices <= vertices and g.edges <= edges):
            return False

    # group vertical edges and horizontal endpoints by column
    lo, hi = box.level_min, box.level_max
    v_levels = {}
    marked = {}
    for e in edges:
        if e.is_vertical:
            v_levels.setdefault(e.a.x1, set()).add(min(e.a.x2, e.b.x2))
    for e in horizontal:
        for s in (e.a, e.b):
            marked.setdefault(s.x1, set()).add(s.x2)
    for x1, levels in v_levels.items():
        col_marked = marked.get(x1, set())
        extra = levels - {m for m in col_marked}
        remaining = set(extra)
        for seg in _column_segments(col_marked, lo, hi):
            if seg <= remaining:
                remaining -= seg
        if remaining:
            return False

    if vertices & (box.boundary_plus | box.boundary_minus):
        if not (box.boundary_plus <= vertices or box.boundary_minus <= vertices):
            return False
    return True


def enumerate_polymers(box, max_norm, count_ceiling=2_000_000):
    """All polymers of the box with norm <= max_norm, sorted by
    (norm, vertex list); deterministic."""
    if box.slit_block:
        raise ValueError("polymer machinery is implemented for non-slit boxes")
    if max_norm <= 0:
        return []
    lo, hi = box.level_min, box.level_max

    h_edges = sorted(box.horizontal_edges)
    # each horizontal edge brings at least two vertical closure edges
    max_h = max_norm // 3 + 1
    results = []
    work = 0
    for k in range(0, min(max_h, len(h_edges)) + 1):
        for chosen in combinations(h_edges, k):
            work += 1
            if work > count_ceiling:
                raise RuntimeError("enumeration count ceiling exceeded")
            vertices = set()
            edges = set()
            marked = {}
            for e in chosen:
                g = g_of_edge(e, box)
                vertices |= g.vertices
                edges |= g.edges
                for s in (e.a, e.b):
                    marked.setdefault(s.x1, set()).add(s.x2)
            if len(edges) > max_norm:
                continue
            # optional complete vertical connecting paths per column
            segment_pool = []
            if k > 0:
                for x1 in marked:
                    segment_pool.extend(
                        (x1, seg) for seg in _column_segments(marked[x1], lo, hi))
            elif len(box.lam) == 1:
                # bare full-column path (the only no-horizontal-edge polymer)
                segment_pool.append((box.lam[0], frozenset(range(lo, hi))))
            budget = max_norm - len(edges)
            usable = [s for s in segment_pool if len(s[1]) <= budget]
            for n_seg in range(0 if k > 0 else 1, len(usable) + 1):
                for segs in combinations(usable, n_seg):
                    work += 1
                    if work > count_ceiling:
                        raise RuntimeError("enumeration count ceiling exceeded")
                    seg_edges = set()
                    for x1, seg in segs:
                        for l in seg:
                            seg_edges.add(make_edge(Site(x1, l), Site(x1, l + 1)))
                    all_edges = edges | seg_edges
                    if len(all_edges) > max_norm:
                        continue
                    all_vertices = set(vertices)
                    for e in seg_edges:
                        all_vertices.update((e.a, e.b))
                    if not _connected(all_vertices, all_edges):
                        continue
                    poly = Polymer(frozenset(all_vertices), frozenset(all_edges))
                    if is_polymer(poly, box):
                        results.append(poly)
    results = sorted(set(results), key=Polymer.sort_key)
    return results


def enumerate_clusters(polymers, max_cluster_size):
    """All subsets of size <= max_cluster_size whose incompatibility graph
    is connected, in deterministic index order."""
    n = len(polymers)
    if len(set(polymers)) != n:
        raise ValueError("polymers must be pairwise distinct")
    incompat = [[not compatible(polymers[i], polymers[j]) for j in range(n)]
                for i in range(n)]
    clusters = []
    for size in range(1, max_cluster_size + 1):
        for idx in combinations(range(n), size):
            if _indices_connected(idx, incompat):
                clusters.append(Cluster(frozenset(polymers[i] for i in idx)))
    return clusters


def _indices_connected(idx, incompat):
    seen = {idx[0]}
    stack = [idx[0]]
    while stack:
        i = stack.pop()
        for j in idx:
            if j not in seen and incompat[i][j]:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(idx)


def _site_json(s):
    return [s.x1, s.x2, s.layer]


def polymer_to_json(poly):
    return {
        "vertices": [_site_json(s) for s in sorted(poly.vertices)],
        "edges": [[_site_json(e.a), _site_json(e.b)] for e in sorted(poly.edges)],
    }


def polymer_from_json(data):
    vertices = frozenset(Site(x1, x2, layer) for x1, x2, layer in data["vertices"])
    edges = frozenset(make_edge(Site(*a), Site(*b)) for a, b in data["edges"])
    return Polymer(vertices, edges)


def cluster_to_json(cluster):
    return {"polymers": [polymer_to_json(r)
                         for r in sorted(cluster.polymers, key=Polymer.sort_key)]}
