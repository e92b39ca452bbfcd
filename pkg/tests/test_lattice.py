import pytest

from tfim_cluster.lattice import (BULK, SLIT_MINUS, SLIT_PLUS, Cluster,
                                  Polymer, Site, build_box, compatible,
                                  cluster_to_json, enumerate_clusters,
                                  enumerate_polymers, g_of_edge, is_polymer,
                                  make_edge, polymer_from_json,
                                  polymer_to_json)


# ---------------------------------------------------------------- boxes

def test_smallest_box():
    box = build_box({0}, 2.0, 1.0)
    assert len(box.sites) == 3
    assert box.boundary_plus == frozenset({Site(0, 1)})
    assert box.boundary_minus == frozenset({Site(0, -1)})
    assert len(box.edges) == 2  # the two vertical edges of the column


def test_slit_doubles_time_zero_row():
    box = build_box({0, 1}, 2.0, 1.0, slit_block={0, 1})
    assert len(box.sites) == 8
    plus_edge = make_edge(Site(0, 0, SLIT_PLUS), Site(1, 0, SLIT_PLUS))
    minus_edge = make_edge(Site(0, 0, SLIT_MINUS), Site(1, 0, SLIT_MINUS))
    assert plus_edge in box.edges and minus_edge in box.edges
    assert Site(0, 0, BULK) not in box.sites


def test_box_validation():
    with pytest.raises(ValueError):
        build_box({0}, 1.5, 1.0)
    with pytest.raises(ValueError):
        build_box([], 2.0, 1.0)
    with pytest.raises(ValueError):
        build_box({0, 2}, 2.0, 1.0)
    with pytest.raises(ValueError):
        build_box({0}, 2.0, 1.0, slit_block={1})


def _degree_map(box):
    deg = {}
    for e in box.edges:
        for s in (e.a, e.b):
            deg[s] = deg.get(s, 0) + 1
    return deg


def test_slit_bookkeeping_hand_table():
    """Doubling the time-0 row over a block of length l adds exactly l
    sites; degrees follow the rewiring rules (hand-checked for l <= 3)."""
    base = build_box(range(3), 2.0, 1.0)
    for block in ({1}, {0, 1}, {0, 1, 2}):
        box = build_box(range(3), 2.0, 1.0, slit_block=block)
        assert len(box.sites) == len(base.sites) + len(block)
        deg = _degree_map(box)
        for x1 in range(3):
            if x1 in block:
                for layer in (SLIT_PLUS, SLIT_MINUS):
                    s = Site(x1, 0, layer)
                    # one vertical neighbor plus every spatial neighbor
                    spatial = sum(1 for y in (x1 - 1, x1 + 1) if 0 <= y <= 2)
                    assert deg[s] == 1 + spatial
            else:
                s = Site(x1, 0, BULK)
                expected = 2  # two vertical neighbors
                for y in (x1 - 1, x1 + 1):
                    if not 0 <= y <= 2:
                        continue
                    expected += 2 if y in block else 1
                assert deg[s] == expected


# ---------------------------------------------------------------- G_e

def test_g_of_edge_basic():
    box = build_box(range(2), 4.0, 1.0)
    e = make_edge(Site(0, 0), Site(1, 0))
    g = g_of_edge(e, box)
    assert len(g.vertices) == 4 and len(g.edges) == 3
    assert Site(0, 1) in g.vertices and Site(1, 1) in g.vertices
    n_h = sum(1 for ed in g.edges if ed.is_horizontal)
    assert n_h == 1


def test_g_of_edge_top_row_into_v_plus():
    box = build_box(range(2), 2.0, 1.0)
    e = make_edge(Site(0, 1), Site(1, 1))
    g = g_of_edge(e, box)
    assert Site(0, 2) in box.v_plus
    assert g.vertices & box.v_plus == frozenset({Site(0, 2), Site(1, 2)})


def test_g_of_edge_errors():
    box = build_box(range(2), 2.0, 1.0)
    with pytest.raises(ValueError):
        g_of_edge(make_edge(Site(0, 0), Site(0, 1)), box)  # vertical
    with pytest.raises(ValueError):
        g_of_edge(make_edge(Site(5, 0), Site(6, 0)), box)  # outside


# ---------------------------------------------------------------- polymers

def test_is_polymer_single_g():
    box = build_box(range(2), 4.0, 1.0)
    g = g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box)
    assert is_polymer(g, box)


def test_is_polymer_disconnected_union():
    box = build_box(range(4), 4.0, 1.0)
    g1 = g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box)
    g2 = g_of_edge(make_edge(Site(2, -1), Site(3, -1)), box)
    union = Polymer(g1.vertices | g2.vertices, g1.edges | g2.edges)
    assert not is_polymer(union, box)


def test_is_polymer_closure_violation_three_columns():
    # connect two stacked closure graphs through a horizontal edge whose
    # own closure graph is not included: must be rejected
    box = build_box(range(3), 6.0, 1.0)
    g1 = g_of_edge(make_edge(Site(0, -1), Site(1, -1)), box)
    g2 = g_of_edge(make_edge(Site(1, 1), Site(2, 1)), box)
    bridge = make_edge(Site(1, 0), Site(2, 0))  # closure graph omitted
    vertices = g1.vertices | g2.vertices | {Site(2, 0)}
    edges = g1.edges | g2.edges | {bridge,
                                   make_edge(Site(2, 0), Site(2, 1))}
    assert not is_polymer(Polymer(frozenset(vertices), frozenset(edges)), box)


def test_is_polymer_dangling_vertical_rejected():
    box = build_box(range(2), 6.0, 1.0)
    g = g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box)
    dangle = make_edge(Site(0, 1), Site(0, 2))
    poly = Polymer(g.vertices | {Site(0, 2)}, g.edges | {dangle})
    assert not is_polymer(poly, box)


def test_compatible_properties():
    box = build_box(range(4), 4.0, 1.0)
    g1 = g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box)
    g2 = g_of_edge(make_edge(Site(1, 0), Site(2, 0)), box)   # shares (1, *)
    g3 = g_of_edge(make_edge(Site(0, -1), Site(1, -1)), box)  # shares (0,0)
    far = g_of_edge(make_edge(Site(2, -1), Site(3, -1)), box)  # columns 2,3
    assert not compatible(g1, g1)
    assert not compatible(g1, g2)
    assert not compatible(g2, g3)   # g3 reaches up into level 0
    assert not compatible(g1, g3)
    assert compatible(g1, far)
    assert compatible(far, g1)  # symmetry


# ---------------------------------------------------------------- enumeration

def test_enumerate_two_column_box():
    # beta=2, delta=1: two columns, levels -1..1, one closure graph per
    # horizontal-edge level (in this tiny box each one touches a boundary
    # row but always covers it completely)
    box = build_box(range(2), 2.0, 1.0)
    polys = enumerate_polymers(box, 3)
    assert len(polys) == 3
    assert all(p.norm == 3 for p in polys)
    assert all(is_polymer(p, box) for p in polys)
    levels = sorted(min(e.a.x2, e.b.x2) for p in polys for e in p.edges
                    if e.is_horizontal)
    assert levels == [-1, 0, 1]
    assert g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box) in polys


def test_enumerate_empty_and_deterministic():
    box = build_box(range(3), 4.0, 1.0)
    assert enumerate_polymers(box, 0) == []
    a = enumerate_polymers(box, 5)
    b = enumerate_polymers(box, 5)
    assert a == b


def test_enumerate_monotone():
    small = build_box(range(2), 4.0, 1.0)
    big = build_box(range(3), 4.0, 1.0)
    n_prev = 0
    for n in range(0, 7):
        cur = len(enumerate_polymers(small, n))
        assert cur >= n_prev
        n_prev = cur
    assert len(enumerate_polymers(big, 5)) >= len(enumerate_polymers(small, 5))


def test_enumerate_single_column_full_path():
    box = build_box({0}, 2.0, 1.0)
    polys = enumerate_polymers(box, 3)
    assert len(polys) == 1
    assert polys[0].norm == 2
    assert box.boundary_plus <= polys[0].vertices
    assert box.boundary_minus <= polys[0].vertices


def test_enumeration_ceiling():
    box = build_box(range(3), 4.0, 1.0)
    with pytest.raises(RuntimeError):
        enumerate_polymers(box, 5, count_ceiling=3)


# ---------------------------------------------------------------- clusters

def _three_chain(box):
    a = g_of_edge(make_edge(Site(0, 0), Site(1, 0)), box)
    b = g_of_edge(make_edge(Site(1, 0), Site(2, 0)), box)
    c = g_of_edge(make_edge(Site(2, 0), Site(3, 0)), box)
    return a, b, c


def test_clusters_examples():
    box = build_box(range(4), 4.0, 1.0)
    a, b, c = _three_chain(box)
    # a ~ c compatible, both incompatible with b
    assert compatible(a, c) and not compatible(a, b) and not compatible(b, c)
    singles = enumerate_clusters([a, c], 2)
    assert len(singles) == 2  # compatible pair: only singletons

    pair = enumerate_clusters([a, b], 2)
    assert len(pair) == 3     # two singletons plus the incompatible pair

    chain = enumerate_clusters([a, b, c], 3)
    sets = [frozenset(cl.polymers) for cl in chain]
    assert frozenset({a, b, c}) in sets
    assert frozenset({a, c}) not in sets
    for cl in chain:
        members = list(cl.polymers)
        # independent connectivity check of the incompatibility graph
        seen = {0}
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in range(len(members)):
                if j not in seen and not compatible(members[i], members[j]):
                    seen.add(j)
                    frontier.append(j)
        assert len(seen) == len(members)


def test_cluster_total_norm():
    box = build_box(range(4), 4.0, 1.0)
    a, b, _ = _three_chain(box)
    assert Cluster(frozenset({a, b})).total_norm == a.norm + b.norm


def test_polymer_json_roundtrip():
    box = build_box(range(3), 4.0, 1.0)
    for poly in enumerate_polymers(box, 5):
        again = polymer_from_json(polymer_to_json(poly))
        assert again == poly
    cl = Cluster(frozenset(enumerate_polymers(box, 3)[:2]))
    blob = cluster_to_json(cl)
    assert len(blob["polymers"]) == 2
