from __future__ import annotations

import math
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import abstract_multigraph, cycle, plane
from cplanar.conmulti import (
    ConEdge,
    build_con_multigraph,
    chords_cross,
    conflict_components,
    conflicts,
    facial_cycles,
    generate_con_edges,
    property1_violations,
    reduce_property1,
)
from cplanar.generate import suite_instance
from cplanar.maps import trace_face_walks
from cplanar.oracle import oracle_pssttm


def _face_with_order(inst, first, second):
    """The face whose boundary visits vertex ``second`` right after ``first``."""
    for f in inst.faces:
        vs = f.vertices
        i = vs.index(first)
        if vs[(i + 1) % len(vs)] == second:
            return f
    raise AssertionError("no such face")


def _edges_in(A, face, cluster):
    return [e for e, ce in A.edges.items() if ce.face == face and ce.cluster == cluster]


# -- con-edge generation --------------------------------------------------------


def test_one_con_edge_per_face_for_a_separated_pair():
    inst = cycle(["a", "b", "a", "c"])
    edges = generate_con_edges(inst)
    assert len(edges) == 2
    assert sorted(e.face for e in edges) == [0, 1]
    assert all(e.cluster == "a" and set(e.gverts) == {0, 2} for e in edges)


def test_repeated_occurrence_gives_parallel_con_edges():
    # v - w - u - z; u sits twice on the single face, v once
    inst = plane([(0, 0), (1, 0), (2, 0), (3, 0)], [(0, 1), (1, 2), (2, 3)], ["a", "b", "a", "c"])
    edges = [e for e in generate_con_edges(inst) if e.cluster == "a"]
    assert len(edges) == 2
    assert all(set(e.gverts) == {0, 2} for e in edges)
    assert len({e.occ for e in edges}) == 2


def test_connected_clusters_give_no_con_edges(triangle):
    assert generate_con_edges(triangle) == []
    inst = cycle(["a", "a", "b", "b"])
    assert build_con_multigraph(inst).edges == {}


def test_con_edge_ids_are_ordered_by_face_and_occurrence():
    for seed in range(30):
        edges = generate_con_edges(suite_instance(seed))
        keys = [(e.face, *e.occ) for e in edges]
        assert keys == sorted(keys)
        assert [e.id for e in edges] == list(range(len(edges)))


# -- conflicts --------------------------------------------------------------------


def test_alternating_chords_cross():
    assert chords_cross(0, 2, 1, 3)
    assert not chords_cross(0, 1, 2, 3)
    assert not chords_cross(0, 3, 1, 2)


def test_shared_occurrence_is_not_a_conflict():
    e = ConEdge(0, 0, (0, 2), "a", (0, 1), (0, 1))
    f = ConEdge(1, 0, (0, 3), "b", (2, 3), (2, 3))
    assert not conflicts(e, f)


def test_different_faces_never_conflict():
    e = ConEdge(0, 0, (0, 2), "a", (0, 1), (0, 1))
    f = ConEdge(1, 1, (1, 3), "b", (2, 3), (2, 3))
    assert not conflicts(e, f)


def _segments_cross(p, q, r, s, n):
    """Straight chords between points on a circle intersect in their interiors."""
    if len({p, q, r, s}) < 4:
        return False
    pt = [(math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n)) for i in (p, q, r, s)]

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    a, b, c, d = pt
    return orient(a, b, c) * orient(a, b, d) < 0 and orient(c, d, a) * orient(c, d, b) < 0


@given(st.integers(0, 10_000))
def test_conflicts_match_chord_geometry(seed):
    inst = suite_instance(seed)
    A = build_con_multigraph(inst)
    for f in inst.faces:
        ids = [e for e, ce in A.edges.items() if ce.face == f.id]
        expect = sum(
            _segments_cross(*A.edges[x].occ, *A.edges[y].occ, len(f)) for x, y in combinations(ids, 2)
        )
        got = sum(1 for x, y in combinations(ids, 2) if y in A.adj[x])
        assert got == expect
    for x, ns in A.adj.items():
        assert x not in ns
        assert all(x in A.adj[y] for y in ns)


# -- crossing order and sides -------------------------------------------------------


def test_crossing_order_follows_the_arc():
    # alpha at 0,4; beta at 1,5; gamma at 3,6
    inst = cycle(["a", "b", "x", "c", "a", "b", "c", "y"])
    A = build_con_multigraph(inst)
    f = _face_with_order(inst, 0, 1)
    (e,) = _edges_in(A, f.id, "a")
    d = 2 * e if A.edges[e].gverts[0] == 0 else 2 * e + 1
    assert [A.edges[g].cluster for g in A.crossing_order(d)] == ["b", "c"]


@pytest.mark.parametrize("first", [0, 1])
def test_crossing_order_reverses_with_direction(first):
    # alpha at 0,4; beta at 1,6; gamma at 3,5 (the crossers are nested)
    inst = cycle(["a", "b", "x", "c", "a", "c", "b", "y"])
    A = build_con_multigraph(inst)
    for f in inst.faces:
        (e,) = _edges_in(A, f.id, "a")
        forward = A.crossing_order(2 * e + first)
        backward = A.crossing_order(2 * e + 1 - first)
        assert len(forward) == 2
        assert backward == forward[::-1]


def test_crossing_order_empty_without_crossings():
    inst = cycle(["a", "b", "a", "c"])
    A = build_con_multigraph(inst)
    assert all(A.crossing_order(d) == [] for e in A.edges for d in (2 * e, 2 * e + 1))


def test_side_of_splits_by_arc():
    # alpha chord 0-4, beta chord 1-3 on one side, gamma chord 5-7 on the other
    inst = cycle(["a", "b", "x", "b", "a", "c", "y", "c"])
    A = build_con_multigraph(inst)
    f = _face_with_order(inst, 0, 1)
    (e,) = _edges_in(A, f.id, "a")
    (gb,) = _edges_in(A, f.id, "b")
    (gc,) = _edges_in(A, f.id, "c")
    assert A.side_of(e, gb) == 2 * e + 1
    assert A.side_of(e, gc) == 2 * e
    with pytest.raises(ValueError):
        A.side_of(e, next(x for x in A.edges if A.edges[x].face != f.id))


@given(st.integers(0, 10_000))
def test_side_of_matches_point_location(seed):
    A = build_con_multigraph(suite_instance(seed))
    for e, g in combinations(sorted(A.edges), 2):
        ce, cg = A.edges[e], A.edges[g]
        if ce.face != cg.face or g in A.adj[e] or set(cg.occ) == set(ce.occ):
            continue
        n = A.face_len[ce.face]
        # positions clockwise on the unit circle
        pos = {i: (math.cos(-2 * math.pi * i / n), math.sin(-2 * math.pi * i / n)) for i in range(n)}
        a, b = pos[ce.occ[0]], pos[ce.occ[1]]
        mid = [(pos[cg.occ[0]][k] + pos[cg.occ[1]][k]) / 2 for k in (0, 1)]
        cross = (b[0] - a[0]) * (mid[1] - a[1]) - (b[1] - a[1]) * (mid[0] - a[0])
        assert A.side_of(e, g) == (2 * e if cross < 0 else 2 * e + 1)


# -- the embedded multigraph ---------------------------------------------------------


def test_single_con_edge_multigraph():
    inst = plane([(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2)], ["a", "b", "a"])
    A = build_con_multigraph(inst)
    assert len(A.cluster_edges("a")) == 1
    assert len(A.cluster_vertices("a")) == 2


@given(st.integers(0, 10_000))
def test_connected_cluster_multigraphs_are_plane(seed):
    # raw A[alpha] may hold crossing parallels; the reduction removes them
    A = reduce_property1(build_con_multigraph(suite_instance(seed)))[0]
    for name in A.clusters:
        verts, edges = A.cluster_vertices(name), A.cluster_edges(name)
        if not edges:
            continue
        seen = {verts[0]}
        frontier = [verts[0]]
        while frontier:
            x = frontier.pop()
            for e in edges:
                u, v = A.endpoints(e)
                for a, b in ((u, v), (v, u)):
                    if a == x and b not in seen:
                        seen.add(b)
                        frontier.append(b)
        if len(seen) != len(verts):
            continue
        faces = trace_face_walks(A.cluster_rotation(name), rev=lambda d: d ^ 1)
        assert len(verts) - len(edges) + len(faces) == 2


# -- facial cycles -----------------------------------------------------------------


def _abstract(n, edge_list, rotation):
    edges = {i: ("a", u, v, i, 0, 1) for i, (u, v) in enumerate(edge_list)}
    return abstract_multigraph({v: "a" for v in range(n)}, edges, rotation)


def test_four_cycle_has_two_facial_cycles():
    A = _abstract(4, [(0, 1), (1, 2), (2, 3), (3, 0)], {0: [0, 7], 1: [1, 2], 2: [3, 4], 3: [5, 6]})
    cyc = facial_cycles(A, "a")
    assert len(cyc) == 2
    assert all(sorted(c.edges) == [0, 1, 2, 3] for c in cyc)


def test_tree_has_no_facial_cycles():
    A = _abstract(3, [(0, 1), (1, 2)], {0: [0], 1: [1, 2], 2: [3]})
    assert facial_cycles(A, "a") == []


def test_bowtie_has_four_facial_cycles():
    A = _abstract(
        5,
        [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)],
        {0: [0, 5, 6, 11], 1: [1, 2], 2: [3, 4], 3: [7, 8], 4: [9, 10]},
    )
    assert len(facial_cycles(A, "a")) == 4


def _brute_facial_cycles(A, name):
    edges = A.cluster_edges(name)
    rot = A.cluster_rotation(name)
    walks = trace_face_walks(rot, rev=lambda d: d ^ 1)
    count = 0
    for r in range(1, len(edges) + 1):
        for sub in combinations(edges, r):
            deg: dict[int, int] = {}
            for e in sub:
                for v in A.endpoints(e):
                    deg[v] = deg.get(v, 0) + 1
            if any(x != 2 for x in deg.values()):
                continue
            # connected
            verts = list(deg)
            seen = {verts[0]}
            grow = True
            while grow:
                grow = False
                for e in sub:
                    u, v = A.endpoints(e)
                    if (u in seen) != (v in seen):
                        seen |= {u, v}
                        grow = True
            if len(seen) != len(verts):
                continue
            count += sum(1 for w in walks if set(sub) <= {d >> 1 for d in w})
    return count


@given(st.integers(0, 10_000))
def test_facial_cycles_match_enumeration(seed):
    A = reduce_property1(build_con_multigraph(suite_instance(seed)))[0]
    for name in A.clusters:
        if len(A.cluster_edges(name)) > 12:
            continue
        assert len(facial_cycles(A, name)) == _brute_facial_cycles(A, name)


# -- reduction to one con-edge per cluster per conflict component ----------------------


def _pendant_quad(labels):
    """Quadrilateral u-y-v-w with a pendant x at u pointing inwards."""
    pts = [(0, 0), (1, 0), (2, 1), (3, 0), (2, -1)]  # u x y v w
    edges = [(0, 1), (0, 2), (2, 3), (3, 4), (4, 0)]
    return plane(pts, edges, labels)


def test_separated_con_edge_is_removed():
    # boundary u x u y v w: the rho chord from the second u crosses the only tau chord
    inst = _pendant_quad(["r", "t", "t", "r", "s"])
    A = build_con_multigraph(inst)
    (tau,) = A.cluster_edges("t")
    inner = [e for e in A.cluster_edges("r") if A.edges[e].face == A.edges[tau].face]
    assert len(inner) == 2
    crossed = [e for e in inner if tau in A.adj[e]]
    assert len(crossed) == 1
    reduced, log = reduce_property1(A)
    assert ("separated", crossed[0]) in log
    assert crossed[0] not in reduced.edges
    assert all(e in reduced.edges for e in inner if e != crossed[0])


def test_parallel_twin_is_removed():
    # 4-cycle u x v y with a pendant a at u inside: two inner rho chords cross the same tau chord
    pts = [(0, 0), (2, 1), (4, 0), (2, -1), (1, 0)]  # u x v y a
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)]
    inst = plane(pts, edges, ["r", "t", "r", "t", "s"])
    A = build_con_multigraph(inst)
    reduced, log = reduce_property1(A)
    assert [step for step, _ in log] == ["dominated"]
    assert len(reduced.cluster_edges("r")) == len(A.cluster_edges("r")) - 1
    assert property1_violations(reduced) == []


def test_reduction_leaves_empty_multigraph_alone(triangle):
    A = build_con_multigraph(triangle)
    reduced, log = reduce_property1(A)
    assert log == [] and reduced.edges == {}


@given(st.integers(0, 10_000))
def test_reduction_preserves_verdict_and_separates_clusters(seed):
    A = build_con_multigraph(suite_instance(seed))
    reduced, _ = reduce_property1(A)
    assert property1_violations(reduced) == []
    for comp in conflict_components(reduced.adj):
        clusters = [reduced.edges[e].cluster for e in comp]
        assert len(clusters) == len(set(clusters))
    if len(A.edges) <= 24:
        assert oracle_pssttm(A.to_problem()).accepted == oracle_pssttm(reduced.to_problem()).accepted
