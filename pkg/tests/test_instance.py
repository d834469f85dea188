from __future__ import annotations

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import cycle, plane
from cplanar.generate import GeneratorParams, gen_instance, suite_instance
from cplanar.instance import (
    InstanceError,
    build_instance,
    check_enclosure,
    check_per_face_limit,
    parse_instance,
)
from cplanar.oracle import oracle_enclosure

BIPYRAMID = [(0, 2), (-2, -1), (2, -1), (0, 0), (0, 5)]
BIPYRAMID_EDGES = [(0, 1), (1, 2), (2, 0), (3, 0), (3, 1), (3, 2), (4, 0), (4, 1), (4, 2)]


def test_triangle_has_two_faces(triangle):
    assert len(triangle.faces) == 2
    assert sorted(len(f) for f in triangle.faces) == [3, 3]


def test_path_has_one_face_with_repeated_middle():
    inst = plane([(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2)], ["a", "b", "c"])
    (face,) = inst.faces
    assert len(face) == 4
    assert face.vertices.count(1) == 2


def test_k5_rejected_for_random_rotations():
    edges = [(u, v) for u in range(5) for v in range(u + 1, 5)]
    rng = random.Random(5)
    for _ in range(25):
        rot = {v: [i for i, e in enumerate(edges) if v in e] for v in range(5)}
        for r in rot.values():
            rng.shuffle(r)
        with pytest.raises(InstanceError) as err:
            build_instance(range(5), edges, rot, {"a": (0, 1, 2, 3, 4)})
        assert err.value.kind == "nonplanar"


def test_disjoint_triangles_rejected():
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    rot = {v: [i for i, e in enumerate(edges) if v in e] for v in range(6)}
    with pytest.raises(InstanceError) as err:
        build_instance(range(6), edges, rot, {"a": tuple(range(6))})
    assert err.value.kind == "disconnected"
    assert err.value.exit_code == 2


@pytest.mark.parametrize(
    "doc, kind",
    [
        (b"not json", "malformed"),
        ({"vertices": [0]}, "malformed"),
        ({"vertices": [0, 1], "edges": [[0, 1]], "rotations": {"0": [0], "1": []},
          "clusters": {"a": [0, 1]}}, "rotation"),
        ({"vertices": [0, 1], "edges": [[0, 1]], "rotations": {"0": [0], "1": [0]},
          "clusters": {"a": [0]}}, "clusters"),
        ({"vertices": [0, 1], "edges": [[0, 1]], "rotations": {"0": [0], "1": [0]},
          "clusters": {"a": [0, 1], "b": [1]}}, "clusters"),
    ],
)
def test_parse_errors(doc, kind):
    if isinstance(doc, dict):
        doc = json.dumps(doc)
    with pytest.raises(InstanceError) as err:
        parse_instance(doc)
    assert err.value.kind == kind


def test_parse_round_trip(triangle):
    again = parse_instance(triangle.to_json().encode())
    assert again.to_json() == triangle.to_json()


def test_large_triangulation_satisfies_euler():
    inst = gen_instance(GeneratorParams(seed=3, min_vertices=50, max_vertices=50,
                                        max_clusters=50, min_clusters=50, edge_density=1.0))
    v, e, f = len(inst.vertices), len(inst.edges), len(inst.faces)
    assert f == e - v + 2
    assert sum(len(x) for x in inst.faces) == 2 * e


@given(st.integers(0, 10_000))
def test_faces_partition_darts(seed):
    inst = suite_instance(seed)
    darts = [o.out_dart for f in inst.faces for o in f.occurrences]
    assert sorted(darts) == list(range(2 * len(inst.edges)))
    assert len(inst.vertices) - len(inst.edges) + len(inst.faces) == 2


def test_face_ids_follow_lowest_dart():
    inst = suite_instance(11)
    lows = [min(f.darts) for f in inst.faces]
    assert lows == sorted(lows)


def test_alternating_face_is_within_limit():
    assert check_per_face_limit(cycle(["a", "b", "a", "b"])) == []


def test_three_same_cluster_vertices_violate_limit():
    inst = cycle(["a", "b", "a", "c", "a", "d"])
    found = check_per_face_limit(inst)
    assert {v.cluster for v in found} == {"a"}
    assert all(v.vertices == (0, 2, 4) for v in found)
    assert len(found) == 2  # inner and outer face


def test_generated_instances_respect_limit():
    for seed in range(100):
        inst = gen_instance(GeneratorParams(seed=seed))
        assert check_per_face_limit(inst) == []


def test_enclosed_vertex_restricts_outer_face():
    inst = plane(BIPYRAMID[:4], BIPYRAMID_EDGES[:6], ["a", "a", "a", "b"])
    ok = check_enclosure(inst)
    inside = {f.id for f in inst.faces if 3 in f.vertices}
    assert ok == inside
    assert ok == oracle_enclosure(inst)


def test_vertex_enclosed_on_both_sides_rejects_every_face():
    inst = plane(BIPYRAMID, BIPYRAMID_EDGES, ["a", "a", "a", "b", "c"])
    assert check_enclosure(inst) == set()
    assert oracle_enclosure(inst) == set()


def test_no_monochromatic_cycle_admits_every_face():
    inst = plane(BIPYRAMID, BIPYRAMID_EDGES, ["a", "b", "c", "a", "b"])
    assert check_enclosure(inst) == set(range(len(inst.faces)))


@given(st.integers(0, 10_000))
def test_enclosure_matches_cycle_enumeration(seed):
    inst = suite_instance(seed)
    assert check_enclosure(inst) == oracle_enclosure(inst)


@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_input_order_does_not_matter(seed, rnd):
    inst = suite_instance(seed)
    doc = inst.to_dict()
    perm = list(range(len(doc["edges"])))
    rnd.shuffle(perm)
    where = {old: new for new, old in enumerate(perm)}
    shuffled = {
        "vertices": list(reversed(doc["vertices"])),
        "edges": [doc["edges"][old] for old in perm],
        "rotations": {v: [where[e] for e in r] for v, r in reversed(doc["rotations"].items())},
        "clusters": dict(reversed(list(doc["clusters"].items()))),
    }
    again = parse_instance(json.dumps(shuffled))
    assert again.to_json() == inst.to_json()
    assert [f.vertices for f in again.faces] == [f.vertices for f in inst.faces]
    assert check_enclosure(again) == check_enclosure(inst)
