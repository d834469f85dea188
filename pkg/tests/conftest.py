from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from cplanar.conmulti import ConEdge, ConMultigraph
from cplanar.instance import build_instance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def plane(points, edges, labels, outer_face=None):
    """Instance from a straight-line drawing; rotations are clockwise by angle."""
    rot: dict[int, list[int]] = {v: [] for v in range(len(points))}
    for i, (u, v) in enumerate(edges):
        rot[u].append(i)
        rot[v].append(i)

    def angle(v, i):
        u, w = edges[i]
        x = w if u == v else u
        return -math.atan2(points[x][1] - points[v][1], points[x][0] - points[v][0])

    for v in rot:
        rot[v].sort(key=lambda i: angle(v, i))
    clusters: dict[str, list[int]] = {}
    for v, lab in enumerate(labels):
        clusters.setdefault(str(lab), []).append(v)
    return build_instance(range(len(points)), list(edges), rot, clusters, outer_face)


def cycle(labels):
    """The n-cycle drawn on a circle, vertex i labelled ``labels[i]``."""
    n = len(labels)
    pts = [(math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n)) for i in range(n)]
    return plane(pts, [(i, (i + 1) % n) for i in range(n)], labels)


def abstract_multigraph(vertex_cluster, edges, rotation, face_len=None, adj=None):
    """A con-edge multigraph without a host graph.

    ``edges`` maps an id to (cluster, u, v, face, p, q); ``rotation`` lists
    darts per vertex.  Conflicts follow from the chords unless ``adj`` is given.
    """
    ce = {
        e: ConEdge(e, f, (p, q), c, (u, v), (u, v))
        for e, (c, u, v, f, p, q) in edges.items()
    }
    if face_len is None:
        face_len = {}
        for c, u, v, f, p, q in edges.values():
            face_len[f] = max(face_len.get(f, 0), q + 1)
    return ConMultigraph(
        edges=ce,
        vertex_cluster=dict(vertex_cluster),
        rotation={v: list(r) for v, r in rotation.items()},
        face_len=face_len,
        adj={e: set(n) for e, n in adj.items()} if adj else {},
    )


@pytest.fixture
def triangle():
    pts = [(0, 1), (-1, -1), (1, -1)]
    return plane(pts, [(0, 1), (1, 2), (2, 0)], ["a", "b", "c"])
