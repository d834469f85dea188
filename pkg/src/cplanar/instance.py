"""Embedded flat clustered graphs: parsing, validation and face structure.

Edge ``i`` with endpoints ``(u, v)`` owns two darts: ``2*i`` leaving ``u``
and ``2*i + 1`` leaving ``v``.  For a self-loop the first listing of ``i`` in
the rotation of its vertex is dart ``2*i``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable

from .maps import UnionFind, blocks, trace_face_walks

EXIT_INVALID = 2
EXIT_FACE_LIMIT = 3


class InstanceError(ValueError):
    """Input rejected during parsing or validation.

    ``kind`` is one of ``malformed``, ``rotation``, ``clusters``,
    ``disconnected`` or ``nonplanar``.
    """

    exit_code = EXIT_INVALID

    def __init__(self, kind: str, message: str) -> None:
        super().__init__(f"{kind}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class Occurrence:
    vertex: int
    in_dart: int | None
    out_dart: int | None


@dataclass(frozen=True)
class Face:
    id: int
    occurrences: tuple[Occurrence, ...]

    def __len__(self) -> int:
        return len(self.occurrences)

    @property
    def vertices(self) -> list[int]:
        return [o.vertex for o in self.occurrences]

    @property
    def darts(self) -> list[int]:
        return [o.out_dart for o in self.occurrences if o.out_dart is not None]


@dataclass(frozen=True)
class FaceLimitViolation:
    face: int
    cluster: str
    vertices: tuple[int, ...]


@dataclass(eq=False)
class EmbeddedClusteredInstance:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    rotations: dict[int, tuple[int, ...]]
    clusters: dict[str, tuple[int, ...]]
    outer_face: Any = None
    cluster_of: dict[int, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.cluster_of = {v: name for name, vs in self.clusters.items() for v in vs}

    # -- darts -------------------------------------------------------------
    def tail(self, d: int) -> int:
        return self.edges[d >> 1][d & 1]

    def head(self, d: int) -> int:
        return self.edges[d >> 1][1 - (d & 1)]

    @cached_property
    def dart_rotation(self) -> dict[int, list[int]]:
        rot: dict[int, list[int]] = {}
        for v in self.vertices:
            darts = []
            seen_loop: set[int] = set()
            for e in self.rotations[v]:
                u, w = self.edges[e]
                if u == w:
                    darts.append(2 * e + (1 if e in seen_loop else 0))
                    seen_loop.add(e)
                else:
                    darts.append(2 * e if u == v else 2 * e + 1)
            rot[v] = darts
        return rot

    @cached_property
    def faces(self) -> list[Face]:
        return trace_faces(self)

    @cached_property
    def face_of_dart(self) -> dict[int, int]:
        return {o.out_dart: f.id for f in self.faces for o in f.occurrences}

    # -- clusters ------------------------------------------------------------
    @cached_property
    def cluster_components(self) -> dict[int, int]:
        """Map each vertex to the least vertex of its component in G[cluster]."""
        uf = UnionFind(self.vertices)
        for u, v in self.edges:
            if self.cluster_of[u] == self.cluster_of[v]:
                uf.union(u, v)
        return {v: uf.find(v) for v in self.vertices}

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "rotations": {str(v): list(r) for v, r in self.rotations.items()},
            "clusters": {k: list(v) for k, v in self.clusters.items()},
        }
        if self.outer_face is not None:
            doc["outer_face"] = self.outer_face
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _as_int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, str) and x.lstrip("-").isdigit():
            return int(x)
        raise InstanceError("malformed", f"{what} must be an integer, got {x!r}")
    return x


def parse_instance(doc: bytes | str | dict) -> EmbeddedClusteredInstance:
    """Parse and fully validate an instance document."""
    if isinstance(doc, (bytes, bytearray)):
        try:
            doc = doc.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceError("malformed", "document is not UTF-8") from exc
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InstanceError("malformed", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("malformed", "top level must be an object")
    for key in ("vertices", "edges", "rotations", "clusters"):
        if key not in doc:
            raise InstanceError("malformed", f"missing field {key!r}")

    vertices = [_as_int(v, "vertex") for v in doc["vertices"]]
    if len(set(vertices)) != len(vertices):
        raise InstanceError("malformed", "duplicate vertex ids")
    if not vertices:
        raise InstanceError("malformed", "no vertices")
    vset = set(vertices)

    raw_edges = []
    for e in doc["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise InstanceError("malformed", f"edge must be a pair, got {e!r}")
        u, v = _as_int(e[0], "edge endpoint"), _as_int(e[1], "edge endpoint")
        if u not in vset or v not in vset:
            raise InstanceError("malformed", f"edge {e!r} uses an unknown vertex")
        raw_edges.append((u, v))

    if not isinstance(doc["rotations"], dict):
        raise InstanceError("malformed", "rotations must be an object")
    raw_rot: dict[int, list[int]] = {}
    for k, r in doc["rotations"].items():
        v = _as_int(k, "rotation key")
        if v not in vset:
            raise InstanceError("rotation", f"rotation given for unknown vertex {v}")
        raw_rot[v] = [_as_int(x, "rotation entry") for x in r]

    if not isinstance(doc["clusters"], dict):
        raise InstanceError("malformed", "clusters must be an object")
    clusters: dict[str, tuple[int, ...]] = {}
    owner: dict[int, str] = {}
    for name in sorted(doc["clusters"]):
        members = [_as_int(x, "cluster member") for x in doc["clusters"][name]]
        if not members:
            raise InstanceError("clusters", f"cluster {name!r} is empty")
        for v in members:
            if v not in vset:
                raise InstanceError("clusters", f"cluster {name!r} has unknown vertex {v}")
            if v in owner:
                raise InstanceError("clusters", f"vertex {v} in clusters {owner[v]!r} and {name!r}")
            owner[v] = name
        clusters[str(name)] = tuple(sorted(members))
    missing = vset - owner.keys()
    if missing:
        raise InstanceError("clusters", f"vertices without a cluster: {sorted(missing)}")

    return build_instance(vertices, raw_edges, raw_rot, clusters, doc.get("outer_face"))


def build_instance(
    vertices: Iterable[int],
    edges: list[tuple[int, int]],
    rotations: dict[int, list[int]],
    clusters: dict[str, tuple[int, ...]],
    outer_face: Any = None,
) -> EmbeddedClusteredInstance:
    """Canonicalise edge ids, then validate every instance invariant."""
    vertices = sorted(vertices)
    # canonical edge ids: sort by endpoints, parallel edges by their place in
    # the rotation of the smaller endpoint
    place: dict[int, int] = {}
    for v in sorted(rotations):
        for k, e in enumerate(rotations[v]):
            if isinstance(e, int) and 0 <= e < len(edges) and min(edges[e]) == v:
                place.setdefault(e, k)
    order = sorted(
        range(len(edges)),
        key=lambda i: (min(edges[i]), max(edges[i]), place.get(i, len(edges)), i),
    )
    new_id = {old: new for new, old in enumerate(order)}
    canon_edges = tuple(tuple(edges[old]) for old in order)

    rot: dict[int, tuple[int, ...]] = {}
    for v in vertices:
        if v not in rotations:
            raise InstanceError("rotation", f"vertex {v} has no rotation")
        try:
            rot[v] = tuple(new_id[e] for e in rotations[v])
        except KeyError as exc:
            raise InstanceError("rotation", f"vertex {v} lists unknown edge {exc.args[0]}") from None

    seen: dict[int, list[int]] = defaultdict(list)
    for v in vertices:
        for e in rot[v]:
            seen[e].append(v)
    for e, (u, w) in enumerate(canon_edges):
        expected = sorted([u, w])
        if sorted(seen.get(e, [])) != expected:
            raise InstanceError(
                "rotation",
                f"edge {list(canon_edges[e])} must appear once in the rotation of each endpoint",
            )

    inst = EmbeddedClusteredInstance(
        vertices=tuple(vertices),
        edges=canon_edges,
        rotations=rot,
        clusters=dict(sorted(clusters.items())),
        outer_face=outer_face,
    )

    uf = UnionFind(vertices)
    for u, w in canon_edges:
        uf.union(u, w)
    if len({uf.find(v) for v in vertices}) != 1:
        raise InstanceError("disconnected", "underlying graph is not connected")

    nfaces = len(inst.faces)
    if len(vertices) - len(canon_edges) + nfaces != 2:
        raise InstanceError(
            "nonplanar",
            f"V - E + F = {len(vertices)} - {len(canon_edges)} + {nfaces} != 2",
        )
    return inst


def trace_faces(inst: EmbeddedClusteredInstance) -> list[Face]:
    """Faces of the embedding, each a clockwise cyclic list of occurrences."""
    if not inst.edges:
        (v,) = inst.vertices
        return [Face(0, (Occurrence(v, None, None),))]
    walks = trace_face_walks(inst.dart_rotation, rev=lambda d: d ^ 1)
    faces = []
    for fid, walk in enumerate(walks):
        occ = tuple(
            Occurrence(inst.tail(d), walk[k - 1], d) for k, d in enumerate(walk)
        )
        faces.append(Face(fid, occ))
    return faces


def check_per_face_limit(
    inst: EmbeddedClusteredInstance, faces: list[Face] | None = None, limit: int = 2
) -> list[FaceLimitViolation]:
    """Every (face, cluster) pair seeing more than ``limit`` distinct vertices."""
    faces = inst.faces if faces is None else faces
    out = []
    for f in faces:
        per: dict[str, set[int]] = defaultdict(set)
        for v in f.vertices:
            per[inst.cluster_of[v]].add(v)
        for name in sorted(per):
            if len(per[name]) > limit:
                out.append(FaceLimitViolation(f.id, name, tuple(sorted(per[name]))))
    return out


def _regions(inst: EmbeddedClusteredInstance, barrier: set[int]) -> list[set[int]]:
    """Group G-faces into regions of the plane cut along the edges in ``barrier``."""
    uf = UnionFind(range(len(inst.faces)))
    fod = inst.face_of_dart
    for e in range(len(inst.edges)):
        if e not in barrier:
            uf.union(fod[2 * e], fod[2 * e + 1])
    return [set(g) for g in uf.groups().values()]


def check_enclosure(
    inst: EmbeddedClusteredInstance, faces: list[Face] | None = None
) -> set[int]:
    """Faces that can be the outer face without a monochromatic cycle enclosing
    a vertex of another cluster.

    Every simple cycle of ``G[alpha]`` bounds a union of faces of its block, so
    only the facial cycles of each block need checking.
    """
    faces = inst.faces if faces is None else faces
    admissible = set(range(len(faces)))
    if not inst.edges:
        return admissible
    verts_of_face = [set(f.vertices) for f in faces]

    for name, members in inst.clusters.items():
        mset = set(members)
        intra = {
            e: uv for e, uv in enumerate(inst.edges) if uv[0] in mset and uv[1] in mset
        }
        if not intra:
            continue
        label = blocks(intra)
        by_block: dict[int, set[int]] = defaultdict(set)
        for e, b in label.items():
            by_block[b].add(e)
        for block_edges in by_block.values():
            block_verts = {v for e in block_edges for v in inst.edges[e]}
            regions = _regions(inst, block_edges)
            if len(regions) < 2:
                continue  # a lone bridge encloses nothing
            for region in regions:
                touched = set().union(*(verts_of_face[f] for f in region))
                inside = touched - block_verts
                rim = touched & block_verts
                outside = set(inst.vertices) - inside - rim
                foreign_in = any(inst.cluster_of[v] != name for v in inside)
                foreign_out = any(inst.cluster_of[v] != name for v in outside)
                if foreign_in:
                    admissible &= region
                if foreign_out:
                    admissible -= region
    return admissible
