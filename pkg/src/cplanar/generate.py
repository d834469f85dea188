"""Seeded random instances.

Instances come from a Delaunay triangulation of random points with some
edges deleted (connectivity kept) and clusters grown vertex by vertex.
Chord systems are read off host instances: either random ones or a theta
template whose con-edges form a donut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .conmulti import ConMultigraph, build_con_multigraph, property1_violations, reduce_property1
from .instance import EmbeddedClusteredInstance, build_instance, check_per_face_limit
from .maps import UnionFind


class GeneratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    min_vertices: int = 4
    max_vertices: int = 10
    min_clusters: int = 2
    max_clusters: int = 5
    edge_density: float = 0.5  # chance that a deletable edge is kept
    con_edge_density: float = 0.5  # only used by chord-level generation
    enforce_face_limit: bool = True
    split_detached: float = 0.0  # chance of splitting clusters whose con-edges leave them apart
    retries: int = 200

    def __post_init__(self) -> None:
        if not 1 <= self.min_vertices <= self.max_vertices:
            raise ValueError("empty vertex-count range")
        if not 1 <= self.min_clusters <= self.max_clusters:
            raise ValueError("empty cluster-count range")
        for name in ("edge_density", "con_edge_density", "split_detached"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def _rotations(points: np.ndarray, edges: list[tuple[int, int]]) -> dict[int, list[int]]:
    """Clockwise rotation of a straight-line drawing."""
    inc: dict[int, list[tuple[float, int]]] = {v: [] for v in range(len(points))}
    for i, (u, v) in enumerate(edges):
        for a, b in ((u, v), (v, u)):
            dx, dy = points[b] - points[a]
            inc[a].append((-math.atan2(dy, dx), i))
    return {v: [i for _, i in sorted(r)] for v, r in inc.items()}


def _plane_graph(rng: np.random.Generator, n: int, keep: float):
    if n == 1:
        return np.zeros((1, 2)), []
    if n == 2:
        return np.array([[0.0, 0.0], [1.0, 0.0]]), [(0, 1)]
    points = rng.random((n, 2))
    try:
        tri = Delaunay(points)
    except QhullError:
        return None
    edges = sorted(
        {tuple(sorted((int(s[a]), int(s[b])))) for s in tri.simplices for a, b in ((0, 1), (1, 2), (0, 2))}
    )
    if len({v for e in edges for v in e}) != n:
        return None  # coplanar input dropped a point
    # a random spanning tree keeps the graph connected; other edges survive
    # independently with probability ``keep``
    uf = UnionFind(range(n))
    alive = []
    for idx in rng.permutation(len(edges)):
        u, v = edges[idx]
        if uf.union(u, v) or rng.random() < keep:
            alive.append((u, v))
    alive.sort()
    return points, alive


def _grow_clusters(
    rng: np.random.Generator,
    n: int,
    k: int,
    edges: list[tuple[int, int]],
    face_sets: list[set[int]],
    enforce: bool,
) -> list[int] | None:
    nbrs: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    faces_of: dict[int, list[int]] = {v: [] for v in range(n)}
    for i, fs in enumerate(face_sets):
        for v in fs:
            faces_of[v].append(i)
    label = [-1] * n
    counts: list[dict[int, int]] = [dict() for _ in face_sets]
    order = [int(v) for v in rng.permutation(n)]
    for pos, v in enumerate(order):
        full = {c for f in faces_of[v] for c, x in counts[f].items() if x >= 2} if enforce else set()
        if pos < k:
            if pos in full:
                return None
            choice = pos
        else:
            # prefer clusters already seen on a face of v, so that components
            # of a cluster end up joined by con-edges
            near = sorted({c for f in faces_of[v] for c in counts[f]} - full)
            adjacent = {label[w] for w in nbrs[v]}
            if near and rng.random() < 0.8:
                apart = [c for c in near if c not in adjacent] or near
                choice = apart[int(rng.integers(len(apart)))]
            else:
                if len(full) >= k:
                    return None
                while True:
                    choice = int(rng.integers(k))
                    if choice not in full:
                        break
        label[v] = choice
        for f in faces_of[v]:
            counts[f][choice] = counts[f].get(choice, 0) + 1
    return label


def _split_detached(inst: EmbeddedClusteredInstance) -> list[int]:
    """Relabel so that every cluster is one piece of its con-edge multigraph."""
    A = build_con_multigraph(inst)
    uf = UnionFind(A.vertex_cluster)
    for e in A.edges:
        uf.union(*A.endpoints(e))
    comp = inst.cluster_components
    pieces: dict[int, int] = {}
    labels = []
    for v in inst.vertices:
        labels.append(pieces.setdefault(uf.find(comp[v]), len(pieces)))
    return labels


def _instance(
    points_edges, labels: list[int], names: list[str] | None = None
) -> EmbeddedClusteredInstance:
    points, edges = points_edges
    n = len(points)
    names = names or [f"c{c}" for c in range(max(labels) + 1)]
    clusters: dict[str, list[int]] = {}
    for v, c in enumerate(labels):
        clusters.setdefault(names[c], []).append(v)
    return build_instance(
        range(n), edges, _rotations(points, edges), {k: tuple(v) for k, v in clusters.items()}
    )


def gen_instance(params: GeneratorParams) -> EmbeddedClusteredInstance:
    """A random connected plane graph with a random flat clustering."""
    rng = np.random.default_rng(params.seed)
    for _ in range(params.retries):
        n = int(rng.integers(params.min_vertices, params.max_vertices + 1))
        k = int(rng.integers(params.min_clusters, params.max_clusters + 1))
        k = min(k, n)
        graph = _plane_graph(rng, n, params.edge_density)
        if graph is None:
            continue
        shape = _instance(graph, [0] * n)
        face_sets = [set(f.vertices) for f in shape.faces]
        labels = _grow_clusters(rng, n, k, graph[1], face_sets, params.enforce_face_limit)
        if labels is None:
            continue
        inst = _instance(graph, labels)
        if params.enforce_face_limit and check_per_face_limit(inst):
            continue
        if rng.random() < params.split_detached:
            labels = _split_detached(inst)
            if not params.min_clusters <= max(labels) + 1 <= params.max_clusters:
                continue
            inst = _instance(graph, labels)
        return inst
    raise GeneratorError(f"no instance satisfied the constraints after {params.retries} tries")


# -- chord systems -------------------------------------------------------------


def donut_template(
    k: int, m: int, rng: np.random.Generator | None = None, mirror: bool = False
) -> EmbeddedClusteredInstance:
    """Theta graph: poles x, y joined by k paths of m inner vertices.

    The poles form one cluster and the j-th inner vertices of all paths form
    another, so the k pole-to-pole con-edges are the spokes of a donut with
    m crossing clusters.  ``rng`` shuffles vertex ids and cluster names.
    """
    if k < 2 or m < 2:
        raise ValueError("need k >= 2 paths and m >= 2 inner vertices")
    n = 2 + k * m
    pts = [(-1.0, 0.0), (1.0, 0.0)]
    labels = [0, 0]
    edges: list[tuple[int, int]] = []
    for i in range(k):
        h = i - (k - 1) / 2
        ids = []
        for j in range(m):
            ids.append(len(pts))
            pts.append((-1 + 2 * (j + 1) / (m + 1), h))
            labels.append(j + 1)
        path = [0] + ids + [1]
        edges.extend(zip(path, path[1:]))
    points = np.array(pts)
    if mirror:
        points[:, 0] *= -1
    names = [f"c{c}" for c in range(m + 1)]
    if rng is not None:
        perm = [int(x) for x in rng.permutation(n)]
        points = points[np.argsort(perm)]
        edges = [(perm[u], perm[v]) for u, v in edges]
        edges = [edges[i] for i in rng.permutation(len(edges))]
        labels_new = [0] * n
        for old, new in enumerate(perm):
            labels_new[new] = labels[old]
        labels = labels_new
        names = [names[i] for i in rng.permutation(len(names))]
    return _instance((points, edges), labels, names)


def _theta(rng: np.random.Generator, paths: list[list[int]]) -> EmbeddedClusteredInstance:
    """Theta graph on poles 0 and 1 with inner vertex labels given per path.

    Label 0 is the poles' cluster.  A random mirror flips every rotation.
    """
    labels = [0, 0]
    edges: list[tuple[int, int]] = []
    first, last = [], []
    for inner in paths:
        path = [0]
        for lab in inner:
            path.append(len(labels))
            labels.append(lab)
        path.append(1)
        first.append(len(edges))
        edges.extend(zip(path, path[1:]))
        last.append(len(edges) - 1)
    # poles see the paths in opposite cyclic orders; inner vertices have degree 2
    rot: dict[int, list[int]] = {0: first, 1: last[::-1]}
    for e, (u, v) in enumerate(edges):
        for w in (u, v):
            if w > 1:
                rot.setdefault(w, []).append(e)
    if rng.integers(2):
        rot = {v: r[::-1] for v, r in rot.items()}
    names = sorted(set(labels))
    clusters: dict[str, list[int]] = {}
    for v, lab in enumerate(labels):
        clusters.setdefault(f"c{names.index(lab)}", []).append(v)
    return build_instance(
        range(len(labels)), edges, rot, {k: tuple(v) for k, v in clusters.items()}
    )


def _fits(paths: list[list[int]], i: int, lab: int) -> bool:
    """Whether one more ``lab`` vertex on path i keeps its faces within the limit.

    Face f is bounded by paths f and f+1, so path i lies on faces i-1 and i.
    """
    k = len(paths)
    for f in {(i - 1) % k, i}:
        if (paths[f] + paths[(f + 1) % k]).count(lab) >= 2:
            return False
    return True


def gen_theta(params: GeneratorParams) -> EmbeddedClusteredInstance:
    """Theta graph with random path lengths and random inner clusters.

    The two poles share a cluster; inner vertices take random clusters
    subject to the per-face limit, which keeps many con-edges crossing the
    pole-to-pole ones.
    """
    rng = np.random.default_rng(params.seed)
    n = int(rng.integers(max(params.min_vertices, 4), max(params.max_vertices, 4) + 1))
    inner = n - 2
    k = int(rng.integers(2, min(5, inner) + 1))
    cuts = sorted(int(x) for x in rng.choice(np.arange(1, inner), size=k - 1, replace=False))
    lengths = [b - a for a, b in zip([0] + cuts, cuts + [inner])]
    c = int(rng.integers(params.min_clusters, params.max_clusters + 1))
    paths: list[list[int]] = [[] for _ in range(k)]
    fresh = max(c, 2)
    for i, length in enumerate(lengths):
        for _ in range(length):
            allowed = [x for x in range(1, max(c, 2)) if _fits(paths, i, x)]
            if allowed:
                lab = allowed[int(rng.integers(len(allowed)))]
            else:
                lab, fresh = fresh, fresh + 1
            paths[i].append(lab)
    return _theta(rng, paths)


def gen_decorated_donut(params: GeneratorParams) -> EmbeddedClusteredInstance:
    """Donut template (k paths carrying clusters 1..m in order) with extra
    vertices of random clusters inserted at random places on the paths."""
    rng = np.random.default_rng(params.seed)
    room = max(params.max_vertices, 7) - 2
    shapes = [(k, m) for k in range(2, 5) for m in range(2, 4) if k * m < room]
    k, m = shapes[int(rng.integers(len(shapes)))]
    paths = [list(range(1, m + 1)) for _ in range(k)]
    pool = list(range(1, max(m + 2, params.max_clusters)))
    for _ in range(int(rng.integers(1, room - k * m + 1))):
        i = int(rng.integers(k))
        lab = pool[int(rng.integers(len(pool)))]
        if _fits(paths, i, lab):
            paths[i].insert(int(rng.integers(len(paths[i]) + 1)), lab)
    return _theta(rng, paths)


def _alternate(i: int, j: int, a: int, b: int) -> bool:
    lo, hi = min(i, j), max(i, j)
    return (lo < a < hi) != (lo < b < hi) and len({i, j, a, b}) == 4


def gen_paired(params: GeneratorParams, pair_rate: float = 0.6) -> EmbeddedClusteredInstance:
    """Random triangulation-based graph whose clusters are singletons or
    pairs of non-adjacent vertices sharing a face.

    Pairs are chosen so that one chord per pair can be drawn without
    crossings, which keeps large instances feasible; used for scaling runs.
    """
    rng = np.random.default_rng(params.seed)
    for _ in range(params.retries):
        n = int(rng.integers(params.min_vertices, params.max_vertices + 1))
        graph = _plane_graph(rng, n, params.edge_density)
        if graph is None:
            continue
        shape = _instance(graph, [0] * n)
        adjacent = {frozenset(e) for e in graph[1]}
        faces_of: dict[int, list[int]] = {v: [] for v in range(n)}
        for f in shape.faces:
            for v in set(f.vertices):
                faces_of[v].append(f.id)
        label = [-1] * n
        chords: dict[int, list[tuple[int, int]]] = {f.id: [] for f in shape.faces}
        nxt = 0
        for v in (int(x) for x in rng.permutation(n)):
            if label[v] >= 0:
                continue
            label[v] = nxt
            nxt += 1
            if rng.random() >= pair_rate:
                continue
            options = []
            for f in faces_of[v]:
                ring = shape.faces[f].vertices
                i = ring.index(v)
                for w in set(ring):
                    if label[w] >= 0 or frozenset((v, w)) in adjacent:
                        continue
                    j = ring.index(w)
                    if not any(_alternate(i, j, a, b) for a, b in chords[f]):
                        options.append((f, w, j))
            if options:
                f, w, j = options[int(rng.integers(len(options)))]
                label[w] = label[v]
                chords[f].append((shape.faces[f].vertices.index(v), j))
        return _instance(graph, label)
    raise GeneratorError(f"no instance after {params.retries} tries")


SUITE_GENERATORS = ("triangulation", "theta", "donut", "map")


def suite_instance(seed: int, max_vertices: int = 10, max_clusters: int = 5) -> EmbeddedClusteredInstance:
    """Instance ``seed`` of the mixed cross-check suite.

    Seeds cycle through the four generators and through a few density and
    cluster settings; draws breaking the size caps are redrawn from a
    derived seed.
    """
    kind = SUITE_GENERATORS[seed % 4]
    for attempt in range(100):
        sub = seed * 101 + attempt
        params = GeneratorParams(
            seed=sub,
            min_vertices=min(4, max_vertices),
            max_vertices=max_vertices,
            min_clusters=2,
            max_clusters=max_clusters,
            edge_density=(0.0, 0.2, 0.4)[sub % 3],
            split_detached=(0.0, 0.5, 1.0)[(sub // 3) % 3],
        )
        try:
            inst = {
                "triangulation": gen_instance,
                "theta": gen_theta,
                "donut": gen_decorated_donut,
                "map": gen_plane_map,
            }[kind](params)
        except GeneratorError:
            continue
        if len(inst.vertices) <= max_vertices and len(inst.clusters) <= max_clusters:
            return inst
    raise GeneratorError(f"suite seed {seed} found no instance within the caps")


def gen_plane_map(params: GeneratorParams) -> EmbeddedClusteredInstance:
    """Random connected plane multigraph grown on its rotation system.

    Each step hangs a new vertex into a random corner or, with probability
    ``edge_density``, joins two corners of one face by a new edge.  Cut
    vertices and repeated boundary occurrences are common.
    """
    rng = np.random.default_rng(params.seed)
    for _ in range(params.retries):
        n = int(rng.integers(params.min_vertices, params.max_vertices + 1))
        edges: list[tuple[int, int]] = []
        rot: dict[int, list[int]] = {0: []}
        inst = build_instance([0], [], {0: []}, {"c0": (0,)})
        count = 1
        budget = 3 * n
        while count < n or (budget > 0 and rng.random() < params.edge_density):
            budget -= 1
            faces = inst.faces
            face = faces[int(rng.integers(len(faces)))]
            occ = face.occurrences
            if count < n and (rng.random() >= params.edge_density or len(occ) < 2):
                a = occ[int(rng.integers(len(occ)))]
                e = len(edges)
                edges.append((a.vertex, count))
                _insert_after(rot, a, e)
                rot[count] = [e]
                count += 1
            else:
                i, j = (int(x) for x in rng.choice(len(occ), size=2, replace=False))
                a, b = occ[i], occ[j]
                if a.vertex == b.vertex:
                    continue
                e = len(edges)
                edges.append((a.vertex, b.vertex))
                _insert_after(rot, a, e)
                _insert_after(rot, b, e)
            inst = build_instance(range(count), edges, rot, {"c0": tuple(range(count))})
            edges = list(inst.edges)
            rot = {v: list(r) for v, r in inst.rotations.items()}
        k = min(n, int(rng.integers(params.min_clusters, params.max_clusters + 1)))
        face_sets = [set(f.vertices) for f in inst.faces]
        labels = _grow_clusters(rng, count, k, list(inst.edges), face_sets, params.enforce_face_limit)
        if labels is None:
            continue
        out = _relabel(inst, labels)
        if rng.random() < params.split_detached:
            labels = _split_detached(out)
            if not params.min_clusters <= max(labels) + 1 <= params.max_clusters:
                continue
            out = _relabel(inst, labels)
        return out
    raise GeneratorError(f"no instance satisfied the constraints after {params.retries} tries")


def _insert_after(rot: dict[int, list[int]], occ, e: int) -> None:
    """Put edge e into the corner of ``occ``, right after its outgoing dart."""
    r = rot[occ.vertex]
    if occ.out_dart is None:
        r.append(e)
    else:
        r.insert(r.index(occ.out_dart >> 1) + 1, e)


def _relabel(inst: EmbeddedClusteredInstance, labels: list[int]) -> EmbeddedClusteredInstance:
    clusters: dict[str, list[int]] = {}
    for v in inst.vertices:
        clusters.setdefault(f"c{labels[v]}", []).append(v)
    return build_instance(
        inst.vertices,
        list(inst.edges),
        {v: list(r) for v, r in inst.rotations.items()},
        {k: tuple(v) for k, v in clusters.items()},
    )


def gen_chord_system(
    params: GeneratorParams, mode: str = "random", k: int | None = None, m: int | None = None
) -> tuple[ConMultigraph, dict[int, set[int]]]:
    """A con-edge multigraph with at most one con-edge per cluster in every
    conflict component, and its conflict graph.

    ``mode='random'`` reads the chords of a random host instance whose
    edges are thinned by ``con_edge_density``; ``mode='donut'`` uses the
    theta template (random ``k``, ``m`` unless given).  ``mode='pair'``
    gives a single face with exactly two crossing con-edges.  The reduction
    runs only when the raw chords break the one-per-component condition.
    """
    rng = np.random.default_rng(params.seed)
    if mode == "donut":
        k = int(rng.integers(2, 7)) if k is None else k
        m = int(rng.integers(2, 5)) if m is None else m
        inst = donut_template(k, m, rng, mirror=bool(rng.integers(2)))
    elif mode == "pair":
        # star: centre c, leaves x u y v clockwise; x,y and u,v share clusters
        points = np.array([[0, 0], [-1, 0], [0, 1], [1, 0], [0, -1]], dtype=float)
        inst = _instance((points, [(0, 1), (0, 2), (0, 3), (0, 4)]), [0, 1, 2, 1, 2])
    elif mode == "random":
        host = replace(params, edge_density=1.0 - params.con_edge_density, enforce_face_limit=True)
        inst = gen_instance(host)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    A = build_con_multigraph(inst)
    if property1_violations(A):
        A, _ = reduce_property1(A)
    return A, A.adj
