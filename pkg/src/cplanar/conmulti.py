"""Con-edges, the multigraph A they form, and the conflict graph K_A.

A con-edge is a chord of a face of G joining two boundary occurrences of
distinct same-cluster vertices that lie in different components of the
cluster's induced subgraph.  Con-edge ``e`` owns darts ``2*e`` (leaving the
endpoint at its smaller occurrence index) and ``2*e + 1``.

Chord geometry (face, occurrence pair) never changes, so conflicts, crossing
orders and sides are always read from it; only the rotation of A is mutated
by removals and contractions.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

from .maps import UnionFind, blocks, contract_edge, remove_darts, trace_face_walks
from .instance import EmbeddedClusteredInstance, Face


class PreconditionError(ValueError):
    """Raised when an operation is called outside its stated domain."""


@dataclass(frozen=True)
class ConEdge:
    id: int
    face: int
    occ: tuple[int, int]  # (p, q) with p < q
    cluster: str
    ends: tuple[int, int]  # A-vertices at occurrences p and q
    gverts: tuple[int, int]  # G-vertices at occurrences p and q

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "face": self.face,
            "occurrences": list(self.occ),
            "cluster": self.cluster,
            "vertices": list(self.gverts),
        }


def chords_cross(p: int, q: int, r: int, s: int) -> bool:
    """Strict alternation of chord (p, q) with chord (r, s); p < q, r < s."""
    return (p < r < q < s) or (r < p < s < q)


def conflicts(e: ConEdge, f: ConEdge) -> bool:
    """True iff the two con-edges share a face and their occurrences alternate."""
    if e.face != f.face or e.id == f.id:
        return False
    return chords_cross(e.occ[0], e.occ[1], f.occ[0], f.occ[1])


def generate_con_edges(
    inst: EmbeddedClusteredInstance, faces: list[Face] | None = None
) -> list[ConEdge]:
    """All con-edges, ids ordered by (face, smaller occurrence, larger occurrence)."""
    faces = inst.faces if faces is None else faces
    comp = inst.cluster_components
    out: list[ConEdge] = []
    for f in faces:
        verts = f.vertices
        by_cluster: dict[str, list[int]] = defaultdict(list)
        for pos, v in enumerate(verts):
            by_cluster[inst.cluster_of[v]].append(pos)
        pairs = []
        for name, positions in by_cluster.items():
            for a in range(len(positions)):
                for b in range(a + 1, len(positions)):
                    p, q = positions[a], positions[b]
                    if comp[verts[p]] != comp[verts[q]]:
                        pairs.append((p, q, name))
        for p, q, name in sorted(pairs):
            out.append(
                ConEdge(
                    id=len(out),
                    face=f.id,
                    occ=(p, q),
                    cluster=name,
                    ends=(comp[verts[p]], comp[verts[q]]),
                    gverts=(verts[p], verts[q]),
                )
            )
    return out


@dataclass
class ConMultigraph:
    """The multigraph A with its inherited rotation system.

    ``rotation`` lists, per A-vertex, the clockwise darts of every present
    con-edge; restricting it to one cluster gives the embedding of A[alpha].
    """

    edges: dict[int, ConEdge]
    vertex_cluster: dict[int, str]
    rotation: dict[int, list[int]]
    face_len: dict[int, int]
    dart_tail: dict[int, int] = field(default_factory=dict)
    adj: dict[int, set[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.dart_tail:
            for v, darts in self.rotation.items():
                for d in darts:
                    self.dart_tail[d] = v
        if not self.adj:
            self.adj = build_conflict_graph(self.edges.values())

    # -- basic views ---------------------------------------------------------
    def copy(self) -> "ConMultigraph":
        return ConMultigraph(
            edges=dict(self.edges),
            vertex_cluster=dict(self.vertex_cluster),
            rotation={v: list(r) for v, r in self.rotation.items()},
            face_len=dict(self.face_len),
            dart_tail=dict(self.dart_tail),
            adj={e: set(n) for e, n in self.adj.items()},
        )

    @property
    def clusters(self) -> list[str]:
        return sorted(set(self.vertex_cluster.values()))

    def endpoints(self, e: int) -> tuple[int, int]:
        return self.dart_tail[2 * e], self.dart_tail[2 * e + 1]

    def cluster_vertices(self, name: str) -> list[int]:
        return sorted(v for v, c in self.vertex_cluster.items() if c == name)

    def cluster_edges(self, name: str) -> list[int]:
        return sorted(e for e, ce in self.edges.items() if ce.cluster == name)

    def cluster_rotation(self, name: str) -> dict[int, list[int]]:
        return {
            v: [d for d in self.rotation[v] if self.edges[d >> 1].cluster == name]
            for v in self.cluster_vertices(name)
        }

    def is_loop(self, e: int) -> bool:
        u, v = self.endpoints(e)
        return u == v

    def degree_of_conflict(self, e: int) -> int:
        return len(self.adj[e])

    # -- mutation ------------------------------------------------------------
    def remove(self, ids: Iterable[int]) -> None:
        ids = set(ids)
        remove_darts(self.rotation, [d for e in ids for d in (2 * e, 2 * e + 1)])
        for e in ids:
            del self.edges[e]
            for f in self.adj.pop(e):
                if f in self.adj:
                    self.adj[f].discard(e)
            del self.dart_tail[2 * e], self.dart_tail[2 * e + 1]

    def contract(self, e: int) -> int:
        """Contract a non-loop con-edge; returns the surviving A-vertex."""
        u, v = self.endpoints(e)
        if u == v:
            raise PreconditionError(f"con-edge {e} is a self-loop")
        keep, gone = min(u, v), max(u, v)
        contract_edge(self.rotation, 2 * e, 2 * e + 1, u, v, keep)
        for d in self.rotation[keep]:
            self.dart_tail[d] = keep
        del self.vertex_cluster[gone]
        del self.edges[e]
        for f in self.adj.pop(e):
            if f in self.adj:
                self.adj[f].discard(e)
        del self.dart_tail[2 * e], self.dart_tail[2 * e + 1]
        return keep

    # -- geometry ------------------------------------------------------------
    def dart_occ(self, d: int) -> tuple[int, int]:
        """(start, end) occurrence positions of a dart."""
        p, q = self.edges[d >> 1].occ
        return (p, q) if d % 2 == 0 else (q, p)

    def crossing_order(self, d: int) -> list[int]:
        """Con-edges crossing the edge of dart ``d``, in the order met along ``d``."""
        e = d >> 1
        a, b = self.dart_occ(d)
        n = self.face_len[self.edges[e].face]
        keyed = []
        for g in self.adj[e]:
            r, s = self.edges[g].occ
            inside = r if _in_open_arc(r, a, b, n) else s
            keyed.append(((inside - a) % n, g))
        return [g for _, g in sorted(keyed)]

    def side_of(self, e: int, g: int) -> int:
        """Dart of ``e`` whose right-hand side holds the non-crossing con-edge ``g``.

        Both con-edges must share a face.
        """
        ce, cg = self.edges[e], self.edges[g]
        if ce.face != cg.face:
            raise PreconditionError("con-edges lie in different faces")
        if g in self.adj[e]:
            raise PreconditionError(f"con-edge {g} crosses {e}")
        a, b = ce.occ
        n = self.face_len[ce.face]
        free = [x for x in cg.occ if x not in (a, b)]
        if not free:
            raise PreconditionError("con-edges share both occurrences")
        # the right of dart a->b holds the arc from b onwards to a
        return 2 * e + 1 if _in_open_arc(free[0], a, b, n) else 2 * e

    # -- export --------------------------------------------------------------
    def to_problem(self) -> "Problem":
        from .oracle import Problem

        by_cluster: dict[str, list[int]] = defaultdict(list)
        for v, c in self.vertex_cluster.items():
            by_cluster[c].append(v)
        edges = {e: (ce.cluster, *self.endpoints(e)) for e, ce in self.edges.items()}
        confl = {frozenset((e, f)) for e, ns in self.adj.items() for f in ns}
        return Problem(
            vertices_by_cluster={c: sorted(vs) for c, vs in by_cluster.items()},
            edges=edges,
            conflicts=confl,
        )

    def to_dot(self) -> str:
        return to_dot(self)


def _in_open_arc(x: int, a: int, b: int, n: int) -> bool:
    """Whether position x lies strictly after a and before b going forward."""
    return 0 < (x - a) % n < (b - a) % n


def build_conflict_graph(con_edges: Iterable[ConEdge]) -> dict[int, set[int]]:
    """K_A as an adjacency map; only same-face pairs are ever compared."""
    adj: dict[int, set[int]] = {}
    by_face: dict[int, list[ConEdge]] = defaultdict(list)
    for ce in con_edges:
        adj[ce.id] = set()
        by_face[ce.face].append(ce)
    for group in by_face.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if conflicts(group[i], group[j]):
                    adj[group[i].id].add(group[j].id)
                    adj[group[j].id].add(group[i].id)
    return adj


def conflict_components(adj: dict[int, set[int]]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for s in sorted(adj):
        if s in seen:
            continue
        comp = []
        queue = deque([s])
        seen.add(s)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        out.append(sorted(comp))
    return out


def embed_con_multigraph(
    inst: EmbeddedClusteredInstance,
    faces: list[Face] | None = None,
    con_edges: list[ConEdge] | None = None,
) -> ConMultigraph:
    """Insert every chord into G at its corners, contract each component of
    each G[alpha] along a spanning tree, and keep only chord darts."""
    faces = inst.faces if faces is None else faces
    con_edges = generate_con_edges(inst, faces) if con_edges is None else con_edges

    # corner insertions, keyed by (face, occurrence)
    at_corner: dict[tuple[int, int], list[tuple[int, tuple[str, int]]]] = defaultdict(list)
    for ce in con_edges:
        n = len(faces[ce.face])
        p, q = ce.occ
        at_corner[(ce.face, p)].append(((q - p) % n, ("c", 2 * ce.id)))
        at_corner[(ce.face, q)].append(((p - q) % n, ("c", 2 * ce.id + 1)))

    rotation: dict[int, list[tuple[str, int]]] = {
        v: [("g", d) for d in inst.dart_rotation[v]] for v in inst.vertices
    }
    for (fid, pos), items in at_corner.items():
        occ = faces[fid].occurrences[pos]
        darts = rotation[occ.vertex]
        if occ.out_dart is None:
            darts.extend(d for _, d in sorted(items))
            continue
        i = darts.index(("g", occ.out_dart))
        darts[i + 1:i + 1] = [d for _, d in sorted(items)]

    # spanning forest of every G[alpha]
    uf = UnionFind(inst.vertices)
    tree: list[int] = []
    for e, (u, v) in enumerate(inst.edges):
        if inst.cluster_of[u] == inst.cluster_of[v] and uf.union(u, v):
            tree.append(e)
    keep_g = set(tree)
    remove_darts(
        rotation,
        [("g", d) for e in range(len(inst.edges)) if e not in keep_g for d in (2 * e, 2 * e + 1)],
    )
    rep = {v: v for v in inst.vertices}
    for e in tree:
        u, v = inst.edges[e]
        ru, rv = _find(rep, u), _find(rep, v)
        keep, gone = min(ru, rv), max(ru, rv)
        contract_edge(rotation, ("g", 2 * e), ("g", 2 * e + 1), ru, rv, keep)
        rep[gone] = keep

    final = {v: [d for kind, d in r if kind == "c"] for v, r in rotation.items()}
    vertex_cluster = {v: inst.cluster_of[v] for v in final}
    return ConMultigraph(
        edges={ce.id: ce for ce in con_edges},
        vertex_cluster=vertex_cluster,
        rotation=final,
        face_len={f.id: len(f) for f in faces},
    )


def _find(rep: dict[int, int], x: int) -> int:
    while rep[x] != x:
        x = rep[x]
    return x


def build_con_multigraph(inst: EmbeddedClusteredInstance) -> ConMultigraph:
    return embed_con_multigraph(inst, inst.faces, generate_con_edges(inst, inst.faces))


# -- facial cycles -------------------------------------------------------------


@dataclass(frozen=True)
class FacialCycle:
    id: int
    darts: tuple[int, ...]  # in traversal order, face on the right

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(d >> 1 for d in self.darts)


def facial_cycles(A: ConMultigraph, name: str) -> list[FacialCycle]:
    """Oriented facial cycles of A[name]; bridges lie on none."""
    rot = A.cluster_rotation(name)
    if not any(rot.values()):
        return []
    walks = trace_face_walks({v: r for v, r in rot.items() if r}, rev=lambda d: d ^ 1)
    ids = {e for r in rot.values() for e in (d >> 1 for d in r)}
    label = blocks({e: A.endpoints(e) for e in ids})
    size: dict[int, int] = defaultdict(int)
    for e in ids:
        size[label[e]] += 1
    out: list[FacialCycle] = []
    for walk in walks:
        groups: dict[int, list[int]] = {}
        for d in walk:
            e = d >> 1
            u, v = A.endpoints(e)
            if u != v and size[label[e]] == 1:
                continue  # bridge
            groups.setdefault(label[e], []).append(d)
        for darts in groups.values():
            out.append(FacialCycle(len(out), tuple(darts)))
    return out


def cycle_of_dart(cycles: list[FacialCycle]) -> dict[int, int]:
    return {d: c.id for c in cycles for d in c.darts}


# -- one con-edge per cluster per conflict component ---------------------------


def property1_violations(A: ConMultigraph) -> list[tuple[list[int], str, list[int]]]:
    """(component, cluster, offending con-edges) for every conflict component
    holding two or more con-edges of one cluster."""
    out = []
    for comp in conflict_components(A.adj):
        per: dict[str, list[int]] = defaultdict(list)
        for e in comp:
            per[A.edges[e].cluster].append(e)
        for name in sorted(per):
            if len(per[name]) > 1:
                out.append((comp, name, per[name]))
    return out


def _is_cut(A: ConMultigraph, name: str, removed: set[int]) -> bool:
    verts = A.cluster_vertices(name)
    uf = UnionFind(verts)
    for e in A.cluster_edges(name):
        if e not in removed:
            uf.union(*A.endpoints(e))
    return len({uf.find(v) for v in verts}) > 1


def face_patterns(A: ConMultigraph, ids: list[int]) -> dict[frozenset[str], list[frozenset[int]]]:
    """Maximal sets of clusters that can take one pairwise non-crossing
    con-edge each among ``ids``, with every selection realising them."""
    by_cluster: dict[str, list[int]] = defaultdict(list)
    for e in sorted(ids):
        by_cluster[A.edges[e].cluster].append(e)
    names = sorted(by_cluster)
    found: dict[frozenset[str], list[frozenset[int]]] = defaultdict(list)

    def rec(i: int, chosen: list[int]) -> None:
        if i == len(names):
            found[frozenset(A.edges[e].cluster for e in chosen)].append(frozenset(chosen))
            return
        for e in by_cluster[names[i]]:
            if not any(g in A.adj[e] for g in chosen):
                chosen.append(e)
                rec(i + 1, chosen)
                chosen.pop()
        rec(i + 1, chosen)

    rec(0, [])
    maximal = [p for p in found if not any(p < q for q in found)]
    return {p: found[p] for p in sorted(maximal, key=sorted)}


def _keeps_property1(A: ConMultigraph, keep: set[int]) -> bool:
    sub = {e: A.adj[e] & keep for e in keep}
    for comp in conflict_components(sub):
        names = [A.edges[e].cluster for e in comp]
        if len(names) != len(set(names)):
            return False
    return True


def realize_patterns(A: ConMultigraph, ids: list[int], budget: int = 20000) -> set[int] | None:
    """A subset of the con-edges ``ids`` (all in one face) with the same
    maximal patterns and no two con-edges of a cluster in one conflict
    component, or None when the search budget runs out first."""
    patterns = face_patterns(A, ids)
    order = sorted(patterns, key=lambda p: (len(patterns[p]), sorted(p)))
    nodes = 0

    def rec(i: int, keep: set[int]) -> set[int] | None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            return None
        if i == len(order):
            return keep
        options = sorted(patterns[order[i]], key=lambda r: (len(r - keep), sorted(r)))
        for real in options:
            trial = keep | real
            if _keeps_property1(A, trial):
                got = rec(i + 1, trial)
                if got is not None:
                    return got
        return None

    return rec(0, set())


def reduce_property1(
    A: ConMultigraph, check_limit: bool = True
) -> tuple[ConMultigraph, list[tuple[str, int]]]:
    """Remove con-edges that no planar set of spanning trees needs.

    Step (i) drops a con-edge c when, for another cluster, the con-edges of
    that cluster crossing c separate its multigraph: some of them must be
    selected, so c never can.  Step (ii) looks at con-edges of one cluster
    with the same two endpoints, of which at most one is ever selected: a
    con-edge is dropped when another one of the group crosses only a subset
    of what it crosses outside the group (equal sets keep the lowest id).
    Both steps repeat until nothing changes.  Step (iii) then handles faces
    still holding two con-edges of a cluster in one conflict component.
    The rest of A only sees which clusters use a face, so the face keeps
    just enough con-edges to realise each maximal non-crossing cluster set,
    chosen so that the conflict components separate clusters.  Returns the
    reduced copy and the list of (step, con-edge) removals.
    """
    if check_limit:
        per: dict[tuple[int, str], set[int]] = defaultdict(set)
        for ce in A.edges.values():
            per[(ce.face, ce.cluster)].update(ce.gverts)
        bad = [k for k, vs in per.items() if len(vs) > 2]
        if bad:
            raise PreconditionError(f"more than two vertices of a cluster on a face: {bad[0]}")
    A = A.copy()
    log: list[tuple[str, int]] = []
    changed = True
    while changed:
        changed = False
        for c in sorted(A.edges):
            crossing: dict[str, set[int]] = defaultdict(set)
            for g in A.adj[c]:
                crossing[A.edges[g].cluster].add(g)
            for name in sorted(crossing):
                if name != A.edges[c].cluster and _is_cut(A, name, crossing[name]):
                    A.remove([c])
                    log.append(("separated", c))
                    changed = True
                    break
        groups: dict[tuple, list[int]] = defaultdict(list)
        for e in sorted(A.edges):
            u, v = A.endpoints(e)
            groups[(A.edges[e].cluster, min(u, v), max(u, v))].append(e)
        drop = []
        for group in groups.values():
            if len(group) < 2:
                continue
            members = set(group)
            outside = {e: frozenset(A.adj[e] - members) for e in group}
            for e in group:
                if any(
                    f != e and outside[f] <= outside[e] and (outside[f] < outside[e] or f < e)
                    for f in group
                ):
                    drop.append(e)
        if drop:
            A.remove(drop)
            log.extend(("dominated", e) for e in sorted(drop))
            changed = True
        if changed:
            continue
        faces = sorted({A.edges[e].face for comp, _, _ in property1_violations(A) for e in comp})
        for f in faces:
            ids = [e for e in sorted(A.edges) if A.edges[e].face == f]
            keep = realize_patterns(A, ids)
            if keep is None:
                continue
            drop = [e for e in ids if e not in keep]
            A.remove(drop)
            log.extend(("pattern", e) for e in drop)
            changed = True
    return A, log


# -- DOT -----------------------------------------------------------------------

_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def to_dot(A: ConMultigraph) -> str:
    """K_A as DOT: con-edges are nodes coloured by cluster, conflicts are edges."""
    colour = {c: _PALETTE[i % len(_PALETTE)] for i, c in enumerate(A.clusters)}
    lines = ["graph K_A {", "  node [style=filled, fontcolor=white];"]
    for e in sorted(A.edges):
        ce = A.edges[e]
        u, v = A.endpoints(e)
        lines.append(
            f'  e{e} [label="{e}: {ce.cluster} {u}-{v}\\nf{ce.face} {ce.occ}", '
            f'fillcolor="{colour[ce.cluster]}"];'
        )
    for e in sorted(A.adj):
        for f in sorted(A.adj[e]):
            if e < f:
                lines.append(f"  e{e} -- e{f};")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "ConEdge",
    "ConMultigraph",
    "FacialCycle",
    "PreconditionError",
    "build_con_multigraph",
    "build_conflict_graph",
    "chords_cross",
    "conflict_components",
    "conflicts",
    "cycle_of_dart",
    "embed_con_multigraph",
    "facial_cycles",
    "generate_con_edges",
    "property1_violations",
    "reduce_property1",
    "to_dot",
]
