"""Brute-force references used to validate the solver.

Everything here is deliberately naive and shares no algorithmic code with the
solver: spanning trees are enumerated outright and enclosure is decided by
listing every monochromatic cycle.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .instance import EmbeddedClusteredInstance


class OracleBoundError(ValueError):
    """The instance is too large for exhaustive search."""


@dataclass
class Problem:
    """A PSSTTM instance stripped of geometry.

    ``edges`` maps a con-edge id to ``(cluster, u, v)``; ``conflicts`` holds
    unordered pairs of con-edge ids.
    """

    vertices_by_cluster: dict[str, list[int]]
    edges: dict[int, tuple[str, int, int]]
    conflicts: set[frozenset[int]] = field(default_factory=set)

    def conflict_map(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {e: set() for e in self.edges}
        for pair in self.conflicts:
            a, b = tuple(pair)
            if a in out and b in out:
                out[a].add(b)
                out[b].add(a)
        return out


def spanning_trees(vertices: list[int], edges: list[tuple[int, int, int]]) -> list[int]:
    """Every spanning tree of a multigraph as a bitmask over edge positions.

    ``edges`` holds (id, u, v); bit ``k`` of a mask refers to ``edges[k]``.
    Deletion/contraction recursion: the first edge is either contracted
    (kept) or deleted.
    """
    out: list[int] = []

    def rec(k: int, label: dict[int, int], ncomp: int, mask: int) -> None:
        if ncomp == 1:
            out.append(mask)
            return
        if k == len(edges):
            return
        # prune: remaining edges must still be able to join all components
        rest = {}
        for j in range(k, len(edges)):
            _, u, v = edges[j]
            a, b = label[u], label[v]
            if a != b:
                rest.setdefault(a, set()).add(b)
                rest.setdefault(b, set()).add(a)
        if not _joins_all(set(label.values()), rest):
            return
        _, u, v = edges[k]
        a, b = label[u], label[v]
        if a != b:
            merged = {x: (a if c == b else c) for x, c in label.items()}
            rec(k + 1, merged, ncomp - 1, mask | (1 << k))
        rec(k + 1, label, ncomp, mask)

    if not vertices:
        return [0]
    label = {v: v for v in vertices}
    rec(0, label, len(vertices), 0)
    return out


def _joins_all(comps: set[int], adj: dict[int, set[int]]) -> bool:
    start = next(iter(comps))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == comps


@dataclass
class OracleResult:
    accepted: bool
    witness: list[int] | None = None
    nodes: int = 0


def _tree_search(problem: Problem, bound: int, first_only: bool) -> tuple[list[int], int]:
    """Conflict-free unions of one spanning tree per cluster, as bitmasks."""
    if len(problem.edges) > bound:
        raise OracleBoundError(f"{len(problem.edges)} con-edges exceed the bound {bound}")
    conf = problem.conflict_map()
    per_cluster: list[list[int]] = []
    for name in sorted(problem.vertices_by_cluster):
        verts = problem.vertices_by_cluster[name]
        es = sorted(
            (e, u, v) for e, (c, u, v) in problem.edges.items() if c == name and u != v
        )
        trees = spanning_trees(verts, es)
        if not trees:
            return [], 0
        ids = [e for e, _, _ in es]
        per_cluster.append(
            [sum(1 << ids[k] for k in range(len(ids)) if m >> k & 1) for m in trees]
        )
    per_cluster.sort(key=len)
    conflict_mask = {e: sum(1 << f for f in ns) for e, ns in conf.items()}

    def forbidden_by(mask: int) -> int:
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= conflict_mask[low.bit_length() - 1]
            m ^= low
        return out

    found: list[int] = []
    nodes = 0

    def search(i: int, chosen: int, forbidden: int) -> bool:
        nonlocal nodes
        nodes += 1
        if i == len(per_cluster):
            found.append(chosen)
            return first_only
        for t in per_cluster[i]:
            if t & forbidden:
                continue
            if search(i + 1, chosen | t, forbidden | forbidden_by(t)):
                return True
        return False

    search(0, 0, 0)
    return found, nodes


def _ids(problem: Problem, mask: int) -> list[int]:
    return [e for e in sorted(problem.edges) if mask >> e & 1]


def oracle_pssttm(problem: Problem, bound: int = 24) -> OracleResult:
    """Exact PSSTTM by exhaustive spanning-tree search."""
    found, nodes = _tree_search(problem, bound, first_only=True)
    if not found:
        return OracleResult(False, None, nodes)
    return OracleResult(True, _ids(problem, found[0]), nodes)


def oracle_solutions(problem: Problem, bound: int = 24) -> list[list[int]]:
    """Every planar set of spanning trees, each as a sorted id list."""
    found, _ = _tree_search(problem, bound, first_only=False)
    return sorted(_ids(problem, m) for m in found)


def verify_solution(problem: Problem, selected) -> list[str]:
    """Every way ``selected`` fails to be a planar set of spanning trees."""
    sel = set(selected)
    problems: list[str] = []
    unknown = sel - problem.edges.keys()
    if unknown:
        problems.append(f"unknown con-edges selected: {sorted(unknown)}")
        sel &= problem.edges.keys()
    for name in sorted(problem.vertices_by_cluster):
        verts = problem.vertices_by_cluster[name]
        parent = {v: v for v in verts}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in sorted(sel):
            c, u, v = problem.edges[e]
            if c != name:
                continue
            a, b = find(u), find(v)
            if a == b:
                problems.append(f"cluster {name}: con-edge {e} closes a cycle")
            else:
                parent[a] = b
        roots = {find(v) for v in verts}
        if len(roots) > 1:
            problems.append(f"cluster {name}: not spanned ({len(roots)} components)")
    for pair in sorted(problem.conflicts, key=sorted):
        if pair <= sel:
            a, b = sorted(pair)
            problems.append(f"conflicting pair selected: {a} and {b}")
    return problems


# -- enclosure ---------------------------------------------------------------


def monochromatic_cycles(inst: EmbeddedClusteredInstance) -> list[tuple[str, frozenset[int]]]:
    """All simple cycles whose vertices share one cluster, as edge-id sets."""
    out: dict[frozenset[int], str] = {}
    for name, members in inst.clusters.items():
        mset = set(members)
        inc: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for e, (u, v) in enumerate(inst.edges):
            if u in mset and v in mset:
                if u == v:
                    out.setdefault(frozenset([e]), name)
                    continue
                inc[u].append((e, v))
                inc[v].append((e, u))
        for start in sorted(inc):

            def dfs(v: int, used: list[int], visited: set[int]) -> None:
                for e, w in inc[v]:
                    if e in used:
                        continue
                    if w == start and used:
                        out.setdefault(frozenset(used + [e]), name)
                    elif w not in visited and w > start:
                        visited.add(w)
                        used.append(e)
                        dfs(w, used, visited)
                        used.pop()
                        visited.discard(w)

            dfs(start, [], {start})
    return sorted(((c, s) for s, c in out.items()), key=lambda t: (t[0], sorted(t[1])))


def oracle_enclosure(inst: EmbeddedClusteredInstance, max_vertices: int = 12) -> set[int]:
    """Admissible outer faces, found by checking both sides of every cycle."""
    if len(inst.vertices) > max_vertices:
        raise OracleBoundError(f"{len(inst.vertices)} vertices exceed {max_vertices}")
    faces = inst.faces
    face_of = {}
    for f in faces:
        for o in f.occurrences:
            if o.out_dart is not None:
                face_of[o.out_dart] = f.id
    admissible = set(range(len(faces)))
    for name, cyc in monochromatic_cycles(inst):
        # flood the faces across every edge that is not on the cycle
        side = {f.id: f.id for f in faces}

        def root(x: int) -> int:
            while side[x] != x:
                x = side[x]
            return x

        for e in range(len(inst.edges)):
            if e in cyc:
                continue
            a, b = root(face_of[2 * e]), root(face_of[2 * e + 1])
            if a != b:
                side[max(a, b)] = min(a, b)
        regions: dict[int, set[int]] = defaultdict(set)
        for f in faces:
            regions[root(f.id)].add(f.id)
        on_cycle = {v for e in cyc for v in inst.edges[e]}
        for region in regions.values():
            inner = set()
            for fid in region:
                inner |= set(faces[fid].vertices)
            inner -= on_cycle
            if any(inst.cluster_of[v] != name for v in inner):
                # whatever side holds the outer face, the other side must be clean
                admissible &= region
    return admissible
