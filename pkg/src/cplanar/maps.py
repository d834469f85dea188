"""Small combinatorial-map toolkit shared by the instance and con-edge layers.

A map is a dict ``vertex -> list of darts`` giving the clockwise rotation at
each vertex.  Darts are arbitrary hashables; the caller supplies ``rev`` (the
opposite dart of the same edge) and ``tail`` lookups through the rotation
index built here.

Faces are traced with the face kept on the right of travel, so bounded faces
come out in clockwise order.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Hashable, Iterable

Dart = Hashable


class RotationIndex:
    """Constant-time neighbour lookup inside a rotation system."""

    def __init__(self, rotation: dict[Hashable, list[Dart]]) -> None:
        self.rotation = rotation
        self.where: dict[Dart, tuple[Hashable, int]] = {}
        for v, darts in rotation.items():
            for i, d in enumerate(darts):
                self.where[d] = (v, i)

    def tail(self, d: Dart) -> Hashable:
        return self.where[d][0]

    def cw_next(self, d: Dart) -> Dart:
        v, i = self.where[d]
        darts = self.rotation[v]
        return darts[(i + 1) % len(darts)]

    def cw_prev(self, d: Dart) -> Dart:
        v, i = self.where[d]
        darts = self.rotation[v]
        return darts[(i - 1) % len(darts)]


def trace_face_walks(
    rotation: dict[Hashable, list[Dart]],
    rev: Callable[[Dart], Dart],
    order: Callable[[Dart], object] | None = None,
) -> list[list[Dart]]:
    """Return every face as its cyclic list of darts.

    Each walk starts at its least dart (under ``order``) and walks are listed
    by that least dart, which makes face ids reproducible.
    """
    idx = RotationIndex(rotation)
    darts = sorted(idx.where, key=order)
    seen: set[Dart] = set()
    faces: list[list[Dart]] = []
    for start in darts:
        if start in seen:
            continue
        walk = []
        d = start
        while d not in seen:
            seen.add(d)
            walk.append(d)
            # arriving along d, leave by the dart just before rev(d) clockwise
            d = idx.cw_prev(rev(d))
        if d != start:
            raise ValueError("rotation system is not a permutation of darts")
        faces.append(walk)
    return faces


def contract_edge(
    rotation: dict[Hashable, list[Dart]],
    d_uv: Dart,
    d_vu: Dart,
    u: Hashable,
    v: Hashable,
    keep: Hashable,
) -> None:
    """Contract the non-loop edge whose darts are ``d_uv`` (at u) and ``d_vu``.

    The merged rotation is stored under ``keep`` (one of u, v); the other key
    disappears.  Mutates ``rotation`` in place.
    """
    if u == v:
        raise ValueError("cannot contract a self-loop")
    ru = rotation.pop(u)
    rv = rotation.pop(v)
    i = ru.index(d_uv)
    j = rv.index(d_vu)
    rotation[keep] = ru[:i] + rv[j + 1:] + rv[:j] + ru[i + 1:]


def remove_darts(rotation: dict[Hashable, list[Dart]], darts: Iterable[Dart]) -> None:
    drop = set(darts)
    for v, ds in rotation.items():
        if any(d in drop for d in ds):
            rotation[v] = [d for d in ds if d not in drop]


def blocks(edges: dict[Hashable, tuple[Hashable, Hashable]]) -> dict[Hashable, int]:
    """Biconnected-component label for every edge of a multigraph.

    Parallel edges share a block; every self-loop is its own block.
    """
    adj: dict[Hashable, list[tuple[Hashable, Hashable]]] = defaultdict(list)
    label: dict[Hashable, int] = {}
    next_label = 0
    for e, (u, v) in edges.items():
        if u == v:
            label[e] = next_label
            next_label += 1
            continue
        adj[u].append((v, e))
        adj[v].append((u, e))

    disc: dict[Hashable, int] = {}
    low: dict[Hashable, int] = {}
    counter = 0
    edge_stack: list[Hashable] = []
    for root in sorted(adj, key=repr):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        # frame: vertex, edge used to enter it, neighbour iterator position
        stack = [(root, None, 0)]
        while stack:
            v, via, pos = stack[-1]
            if pos < len(adj[v]):
                stack[-1] = (v, via, pos + 1)
                w, e = adj[v][pos]
                if e == via:
                    continue
                if w not in disc:
                    edge_stack.append(e)
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, e, 0))
                elif disc[w] < disc[v]:
                    edge_stack.append(e)
                    low[v] = min(low[v], disc[w])
                continue
            stack.pop()
            if not stack:
                continue
            parent = stack[-1][0]
            low[parent] = min(low[parent], low[v])
            if low[v] >= disc[parent]:
                while True:
                    e = edge_stack.pop()
                    label[e] = next_label
                    if e == via:
                        break
                next_label += 1
    return label


def bridges(edges: dict[Hashable, tuple[Hashable, Hashable]]) -> set[Hashable]:
    """Edges whose block consists of that edge alone (self-loops excluded)."""
    label = blocks(edges)
    size: dict[int, int] = defaultdict(int)
    for e in edges:
        size[label[e]] += 1
    return {e for e, (u, v) in edges.items() if u != v and size[label[e]] == 1}


class UnionFind:
    def __init__(self, items: Iterable[Hashable] = ()) -> None:
        self.parent: dict[Hashable, Hashable] = {x: x for x in items}

    def add(self, x: Hashable) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: Hashable) -> Hashable:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Hashable, b: Hashable) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # smallest representative wins; keeps ids canonical
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def groups(self) -> dict[Hashable, list[Hashable]]:
        out: dict[Hashable, list[Hashable]] = defaultdict(list)
        for x in self.parent:
            out[self.find(x)].append(x)
        return dict(out)
