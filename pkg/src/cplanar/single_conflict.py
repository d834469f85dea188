"""Residue solver for the case where every con-edge crosses exactly one other.

Each conflicting pair contributes exactly one con-edge: at most one since
the selection is conflict-free, and at least one on residues of plane
instances, because the cluster paths replacing two unselected crossing
con-edges would have to cross each other.  On arbitrary abstract inputs
the search decides the one-per-pair problem, which can be stricter.  The search
propagates forced choices and branches on the lowest undecided pair,
remembering residues that already failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conmulti import ConMultigraph, PreconditionError
from .maps import UnionFind, blocks

UNDECIDED, SELECTED, EXCLUDED = 0, 1, 2


@dataclass
class ResidueResult:
    accepted: bool
    selected: list[int] = field(default_factory=list)
    evidence: dict = field(default_factory=dict)
    nodes: int = 0


class _Fail(Exception):
    def __init__(self, evidence: dict) -> None:
        super().__init__(evidence.get("reason", "fail"))
        self.evidence = evidence


def pairs_of(A: ConMultigraph) -> list[tuple[int, int]]:
    pairs = set()
    for e, ns in A.adj.items():
        if len(ns) != 1:
            raise PreconditionError(f"con-edge {e} crosses {len(ns)} con-edges")
        (f,) = ns
        pairs.add((min(e, f), max(e, f)))
    return sorted(pairs)


class _Search:
    def __init__(self, A: ConMultigraph) -> None:
        self.A = A
        self.pairs = pairs_of(A)
        self.partner = {}
        for a, b in self.pairs:
            self.partner[a], self.partner[b] = b, a
        self.ends = {e: A.endpoints(e) for e in A.edges}
        self.cluster = {e: ce.cluster for e, ce in A.edges.items()}
        self.verts = {c: A.cluster_vertices(c) for c in A.clusters}
        self.nodes = 0
        self.failed: set[tuple] = set()

    def _set(self, status: dict[int, int], e: int, val: int) -> bool:
        """Assign e and its partner; False if it contradicts an earlier choice."""
        other = SELECTED if val == EXCLUDED else EXCLUDED
        if status[e] == val:
            return False
        if status[e] != UNDECIDED:
            raise _Fail({"reason": "pair forced both ways", "edges": sorted((e, self.partner[e]))})
        status[e] = val
        p = self.partner[e]
        if status[p] == val:
            raise _Fail({"reason": "pair forced both ways", "edges": sorted((e, p))})
        status[p] = other
        return True

    def _partition(self, status: dict[int, int], name: str) -> UnionFind:
        uf = UnionFind(self.verts[name])
        for e, c in self.cluster.items():
            if c == name and status[e] == SELECTED:
                if not uf.union(*self.ends[e]):
                    raise _Fail({"reason": "selected cycle", "cluster": name, "edges": [e]})
        return uf

    def propagate(self, status: dict[int, int]) -> None:
        changed = True
        while changed:
            changed = False
            for name in sorted(self.verts):
                uf = self._partition(status, name)
                live = {}
                for e, c in self.cluster.items():
                    if c != name or status[e] != UNDECIDED:
                        continue
                    a, b = uf.find(self.ends[e][0]), uf.find(self.ends[e][1])
                    if a == b:
                        # would close a cycle with the selected con-edges
                        changed |= self._set(status, e, EXCLUDED)
                    else:
                        live[e] = (a, b)
                if changed:
                    break
                roots = {uf.find(v) for v in self.verts[name]}
                joined = UnionFind(roots)
                for a, b in live.values():
                    joined.union(a, b)
                if len({joined.find(r) for r in roots}) > 1:
                    raise _Fail({
                        "reason": "cluster cannot be spanned",
                        "cluster": name,
                        "edges": sorted(e for e in self.cluster if self.cluster[e] == name),
                    })
                label = blocks(live)
                size: dict[int, int] = {}
                for e in live:
                    size[label[e]] = size.get(label[e], 0) + 1
                for e in sorted(live):
                    if size[label[e]] == 1:
                        changed |= self._set(status, e, SELECTED)
                if changed:
                    break

    def fingerprint(self, status: dict[int, int]) -> tuple:
        undecided = tuple(i for i, (a, _) in enumerate(self.pairs) if status[a] == UNDECIDED)
        parts = []
        for name in sorted(self.verts):
            uf = self._partition(status, name)
            parts.append(tuple(uf.find(v) for v in self.verts[name]))
        return undecided, tuple(parts)

    def run(self, status: dict[int, int]) -> dict[int, int] | None:
        self.nodes += 1
        try:
            self.propagate(status)
        except _Fail as fail:
            self.last_fail = fail.evidence
            return None
        pending = [(a, b) for a, b in self.pairs if status[a] == UNDECIDED]
        if not pending:
            return status
        key = self.fingerprint(status)
        if key in self.failed:
            return None
        a, b = pending[0]
        for first in (a, b):
            trial = dict(status)
            try:
                self._set(trial, first, SELECTED)
            except _Fail as fail:
                self.last_fail = fail.evidence
                continue
            got = self.run(trial)
            if got is not None:
                return got
        self.failed.add(key)
        return None


def solve_single_conflict(A: ConMultigraph) -> ResidueResult:
    """Decide the residue; the selection holds exactly one con-edge per pair."""
    search = _Search(A)
    search.last_fail = {"reason": "no selection", "edges": []}
    status = {e: UNDECIDED for e in A.edges}
    got = search.run(status)
    if got is None:
        return ResidueResult(False, evidence=search.last_fail, nodes=search.nodes)
    chosen = sorted(e for e, s in got.items() if s == SELECTED)
    return ResidueResult(True, chosen, nodes=search.nodes)
