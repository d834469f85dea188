"""Test-and-simplify driver for the planar-set-of-spanning-trees problem.

The loop restarts from the first rule after every mutation and stops when a
test rejects or no rule applies.  At that point every con-edge crosses
exactly one other con-edge, and the residue goes to the single-conflict
search.

Rule names follow the trace vocabulary: ``test1``..``test4`` reject,
``simpl1``..``simpl8`` remove, select and contract.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterator

from .conmulti import ConMultigraph, FacialCycle, PreconditionError, facial_cycles
from .maps import UnionFind, blocks


class SolverInternalError(RuntimeError):
    """An invariant that the rule set guarantees has been broken."""


TAGS = {
    "test1": "disconnected-cluster",
    "simpl1": "bridge-forced",
    "test2": "odd-conflict-cycle",
    "simpl2": "self-loop",
    "simpl3": "conflict-free",
    "simpl4": "lone-double-crossing",
    "test3": "repeated-crossing-order",
    "test4": "interleaved-crossings",
    "simpl5": "isomorphic-spokes",
    "simpl6": "unmatched-witness",
    "simpl7": "matched-witness",
    "simpl8": "two-spoke-asymmetry",
    "single_conflict": "one-per-pair",
}


@dataclass
class TraceEntry:
    step: int
    rule: str
    lemma: str
    edges: list[int]
    action: str

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "rule": self.rule,
            "lemma": self.lemma,
            "edges": list(self.edges),
            "action": self.action,
        }


@dataclass
class Rejection:
    rule: str
    evidence: dict

    @property
    def lemma(self) -> str:
        return TAGS.get(self.rule, self.rule)


@dataclass
class Application:
    rule: str
    remove: list[int] = field(default_factory=list)
    select: list[int] = field(default_factory=list)
    info: dict = field(default_factory=dict)


@dataclass
class Donut:
    cluster: str
    spokes: list[int]
    spoke_darts: list[int]  # dart of spoke i on cycles[i]
    cycles: list[FacialCycle]  # cycles[i] holds spoke i-1 reversed and spoke i
    betas: list[str]
    crossing: list[dict[str, int]]  # per spoke: beta cluster -> crossing con-edge

    @property
    def k(self) -> int:
        return len(self.spokes)


@dataclass
class ConflictingStructure:
    root: int
    layer: dict[int, tuple[str, int]]  # con-edge -> ("H" | "L", index)

    def layers(self, kind: str) -> list[set[int]]:
        depth = max((j for k, j in self.layer.values() if k == kind), default=-1)
        out: list[set[int]] = [set() for _ in range(depth + 1)]
        for e, (k, j) in self.layer.items():
            if k == kind:
                out[j].add(e)
        return out

    def get(self, kind: str, j: int) -> set[int]:
        return {e for e, (k, i) in self.layer.items() if k == kind and i == j}

    def union(self, kind: str) -> list[int]:
        return sorted(e for e, (k, _) in self.layer.items() if k == kind)

    @property
    def depth(self) -> int:
        return max((j for _, j in self.layer.values()), default=0)


# -- per-iteration derived data -----------------------------------------------


class View:
    """Facial cycles and crossing data of the current A, computed on demand."""

    def __init__(self, A: ConMultigraph) -> None:
        self.A = A
        self._cycles: dict[str, list[FacialCycle]] = {}
        self._cyc_of: dict[str, dict[int, FacialCycle]] = {}

    def cycles(self, name: str) -> list[FacialCycle]:
        if name not in self._cycles:
            cyc = facial_cycles(self.A, name)
            self._cycles[name] = cyc
            self._cyc_of[name] = {d: c for c in cyc for d in c.darts}
        return self._cycles[name]

    def cycle_of(self, d: int) -> FacialCycle | None:
        name = self.A.edges[d >> 1].cluster
        self.cycles(name)
        return self._cyc_of[name].get(d)

    def crossing_clusters(self, e: int) -> set[str]:
        return {self.A.edges[g].cluster for g in self.A.adj[e]}

    def order_clusters(self, d: int) -> list[str]:
        return [self.A.edges[g].cluster for g in self.A.crossing_order(d)]


# -- tests and local simplifications ------------------------------------------


def _components(A: ConMultigraph, name: str) -> list[list[int]]:
    verts = A.cluster_vertices(name)
    uf = UnionFind(verts)
    for e in A.cluster_edges(name):
        uf.union(*A.endpoints(e))
    return sorted(sorted(g) for g in uf.groups().values())


def test_disconnected(A: ConMultigraph) -> Rejection | None:
    uf = UnionFind(A.vertex_cluster)
    for e in A.edges:
        uf.union(*A.endpoints(e))
    roots: dict[str, set[int]] = defaultdict(set)
    for v, c in A.vertex_cluster.items():
        roots[c].add(uf.find(v))
    split = sorted(c for c, r in roots.items() if len(r) > 1)
    if split:
        name = split[0]
        return Rejection("test1", {"cluster": name, "components": _components(A, name)})
    return None


def simpl_bridge(A: ConMultigraph) -> Application | None:
    by_cluster: dict[str, dict[int, tuple[int, int]]] = defaultdict(dict)
    for e, ce in A.edges.items():
        by_cluster[ce.cluster][e] = A.endpoints(e)
    best = None
    for edges in by_cluster.values():
        label = blocks(edges)
        size: dict[int, int] = defaultdict(int)
        for e in edges:
            size[label[e]] += 1
        for e, (u, v) in edges.items():
            if u != v and size[label[e]] == 1 and (best is None or e < best):
                best = e
    if best is None:
        return None
    return Application("simpl1", remove=sorted(A.adj[best]), select=[best])


def odd_conflict_cycle(adj: dict[int, set[int]]) -> list[int] | None:
    colour: dict[int, int] = {}
    parent: dict[int, int | None] = {}
    for s in sorted(adj):
        if s in colour:
            continue
        colour[s] = 0
        parent[s] = None
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in sorted(adj[x]):
                if y not in colour:
                    colour[y] = 1 - colour[x]
                    parent[y] = x
                    queue.append(y)
                elif colour[y] == colour[x]:
                    return _close_cycle(parent, x, y)
    return None


def _close_cycle(parent: dict[int, int | None], x: int, y: int) -> list[int]:
    path_x = [x]
    while parent[path_x[-1]] is not None:
        path_x.append(parent[path_x[-1]])
    pos = {v: i for i, v in enumerate(path_x)}
    path_y = [y]
    while path_y[-1] not in pos:
        path_y.append(parent[path_y[-1]])
    meet = path_y[-1]
    return path_x[: pos[meet] + 1] + path_y[-2::-1]


def test_bipartite(A: ConMultigraph) -> Rejection | None:
    cyc = odd_conflict_cycle(A.adj)
    if cyc is None:
        return None
    return Rejection("test2", {"odd_cycle": cyc})


def simpl_self_loop(A: ConMultigraph) -> Application | None:
    for e in sorted(A.edges):
        if A.is_loop(e):
            return Application("simpl2", remove=[e])
    return None


def simpl_conflict_free(A: ConMultigraph) -> Application | None:
    for e in sorted(A.edges):
        if not A.adj[e]:
            return Application("simpl3", select=[e])
    return None


def simpl_lone_double_crossing(A: ConMultigraph, view: View) -> Application | None:
    for e in sorted(A.edges):
        crossed = sorted(view.crossing_clusters(e))
        if len(crossed) < 2:
            continue
        for d in (2 * e, 2 * e + 1):
            cyc = view.cycle_of(d)
            if cyc is None:
                continue
            others = [view.crossing_clusters(x >> 1) for x in cyc.darts if x >> 1 != e]
            for beta, gamma in combinations(crossed, 2):
                if not any(beta in s and gamma in s for s in others):
                    return Application(
                        "simpl4",
                        remove=[e],
                        info={"cycle": list(cyc.darts), "beta": beta, "gamma": gamma},
                    )
    return None


def test_repeated_order(A: ConMultigraph, view: View) -> Rejection | None:
    for name in A.clusters:
        for cyc in view.cycles(name):
            seen: dict[tuple[str, str], int] = {}
            for d in cyc.darts:
                order = view.order_clusters(d)
                for pair in combinations(order, 2):
                    if pair in seen and seen[pair] != d >> 1:
                        return Rejection(
                            "test3",
                            {
                                "cluster": name,
                                "cycle": list(cyc.darts),
                                "edges": [seen[pair], d >> 1],
                                "beta": pair[0],
                                "gamma": pair[1],
                            },
                        )
                    seen.setdefault(pair, d >> 1)
    return None


def test_interleaved(A: ConMultigraph, view: View) -> Rejection | None:
    for name in A.clusters:
        for cyc in view.cycles(name):
            darts = cyc.darts
            n = len(darts)
            sets = [view.crossing_clusters(d >> 1) for d in darts]
            for i, d in enumerate(darts):
                for beta, gamma in combinations(view.order_clusters(d), 2):
                    between = None
                    for t in range(1, n):
                        j = (i + t) % n
                        if between is not None and beta in sets[j] and gamma in sets[j]:
                            return Rejection(
                                "test4",
                                {
                                    "cluster": name,
                                    "cycle": list(darts),
                                    "edges": [d >> 1, between, darts[j] >> 1],
                                    "beta": beta,
                                    "gamma": gamma,
                                },
                            )
                        if beta in sets[j] and between is None:
                            between = darts[j] >> 1
    return None


def run_tests(A: ConMultigraph) -> Rejection | None:
    """The first failing test, tests only, in their fixed order."""
    view = View(A)
    for test in (
        lambda: test_disconnected(A),
        lambda: test_bipartite(A),
        lambda: test_repeated_order(A, view),
        lambda: test_interleaved(A, view),
    ):
        rej = test()
        if rej is not None:
            return rej
    return None


def find_local_simplification(A: ConMultigraph) -> Application | None:
    """The first applicable of the bridge, self-loop, conflict-free and
    lone-double-crossing rules."""
    view = View(A)
    for rule in (
        lambda: simpl_bridge(A),
        lambda: simpl_self_loop(A),
        lambda: simpl_conflict_free(A),
        lambda: simpl_lone_double_crossing(A, view),
    ):
        app = rule()
        if app is not None:
            return app
    return None


# -- donuts --------------------------------------------------------------------


class DonutError(SolverInternalError):
    pass


def compute_donut(A: ConMultigraph, e: int, view: View | None = None) -> Donut:
    """Walk face by face from ``e`` to collect the spokes of its donut."""
    view = View(A) if view is None else view
    betas = view.order_clusters(2 * e)
    if len(betas) < 2:
        raise PreconditionError(f"con-edge {e} crosses fewer than two con-edges")
    need = set(betas)
    name = A.edges[e].cluster

    def crossing_map(x: int) -> dict[str, int]:
        return {A.edges[g].cluster: g for g in A.adj[x]}

    first = view.cycle_of(2 * e)
    if first is None:
        raise DonutError(f"con-edge {e} lies on no facial cycle")
    spokes, darts, cycles = [e], [2 * e], [first]
    crossing = [{b: crossing_map(e)[b] for b in betas}]
    cur = 2 * e
    for _ in range(len(A.edges) + 1):
        cyc = view.cycle_of(cur ^ 1)
        if cyc is None:
            raise DonutError(f"dart {cur ^ 1} lies on no facial cycle")
        cands = [
            d for d in cyc.darts
            if d >> 1 != cur >> 1 and need <= view.crossing_clusters(d >> 1)
        ]
        if len(cands) != 1:
            raise DonutError(f"{len(cands)} candidate spokes after con-edge {cur >> 1}")
        d = cands[0]
        if d >> 1 == e:
            if d != 2 * e:
                raise DonutError("walk returned to the first spoke from the wrong side")
            return Donut(name, spokes, darts, cycles, betas, crossing)
        if d >> 1 in spokes:
            raise DonutError(f"walk revisited spoke {d >> 1}")
        cm = crossing_map(d >> 1)
        spokes.append(d >> 1)
        darts.append(d)
        cycles.append(cyc)
        crossing.append({b: cm[b] for b in betas})
        cur = d
    raise DonutError("donut walk did not close")


def check_donut(A: ConMultigraph, donut: Donut, start: int | None = None) -> list[str]:
    """Every violated donut property, as readable strings (empty when valid)."""
    bad: list[str] = []
    k, betas = donut.k, donut.betas
    m = len(betas)
    if k < 2:
        bad.append("fewer than two spokes")
    if m < 2:
        bad.append("fewer than two crossing clusters")
    if start is not None and start not in donut.spokes:
        bad.append(f"(a) {start} is not a spoke")
    for i, s in enumerate(donut.spokes):
        for b in betas:
            g = donut.crossing[i].get(b)
            if g is None or g not in A.adj[s] or A.edges[g].cluster != b:
                bad.append(f"(b) spoke {s} not crossed by a con-edge for {b}")
        nxt = donut.cycles[(i + 1) % k]
        if donut.spoke_darts[i] not in donut.cycles[i].darts:
            bad.append(f"(c) spoke {s} missing from its cycle")
        if donut.spoke_darts[i] ^ 1 not in nxt.darts:
            bad.append(f"(c) spoke {s} missing from the next cycle")
        order = [A.edges[g].cluster for g in A.crossing_order(donut.spoke_darts[i])]
        if [c for c in order if c in betas] != betas:
            bad.append(f"(d) spoke {s} crossed in order {order}")
        darts = list(nxt.darts)
        if donut.spoke_darts[i] ^ 1 in darts and donut.spoke_darts[(i + 1) % k] in darts:
            a = darts.index(donut.spoke_darts[i] ^ 1)
            b = darts.index(donut.spoke_darts[(i + 1) % k])
            n = len(darts)
            forward = [darts[(a + t) % n] >> 1 for t in range(1, (b - a) % n)]
            back = [darts[(b + t) % n] >> 1 for t in range(1, (a - b) % n)]
            for x in forward:
                hit = {A.edges[g].cluster for g in A.adj[x]} & set(betas[1:])
                if hit:
                    bad.append(f"(e) con-edge {x} after spoke {s} crosses {sorted(hit)}")
            for x in back:
                hit = {A.edges[g].cluster for g in A.adj[x]} & set(betas[: m - 1])
                if hit:
                    bad.append(f"(f) con-edge {x} before spoke {s} crosses {sorted(hit)}")
    return bad


def conflicting_structure(A: ConMultigraph, e: int) -> ConflictingStructure:
    """BFS layers H_0 = {e}, L_1, H_1, L_2, ... of e's conflict component."""
    dist = {e: 0}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for y in sorted(A.adj[x]):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    layer = {
        x: ("H", d // 2) if d % 2 == 0 else ("L", (d + 1) // 2) for x, d in dist.items()
    }
    return ConflictingStructure(e, layer)


def structures_isomorphic(
    A: ConMultigraph, m1: ConflictingStructure, m2: ConflictingStructure
) -> dict[int, int] | None:
    """The cluster-forced bijection between two structures, if it is an isomorphism."""
    by1: dict[str, int] = {}
    by2: dict[str, int] = {}
    for src, dst in ((m1, by1), (m2, by2)):
        for x in src.layer:
            c = A.edges[x].cluster
            if c in dst:
                raise PreconditionError(f"two con-edges for {c} in one conflict component")
            dst[c] = x
    if by1.keys() != by2.keys():
        return None
    delta = {by1[c]: by2[c] for c in by1}
    for x, y in delta.items():
        if m1.layer[x] != m2.layer[y]:
            return None
    for x in delta:
        for z in delta:
            if (z in A.adj[x]) != (delta[z] in A.adj[delta[x]]):
                return None
    return delta


def _side(struct: ConflictingStructure, keep: str, rule: str, info: dict) -> Application:
    drop = "L" if keep == "H" else "H"
    return Application(rule, remove=struct.union(drop), select=struct.union(keep), info=info)


def donut_isomorphic(A: ConMultigraph, donut: Donut) -> Application | None:
    k = donut.k
    ms = [conflicting_structure(A, s) for s in donut.spokes]
    for i in range(k):
        j = (i + 1) % k
        if structures_isomorphic(A, ms[i], ms[j]) is not None:
            return _side(ms[i], "L", "simpl5", {"spokes": [donut.spokes[i], donut.spokes[j]]})
    return None


def donut_witness(A: ConMultigraph, donut: Donut, view: View) -> Application | None:
    k = donut.k
    ms = [conflicting_structure(A, s) for s in donut.spokes]
    for i, spoke in enumerate(donut.spokes):
        for b in sorted(ms[i].get("L", 1)):
            beta = A.edges[b].cluster
            for g in sorted(A.adj[b]):
                if ms[i].layer.get(g) != ("H", 1):
                    continue
                gamma = A.edges[g].cluster
                dart = A.side_of(spoke, g)
                cyc = view.cycle_of(dart)
                if cyc is donut.cycles[(i + 1) % k] or (
                    cyc is not None and cyc.darts == donut.cycles[(i + 1) % k].darts
                ):
                    step = 1
                else:
                    step = -1
                nb = (i + step) % k
                third = (i + 2 * step) % k
                b_next = next(
                    (x for x in sorted(A.adj[donut.spokes[nb]]) if A.edges[x].cluster == beta),
                    None,
                )
                if b_next is None:
                    continue
                matched = any(A.edges[y].cluster == gamma for y in A.adj[b_next])
                info = {
                    "spoke": spoke,
                    "neighbour": donut.spokes[nb],
                    "beta_edge": b,
                    "gamma_edge": g,
                }
                if not matched:
                    return _side(ms[i], "H", "simpl6", info)
                if k >= 3:
                    info["third"] = donut.spokes[third]
                    return _side(ms[third], "L", "simpl7", info)
    return None


def donut_two_spokes(A: ConMultigraph, donut: Donut) -> Application | None:
    if donut.k != 2:
        return None
    ms = [conflicting_structure(A, s) for s in donut.spokes]
    depth = max(m.depth for m in ms)

    def pairs(m: ConflictingStructure, top: tuple[str, int], low: tuple[str, int]):
        out = set()
        for x in m.get(*top):
            for y in A.adj[x]:
                if m.layer.get(y) == low:
                    out.add((A.edges[x].cluster, A.edges[y].cluster, x, y))
        return out

    for j in range(1, depth + 1):
        for kind, top, low in (
            ("L", ("L", j), ("H", j - 1)),
            ("H", ("H", j), ("L", j)),
        ):
            for a in (0, 1):
                b = 1 - a
                mine = pairs(ms[a], top, low)
                theirs = {(mu, nu) for mu, nu, _, _ in pairs(ms[b], top, low)}
                for mu, nu, x, y in sorted(mine, key=lambda t: (t[2], t[3])):
                    if (mu, nu) not in theirs:
                        return _side(
                            ms[a],
                            kind,
                            "simpl8",
                            {"spoke": donut.spokes[a], "j": j, "e_mu": x, "e_nu": y},
                        )
    return None


# -- driver --------------------------------------------------------------------


@dataclass
class SolveResult:
    accepted: bool
    selected: list[int] | None
    rejection: Rejection | None
    trace: list[TraceEntry]
    donuts: list[tuple[int, Donut]]
    residue_size: int = 0
    steps: int = 0

    def trace_dicts(self) -> list[dict]:
        return [t.to_dict() for t in self.trace]


class SolverState:
    """Current A, the selected set, and the mutation log."""

    def __init__(self, A: ConMultigraph) -> None:
        self.initial = A.copy()
        self.A = A.copy()
        self.selected: list[int] = []
        self.trace: list[TraceEntry] = []
        self.status = "running"
        self.step = 0
        self.donuts: list[tuple[int, Donut]] = []

    def _log(self, rule: str, edges, action: str) -> None:
        self.trace.append(TraceEntry(self.step, rule, TAGS[rule], sorted(edges), action))

    def apply(self, app: Application) -> None:
        self.step += 1
        if app.remove:
            self._log(app.rule, app.remove, "remove")
            self.A.remove(app.remove)
        if app.select:
            for e in app.select:
                if e not in self.A.edges:
                    raise SolverInternalError(f"{app.rule}: con-edge {e} already gone")
                if self.A.adj[e]:
                    raise SolverInternalError(f"{app.rule}: contracting crossed con-edge {e}")
            self._log(app.rule, app.select, "select")
            self._log(app.rule, app.select, "contract")
            for e in sorted(app.select):
                if self.A.is_loop(e):
                    raise SolverInternalError(f"{app.rule}: selected con-edge {e} is a loop")
                self.A.contract(e)
                self.selected.append(e)

    def reject(self, rej: Rejection) -> None:
        self.step += 1
        edges = rej.evidence.get("edges") or rej.evidence.get("odd_cycle") or []
        self._log(rej.rule, edges, "reject")
        self.status = f"rejected({rej.rule})"


def next_move(state: SolverState, check_donuts: bool = True) -> Application | Rejection | None:
    """One pass over the rules in their fixed order."""
    A = state.A
    view = View(A)
    rej = test_disconnected(A)
    if rej:
        return rej
    app = simpl_bridge(A)
    if app:
        return app
    rej = test_bipartite(A)
    if rej:
        return rej
    app = simpl_self_loop(A) or simpl_conflict_free(A) or simpl_lone_double_crossing(A, view)
    if app:
        return app
    rej = test_repeated_order(A, view) or test_interleaved(A, view)
    if rej:
        return rej
    covered: set[int] = set()
    for e in sorted(A.edges):
        if len(A.adj[e]) < 2 or e in covered:
            continue
        donut = compute_donut(A, e, view)
        if check_donuts:
            bad = check_donut(A, donut, e)
            if bad:
                raise DonutError(f"donut for {e} violates: {bad}")
        state.donuts.append((state.step, donut))
        covered.update(donut.spokes)
        app = (
            donut_isomorphic(A, donut)
            or donut_witness(A, donut, view)
            or donut_two_spokes(A, donut)
        )
        if app:
            return app
    return None


def solve(
    A: ConMultigraph,
    on_move: Callable[[SolverState, Application | Rejection], None] | None = None,
    check_donuts: bool = True,
) -> SolveResult:
    """Decide whether A has a planar set of spanning trees."""
    from .single_conflict import solve_single_conflict

    state = SolverState(A)
    limit = len(A.edges) + 1
    while True:
        move = next_move(state, check_donuts)
        if on_move is not None and move is not None:
            on_move(state, move)
        if isinstance(move, Rejection):
            state.reject(move)
            return SolveResult(False, None, move, state.trace, state.donuts, steps=state.step)
        if move is None:
            break
        state.apply(move)
        if state.step > limit:
            raise SolverInternalError("more mutations than con-edges")

    bad = [e for e in state.A.edges if len(state.A.adj[e]) != 1]
    if bad:
        raise SolverInternalError(f"residue con-edges without exactly one conflict: {sorted(bad)}")
    residue = solve_single_conflict(state.A)
    state.step += 1
    if not residue.accepted:
        state._log("single_conflict", residue.evidence.get("edges", []), "reject")
        rej = Rejection("single_conflict", residue.evidence)
        return SolveResult(
            False, None, rej, state.trace, state.donuts, len(state.A.edges), state.step
        )
    if residue.selected:
        state._log("single_conflict", residue.selected, "select")
    selected = sorted(state.selected + list(residue.selected))
    return SolveResult(
        True, selected, None, state.trace, state.donuts, len(state.A.edges), state.step
    )


def replay(initial: ConMultigraph, trace: list[TraceEntry], upto: int | None = None) -> ConMultigraph:
    """Re-apply logged removals and contractions, optionally up to a step."""
    A = initial.copy()
    for t in trace:
        if upto is not None and t.step > upto:
            break
        if t.rule == "single_conflict":
            continue
        if t.action == "remove":
            A.remove(t.edges)
        elif t.action == "contract":
            for e in t.edges:
                A.contract(e)
    return A


def replay_steps(
    initial: ConMultigraph, trace: list[TraceEntry]
) -> Iterator[tuple[int, str, ConMultigraph, ConMultigraph]]:
    """Yield (step, rule, A before, A after) for every mutating rule firing."""
    A = initial.copy()
    by_step: dict[int, list[TraceEntry]] = defaultdict(list)
    for t in trace:
        by_step[t.step].append(t)
    for step in sorted(by_step):
        entries = by_step[step]
        rule = entries[0].rule
        if rule == "single_conflict" or any(t.action == "reject" for t in entries):
            continue
        before = A.copy()
        for t in entries:
            if t.action == "remove":
                A.remove(t.edges)
            elif t.action == "contract":
                for e in t.edges:
                    A.contract(e)
        yield step, rule, before, A.copy()
