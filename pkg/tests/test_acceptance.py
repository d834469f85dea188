"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``.  Criteria 1 to 8 touch the
library only; criterion 9 times the ``bench`` command.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from cplanar.conmulti import build_con_multigraph, property1_violations, reduce_property1
from cplanar.generate import donut_template, suite_instance
from cplanar.instance import check_enclosure, check_per_face_limit
from cplanar.oracle import oracle_enclosure, oracle_pssttm, oracle_solutions, verify_solution
from cplanar.pipeline import check_instance
from cplanar.solver import check_donut, compute_donut, replay, replay_steps

BOUND = 24
SUITE_SIZE = 2000


def report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


def oracle_truth(inst) -> str:
    """Verdict from the brute-force references alone."""
    if check_per_face_limit(inst):
        return "precondition-violated"
    if not oracle_enclosure(inst):
        return "not-c-planar"
    A = build_con_multigraph(inst)
    if len(A.edges) > BOUND:
        A = reduce_property1(A)[0]
    return "c-planar" if oracle_pssttm(A.to_problem(), bound=BOUND).accepted else "not-c-planar"


@dataclass
class SuiteRun:
    seconds: float = 0.0
    compared: int = 0
    disagreements: list[int] = field(default_factory=list)
    accepted: int = 0
    bad_witness: list[int] = field(default_factory=list)
    firings: int = 0
    changed: list[tuple[int, int, str]] = field(default_factory=list)
    exits: int = 0
    nonempty_exits: int = 0
    bad_exits: list[int] = field(default_factory=list)
    donuts: int = 0
    bad_donuts: list[tuple[int, int]] = field(default_factory=list)


@pytest.fixture(scope="module")
def suite() -> SuiteRun:
    run = SuiteRun()
    start = time.perf_counter()
    seed = 0
    while run.compared < SUITE_SIZE:
        inst = suite_instance(seed)
        rep = check_instance(inst, verify=False)
        if rep.reduced is not None and len(rep.reduced.edges) > BOUND:
            seed += 1
            continue
        run.compared += 1
        if rep.verdict != oracle_truth(inst):
            run.disagreements.append(seed)
        res = rep.result
        if res is not None:
            A = rep.reduced
            if res.accepted:
                run.accepted += 1
                if verify_solution(A.to_problem(), res.selected):
                    run.bad_witness.append(seed)
            for step, rule, before, after in replay_steps(A, res.trace):
                run.firings += 1
                if oracle_pssttm(before.to_problem()).accepted != oracle_pssttm(after.to_problem()).accepted:
                    run.changed.append((seed, step, rule))
            if res.rejection is None or res.rejection.rule == "single_conflict":
                run.exits += 1
                rest = replay(A, res.trace)
                run.nonempty_exits += bool(rest.edges)
                if any(len(rest.adj[e]) != 1 for e in rest.edges):
                    run.bad_exits.append(seed)
            for step, donut in res.donuts:
                run.donuts += 1
                there = replay(A, res.trace, upto=step).to_problem()
                spokes = set(donut.spokes)
                if any(len(spokes & set(s)) != 1 for s in oracle_solutions(there)):
                    run.bad_donuts.append((seed, step))
        seed += 1
    run.seconds = time.perf_counter() - start
    return run


def test_criterion_1_solver_matches_oracle(suite, capsys):
    ok = not suite.disagreements and suite.compared >= SUITE_SIZE and suite.seconds < 600
    report(capsys, 1, ok, f"{suite.compared} instances, {len(suite.disagreements)} disagreements, "
                          f"{suite.seconds:.1f}s")
    assert ok, suite.disagreements[:10]


def test_criterion_2_witnesses_verify(suite, capsys):
    ok = suite.accepted > 0 and not suite.bad_witness
    report(capsys, 2, ok, f"{suite.accepted} accepted, {len(suite.bad_witness)} invalid")
    assert ok, suite.bad_witness[:10]


def test_criterion_3_rules_preserve_verdict(suite, capsys):
    ok = suite.firings > 0 and not suite.changed
    report(capsys, 3, ok, f"{suite.firings} firings, {len(suite.changed)} verdict changes")
    assert ok, suite.changed[:10]


def test_criterion_4_residue_is_single_conflict(suite, capsys):
    ok = suite.exits > 0 and not suite.bad_exits
    report(capsys, 4, ok, f"{suite.exits} loop exits, {suite.nonempty_exits} non-empty, "
                          f"{len(suite.bad_exits)} bad residues")
    assert ok, suite.bad_exits[:10]


def test_criterion_5_one_spoke_per_solution(suite, capsys):
    ok = suite.donuts > 0 and not suite.bad_donuts
    report(capsys, 5, ok, f"{suite.donuts} donuts, {len(suite.bad_donuts)} violations")
    assert ok, suite.bad_donuts[:10]


def test_criterion_6_reduction_preserves_verdict(capsys):
    done, changed, bad, seed = 0, 0, [], 0
    while done < 500:
        A = build_con_multigraph(suite_instance(seed))
        seed += 1
        if len(A.edges) > BOUND:
            continue
        B, _ = reduce_property1(A)
        changed += len(B.edges) < len(A.edges)
        same = oracle_pssttm(A.to_problem()).accepted == oracle_pssttm(B.to_problem()).accepted
        if not same or property1_violations(B):
            bad.append(seed - 1)
        done += 1
    report(capsys, 6, not bad, f"{done} instances, {changed} reduced, {len(bad)} failures")
    assert not bad, bad[:10]


def test_criterion_7_enclosure_matches_oracle(capsys):
    bad = []
    for seed in range(500):
        inst = suite_instance(seed)
        assert len(inst.vertices) <= 10
        if check_enclosure(inst) != oracle_enclosure(inst):
            bad.append(seed)
    report(capsys, 7, not bad, f"500 instances, {len(bad)} mismatches")
    assert not bad, bad[:10]


def test_criterion_8_template_donuts_are_valid(capsys):
    rng = np.random.default_rng(8)
    bad, donuts = [], 0
    for i in range(200):
        k, m = int(rng.integers(2, 7)), int(rng.integers(2, 5))
        A = reduce_property1(build_con_multigraph(
            donut_template(k, m, rng, mirror=bool(rng.integers(2)))
        ))[0]
        for e in sorted(A.edges):
            if len(A.adj[e]) < 2:
                continue
            donut = compute_donut(A, e)
            donuts += 1
            problems = check_donut(A, donut, e)
            if donut.k != k or len(donut.betas) != m or problems:
                bad.append((i, e, problems))
    ok = donuts >= 200 and not bad
    report(capsys, 8, ok, f"200 templates, {donuts} donuts, {len(bad)} invalid")
    assert ok, bad[:5]


@pytest.mark.slow
def test_criterion_9_cubic_scaling(capsys):
    from cplanar.cli import bench

    _, slope = bench([250, 500, 1000, 2000], seed=0, repeats=3)
    ok = slope is not None and slope <= 3.5
    report(capsys, 9, ok, f"log-log slope {slope:.2f}, target <= 3.5")
    assert ok
