"""End-to-end decision: instance in, verdict plus witness or rejection out."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Any

from .conmulti import ConMultigraph, build_con_multigraph, reduce_property1
from .instance import (
    EXIT_FACE_LIMIT,
    EXIT_INVALID,
    EmbeddedClusteredInstance,
    InstanceError,
    check_enclosure,
    check_per_face_limit,
)
from .oracle import verify_solution
from .solver import SolveResult, solve

EXIT_CPLANAR = 0
EXIT_NOT_CPLANAR = 1

VERDICT_EXIT = {
    "c-planar": EXIT_CPLANAR,
    "not-c-planar": EXIT_NOT_CPLANAR,
    "invalid": EXIT_INVALID,
    "precondition-violated": EXIT_FACE_LIMIT,
}


@dataclass
class RunReport:
    fingerprint: str
    verdict: str
    rule: str | None = None
    witness: list[dict] | None = None
    trace: list[dict] | None = None
    evidence: Any = None
    timings: dict[str, float] = field(default_factory=dict)
    A: ConMultigraph | None = None
    reduced: ConMultigraph | None = None
    result: SolveResult | None = None

    @property
    def exit_code(self) -> int:
        return VERDICT_EXIT[self.verdict]

    def summary(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "verdict": self.verdict,
            "rule": self.rule,
            "witness_size": None if self.witness is None else len(self.witness),
            "timings_ms": {k: round(v, 3) for k, v in self.timings.items()},
        }


def fingerprint(inst: EmbeddedClusteredInstance) -> str:
    return hashlib.sha256(inst.to_json().encode()).hexdigest()[:16]


def _outer_face_id(inst: EmbeddedClusteredInstance) -> int | None:
    hint = inst.outer_face
    if hint is None:
        return None
    if isinstance(hint, int):
        if not 0 <= hint < len(inst.faces):
            raise InstanceError("outer_face", f"no face {hint}")
        return hint
    seq = [int(v) for v in hint]
    for f in inst.faces:
        verts = f.vertices
        if len(verts) == len(seq) and any(
            verts[i:] + verts[:i] == seq for i in range(len(verts))
        ):
            return f.id
    raise InstanceError("outer_face", f"no face with boundary {seq}")


def check_instance(inst: EmbeddedClusteredInstance, verify: bool = True) -> RunReport:
    """Run the whole decision procedure on a validated instance."""
    report = RunReport(fingerprint(inst), "c-planar")
    clock = time.perf_counter

    t = clock()
    faces = inst.faces
    violations = check_per_face_limit(inst, faces)
    report.timings["faces"] = (clock() - t) * 1e3
    if violations:
        report.verdict = "precondition-violated"
        report.rule = "face-limit"
        report.evidence = [
            {"face": v.face, "cluster": v.cluster, "vertices": list(v.vertices)}
            for v in violations
        ]
        return report

    t = clock()
    admissible = check_enclosure(inst, faces)
    hint = _outer_face_id(inst)
    report.timings["enclosure"] = (clock() - t) * 1e3
    if not admissible or (hint is not None and hint not in admissible):
        report.verdict = "not-c-planar"
        report.rule = "enclosure"
        report.evidence = {"admissible_faces": sorted(admissible), "outer_face": hint}
        return report

    t = clock()
    A = build_con_multigraph(inst)
    reduced, _ = reduce_property1(A)
    report.A, report.reduced = A, reduced
    report.timings["reduce"] = (clock() - t) * 1e3

    t = clock()
    result = solve(reduced)
    report.result = result
    report.trace = result.trace_dicts()
    report.timings["solve"] = (clock() - t) * 1e3
    if not result.accepted:
        report.verdict = "not-c-planar"
        report.rule = result.rejection.rule
        report.evidence = result.rejection.evidence
        return report

    if verify:
        bad = verify_solution(reduced.to_problem(), result.selected)
        if bad:
            raise AssertionError(f"solver produced an invalid witness: {bad}")
    report.witness = [A.edges[e].to_dict() for e in result.selected]
    return report
