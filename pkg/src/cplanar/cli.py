"""Command-line front end: check, crosscheck, gen, bench.

``crosscheck`` and ``bench`` write a CSV table and a PNG figure into
``--out`` (default: the current directory).
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from collections import Counter
from pathlib import Path

from .conmulti import build_con_multigraph, reduce_property1, to_dot
from .generate import GeneratorParams, gen_instance, gen_paired, suite_instance
from .instance import EXIT_INVALID, InstanceError, parse_instance
from .oracle import OracleBoundError, oracle_enclosure, oracle_pssttm
from .pipeline import check_instance


def _write_json(path: str, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_check(args: argparse.Namespace) -> int:
    try:
        raw = Path(args.file).read_bytes()
        inst = parse_instance(raw)
    except OSError as exc:
        print(json.dumps({"verdict": "invalid", "error": "io", "message": str(exc)}))
        return EXIT_INVALID
    except InstanceError as exc:
        print(json.dumps({"verdict": "invalid", "error": exc.kind, "message": str(exc)}))
        return exc.exit_code
    try:
        report = check_instance(inst)
    except InstanceError as exc:
        print(json.dumps({"verdict": "invalid", "error": exc.kind, "message": str(exc)}))
        return exc.exit_code
    if args.trace and report.trace is not None:
        _write_json(args.trace, report.trace)
    if args.witness and report.witness is not None:
        _write_json(args.witness, report.witness)
    if args.dot and report.reduced is not None:
        Path(args.dot).write_text(to_dot(report.reduced), encoding="utf-8")
    out = report.summary()
    if report.evidence is not None:
        out["evidence"] = report.evidence
    print(json.dumps(out, sort_keys=True, default=str))
    return report.exit_code


def oracle_verdict(inst, bound: int = 24) -> str:
    """Ground-truth verdict from the brute-force references only."""
    from .instance import check_per_face_limit

    if check_per_face_limit(inst):
        return "precondition-violated"
    if not oracle_enclosure(inst, max_vertices=max(12, len(inst.vertices))):
        return "not-c-planar"
    A = build_con_multigraph(inst)
    problem = A.to_problem()
    if len(problem.edges) > bound:
        problem = reduce_property1(A)[0].to_problem()
    return "c-planar" if oracle_pssttm(problem, bound=bound).accepted else "not-c-planar"


def crosscheck(n: int, seed: int, max_vertices: int = 10, bound: int = 24) -> dict:
    """Solver against oracle on ``n`` suite instances; returns the tallies."""
    rows = []
    for i in range(n):
        s = seed + i
        inst = suite_instance(s, max_vertices=max_vertices)
        t = time.perf_counter()
        report = check_instance(inst)
        solver_ms = (time.perf_counter() - t) * 1e3
        t = time.perf_counter()
        try:
            truth = oracle_verdict(inst, bound)
        except OracleBoundError:
            truth = "skipped"
        oracle_ms = (time.perf_counter() - t) * 1e3
        rows.append({
            "seed": s,
            "vertices": len(inst.vertices),
            "clusters": len(inst.clusters),
            "con_edges": 0 if report.A is None else len(report.A.edges),
            "reduced": 0 if report.reduced is None else len(report.reduced.edges),
            "solver": report.verdict,
            "oracle": truth,
            "rule": report.rule or "",
            "solver_ms": round(solver_ms, 3),
            "oracle_ms": round(oracle_ms, 3),
        })
    matrix = Counter((r["solver"], r["oracle"]) for r in rows)
    bad = [r["seed"] for r in rows if r["oracle"] != "skipped" and r["solver"] != r["oracle"]]
    return {"rows": rows, "matrix": matrix, "disagreements": bad}


def _plot_crosscheck(rows: list[dict], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    labels = ["c-planar", "not-c-planar", "precondition-violated", "skipped"]
    for solver_v, colour in (("c-planar", "tab:green"), ("not-c-planar", "tab:red")):
        counts = [sum(1 for r in rows if r["solver"] == solver_v and r["oracle"] == o) for o in labels]
        ax1.bar([x + (0.2 if colour == "tab:red" else -0.2) for x in range(len(labels))],
                counts, width=0.4, color=colour, label=f"solver: {solver_v}")
    ax1.set_xticks(range(len(labels)), labels, rotation=15)
    ax1.set_ylabel("instances")
    ax1.set_title("oracle verdict")
    ax1.legend()
    ax2.scatter([r["reduced"] for r in rows], [r["solver_ms"] for r in rows], s=8, label="solver")
    ax2.scatter([r["reduced"] for r in rows], [r["oracle_ms"] for r in rows], s=8, label="oracle")
    ax2.set_yscale("log")
    ax2.set_xlabel("con-edges after reduction")
    ax2.set_ylabel("ms")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_crosscheck(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = crosscheck(args.n, args.seed, args.max_vertices, args.bound)
    rows = res["rows"]
    if rows:
        with open(out / "crosscheck.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        _plot_crosscheck(rows, out / "crosscheck.png")
    summary = {
        "instances": len(rows),
        "agreement": sum(v for (a, b), v in res["matrix"].items() if a == b),
        "matrix": {f"{a}/{b}": v for (a, b), v in sorted(res["matrix"].items())},
        "disagreements": len(res["disagreements"]),
    }
    print(json.dumps(summary, sort_keys=True))
    if res["disagreements"]:
        print(f"minimal reproducer: seed {min(res['disagreements'])}", file=sys.stderr)
        return 1
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    params = GeneratorParams(
        seed=args.seed,
        min_vertices=args.min_vertices,
        max_vertices=args.max_vertices,
        min_clusters=args.min_clusters,
        max_clusters=args.max_clusters,
        edge_density=args.edge_density,
        enforce_face_limit=not args.no_face_limit,
    )
    inst = gen_instance(params)
    Path(args.out).write_text(json.dumps(inst.to_dict(), indent=1) + "\n", encoding="utf-8")
    return 0


def bench_instance(size: int, seed: int):
    """A bench instance with ``size`` vertices clustered into co-facial pairs."""
    params = GeneratorParams(
        seed=seed, min_vertices=size, max_vertices=size, max_clusters=size, edge_density=0.5
    )
    return gen_paired(params)


def bench(sizes: list[int], seed: int, repeats: int = 3) -> tuple[list[dict], float | None]:
    rows = []
    for size in sizes:
        for r in range(repeats):
            inst = bench_instance(size, seed * 1000 + size * 10 + r)
            t = time.perf_counter()
            report = check_instance(inst, verify=False)
            ms = (time.perf_counter() - t) * 1e3
            rows.append({
                "size": size,
                "repeat": r,
                "edges": len(inst.edges),
                "con_edges": 0 if report.A is None else len(report.A.edges),
                "verdict": report.verdict,
                "ms": round(ms, 3),
            })
    slope = fit_slope(rows)
    return rows, slope


def fit_slope(rows: list[dict]) -> float | None:
    import numpy as np

    sizes = sorted({r["size"] for r in rows})
    if len(sizes) < 2:
        return None
    med = [statistics.median(r["ms"] for r in rows if r["size"] == s) for s in sizes]
    slope, _ = np.polyfit(np.log(sizes), np.log(med), 1)
    return float(slope)


def _plot_bench(rows: list[dict], slope: float | None, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sizes = sorted({r["size"] for r in rows})
    med = [statistics.median(r["ms"] for r in rows if r["size"] == s) for s in sizes]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog([r["size"] for r in rows], [r["ms"] for r in rows], "o", alpha=0.4, label="runs")
    ax.loglog(sizes, med, "-s", label="median")
    ax.set_xlabel("|C| (vertices)")
    ax.set_ylabel("wall time (ms)")
    if slope is not None:
        ax.set_title(f"log-log slope {slope:.2f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, slope = bench(sizes, args.seed, args.repeats)
    with open(out / "bench.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    _plot_bench(rows, slope, out / "bench.png")
    table = {
        str(s): statistics.median(r["ms"] for r in rows if r["size"] == s) for s in sizes
    }
    print(json.dumps({"median_ms": table, "slope": slope}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cplanar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide c-planarity of an instance file")
    p.add_argument("file")
    p.add_argument("--trace", help="write the rule trace as JSON")
    p.add_argument("--witness", help="write the saturator as JSON")
    p.add_argument("--dot", help="write the reduced conflict graph as DOT")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("crosscheck", help="compare solver and brute-force oracle")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-vertices", type=int, default=10)
    p.add_argument("--bound", type=int, default=24, help="oracle con-edge bound")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-vertices", type=int, default=6)
    p.add_argument("--max-vertices", type=int, default=10)
    p.add_argument("--min-clusters", type=int, default=2)
    p.add_argument("--max-clusters", type=int, default=5)
    p.add_argument("--edge-density", type=float, default=0.3)
    p.add_argument("--no-face-limit", action="store_true", help="allow per-face limit violations")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the solver over instance sizes")
    p.add_argument("--sizes", default="250,500,1000,2000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
