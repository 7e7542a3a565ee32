"""Command-line front end: plan, sweep, verify, export.

Exit codes: 0 success, 1 input or I/O error, 2 no solution under the
given constraint, 3 enumeration guard violation.  kB always means 1000
bytes in tables and size arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import oracle
from .errors import FusePlanError, TooLarge
from .fusion_graph import (
    FusionGraph,
    build_graph,
    dump_graph,
    overhead_factor,
    path_peak_ram,
    path_total_macs,
)
from .model_ir import NetworkModel, parse_model
from .optimizer import (
    Constraint,
    NoSolution,
    PlanResult,
    heuristic_head_fusion,
    solve_p1,
    solve_p2,
    sweep,
)

_SIZE_SUFFIXES = {"": 1, "b": 1, "kb": 1000, "mb": 1000**2, "gb": 1000**3}


def parse_size(text: str) -> int | float:
    """Byte sizes like '16kB', '1GB', '2048'; 'inf' for unconstrained."""
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    for suffix in sorted(_SIZE_SUFFIXES, key=len, reverse=True):
        if suffix and t.endswith(suffix):
            number = t[: -len(suffix)].strip()
            break
    else:
        number, suffix = t, ""
    try:
        value = float(number) if "." in number else int(number)
    except ValueError:
        raise ValueError(f"cannot parse size {text!r}") from None
    result = value * _SIZE_SUFFIXES[suffix]
    if result <= 0:
        raise ValueError(f"size must be positive: {text!r}")
    return int(result) if result == int(result) else result


def parse_factor(text: str) -> Fraction | float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    value = Fraction(t)
    if value < 1:
        raise ValueError(f"overhead cap must be >= 1, got {text}")
    return value


def _load_model(path: str, element_bytes: int | None) -> NetworkModel:
    model = parse_model(Path(path).read_text())
    if element_bytes is not None:
        model = NetworkModel(
            name=model.name,
            input_shape=model.input_shape,
            layers=model.layers,
            element_bytes=element_bytes,
        )
    return model


def _fmt_kb(ram_bytes: int) -> str:
    return f"{ram_bytes / 1000:.3f}"


def _fmt_factor(f: Fraction) -> str:
    return "1" if f == 1 else f"{float(f):.2f}"


def _segments(result: PlanResult) -> list[dict]:
    return [
        {"start": e.src, "end": e.dst, "fused": e.dst - e.src > 1}
        for e in result.setting
    ]


def _result_doc(model: NetworkModel, result: PlanResult) -> dict:
    return {
        "schema": 1,
        "model": model.name,
        "segments": _segments(result),
        "peak_ram_bytes": result.peak_ram_bytes,
        "total_macs": result.total_macs,
        "overhead_factor": f"{result.overhead.numerator}/{result.overhead.denominator}",
    }


def _print_plan_md(model: NetworkModel, result: PlanResult) -> None:
    print(f"# plan for {model.name}")
    print()
    print(f"- peak RAM: {_fmt_kb(result.peak_ram_bytes)} kB ({result.peak_ram_bytes} bytes)")
    print(f"- total MACs: {result.total_macs}")
    print(f"- overhead factor F: {_fmt_factor(result.overhead)} "
          f"({result.overhead.numerator}/{result.overhead.denominator})")
    print()
    print("| segment | layers | fused | RAM (kB) | MACs |")
    print("|---|---|---|---|---|")
    for idx, e in enumerate(result.setting):
        fused = "yes" if e.dst - e.src > 1 else "no"
        print(f"| {idx} | {e.src}..{e.dst - 1} | {fused} | {_fmt_kb(e.ram_bytes)} | {e.macs} |")


def cmd_plan(args) -> int:
    model = _load_model(args.model, args.element_bytes)
    graph = build_graph(model)
    if args.graph_dump:
        Path(args.graph_dump).write_text(dump_graph(graph))
    if args.p1 is not None:
        result = solve_p1(graph, args.p1)
    else:
        result = solve_p2(graph, args.p2)
    if isinstance(result, NoSolution):
        print(f"no solution: {result.reason}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(_result_doc(model, result), indent=2))
    else:
        _print_plan_md(model, result)
    return 0


def _sweep_rows(model: NetworkModel, graph: FusionGraph, constraints) -> list[dict]:
    rows = []
    vanilla_singles = tuple(e for e in graph.edges if e.dst == e.src + 1)
    rows.append(
        {
            "label": "Vanilla",
            "ram_kb": _fmt_kb(path_peak_ram(vanilla_singles)),
            "F": _fmt_factor(overhead_factor(vanilla_singles, graph)),
            "status": "ok",
        }
    )
    heur = heuristic_head_fusion(graph)
    rows.append(
        {
            "label": "Heuristic",
            "ram_kb": _fmt_kb(heur.peak_ram_bytes),
            "F": _fmt_factor(heur.overhead),
            "status": "ok",
        }
    )
    prev = None
    for constraint, result in sweep(graph, constraints):
        if constraint.kind == "max_overhead":
            limit = "inf" if constraint.limit == math.inf else _fmt_factor(Fraction(constraint.limit))
            label = f"P1:F_max={limit}"
        else:
            limit = "inf" if constraint.limit == math.inf else _fmt_kb(int(constraint.limit)) + "kB"
            label = f"P2:P_max={limit}"
        if isinstance(result, NoSolution):
            rows.append({"label": label, "ram_kb": "", "F": "", "status": "no-solution"})
            prev = None
            continue
        same = prev is not None and prev.setting == result.setting
        rows.append(
            {
                "label": label,
                "ram_kb": _fmt_kb(result.peak_ram_bytes),
                "F": _fmt_factor(result.overhead),
                "status": "same-as-above" if same else "ok",
            }
        )
        prev = result
    return rows


def _emit_table(rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps({"schema": 1, "rows": rows}, indent=2))
        return
    if fmt == "csv":
        print("label,ram_kb,F,status")
        for r in rows:
            print(f"{r['label']},{r['ram_kb']},{r['F']},{r['status']}")
        return
    print("| constraint | RAM (kB) | F | status |")
    print("|---|---|---|---|")
    for r in rows:
        if r["status"] == "same-as-above":
            print(f"| {r['label']} | (SAA) | | |")
        elif r["status"] == "no-solution":
            print(f"| {r['label']} | (No Solution) | | |")
        else:
            print(f"| {r['label']} | {r['ram_kb']} | {r['F']} | {r['status']} |")


def cmd_sweep(args) -> int:
    model = _load_model(args.model, args.element_bytes)
    graph = build_graph(model)
    if args.graph_dump:
        Path(args.graph_dump).write_text(dump_graph(graph))
    constraints = []
    if args.p1_grid:
        for tok in args.p1_grid.split(","):
            constraints.append(Constraint.max_overhead(parse_factor(tok)))
    if args.p2_grid:
        for tok in args.p2_grid.split(","):
            constraints.append(Constraint.max_peak_ram(parse_size(tok)))
    if not constraints:
        print("sweep needs --p1-grid and/or --p2-grid", file=sys.stderr)
        return 1
    _emit_table(_sweep_rows(model, graph, constraints), args.format)
    return 0


def _verify_model(model: NetworkModel, max_failures: int = 5) -> list[str]:
    """Cross-check analytic costs, solvers and executors on one model."""
    failures = []
    graph = build_graph(model)
    x = oracle.random_input(model, seed=1)
    ref = oracle.run_vanilla(model, x, seed=1)
    if ref.mac_count != graph.vanilla_macs:
        failures.append(
            f"{model.name}: vanilla MAC counter {ref.mac_count} != analytic {graph.vanilla_macs}"
        )
    for setting in oracle.enumerate_settings(graph):
        trace = oracle.run_fused(model, setting, x, seed=1)
        spans = [e.span for e in setting]
        if not np.array_equal(trace.output, ref.output):
            failures.append(f"{model.name} {spans}: fused output != vanilla output")
        if trace.mac_count != path_total_macs(setting):
            failures.append(
                f"{model.name} {spans}: executed MACs {trace.mac_count} "
                f"!= analytic {path_total_macs(setting)}"
            )
        if trace.peak_live_bytes > path_peak_ram(setting):
            failures.append(
                f"{model.name} {spans}: peak live {trace.peak_live_bytes} "
                f"> analytic {path_peak_ram(setting)}"
            )
        if len(failures) >= max_failures:
            return failures
    # solver vs brute force
    for constraint in (
        Constraint.max_peak_ram(math.inf),
        Constraint.max_peak_ram(graph.vanilla_ram),
        Constraint.max_overhead(math.inf),
        Constraint.max_overhead(Fraction(13, 10)),
    ):
        expect = oracle.brute_force(graph, constraint)
        if constraint.kind == "max_peak_ram":
            got = solve_p2(graph, constraint.limit)
            if isinstance(expect, NoSolution) != isinstance(got, NoSolution):
                failures.append(f"{model.name}: solver/oracle feasibility mismatch on {constraint}")
            elif not isinstance(got, NoSolution) and got.total_macs != expect.total_macs:
                failures.append(
                    f"{model.name}: P2 cost {got.total_macs} != brute force {expect.total_macs}"
                )
        else:
            got = solve_p1(graph, constraint.limit)
            if isinstance(expect, NoSolution) != isinstance(got, NoSolution):
                failures.append(f"{model.name}: P1 feasibility mismatch on {constraint}")
            elif not isinstance(got, NoSolution):
                if constraint.limit == math.inf and got.peak_ram_bytes != expect.peak_ram_bytes:
                    failures.append(
                        f"{model.name}: minimax RAM {got.peak_ram_bytes} "
                        f"!= brute force {expect.peak_ram_bytes}"
                    )
    return failures


def cmd_verify(args) -> int:
    if args.depth > 8:
        print(f"depth {args.depth} exceeds the verification guard (8)", file=sys.stderr)
        return 3
    failures = []
    checked = 0
    try:
        if args.model:
            model = _load_model(args.model, args.element_bytes)
            if len(model.layers) + 1 > oracle.ENUMERATION_NODE_LIMIT:
                print("model too deep for exhaustive verification", file=sys.stderr)
                return 3
            failures += _verify_model(model)
            checked += 1
        else:
            for seed in range(args.random):
                model = oracle.random_model(seed, depth=args.depth)
                failures += _verify_model(model)
                checked += 1
    except TooLarge as e:
        print(f"guard violation: {e}", file=sys.stderr)
        return 3
    if failures:
        print(f"FAIL: {len(failures)} check(s) failed over {checked} model(s)")
        for f in failures:
            print(f"  {f}")
        return 1
    print(f"PASS: all checks passed over {checked} model(s)")
    return 0


def cmd_export(args) -> int:
    model = _load_model(args.model, args.element_bytes)
    graph = build_graph(model)
    if args.p1 is not None:
        result = solve_p1(graph, args.p1)
    else:
        result = solve_p2(graph, args.p2)
    if isinstance(result, NoSolution):
        print(f"no solution: {result.reason}", file=sys.stderr)
        return 2
    Path(args.out).write_text(json.dumps(_result_doc(model, result), indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuseplan", description="Layer-fusion planner for memory-constrained CNN inference"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_constraint=True):
        p.add_argument("model", help="model JSON file")
        p.add_argument("--element-bytes", type=int, default=None)
        p.add_argument("--graph-dump", default=None, help="write the edge list as JSON")
        if with_constraint:
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--p1", type=parse_factor, metavar="F_MAX",
                               help="minimize peak RAM under this overhead cap ('inf' allowed)")
            group.add_argument("--p2", type=parse_size, metavar="P_MAX",
                               help="minimize MACs under this RAM cap (e.g. 64kB)")

    p_plan = sub.add_parser("plan", help="solve one constraint")
    add_common(p_plan)
    p_plan.add_argument("--format", choices=("md", "json"), default="md")
    p_plan.set_defaults(func=cmd_plan)

    p_sweep = sub.add_parser("sweep", help="solve a grid of constraints")
    add_common(p_sweep, with_constraint=False)
    p_sweep.add_argument("--p1-grid", default=None, help="comma list of F caps, e.g. 1.1,1.3,inf")
    p_sweep.add_argument("--p2-grid", default=None, help="comma list of RAM caps, e.g. 16kB,64kB")
    p_sweep.add_argument("--format", choices=("md", "csv", "json"), default="md")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the oracle cross-checks")
    p_verify.add_argument("model", nargs="?", default=None)
    p_verify.add_argument("--element-bytes", type=int, default=None)
    p_verify.add_argument("--random", type=int, default=20, metavar="N",
                          help="number of random models when no file is given")
    p_verify.add_argument("--depth", type=int, default=5)
    p_verify.set_defaults(func=cmd_verify)

    p_export = sub.add_parser("export", help="write the chosen fusion setting to a file")
    add_common(p_export)
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooLarge as e:
        print(f"guard violation: {e}", file=sys.stderr)
        return 3
    except (FusePlanError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
