"""Dual solvers over the fusion graph.

P1 minimizes peak RAM under a compute-overhead cap; P2 minimizes MACs
under a RAM cap.  Unconstrained P1 is a bottleneck (minimax) path,
unconstrained P2 a plain shortest path; constrained P2 filters edges
above the cap first; constrained P1 builds a candidate set by repeatedly
deleting the largest-RAM edges and re-solving for the MAC-shortest path.

All comparisons on the overhead factor use exact rationals.  Tie-breaks
are total orders (secondary objective, then lexicographically smallest
edge-span sequence), so every solver is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NoPath
from .fusion_graph import (
    Edge,
    FusionGraph,
    FusionSetting,
    overhead_factor,
    path_peak_ram,
    path_total_macs,
)


@dataclass(frozen=True)
class Constraint:
    """Either a compute cap (max_overhead) or a RAM cap (max_peak_ram)."""

    kind: str  # "max_overhead" | "max_peak_ram"
    limit: Fraction | int | float  # math.inf means unconstrained

    def __post_init__(self):
        if self.kind not in ("max_overhead", "max_peak_ram"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "max_overhead" and not (self.limit == math.inf or self.limit >= 1):
            raise ValueError("overhead cap must be >= 1")
        if self.kind == "max_peak_ram" and not (self.limit == math.inf or self.limit > 0):
            raise ValueError("RAM cap must be positive")

    @staticmethod
    def max_overhead(limit) -> "Constraint":
        return Constraint("max_overhead", limit if limit == math.inf else Fraction(limit))

    @staticmethod
    def max_peak_ram(limit) -> "Constraint":
        return Constraint("max_peak_ram", limit)


@dataclass(frozen=True)
class NoSolution:
    reason: str = ""

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class PlanResult:
    setting: FusionSetting
    peak_ram_bytes: int
    total_macs: int
    overhead: Fraction
    constraint_satisfied: bool = True
    candidate_trace: tuple[tuple[int, int, int, int], ...] | None = None


def _result(graph: FusionGraph, setting: FusionSetting, trace=None) -> PlanResult:
    return PlanResult(
        setting=setting,
        peak_ram_bytes=path_peak_ram(setting),
        total_macs=path_total_macs(setting),
        overhead=overhead_factor(setting, graph),
        candidate_trace=tuple(trace) if trace is not None else None,
    )


def setting_key_macs(setting: FusionSetting) -> tuple:
    """Total order used by min-MAC solvers and the brute-force oracle."""
    return (
        path_total_macs(setting),
        path_peak_ram(setting),
        tuple(e.span for e in setting),
    )


def setting_key_ram(setting: FusionSetting) -> tuple:
    """Total order used by min-RAM solvers and the brute-force oracle."""
    return (
        path_peak_ram(setting),
        path_total_macs(setting),
        tuple(e.span for e in setting),
    )


# ---------------------------------------------------------------------------
# exact DAG path primitives (nodes are 0..n, all edges go forward)

def _adjacency(edges: list[Edge], n_nodes: int):
    incoming: list[list[Edge]] = [[] for _ in range(n_nodes)]
    for e in edges:
        incoming[e.dst].append(e)
    return incoming


def _min_sum(edges: list[Edge], n_nodes: int) -> list:
    """Minimal MAC sum from node 0 to every node (None if unreachable)."""
    best = [None] * n_nodes
    best[0] = 0
    incoming = _adjacency(edges, n_nodes)
    for v in range(1, n_nodes):
        for e in incoming[v]:
            if best[e.src] is None:
                continue
            cand = best[e.src] + e.macs
            if best[v] is None or cand < best[v]:
                best[v] = cand
    return best


def _min_sum_to_sink(edges: list[Edge], n_nodes: int) -> list:
    best = [None] * n_nodes
    best[n_nodes - 1] = 0
    outgoing: list[list[Edge]] = [[] for _ in range(n_nodes)]
    for e in edges:
        outgoing[e.src].append(e)
    for v in range(n_nodes - 2, -1, -1):
        for e in outgoing[v]:
            if best[e.dst] is None:
                continue
            cand = e.macs + best[e.dst]
            if best[v] is None or cand < best[v]:
                best[v] = cand
    return best


def _min_bottleneck(edges: list[Edge], n_nodes: int) -> int | None:
    """Minimal max-edge-RAM over paths 0 -> sink."""
    best = [None] * n_nodes
    best[0] = 0
    incoming = _adjacency(edges, n_nodes)
    for v in range(1, n_nodes):
        for e in incoming[v]:
            if best[e.src] is None:
                continue
            cand = max(best[e.src], e.ram_bytes)
            if best[v] is None or cand < best[v]:
                best[v] = cand
    return best[n_nodes - 1]


def _lex_smallest_path(edges: list[Edge], n_nodes: int) -> FusionSetting | None:
    """Lexicographically smallest span sequence among paths in `edges`."""
    outgoing: list[list[Edge]] = [[] for _ in range(n_nodes)]
    for e in edges:
        outgoing[e.src].append(e)
    reaches = [False] * n_nodes
    reaches[n_nodes - 1] = True
    for v in range(n_nodes - 2, -1, -1):
        reaches[v] = any(reaches[e.dst] for e in outgoing[v])
    if not reaches[0]:
        return None
    path = []
    v = 0
    while v != n_nodes - 1:
        e = min((e for e in outgoing[v] if reaches[e.dst]), key=lambda e: e.span)
        path.append(e)
        v = e.dst
    return tuple(path)


def _best_path(edges: list[Edge], n_nodes: int, primary: str) -> FusionSetting | None:
    """Exact optimum under the (primary, secondary, lex-span) total order.

    Three passes: restrict to edges on some primary-optimal path, then to
    edges on some secondary-optimal path within those, then take the
    lexicographically smallest remaining path.  Each restriction preserves
    at least one complete path, so the result minimizes the full key.
    """
    if primary == "macs":
        fwd = _min_sum(edges, n_nodes)
        if fwd[n_nodes - 1] is None:
            return None
        bwd = _min_sum_to_sink(edges, n_nodes)
        total = fwd[n_nodes - 1]
        edges = [
            e
            for e in edges
            if fwd[e.src] is not None
            and bwd[e.dst] is not None
            and fwd[e.src] + e.macs + bwd[e.dst] == total
        ]
        # secondary: minimal bottleneck RAM among MAC-optimal paths
        b = _min_bottleneck(edges, n_nodes)
        edges = [e for e in edges if e.ram_bytes <= b]
    else:  # primary == "ram" (bottleneck)
        b = _min_bottleneck(edges, n_nodes)
        if b is None:
            return None
        edges = [e for e in edges if e.ram_bytes <= b]
        # secondary: minimal MAC sum among bottleneck-optimal paths
        fwd = _min_sum(edges, n_nodes)
        bwd = _min_sum_to_sink(edges, n_nodes)
        total = fwd[n_nodes - 1]
        edges = [
            e
            for e in edges
            if fwd[e.src] is not None
            and bwd[e.dst] is not None
            and fwd[e.src] + e.macs + bwd[e.dst] == total
        ]
    return _lex_smallest_path(edges, n_nodes)


# ---------------------------------------------------------------------------
# public solvers

def min_macs_path(graph: FusionGraph) -> FusionSetting:
    path = _best_path(list(graph.edges), graph.node_count, "macs")
    if path is None:
        raise NoPath("graph has no complete compute path")
    return path


def minimax_ram_path(graph: FusionGraph) -> FusionSetting:
    path = _best_path(list(graph.edges), graph.node_count, "ram")
    if path is None:
        raise NoPath("graph has no complete compute path")
    return path


def solve_p2(graph: FusionGraph, p_max) -> PlanResult | NoSolution:
    """Min MACs among settings with peak RAM <= p_max."""
    if p_max == math.inf:
        return _result(graph, min_macs_path(graph))
    surviving = [e for e in graph.edges if e.ram_bytes <= p_max]
    path = _best_path(surviving, graph.node_count, "macs")
    if path is None:
        return NoSolution(f"no complete compute path fits within {p_max} bytes")
    return _result(graph, path)


def solve_p1(graph: FusionGraph, f_max) -> PlanResult | NoSolution:
    """Min peak RAM among settings with overhead factor <= f_max.

    Candidate-set strategy: take the MAC-shortest path, delete every edge
    at the current maximum RAM level, repeat until the graph disconnects;
    then pick the best feasible candidate.  Deleting edges below the
    current path's bottleneck cannot change the MAC-shortest path, so
    levels between candidates are collapsed into one step.
    """
    if f_max == math.inf:
        return _result(graph, minimax_ram_path(graph))
    c_cap = Fraction(f_max) * graph.vanilla_macs

    edges = list(graph.edges)
    candidates: list[FusionSetting] = []
    trace: list[tuple[int, int, int, int]] = []
    iteration = 0
    while True:
        path = _best_path(edges, graph.node_count, "macs")
        if path is None:
            break
        candidates.append(path)
        peak = path_peak_ram(path)
        trace.append((iteration, peak, path_total_macs(path), peak))
        # removing lower levels first would return this same candidate at
        # every level down to the path's own bottleneck
        edges = [e for e in edges if e.ram_bytes < peak]
        iteration += 1

    feasible = [s for s in candidates if path_total_macs(s) <= c_cap]
    if not feasible:
        return NoSolution(f"no candidate satisfies overhead cap {f_max}")
    best = min(feasible, key=setting_key_ram)
    result = _result(graph, best, trace=trace)
    return result


def heuristic_head_fusion(graph: FusionGraph) -> PlanResult:
    """Baseline that fuses only a prefix of the network into one block."""
    n = graph.node_count - 1
    singles = {e.src: e for e in graph.edges if e.dst == e.src + 1}
    prefix_edges = [e for e in graph.edges if e.src == 0]
    best = None
    for head in prefix_edges:
        setting = [head] + [singles[i] for i in range(head.dst, n)]
        setting = tuple(setting)
        if best is None or setting_key_ram(setting) < setting_key_ram(best):
            best = setting
    return _result(graph, best)


def sweep(
    graph: FusionGraph, constraints: list[Constraint]
) -> list[tuple[Constraint, PlanResult | NoSolution]]:
    out = []
    for c in constraints:
        if c.kind == "max_overhead":
            out.append((c, solve_p1(graph, c.limit)))
        else:
            out.append((c, solve_p2(graph, c.limit)))
    return out
