"""Inverted dataflow DAG over tensor nodes.

Node i is the tensor feeding layer i; node n is the network output.  A
single-layer edge (i, i+1) exists for every layer; an edge (i, j) with
j - i >= 2 exists for every contiguous run of fusible layers whose stripe
schedule reproduces the layer-by-layer outputs exactly.  Global-pool and
dense layers run as iterative sinks on their own edges and terminate
fusion runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import cost_model
from .errors import InvalidSetting, ShapeError
from .model_ir import NetworkModel, infer_shapes, tensor_bytes


@dataclass(frozen=True, order=True)
class Edge:
    src: int
    dst: int
    ram_bytes: int
    macs: int

    @property
    def span(self) -> tuple[int, int]:
        """Layer index range [src, dst) covered by this edge."""
        return (self.src, self.dst)


@dataclass(frozen=True)
class FusionGraph:
    node_count: int
    edges: tuple[Edge, ...]
    vanilla_macs: int
    vanilla_ram: int

    def out_edges(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e.src == node]


# A fusion setting is the ordered edge list of one complete compute path.
FusionSetting = tuple[Edge, ...]


def build_graph(model: NetworkModel) -> FusionGraph:
    shapes = infer_shapes(model)
    eb = model.element_bytes
    n = len(model.layers)
    edges: list[Edge] = []

    for i, layer in enumerate(model.layers):
        if layer.kind in ("global_pool", "dense"):
            ram = cost_model.iterative_sink_ram_bytes(layer, shapes[i], eb)
            macs = cost_model.vanilla_macs(layer, shapes[i])
        else:
            ram = tensor_bytes(shapes[i], eb) + tensor_bytes(shapes[i + 1], eb)
            macs = cost_model.vanilla_macs(layer, shapes[i])
        edges.append(Edge(src=i, dst=i + 1, ram_bytes=ram, macs=macs))

    total_vanilla_macs = sum(e.macs for e in edges)
    vanilla_ram = max(e.ram_bytes for e in edges)

    for i in range(n):
        for j in range(i + 2, n + 1):
            block = model.layers[i:j]
            if not all(l.fusible for l in block):
                break  # longer spans from i hit the same non-fusible layer
            try:
                cost = cost_model.block_ram_bytes(block, shapes[i], shapes[j], eb)
            except ShapeError:
                continue  # fusion deeper than the feature map
            edges.append(Edge(src=i, dst=j, ram_bytes=cost.ram_bytes, macs=cost.macs))

    edges.sort()
    return FusionGraph(
        node_count=n + 1,
        edges=tuple(edges),
        vanilla_macs=total_vanilla_macs,
        vanilla_ram=vanilla_ram,
    )


def validate_setting(graph: FusionGraph, setting: FusionSetting) -> None:
    if not setting:
        raise InvalidSetting("empty setting")
    if setting[0].src != 0 or setting[-1].dst != graph.node_count - 1:
        raise InvalidSetting("path must run from the input node to the output node")
    for a, b in zip(setting, setting[1:]):
        if a.dst != b.src:
            raise InvalidSetting(f"edge gap between {a.span} and {b.span}")


def path_peak_ram(setting: FusionSetting) -> int:
    return max(e.ram_bytes for e in setting)


def path_total_macs(setting: FusionSetting) -> int:
    return sum(e.macs for e in setting)


def overhead_factor(setting: FusionSetting, graph: FusionGraph) -> Fraction:
    """Exact ratio of the setting's MACs to the un-fused total.

    A network made only of pooling layers has no multiplies at all; every
    path then costs zero MACs and the ratio is defined as 1.
    """
    if graph.vanilla_macs == 0:
        return Fraction(1)
    return Fraction(path_total_macs(setting), graph.vanilla_macs)


def dump_graph(graph: FusionGraph) -> str:
    """Debug/test serialization; deterministic bytes for a given graph."""
    doc = {
        "schema": 1,
        "node_count": graph.node_count,
        "vanilla_macs": graph.vanilla_macs,
        "vanilla_ram": graph.vanilla_ram,
        "edges": [
            {"src": e.src, "dst": e.dst, "ram": e.ram_bytes, "macs": e.macs}
            for e in graph.edges
        ],
    }
    return json.dumps(doc, indent=2)
