"""Ground truth for the planner: exhaustive enumeration of small
instances and a reference integer executor.

The executor runs everything in wide integer arithmetic with weights from
a seeded generator, so vanilla and fused runs can be compared
element-exact.  The fused executor replays the same stripe schedule the
cost model charges for: each layer of a block recomputes its stripe rows
from scratch at every stripe position, and reuse only happens along the
row axis (full rows are computed once per stripe).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import cost_model
from .errors import InvalidSetting, ShapeError, TooLarge
from .fusion_graph import FusionGraph, FusionSetting, path_peak_ram, path_total_macs
from .model_ir import (
    LayerSpec,
    NetworkModel,
    TensorShape,
    infer_shapes,
    tensor_bytes,
)
from .optimizer import Constraint, NoSolution, PlanResult, setting_key_macs, setting_key_ram

ENUMERATION_NODE_LIMIT = 22


@dataclass
class ExecTrace:
    output: np.ndarray
    mac_count: int
    peak_live_bytes: int
    per_layer_macs: list[int]


# ---------------------------------------------------------------------------
# enumeration / brute force

def enumerate_settings(graph: FusionGraph) -> Iterator[FusionSetting]:
    """Every complete compute path, in lexicographic span order."""
    if graph.node_count > ENUMERATION_NODE_LIMIT:
        raise TooLarge(
            f"{graph.node_count} nodes exceeds the enumeration guard "
            f"({ENUMERATION_NODE_LIMIT})"
        )
    outgoing: list[list] = [[] for _ in range(graph.node_count)]
    for e in graph.edges:
        outgoing[e.src].append(e)
    for adj in outgoing:
        adj.sort(key=lambda e: e.span)
    sink = graph.node_count - 1

    def walk(node: int, prefix: list) -> Iterator[FusionSetting]:
        if node == sink:
            yield tuple(prefix)
            return
        for e in outgoing[node]:
            prefix.append(e)
            yield from walk(e.dst, prefix)
            prefix.pop()

    yield from walk(0, [])


def brute_force(graph: FusionGraph, constraint: Constraint) -> PlanResult | NoSolution:
    """Exact optimum by enumeration, same tie-break order as the solvers."""
    import math

    from .optimizer import _result

    best = None
    if constraint.kind == "max_peak_ram":
        key, cap_of = setting_key_macs, path_peak_ram
    else:
        key, cap_of = setting_key_ram, None
    cap = constraint.limit
    c_cap = None
    if constraint.kind == "max_overhead" and cap != math.inf:
        c_cap = cap * graph.vanilla_macs

    for setting in enumerate_settings(graph):
        if constraint.kind == "max_peak_ram":
            if cap != math.inf and path_peak_ram(setting) > cap:
                continue
        elif c_cap is not None and path_total_macs(setting) > c_cap:
            continue
        if best is None or key(setting) < key(best):
            best = setting
    if best is None:
        return NoSolution("no enumerated setting satisfies the constraint")
    return _result(graph, best)


# ---------------------------------------------------------------------------
# reference executor

def _layer_weights(layer: LayerSpec, index: int, seed: int) -> np.ndarray | None:
    """Deterministic small-integer weights per (seed, layer index)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    if layer.kind == "conv2d":
        return rng.integers(-3, 4, size=(layer.c_out, layer.c_in, layer.k, layer.k), dtype=np.int64)
    if layer.kind == "dwconv2d":
        return rng.integers(-3, 4, size=(layer.c_out, layer.k, layer.k), dtype=np.int64)
    if layer.kind == "dense":
        return rng.integers(-3, 4, size=(layer.c_out, layer.c_in), dtype=np.int64)
    return None


def _pad(x: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return x
    return np.pad(x, ((p, p), (p, p), (0, 0)))


def _layer_rows(
    x_pad: np.ndarray, layer: LayerSpec, weights: np.ndarray | None, rows: range, w_out: int
) -> tuple[np.ndarray, int]:
    """Compute the given output rows of one spatial layer.

    Returns (values of shape (len(rows), w_out, c_out), mac_count).
    """
    k, s = layer.k, layer.s
    out_rows = []
    for r in rows:
        # (w_out, k, k, c) window stack for this output row
        patch = np.stack(
            [x_pad[r * s + dy, dx : dx + s * w_out : s, :] for dy in range(k) for dx in range(k)],
            axis=1,
        ).reshape(w_out, k, k, -1)
        if layer.kind == "conv2d":
            out_rows.append(np.einsum("wijc,ocij->wo", patch, weights))
        elif layer.kind == "dwconv2d":
            out_rows.append(np.einsum("wijc,cij->wc", patch, weights))
        elif layer.kind == "maxpool2d":
            out_rows.append(patch.max(axis=(1, 2)))
        elif layer.kind == "avgpool2d":
            out_rows.append(patch.sum(axis=(1, 2)) // (k * k))
        else:
            raise ShapeError(f"{layer.kind} is not a spatial layer")
    out = np.stack(out_rows, axis=0) if out_rows else np.zeros((0, w_out, layer.c_out), dtype=np.int64)
    per_element = {"conv2d": k * k * layer.c_in, "dwconv2d": k * k}.get(layer.kind, 0)
    return out, len(rows) * w_out * layer.c_out * per_element


def _run_single(x: np.ndarray, layer: LayerSpec, weights, shape_in: TensorShape):
    """Full-tensor execution of one layer; returns (output, macs)."""
    if layer.kind == "global_pool":
        # iterative: per-channel accumulator, one streamed element at a time
        acc = x.reshape(-1, x.shape[2]).sum(axis=0)
        out = (acc // (shape_in.h * shape_in.w)).reshape(1, 1, -1)
        return out.astype(np.int64), 0
    if layer.kind == "dense":
        vec = x.reshape(-1)
        out = (weights @ vec).reshape(1, 1, -1)
        return out.astype(np.int64), layer.c_in * layer.c_out
    x_pad = _pad(x, layer.p)
    h_out = (shape_in.h + 2 * layer.p - layer.k) // layer.s + 1
    w_out = (shape_in.w + 2 * layer.p - layer.k) // layer.s + 1
    out, macs = _layer_rows(x_pad, layer, weights, range(h_out), w_out)
    return out, macs


def _sink_peak(layer: LayerSpec, shape_in: TensorShape, eb: int) -> int:
    return cost_model.iterative_sink_ram_bytes(layer, shape_in, eb)


def run_vanilla(model: NetworkModel, input_tensor: np.ndarray, seed: int = 0) -> ExecTrace:
    """Layer-by-layer full-tensor execution with counted MACs."""
    shapes = infer_shapes(model)
    expected = (model.input_shape.h, model.input_shape.w, model.input_shape.c)
    if input_tensor.shape != expected:
        raise ShapeError(f"input shape {input_tensor.shape} != model input {expected}")
    x = input_tensor.astype(np.int64)
    eb = model.element_bytes
    per_layer = []
    peak = 0
    for i, layer in enumerate(model.layers):
        x, macs = _run_single(x, layer, _layer_weights(layer, i, seed), shapes[i])
        per_layer.append(macs)
        if layer.kind in ("global_pool", "dense"):
            live = _sink_peak(layer, shapes[i], eb)
        else:
            live = tensor_bytes(shapes[i], eb) + tensor_bytes(shapes[i + 1], eb)
        peak = max(peak, live)
    return ExecTrace(output=x, mac_count=sum(per_layer), peak_live_bytes=peak, per_layer_macs=per_layer)


def run_fused(
    model: NetworkModel, setting: FusionSetting, input_tensor: np.ndarray, seed: int = 0
) -> ExecTrace:
    """Execute a fusion setting: blocks run stripe by stripe with full
    recompute of row overlaps, sinks run iteratively."""
    shapes = infer_shapes(model)
    n = len(model.layers)
    if setting[0].src != 0 or setting[-1].dst != n or any(
        a.dst != b.src for a, b in zip(setting, setting[1:])
    ):
        raise InvalidSetting("setting does not tile the layer chain")
    expected = (model.input_shape.h, model.input_shape.w, model.input_shape.c)
    if input_tensor.shape != expected:
        raise ShapeError(f"input shape {input_tensor.shape} != model input {expected}")

    x = input_tensor.astype(np.int64)
    eb = model.element_bytes
    per_layer = [0] * n
    peak = 0
    for edge in setting:
        block = model.layers[edge.src : edge.dst]
        if len(block) == 1:
            layer = block[0]
            i = edge.src
            x, macs = _run_single(x, layer, _layer_weights(layer, i, seed), shapes[i])
            per_layer[i] = macs
            if layer.kind in ("global_pool", "dense"):
                live = _sink_peak(layer, shapes[i], eb)
            else:
                live = tensor_bytes(shapes[i], eb) + tensor_bytes(shapes[i + 1], eb)
            peak = max(peak, live)
            continue

        depth = len(block)
        plan = cost_model.propagate_tiles(block)
        cache_bytes = cost_model.cache_buffer_bytes(plan, eb)
        block_shapes = shapes[edge.src : edge.dst + 1]
        weights = [_layer_weights(l, edge.src + j, seed) for j, l in enumerate(block)]
        # persistent padded buffers; stripes fill them row range by row range
        padded = [_pad(x, block[0].p)]
        for j in range(1, depth):
            s = block_shapes[j]
            p = block[j].p
            padded.append(np.zeros((s.h + 2 * p, s.w + 2 * p, s.c), dtype=np.int64))
        final_shape = block_shapes[-1]
        final = np.zeros((final_shape.h, final_shape.w, final_shape.c), dtype=np.int64)

        for v in range(final_shape.h):
            # demand walk: rows each layer must deliver for this stripe
            lo = [0] * depth
            hi = [0] * depth
            lo[-1], hi[-1] = v, v + 1
            for j in range(depth - 1, 0, -1):
                layer = block[j]
                first_read = lo[j] * layer.s - layer.p
                last_read = (hi[j] - 1) * layer.s + layer.k - layer.p
                lo[j - 1] = max(0, first_read)
                hi[j - 1] = max(lo[j - 1], min(block_shapes[j].h, last_read))
            for j, layer in enumerate(block):
                rows = range(lo[j], hi[j])
                if not rows:
                    continue
                values, m = _layer_rows(padded[j], layer, weights[j], rows, block_shapes[j + 1].w)
                per_layer[edge.src + j] += m
                if j + 1 < depth:
                    p = block[j + 1].p
                    width = block_shapes[j + 1].w
                    padded[j + 1][rows.start + p : rows.stop + p, p : p + width] = values
                else:
                    final[rows.start : rows.stop] = values
        x = final
        live = (
            tensor_bytes(shapes[edge.src], eb)
            + tensor_bytes(shapes[edge.dst], eb)
            + cache_bytes
        )
        peak = max(peak, live)
    return ExecTrace(output=x, mac_count=sum(per_layer), peak_live_bytes=peak, per_layer_macs=per_layer)


# ---------------------------------------------------------------------------
# model generator for property tests

def random_model(
    seed: int, depth: int, max_spatial: int = 16, max_channels: int = 8
) -> NetworkModel:
    """Deterministic random chain; always validates.

    Mostly convolutions with occasional pools; may end with a
    global-pool (+ dense) tail when the feature map has collapsed.
    """
    rng = random.Random(seed)
    h = rng.randint(6, max(6, max_spatial))
    c = rng.randint(1, max_channels)
    shape = TensorShape(h, h, c)
    layers: list[LayerSpec] = []
    while len(layers) < depth:
        remaining = depth - len(layers)
        if shape.h <= 2 and remaining >= 1:
            # spatial budget exhausted: finish with a sink tail
            layers.append(LayerSpec("global_pool", c_in=shape.c, c_out=shape.c))
            shape = TensorShape(1, 1, shape.c)
            if len(layers) < depth:
                c_out = rng.randint(1, max_channels)
                layers.append(LayerSpec("dense", c_in=shape.c, c_out=c_out))
                shape = TensorShape(1, 1, c_out)
            break
        kind = rng.choices(
            ["conv2d", "dwconv2d", "maxpool2d", "avgpool2d"],
            weights=[5, 3, 1, 1],
        )[0]
        k = rng.choice([1, 2, 3]) if kind == "conv2d" else rng.choice([2, 3])
        s = rng.choice([1, 1, 2])
        p = rng.choice([0, 0, 1]) if k > 1 else 0
        if shape.h + 2 * p < k:
            continue
        if (shape.h + 2 * p - k) // s + 1 < 1:
            continue
        if kind in ("dwconv2d", "maxpool2d", "avgpool2d"):
            c_out = shape.c
        else:
            c_out = rng.randint(1, max_channels)
        layer = LayerSpec(kind, c_in=shape.c, c_out=c_out, k=k, s=s, p=p)
        layers.append(layer)
        from .model_ir import layer_output

        shape = layer_output(shape, layer)
    return NetworkModel(
        name=f"random-{seed}",
        input_shape=TensorShape(h, h, c),
        layers=tuple(layers),
        element_bytes=1,
    )


def random_input(model: NetworkModel, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBEEF]))
    s = model.input_shape
    return rng.integers(-3, 4, size=(s.h, s.w, s.c), dtype=np.int64)
