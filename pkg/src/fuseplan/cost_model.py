"""Analytical RAM and MAC costs for single layers and fused blocks.

A fused block processes its input in horizontal stripes: a window of t
rows slides down the first layer's input, and every downstream layer
consumes the rows the stripe produces.  Row overlap between consecutive
stripes is recomputed (the cache buffer only removes redundant work
along the row axis), which is exactly what the per-tile MAC formula
charges for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KindError, NotFusible, ShapeError
from .model_ir import LayerSpec, TensorShape, tensor_bytes


@dataclass(frozen=True)
class TilePlan:
    """Per-layer stripe geometry of a fused block (front to back)."""

    tile: tuple[int, ...]        # input rows read per stripe
    tile_stride: tuple[int, ...]  # input rows advanced per stripe
    kernel: tuple[int, ...]
    layer_stride: tuple[int, ...]
    in_channels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tile)


@dataclass(frozen=True)
class BlockCost:
    input_bytes: int
    output_bytes: int
    buffer_bytes: int
    macs: int

    @property
    def ram_bytes(self) -> int:
        return self.input_bytes + self.output_bytes + self.buffer_bytes


def vanilla_macs(layer: LayerSpec, in_shape: TensorShape) -> int:
    """MAC count of an un-fused layer. Pooling has no multiplies."""
    from .model_ir import layer_output

    if layer.kind == "dense":
        return layer.c_in * layer.c_out
    if layer.kind in ("global_pool", "maxpool2d", "avgpool2d"):
        layer_output(in_shape, layer)  # shape check only
        return 0
    out = layer_output(in_shape, layer)
    per_element = layer.k * layer.k * (1 if layer.kind == "dwconv2d" else layer.c_in)
    return out.h * out.w * out.c * per_element


def propagate_tiles(block: list[LayerSpec] | tuple[LayerSpec, ...]) -> TilePlan:
    """Back-propagate stripe heights through a block.

    The last layer emits one output row per stripe, so its tile equals its
    kernel; each upstream layer must supply the receptive field of its
    consumer's tile.
    """
    if not block:
        raise NotFusible("empty block")
    for layer in block:
        if not layer.fusible:
            raise NotFusible(f"{layer.kind} cannot join a fusion block")
    n = len(block)
    tile = [0] * n
    stride = [0] * n
    tile[-1] = block[-1].k
    stride[-1] = block[-1].s
    for i in range(n - 2, -1, -1):
        tile[i] = (tile[i + 1] - 1) * block[i].s + block[i].k
        stride[i] = stride[i + 1] * block[i].s
    return TilePlan(
        tile=tuple(tile),
        tile_stride=tuple(stride),
        kernel=tuple(l.k for l in block),
        layer_stride=tuple(l.s for l in block),
        in_channels=tuple(l.c_in for l in block),
    )


def cache_buffer_bytes(plan: TilePlan, element_bytes: int) -> int:
    """Total line-buffer bytes of a block; the first layer reads the block
    input directly and contributes nothing."""
    total = 0
    for i in range(1, len(plan)):
        total += plan.tile[i] * plan.kernel[i] * plan.in_channels[i]
    return total * element_bytes


def n_tiles(in_shape: TensorShape, p: int, t: int, s_tile: int, k: int, s_layer: int) -> int:
    """Number of overlapped stripes x kernel positions per stripe row."""
    if in_shape.h + 2 * p < t:
        raise ShapeError(f"tile of {t} rows exceeds padded input height {in_shape.h + 2 * p}")
    if in_shape.w + 2 * p < k:
        raise ShapeError(f"kernel {k} exceeds padded input width {in_shape.w + 2 * p}")
    vertical = (in_shape.h + 2 * p - t) // s_tile + 1
    horizontal = (in_shape.w + 2 * p - k) // s_layer + 1
    return vertical * horizontal


def _mac_channel_factor(layer: LayerSpec) -> int:
    if layer.kind == "conv2d":
        return layer.c_in
    if layer.kind == "dwconv2d":
        return 1
    return 0  # pooling


def block_row_ranges(
    block: tuple[LayerSpec, ...], in_shapes: list[TensorShape]
) -> list[tuple["np.ndarray", "np.ndarray"]]:
    """Rows each layer computes per stripe: [lo, hi) output-row arrays.

    One stripe per final output row.  Working backwards, a layer must
    deliver every real row its consumer's stripe reads; the demanded
    interval is clamped to the tensor, so stripes that touch another
    layer's padding simply compute fewer rows.  On blocks whose interior
    layers have no padding the clamps never bite, and the per-stripe row
    counts collapse to the uniform per-tile product of n_tiles.

    Raises ShapeError when the first layer's receptive field exceeds its
    padded input (fusion deeper than the feature map).
    """
    from .model_ir import layer_output

    plan = propagate_tiles(block)
    n = len(block)
    for i, layer in enumerate(block):
        if in_shapes[i].h + 2 * layer.p < plan.tile[i]:
            raise ShapeError(
                f"tile of {plan.tile[i]} rows exceeds layer {i} padded input "
                f"height {in_shapes[i].h + 2 * layer.p}"
            )
        if in_shapes[i].w + 2 * layer.p < layer.k:
            raise ShapeError(f"kernel {layer.k} exceeds layer {i} padded input width")
    h_out = layer_output(in_shapes[-1], block[-1]).h
    stripe = np.arange(h_out)
    ranges: list = [None] * n
    ranges[-1] = (stripe, stripe + 1)
    for j in range(n - 1, 0, -1):
        lo, hi = ranges[j]
        layer = block[j]
        first_read = lo * layer.s  # padded input coords
        last_read = (hi - 1) * layer.s + layer.k
        h_prev = in_shapes[j].h
        lo_prev = np.maximum(0, first_read - layer.p)
        hi_prev = np.minimum(h_prev, last_read - layer.p)
        np.maximum(hi_prev, lo_prev, out=hi_prev)  # demand may be pure padding
        ranges[j - 1] = (lo_prev, hi_prev)
    return ranges


def fused_block_macs(
    block: tuple[LayerSpec, ...], in_shapes: list[TensorShape]
) -> int:
    """MAC total of a block; row overlap between stripes is recomputed."""
    from .model_ir import layer_output

    ranges = block_row_ranges(block, in_shapes)
    total = 0
    for i, layer in enumerate(block):
        out = layer_output(in_shapes[i], layer)
        lo, hi = ranges[i]
        rows = int((hi - lo).sum())
        total += rows * out.w * layer.c_out * layer.k * layer.k * _mac_channel_factor(layer)
    return total


def closed_form_block_macs(
    block: tuple[LayerSpec, ...], in_shapes: list[TensorShape]
) -> int:
    """Uniform per-tile MAC count (no boundary clamping); agrees with
    fused_block_macs whenever no interior layer is padded."""
    plan = propagate_tiles(block)
    total = 0
    for i, layer in enumerate(block):
        tiles = n_tiles(in_shapes[i], layer.p, plan.tile[i], plan.tile_stride[i], layer.k, layer.s)
        out_per_tile = ((plan.tile[i] - layer.k) // layer.s + 1) * layer.c_out
        total += tiles * out_per_tile * layer.k * layer.k * _mac_channel_factor(layer)
    return total


def block_ram_bytes(
    block: tuple[LayerSpec, ...],
    in_shape: TensorShape,
    out_shape: TensorShape,
    element_bytes: int,
) -> BlockCost:
    """RAM = block input + block output + line buffers; single layers carry
    no buffer."""
    if len(block) == 1:
        buf = 0
    else:
        buf = cache_buffer_bytes(propagate_tiles(block), element_bytes)
    shapes = [in_shape]
    from .model_ir import layer_output

    for layer in block:
        shapes.append(layer_output(shapes[-1], layer))
    if shapes[-1] != out_shape:
        raise ShapeError(f"block output {shapes[-1]} does not match expected {out_shape}")
    if len(block) == 1:
        macs = vanilla_macs(block[0], in_shape)
    else:
        macs = fused_block_macs(block, shapes[:-1])
    return BlockCost(
        input_bytes=tensor_bytes(in_shape, element_bytes),
        output_bytes=tensor_bytes(out_shape, element_bytes),
        buffer_bytes=buf,
        macs=macs,
    )


def iterative_sink_ram_bytes(layer: LayerSpec, in_shape: TensorShape, element_bytes: int) -> int:
    """RAM of a streamed global-pool or dense layer: the output accumulator
    plus the single input element in flight."""
    if layer.kind == "global_pool":
        if in_shape.c != layer.c_in:
            raise ShapeError("global_pool channel mismatch")
        return element_bytes * (in_shape.c + 1)
    if layer.kind == "dense":
        return element_bytes * (layer.c_out + 1)
    raise KindError(f"{layer.kind} has no iterative form")
