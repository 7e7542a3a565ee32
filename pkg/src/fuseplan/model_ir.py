"""Network description format: parsing, validation and shape inference.

A network is a plain chain of layers over a single input tensor.  Dense
vectors are represented as 1x1xC tensors so every operator works on the
same shape type.  Weights live in flash on the target devices, so they
never enter any RAM figure; element width defaults to 1 byte (int8).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SchemaError, ShapeError, UnsupportedKind

KINDS = ("conv2d", "dwconv2d", "maxpool2d", "avgpool2d", "global_pool", "dense")

# global_pool and dense run as iterative sinks and terminate fusion runs
FUSIBLE_KINDS = frozenset({"conv2d", "dwconv2d", "maxpool2d", "avgpool2d"})


@dataclass(frozen=True)
class TensorShape:
    h: int
    w: int
    c: int

    def __post_init__(self):
        if self.h < 1 or self.w < 1 or self.c < 1:
            raise ShapeError(f"all dimensions must be >= 1, got {self.h}x{self.w}x{self.c}")

    def elements(self) -> int:
        return self.h * self.w * self.c


def tensor_bytes(shape: TensorShape, element_bytes: int) -> int:
    """RAM footprint of a fully materialized tensor."""
    return shape.elements() * element_bytes


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    c_in: int
    c_out: int
    k: int = 1
    s: int = 1
    p: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKind(f"unknown layer kind {self.kind!r}")
        if self.c_in < 1 or self.c_out < 1:
            raise ValueError(f"channel counts must be positive, got {self.c_in}->{self.c_out}")
        if self.k < 1 or self.s < 1 or self.p < 0:
            raise ValueError(f"bad kernel/stride/padding k={self.k} s={self.s} p={self.p}")
        if self.kind == "dwconv2d" and self.c_in != self.c_out:
            raise ValueError(
                f"dwconv2d requires c_in == c_out, got {self.c_in} != {self.c_out}"
            )
        if self.kind == "global_pool" and self.c_in != self.c_out:
            raise ValueError("global_pool cannot change channel count")

    @property
    def fusible(self) -> bool:
        return self.kind in FUSIBLE_KINDS


@dataclass(frozen=True)
class NetworkModel:
    name: str
    input_shape: TensorShape
    layers: tuple[LayerSpec, ...]
    element_bytes: int = 1

    def __post_init__(self):
        if self.element_bytes < 1:
            raise ValueError("element_bytes must be positive")
        if not self.layers:
            raise ValueError("model must contain at least one layer")
        prev_c = self.input_shape.c
        for i, layer in enumerate(self.layers):
            if layer.c_in != prev_c:
                raise ValueError(
                    f"channel mismatch at layer {i}: expects c_in={layer.c_in}, "
                    f"previous output has {prev_c} channels"
                )
            prev_c = layer.c_out
        # fail early if any shape underflows
        infer_shapes(self)


def _out_dim(size: int, k: int, s: int, p: int) -> int:
    return (size + 2 * p - k) // s + 1


def layer_output(shape: TensorShape, layer: LayerSpec) -> TensorShape:
    """Output shape of a single layer applied to `shape`."""
    if layer.kind == "global_pool":
        if shape.c != layer.c_in:
            raise ShapeError("global_pool channel mismatch")
        return TensorShape(1, 1, shape.c)
    if layer.kind == "dense":
        if shape.h != 1 or shape.w != 1:
            raise ShapeError(
                f"dense expects a 1x1xC input vector, got {shape.h}x{shape.w}x{shape.c}"
            )
        return TensorShape(1, 1, layer.c_out)
    h = _out_dim(shape.h, layer.k, layer.s, layer.p)
    w = _out_dim(shape.w, layer.k, layer.s, layer.p)
    if h < 1 or w < 1:
        raise ShapeError(
            f"{layer.kind} k={layer.k} s={layer.s} p={layer.p} underflows "
            f"{shape.h}x{shape.w} input"
        )
    return TensorShape(h, w, layer.c_out)


def infer_shapes(model: NetworkModel) -> list[TensorShape]:
    """Per-node tensor shapes; element 0 is the input, element i+1 feeds layer i+1."""
    shapes = [model.input_shape]
    for layer in model.layers:
        shapes.append(layer_output(shapes[-1], layer))
    return shapes


_TOP_KEYS = {"name", "input", "element_bytes", "layers", "schema"}
_LAYER_KEYS = {"kind", "k", "s", "p", "c_in", "c_out"}
_INPUT_KEYS = {"h", "w", "c"}


def _require_int(obj, key, where, minimum=1):
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise SchemaError(f"{where}: {key!r} must be an integer >= {minimum}, got {v!r}")
    return v


def parse_model(text: str) -> NetworkModel:
    """Parse and validate a model JSON document (schema in the README)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("name", "input", "layers"):
        if key not in doc:
            raise SchemaError(f"missing required key {key!r}")
    if not isinstance(doc["name"], str):
        raise SchemaError("'name' must be a string")

    inp = doc["input"]
    if not isinstance(inp, dict) or set(inp) != _INPUT_KEYS:
        raise SchemaError("'input' must be an object with keys h, w, c")
    input_shape = TensorShape(
        _require_int(inp, "h", "input"),
        _require_int(inp, "w", "input"),
        _require_int(inp, "c", "input"),
    )

    element_bytes = 1
    if "element_bytes" in doc:
        element_bytes = _require_int(doc, "element_bytes", "model")

    raw_layers = doc["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise SchemaError("'layers' must be a non-empty list")
    layers = []
    for i, raw in enumerate(raw_layers):
        where = f"layer {i}"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where}: must be an object")
        unknown = set(raw) - _LAYER_KEYS
        if unknown:
            raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
        if "kind" not in raw or "c_in" not in raw or "c_out" not in raw:
            raise SchemaError(f"{where}: kind, c_in and c_out are required")
        kind = raw["kind"]
        if kind not in KINDS:
            raise UnsupportedKind(f"{where}: unsupported kind {kind!r}")
        if kind in ("dense", "global_pool"):
            for key in ("k", "s", "p"):
                if key in raw:
                    raise SchemaError(f"{where}: {key!r} is not allowed for {kind}")
            kwargs = {}
        else:
            kwargs = {
                "k": _require_int(raw, "k", where) if "k" in raw else 1,
                "s": _require_int(raw, "s", where) if "s" in raw else 1,
                "p": _require_int(raw, "p", where, minimum=0) if "p" in raw else 0,
            }
        try:
            layers.append(
                LayerSpec(
                    kind=kind,
                    c_in=_require_int(raw, "c_in", where),
                    c_out=_require_int(raw, "c_out", where),
                    **kwargs,
                )
            )
        except ValueError as e:
            raise ValueError(f"{where}: {e}") from None

    try:
        return NetworkModel(
            name=doc["name"],
            input_shape=input_shape,
            layers=tuple(layers),
            element_bytes=element_bytes,
        )
    except ValueError as e:
        raise ValueError(str(e)) from None


def serialize_model(model: NetworkModel) -> str:
    """Inverse of parse_model; stable key order for byte-identical round trips."""
    layers = []
    for layer in model.layers:
        raw: dict = {"kind": layer.kind}
        if layer.kind not in ("dense", "global_pool"):
            raw.update(k=layer.k, s=layer.s, p=layer.p)
        raw.update(c_in=layer.c_in, c_out=layer.c_out)
        layers.append(raw)
    doc = {
        "name": model.name,
        "input": {"h": model.input_shape.h, "w": model.input_shape.w, "c": model.input_shape.c},
        "element_bytes": model.element_bytes,
        "layers": layers,
    }
    return json.dumps(doc, indent=2)
