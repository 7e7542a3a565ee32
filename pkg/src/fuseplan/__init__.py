"""Offline layer-fusion planner for CNN inference on memory-constrained devices."""

from .errors import (
    FusePlanError,
    InvalidSetting,
    KindError,
    NoPath,
    NotFusible,
    SchemaError,
    ShapeError,
    TooLarge,
    UnsupportedKind,
)
from .fusion_graph import (
    Edge,
    FusionGraph,
    build_graph,
    dump_graph,
    overhead_factor,
    path_peak_ram,
    path_total_macs,
)
from .model_ir import (
    LayerSpec,
    NetworkModel,
    TensorShape,
    infer_shapes,
    parse_model,
    serialize_model,
    tensor_bytes,
)
from .optimizer import (
    Constraint,
    NoSolution,
    PlanResult,
    heuristic_head_fusion,
    min_macs_path,
    minimax_ram_path,
    solve_p1,
    solve_p2,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "Constraint",
    "Edge",
    "FusePlanError",
    "FusionGraph",
    "InvalidSetting",
    "KindError",
    "LayerSpec",
    "NetworkModel",
    "NoPath",
    "NoSolution",
    "NotFusible",
    "PlanResult",
    "SchemaError",
    "ShapeError",
    "TensorShape",
    "TooLarge",
    "UnsupportedKind",
    "build_graph",
    "dump_graph",
    "heuristic_head_fusion",
    "infer_shapes",
    "min_macs_path",
    "minimax_ram_path",
    "overhead_factor",
    "parse_model",
    "path_peak_ram",
    "path_total_macs",
    "serialize_model",
    "solve_p1",
    "solve_p2",
    "sweep",
    "tensor_bytes",
]
