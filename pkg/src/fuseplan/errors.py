"""Exception types shared across the planner."""


class FusePlanError(Exception):
    """Base class for all planner errors."""


class SchemaError(FusePlanError):
    """Model document is structurally invalid (missing or unknown field)."""


class UnsupportedKind(FusePlanError):
    """Layer kind is not one of the supported operators."""


class ShapeError(FusePlanError):
    """A tensor dimension underflowed or a tile does not fit its input."""


class KindError(FusePlanError):
    """Operation applied to a layer kind it does not support."""


class NotFusible(FusePlanError):
    """A fusion block contains a layer that cannot be fused."""


class NoPath(FusePlanError):
    """No complete compute path exists (defensive; cannot happen on built graphs)."""


class TooLarge(FusePlanError):
    """Instance exceeds the exhaustive-enumeration guard."""


class InvalidSetting(FusePlanError):
    """A fusion setting does not tile the layer range of the model."""
