"""Forward-only gather-distribute pyramid fusion reference."""

from .maps import FeatureMap
from .ops import (
    adaptive_avg_pool,
    bilinear_resize,
    conv1x1,
    conv3x3,
    feed_forward,
    multi_head_attention,
    relu,
    sigmoid,
    softmax,
)
from .pyramid import (
    GdConfig,
    LevelSpec,
    PyramidSpec,
    align,
    forward,
    high_gd,
    inject,
    low_gd,
    weight_manifest,
)
from .weights import (
    FusionWeights,
    TensorFormatError,
    WeightShapeError,
    load_tensors,
    save_tensors,
    seeded_tensors,
)

__all__ = [
    "FeatureMap",
    "GdConfig",
    "LevelSpec",
    "PyramidSpec",
    "FusionWeights",
    "TensorFormatError",
    "WeightShapeError",
    "align",
    "inject",
    "low_gd",
    "high_gd",
    "forward",
    "weight_manifest",
    "load_tensors",
    "save_tensors",
    "seeded_tensors",
    "bilinear_resize",
    "adaptive_avg_pool",
    "conv1x1",
    "conv3x3",
    "sigmoid",
    "relu",
    "softmax",
    "multi_head_attention",
    "feed_forward",
]
