"""Gather-distribute pyramid fusion, forward pass only.

The pyramid carries five levels (p2..p6 by default) whose strides double.
Fusion runs in two stages:

* the low stage aligns the shallow gather set to one resolution, concatenates
  it on channels, squeezes it with a pointwise convolution down to the summed
  channel count of the shallow injection targets, splits it per target, and
  injects each chunk;
* the high stage aligns the deep gather set, flattens the concatenation into
  a token sequence, runs one residual attention + feed-forward block, projects
  tokens to the summed channel count of the deep targets, splits, and injects.

Injection combines the local map with its global chunk as
``embed(local) * sigmoid(gate(global)) + proj(global)`` followed by one 3x3
convolution (the inference-time form of a reparameterized block), with the
global chunk resized to the local resolution first.  Gather/target level sets
and the alignment levels are configuration with defaults, not architecture
constants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ops
from .maps import FeatureMap
from .weights import FusionWeights

__all__ = [
    "LevelSpec",
    "PyramidSpec",
    "GdConfig",
    "align",
    "inject",
    "low_gd",
    "high_gd",
    "forward",
    "weight_manifest",
]


@dataclass(frozen=True)
class LevelSpec:
    level_id: str
    channels: int
    stride: int


@dataclass(frozen=True)
class GdConfig:
    """Gather/target wiring for both fusion stages."""

    low_gather: tuple[str, ...] = ("p2", "p3", "p4", "p5")
    low_targets: tuple[str, ...] = ("p2", "p3", "p4")
    low_align: str = "p4"
    high_gather: tuple[str, ...] = ("p3", "p4", "p5", "p6")
    high_targets: tuple[str, ...] = ("p4", "p5", "p6")
    high_align: str = "p5"
    num_heads: int = 1
    ffn_expansion: int = 2

    def __post_init__(self) -> None:
        if self.num_heads <= 0:
            raise ValueError("num_heads must be positive")
        if self.ffn_expansion <= 0:
            raise ValueError("ffn_expansion must be positive")


@dataclass(frozen=True)
class PyramidSpec:
    """Ordered level layout for a square input image."""

    levels: tuple[LevelSpec, ...]
    input_size: int
    fusion: GdConfig = field(default_factory=GdConfig)

    def __post_init__(self) -> None:
        if self.input_size <= 0:
            raise ValueError("input_size must be positive")
        if not self.levels:
            raise ValueError("at least one level is required")
        ids = [lv.level_id for lv in self.levels]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate level ids: {ids}")
        prev = None
        for lv in self.levels:
            if lv.channels <= 0 or lv.stride <= 0:
                raise ValueError(f"level {lv.level_id}: channels and stride must be positive")
            if prev is not None and lv.stride != 2 * prev:
                raise ValueError(
                    f"level {lv.level_id}: stride {lv.stride} does not double {prev}"
                )
            if self.input_size % lv.stride != 0:
                raise ValueError(
                    f"level {lv.level_id}: stride {lv.stride} does not divide "
                    f"input size {self.input_size}"
                )
            prev = lv.stride
        for name in (
            self.fusion.low_gather + self.fusion.low_targets + (self.fusion.low_align,)
            + self.fusion.high_gather + self.fusion.high_targets + (self.fusion.high_align,)
        ):
            if name not in ids:
                raise ValueError(f"fusion wiring references unknown level {name!r}")

    def level(self, level_id: str) -> LevelSpec:
        for lv in self.levels:
            if lv.level_id == level_id:
                return lv
        raise KeyError(level_id)

    def spatial(self, level_id: str) -> tuple[int, int]:
        side = self.input_size // self.level(level_id).stride
        return side, side

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PyramidSpec":
        levels = tuple(
            LevelSpec(level_id=lv["id"], channels=lv["channels"], stride=lv["stride"])
            for lv in doc["levels"]
        )
        fusion = GdConfig(**doc["fusion"]) if "fusion" in doc else GdConfig()
        fusion = GdConfig(
            low_gather=tuple(fusion.low_gather),
            low_targets=tuple(fusion.low_targets),
            low_align=fusion.low_align,
            high_gather=tuple(fusion.high_gather),
            high_targets=tuple(fusion.high_targets),
            high_align=fusion.high_align,
            num_heads=fusion.num_heads,
            ffn_expansion=fusion.ffn_expansion,
        )
        return cls(levels=levels, input_size=doc["input_size"], fusion=fusion)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PyramidSpec":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def align(features: list[FeatureMap], target: tuple[int, int]) -> list[FeatureMap]:
    """Resize every map to the target (H, W): bilinear up, average-pool down."""
    th, tw = target
    if th <= 0 or tw <= 0:
        raise ValueError(f"target size must be positive, got {target}")
    if not features:
        raise ValueError("align requires at least one feature map")
    out = []
    for fm in features:
        h, w = fm.height, fm.width
        if (h, w) == (th, tw):
            out.append(fm)
        elif h <= th and w <= tw:
            out.append(FeatureMap(ops.bilinear_resize(fm.data, th, tw)))
        elif h >= th and w >= tw:
            out.append(FeatureMap(ops.adaptive_avg_pool(fm.data, th, tw)))
        else:
            raise ValueError(
                f"cannot align {h}x{w} to {th}x{tw}: one side grows while the other shrinks"
            )
    return out


def inject(
    local: FeatureMap,
    global_: FeatureMap,
    weights: FusionWeights,
    prefix: str,
) -> FeatureMap:
    """Attention-gated injection of a global chunk into one local level."""
    c_local = local.channels
    c_global = global_.channels
    g = align([global_], (local.height, local.width))[0]
    embed = ops.conv1x1(
        local.data,
        weights.get(f"{prefix}.embed.weight", (c_local, c_local)),
        weights.get(f"{prefix}.embed.bias", (c_local,)),
    )
    gate = ops.sigmoid(
        ops.conv1x1(
            g.data,
            weights.get(f"{prefix}.gate.weight", (c_local, c_global)),
            weights.get(f"{prefix}.gate.bias", (c_local,)),
        )
    )
    proj = ops.conv1x1(
        g.data,
        weights.get(f"{prefix}.proj.weight", (c_local, c_global)),
        weights.get(f"{prefix}.proj.bias", (c_local,)),
    )
    fused = embed * gate + proj
    out = ops.conv3x3(
        fused,
        weights.get(f"{prefix}.rep.weight", (c_local, c_local, 3, 3)),
        weights.get(f"{prefix}.rep.bias", (c_local,)),
    )
    return FeatureMap(out)


def _concat_aligned(
    pyramid: dict[str, FeatureMap], gather: tuple[str, ...], target: tuple[int, int]
) -> np.ndarray:
    aligned = align([pyramid[name] for name in gather], target)
    return np.concatenate([fm.data for fm in aligned], axis=0)


def _split_channels(
    data: np.ndarray, spec: PyramidSpec, targets: tuple[str, ...]
) -> dict[str, FeatureMap]:
    chunks: dict[str, FeatureMap] = {}
    offset = 0
    for name in targets:
        c = spec.level(name).channels
        chunks[name] = FeatureMap(data[offset:offset + c])
        offset += c
    if offset != data.shape[0]:
        raise ValueError(
            f"split sizes sum to {offset} but the fused map has {data.shape[0]} channels"
        )
    return chunks


def low_gd(
    pyramid: dict[str, FeatureMap], weights: FusionWeights, spec: PyramidSpec
) -> dict[str, FeatureMap]:
    """Fuse the shallow gather set and inject it into the shallow targets."""
    cfg = spec.fusion
    target_hw = spec.spatial(cfg.low_align)
    gathered = _concat_aligned(pyramid, cfg.low_gather, target_hw)
    c_in = sum(spec.level(n).channels for n in cfg.low_gather)
    c_out = sum(spec.level(n).channels for n in cfg.low_targets)
    fused = ops.conv1x1(
        gathered,
        weights.get("low_fuse.weight", (c_out, c_in)),
        weights.get("low_fuse.bias", (c_out,)),
    )
    chunks = _split_channels(fused, spec, cfg.low_targets)
    out = dict(pyramid)
    for name in cfg.low_targets:
        out[name] = inject(pyramid[name], chunks[name], weights, f"low_inject.{name}")
    return out


def high_gd(
    pyramid: dict[str, FeatureMap], weights: FusionWeights, spec: PyramidSpec
) -> dict[str, FeatureMap]:
    """Fuse the deep gather set with attention and inject into the deep targets."""
    cfg = spec.fusion
    th, tw = spec.spatial(cfg.high_align)
    gathered = _concat_aligned(pyramid, cfg.high_gather, (th, tw))
    d = gathered.shape[0]
    if d % cfg.num_heads != 0:
        raise ValueError(
            f"gathered channel count {d} is not divisible by {cfg.num_heads} heads"
        )
    hidden = cfg.ffn_expansion * d
    tokens = gathered.reshape(d, th * tw).T

    attn_out, _ = ops.multi_head_attention(
        tokens,
        weights.get("attn.wq", (d, d)), weights.get("attn.bq", (d,)),
        weights.get("attn.wk", (d, d)), weights.get("attn.bk", (d,)),
        weights.get("attn.wv", (d, d)), weights.get("attn.bv", (d,)),
        weights.get("attn.wo", (d, d)), weights.get("attn.bo", (d,)),
        cfg.num_heads,
    )
    tokens = tokens + attn_out
    tokens = tokens + ops.feed_forward(
        tokens,
        weights.get("ffn.w1", (d, hidden)), weights.get("ffn.b1", (hidden,)),
        weights.get("ffn.w2", (hidden, d)), weights.get("ffn.b2", (d,)),
    )

    c_out = sum(spec.level(n).channels for n in cfg.high_targets)
    projected = tokens @ weights.get("high_fuse.weight", (c_out, d)).T
    projected = projected + weights.get("high_fuse.bias", (c_out,))
    fused = projected.T.reshape(c_out, th, tw)
    chunks = _split_channels(fused, spec, cfg.high_targets)
    out = dict(pyramid)
    for name in cfg.high_targets:
        out[name] = inject(pyramid[name], chunks[name], weights, f"high_inject.{name}")
    return out


def forward(
    pyramid: dict[str, FeatureMap], spec: PyramidSpec, weights: FusionWeights
) -> dict[str, FeatureMap]:
    """Low stage then high stage; every level keeps its input shape."""
    expected = {lv.level_id for lv in spec.levels}
    if set(pyramid) != expected:
        raise ValueError(
            f"pyramid levels {sorted(pyramid)} do not match spec {sorted(expected)}"
        )
    for lv in spec.levels:
        fm = pyramid[lv.level_id]
        side = spec.input_size // lv.stride
        if (fm.channels, fm.height, fm.width) != (lv.channels, side, side):
            raise ValueError(
                f"level {lv.level_id}: got {fm.channels}x{fm.height}x{fm.width}, "
                f"expected {lv.channels}x{side}x{side}"
            )
    out = low_gd(pyramid, weights, spec)
    out = high_gd(out, weights, spec)
    return out


def weight_manifest(spec: PyramidSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Every tensor name and shape the forward pass reads, for one spec."""
    cfg = spec.fusion
    names: list[tuple[str, tuple[int, ...]]] = []

    c_low_in = sum(spec.level(n).channels for n in cfg.low_gather)
    c_low_out = sum(spec.level(n).channels for n in cfg.low_targets)
    names.append(("low_fuse.weight", (c_low_out, c_low_in)))
    names.append(("low_fuse.bias", (c_low_out,)))

    d = sum(spec.level(n).channels for n in cfg.high_gather)
    hidden = cfg.ffn_expansion * d
    for part in ("wq", "wk", "wv", "wo"):
        names.append((f"attn.{part}", (d, d)))
    for part in ("bq", "bk", "bv", "bo"):
        names.append((f"attn.{part}", (d,)))
    names.append(("ffn.w1", (d, hidden)))
    names.append(("ffn.b1", (hidden,)))
    names.append(("ffn.w2", (hidden, d)))
    names.append(("ffn.b2", (d,)))
    c_high_out = sum(spec.level(n).channels for n in cfg.high_targets)
    names.append(("high_fuse.weight", (c_high_out, d)))
    names.append(("high_fuse.bias", (c_high_out,)))

    for stage, targets in (("low", cfg.low_targets), ("high", cfg.high_targets)):
        for name in targets:
            c = spec.level(name).channels
            prefix = f"{stage}_inject.{name}"
            names.append((f"{prefix}.embed.weight", (c, c)))
            names.append((f"{prefix}.embed.bias", (c,)))
            names.append((f"{prefix}.gate.weight", (c, c)))
            names.append((f"{prefix}.gate.bias", (c,)))
            names.append((f"{prefix}.proj.weight", (c, c)))
            names.append((f"{prefix}.proj.bias", (c,)))
            names.append((f"{prefix}.rep.weight", (c, c, 3, 3)))
            names.append((f"{prefix}.rep.bias", (c,)))
    return names
