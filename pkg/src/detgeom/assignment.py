"""Anchor grid generation and threshold-based positive-sample assignment.

An anchor becomes a positive sample for a ground-truth box when the chosen
similarity metric meets the threshold; an anchor supervises at most one box
(best metric wins, then the lowest box index).  The per-box positive counts
expose how sharply a metric's threshold region shrinks for small boxes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Box, GroundTruth
from .kernels import boxes_to_array, pairwise_matrix
from .metrics import CombinedParams, MetricKind, NwdParams

__all__ = [
    "AnchorGrid",
    "AssignmentReport",
    "generate_anchors",
    "assign",
    "random_ground_truths",
]


@dataclass(frozen=True)
class AnchorGrid:
    """Per-stride anchor layout over one image.

    ``anchor_sizes[i]`` lists the (w, h) pairs placed at every cell of stride
    ``strides[i]``; cell centers sit at ``(col + 0.5) * stride``.
    """

    strides: tuple[int, ...]
    anchor_sizes: tuple[tuple[tuple[float, float], ...], ...]
    image_w: int
    image_h: int

    def __post_init__(self) -> None:
        if len(self.strides) != len(self.anchor_sizes):
            raise ValueError("strides and anchor_sizes must have equal length")
        if not self.strides:
            raise ValueError("at least one stride is required")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")
        for stride, sizes in zip(self.strides, self.anchor_sizes):
            if stride <= 0:
                raise ValueError(f"stride must be positive, got {stride}")
            if stride > self.image_w or stride > self.image_h:
                raise ValueError(
                    f"stride {stride} exceeds image {self.image_w}x{self.image_h}"
                )
            if not sizes:
                raise ValueError(f"stride {stride} has no anchor sizes")
            for w, h in sizes:
                if w <= 0 or h <= 0:
                    raise ValueError(f"anchor size must be positive, got {(w, h)}")


@dataclass(frozen=True)
class AssignmentReport:
    """Positive-sample counts per ground-truth box for one metric/threshold."""

    per_gt_positive_counts: tuple[int, ...]
    mean_positives: float
    metric: MetricKind
    threshold: float

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "threshold": self.threshold,
            "mean_positives": self.mean_positives,
            "per_gt_positive_counts": list(self.per_gt_positive_counts),
        }


def generate_anchors(grid: AnchorGrid) -> list[Box]:
    """Enumerate anchors row-major per stride: rows, then columns, then sizes."""
    anchors: list[Box] = []
    for stride, sizes in zip(grid.strides, grid.anchor_sizes):
        nx = grid.image_w // stride
        ny = grid.image_h // stride
        for iy in range(ny):
            cy = (iy + 0.5) * stride
            for ix in range(nx):
                cx = (ix + 0.5) * stride
                for w, h in sizes:
                    anchors.append(Box(cx=cx, cy=cy, w=w, h=h))
    return anchors


def assign(
    gts: list[GroundTruth],
    grid: AnchorGrid,
    metric: MetricKind,
    threshold: float,
    params: NwdParams | CombinedParams | None = None,
) -> AssignmentReport:
    """Assign every anchor to at most one ground truth and count positives.

    An anchor is eligible for a box when ``metric(anchor, box) >= threshold``;
    among eligible boxes it is assigned to the one with the highest metric
    value, ties resolved toward the lowest box index.
    """
    if not gts:
        raise ValueError("assignment requires at least one ground-truth box")
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")

    anchors = boxes_to_array(generate_anchors(grid))
    gt_arr = boxes_to_array([gt.box for gt in gts])
    scores = pairwise_matrix(metric, anchors, gt_arr, params)

    eligible = scores >= threshold
    best = np.where(eligible, scores, -np.inf).argmax(axis=1)
    has_match = eligible.any(axis=1)
    counts = np.bincount(best[has_match], minlength=len(gts))

    return AssignmentReport(
        per_gt_positive_counts=tuple(int(c) for c in counts),
        mean_positives=float(counts.mean()),
        metric=metric,
        threshold=threshold,
    )


def random_ground_truths(
    count: int,
    image_w: int,
    image_h: int,
    box_w: float,
    box_h: float,
    seed: int,
    class_id: int = 0,
) -> list[GroundTruth]:
    """Fixed-size boxes with centers uniform over positions fully inside the image."""
    if count <= 0:
        raise ValueError("count must be positive")
    if box_w >= image_w or box_h >= image_h:
        raise ValueError("box does not fit inside the image")
    rng = np.random.default_rng(seed)
    cx = rng.uniform(box_w / 2, image_w - box_w / 2, size=count)
    cy = rng.uniform(box_h / 2, image_h - box_h / 2, size=count)
    return [
        GroundTruth(box=Box(cx=float(x), cy=float(y), w=box_w, h=box_h), class_id=class_id)
        for x, y in zip(cx, cy)
    ]
