"""Canonical box types, conversions, and size classification.

Boxes are kept in center-size form ``(cx, cy, w, h)`` everywhere inside the
library; the corner form ``(xmin, ymin, xmax, ymax)`` exists only at file
boundaries.  Coordinates are continuous, corner-origin pixels (the origin sits
at the top-left corner of the top-left pixel).  Boxes that overhang the image
are kept as-is and flagged, never clipped, because clipping would change every
downstream similarity value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "Box",
    "CornerBox",
    "GroundTruth",
    "Detection",
    "SizeRecord",
    "BoxValidationError",
    "to_corner",
    "from_corner",
    "size_record",
    "SMALL_MAX_FRACTION",
    "LARGE_MIN_FRACTION",
]

# A box is "small" when its larger relative side is below 0.20 and "large"
# when it exceeds 0.60; both comparisons are strict, so the boundary values
# land in "medium".
SMALL_MAX_FRACTION = 0.20
LARGE_MIN_FRACTION = 0.60


class BoxValidationError(ValueError):
    """Raised when a box or record violates a construction invariant."""


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise BoxValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in center-size form, pixel units.

    Attributes:
        cx, cy: Center coordinates.
        w, h: Extents; both strictly positive.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            _require_finite(name, getattr(self, name))
        if self.w <= 0 or self.h <= 0:
            raise BoxValidationError(
                f"box extents must be positive, got w={self.w}, h={self.h}"
            )

    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class CornerBox:
    """Axis-aligned rectangle as (xmin, ymin, xmax, ymax), pixel units."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        for name in ("xmin", "ymin", "xmax", "ymax"):
            _require_finite(name, getattr(self, name))
        if self.xmax <= self.xmin:
            raise BoxValidationError(
                f"zero or negative width: xmin={self.xmin}, xmax={self.xmax}"
            )
        if self.ymax <= self.ymin:
            raise BoxValidationError(
                f"zero or negative height: ymin={self.ymin}, ymax={self.ymax}"
            )


@dataclass(frozen=True)
class GroundTruth:
    """An annotated box plus its class id."""

    box: Box
    class_id: int

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise BoxValidationError(f"class_id must be >= 0, got {self.class_id}")


@dataclass(frozen=True)
class Detection:
    """A predicted box with class id and confidence score in [0, 1]."""

    box: Box
    class_id: int
    score: float

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise BoxValidationError(f"class_id must be >= 0, got {self.class_id}")
        _require_finite("score", self.score)
        if not 0.0 <= self.score <= 1.0:
            raise BoxValidationError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class SizeRecord:
    """Relative box size and its small/medium/large class.

    ``rel_w``/``rel_h`` are the box extents divided by the image extents;
    ``size_class`` follows the strict max-side thresholds
    ``SMALL_MAX_FRACTION`` and ``LARGE_MIN_FRACTION``.
    """

    rel_w: float
    rel_h: float
    size_class: str


def to_corner(b: Box) -> CornerBox:
    """Convert a center-size box to corner form."""
    return CornerBox(
        xmin=b.cx - b.w / 2,
        ymin=b.cy - b.h / 2,
        xmax=b.cx + b.w / 2,
        ymax=b.cy + b.h / 2,
    )


def from_corner(c: CornerBox) -> Box:
    """Convert a corner box to center-size form (inverse of :func:`to_corner`)."""
    return Box(
        cx=(c.xmin + c.xmax) / 2,
        cy=(c.ymin + c.ymax) / 2,
        w=c.xmax - c.xmin,
        h=c.ymax - c.ymin,
    )


def size_record(gt: GroundTruth, image_w: float, image_h: float) -> SizeRecord:
    """Classify a ground-truth box as small/medium/large relative to its image.

    Overhanging boxes are allowed (a warning is emitted); non-positive image
    dimensions are rejected.
    """
    if image_w <= 0 or image_h <= 0:
        raise BoxValidationError(
            f"image dimensions must be positive, got {image_w}x{image_h}"
        )
    c = to_corner(gt.box)
    if c.xmin < 0 or c.ymin < 0 or c.xmax > image_w or c.ymax > image_h:
        warnings.warn(
            f"box {gt.box} overhangs the {image_w}x{image_h} image; kept unclipped",
            stacklevel=2,
        )
    rel_w = gt.box.w / image_w
    rel_h = gt.box.h / image_h
    longest = max(rel_w, rel_h)
    if longest < SMALL_MAX_FRACTION:
        size_class = "small"
    elif longest > LARGE_MIN_FRACTION:
        size_class = "large"
    else:
        size_class = "medium"
    return SizeRecord(rel_w=rel_w, rel_h=rel_h, size_class=size_class)
