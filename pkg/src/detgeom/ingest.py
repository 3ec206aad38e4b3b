"""File ingestion: VOC XML annotations, JSON-lines detections, class tables,
histogram CSVs, and grayscale images.

All readers validate as they parse and raise :class:`IngestError` carrying the
file (and line, where applicable) of the first malformed record.  Boxes pass
through the same construction validation as every other entry path, so NaN,
infinities, and degenerate rectangles are rejected here too.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .geometry import (
    Box,
    BoxValidationError,
    CornerBox,
    Detection,
    GroundTruth,
    from_corner,
)
from .shift import Histogram

__all__ = [
    "IngestError",
    "VocAnnotation",
    "load_class_table",
    "load_voc_annotation",
    "load_voc_dir",
    "load_detections_jsonl",
    "load_histogram_csv",
    "load_grayscale",
    "iter_image_files",
]

IMAGE_SUFFIXES = (".png", ".pgm")


class IngestError(ValueError):
    """A file could not be parsed; the message carries the location."""


@dataclass(frozen=True)
class VocAnnotation:
    """One annotation file: image id, image size, and labeled boxes."""

    image_id: str
    image_w: int
    image_h: int
    objects: tuple[GroundTruth, ...]


def load_class_table(path: str | Path) -> list[str]:
    """One class name per line; the line index is the class id."""
    names = []
    for raw in Path(path).read_text().splitlines():
        name = raw.strip()
        if name:
            names.append(name)
    if not names:
        raise IngestError(f"{path}: class table is empty")
    if len(set(names)) != len(names):
        raise IngestError(f"{path}: class table contains duplicate names")
    return names


def _xml_child_text(parent: ET.Element, tag: str, where: str) -> str:
    node = parent.find(tag)
    if node is None or node.text is None:
        raise IngestError(f"{where}: missing <{tag}>")
    return node.text.strip()


def load_voc_annotation(path: str | Path, class_table: list[str]) -> VocAnnotation:
    """Parse one VOC XML file; object names are mapped through the class table."""
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise IngestError(f"{path}: malformed XML: {exc}") from exc

    size = root.find("size")
    if size is None:
        raise IngestError(f"{path}: missing <size>")
    try:
        image_w = int(_xml_child_text(size, "width", str(path)))
        image_h = int(_xml_child_text(size, "height", str(path)))
    except ValueError as exc:
        raise IngestError(f"{path}: non-integer image size") from exc
    if image_w <= 0 or image_h <= 0:
        raise IngestError(f"{path}: non-positive image size {image_w}x{image_h}")

    objects = []
    for i, obj in enumerate(root.iter("object")):
        where = f"{path}: object #{i}"
        name = _xml_child_text(obj, "name", where)
        if name not in class_table:
            raise IngestError(f"{where}: class {name!r} not in class table")
        bndbox = obj.find("bndbox")
        if bndbox is None:
            raise IngestError(f"{where}: missing <bndbox>")
        try:
            coords = {
                tag: float(_xml_child_text(bndbox, tag, where))
                for tag in ("xmin", "ymin", "xmax", "ymax")
            }
        except ValueError as exc:
            raise IngestError(f"{where}: non-numeric bndbox coordinate") from exc
        try:
            corner = CornerBox(**coords)
            box = from_corner(corner)
        except BoxValidationError as exc:
            raise IngestError(f"{where}: {exc}") from exc
        objects.append(GroundTruth(box=box, class_id=class_table.index(name)))

    return VocAnnotation(
        image_id=path.stem, image_w=image_w, image_h=image_h, objects=tuple(objects)
    )


def load_voc_dir(
    gt_dir: str | Path, class_table: list[str]
) -> list[VocAnnotation]:
    """Parse every ``*.xml`` in a directory, sorted by filename."""
    gt_dir = Path(gt_dir)
    if not gt_dir.is_dir():
        raise IngestError(f"{gt_dir}: not a directory")
    return [
        load_voc_annotation(p, class_table) for p in sorted(gt_dir.glob("*.xml"))
    ]


def load_detections_jsonl(
    path: str | Path, class_table: list[str]
) -> dict[str, list[Detection]]:
    """One JSON object per line: image_id, class, score, bbox [xmin,ymin,xmax,ymax]."""
    path = Path(path)
    out: dict[str, list[Detection]] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{where}: bad JSON: {exc}") from exc
            try:
                image_id = doc["image_id"]
                class_name = doc["class"]
                score = float(doc["score"])
                bbox = doc["bbox"]
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"{where}: missing or malformed field: {exc}") from exc
            if class_name not in class_table:
                raise IngestError(f"{where}: class {class_name!r} not in class table")
            if not (isinstance(bbox, list) and len(bbox) == 4):
                raise IngestError(f"{where}: bbox must be [xmin, ymin, xmax, ymax]")
            try:
                corner = CornerBox(*(float(v) for v in bbox))
                det = Detection(
                    box=from_corner(corner),
                    class_id=class_table.index(class_name),
                    score=score,
                )
            except (BoxValidationError, ValueError) as exc:
                raise IngestError(f"{where}: {exc}") from exc
            out.setdefault(str(image_id), []).append(det)
    return out


def load_histogram_csv(path: str | Path, bin_count: int = 256) -> Histogram:
    """Read a precomputed "bin,count" CSV into a normalized histogram."""
    path = Path(path)
    counts = np.zeros(bin_count, dtype=np.float64)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip().lower() != "bin,count":
        raise IngestError(f"{path}:1: expected header 'bin,count'")
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise IngestError(f"{path}:{lineno}: expected 'bin,count'")
        try:
            bin_idx = int(parts[0])
            count = float(parts[1])
        except ValueError as exc:
            raise IngestError(f"{path}:{lineno}: non-numeric entry") from exc
        if not 0 <= bin_idx < bin_count:
            raise IngestError(f"{path}:{lineno}: bin {bin_idx} out of range")
        if count < 0:
            raise IngestError(f"{path}:{lineno}: negative count")
        counts[bin_idx] += count
    try:
        return Histogram.from_counts(counts)
    except ValueError as exc:
        raise IngestError(f"{path}: {exc}") from exc


def load_grayscale(path: str | Path) -> np.ndarray:
    """Load a PNG or PGM image as 8-bit grayscale (color uses standard luma)."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise IngestError(f"{path}: unreadable image: {exc}") from exc


def iter_image_files(directory: str | Path) -> list[Path]:
    """Sorted image files (by suffix allowlist) directly inside a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestError(f"{directory}: not a directory")
    return sorted(
        p for p in directory.iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
