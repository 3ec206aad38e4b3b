"""Detection evaluation: greedy matching, precision/recall, AP, and mAP@0.5.

Matching follows the de facto convention: detections are processed in
descending score order (ties by input order) and each is matched to the
highest-IoU still-unmatched ground truth of its class in its image; the match
counts as a true positive when that IoU reaches the threshold.  AP integrates
the monotone (right-envelope) precision-recall curve over all points, and
mAP@0.5 averages AP over the classes that appear in the ground truth.  A
precision or recall with a zero denominator is defined as 0.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .geometry import Detection, GroundTruth
from .metrics import iou

__all__ = [
    "MatchConfig",
    "PrCurve",
    "EvalSummary",
    "match_detections",
    "precision_recall",
    "average_precision",
    "evaluate",
]


@dataclass(frozen=True)
class MatchConfig:
    """IoU threshold for matching and score threshold for the P/R summary."""

    iou_threshold: float = 0.5
    score_threshold: float = 0.0

    def __post_init__(self) -> None:
        for name in ("iou_threshold", "score_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class PrCurve:
    """Cumulative (recall, precision) points in descending-score order."""

    class_id: int
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate evaluation results at one matching configuration."""

    per_class_ap: dict[int, float]
    map50: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    class_names: dict[int, str] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def label(cid: int) -> str:
            return self.class_names.get(cid, str(cid))

        return {
            "map50": self.map50,
            "precision": self.precision,
            "recall": self.recall,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_class_ap": {label(c): ap for c, ap in sorted(self.per_class_ap.items())},
        }


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    cfg: MatchConfig,
) -> tuple[list[bool], list[bool]]:
    """Flag each detection TP/FP and each ground truth matched/unmatched.

    All inputs must belong to one image and one class.  Returns flags in the
    original input orders.
    """
    tp_flags = [False] * len(dets)
    gt_matched = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    for i in order:
        best_iou = 0.0
        best_j = -1
        for j, gt in enumerate(gts):
            if gt_matched[j]:
                continue
            v = iou(dets[i].box, gt.box)
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou >= cfg.iou_threshold:
            tp_flags[i] = True
            gt_matched[best_j] = True
    return tp_flags, gt_matched


def precision_recall(tp: int, fp: int, fn: int) -> tuple[float, float]:
    """P = TP/(TP+FP) and R = TP/(TP+FN), each 0 when its denominator is 0."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return precision, recall


def average_precision(curve: PrCurve) -> float:
    """Area under the monotone precision envelope, all-points integration."""
    if not curve.points:
        return 0.0
    recalls = [r for r, _ in curve.points]
    precisions = [p for _, p in curve.points]
    envelope = precisions[:]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    ap = 0.0
    prev_r = 0.0
    for r, p in zip(recalls, envelope):
        ap += (r - prev_r) * p
        prev_r = r
    return ap


def evaluate(
    dets: Mapping[str, Sequence[Detection]],
    gts: Mapping[str, Sequence[GroundTruth]],
    cfg: MatchConfig | None = None,
    n_classes: int | None = None,
    class_names: Mapping[int, str] | None = None,
) -> tuple[EvalSummary, dict[int, PrCurve]]:
    """Pooled per-class AP over all images plus a P/R summary.

    AP is reported only for classes with at least one ground-truth box;
    mAP@0.5 averages over exactly those classes.  The summary TP/FP/FN counts
    take every detection with ``score >= cfg.score_threshold``.
    """
    cfg = cfg or MatchConfig()
    det_classes = {d.class_id for ds in dets.values() for d in ds}
    gt_classes = {g.class_id for gs in gts.values() for g in gs}
    if n_classes is not None:
        bad = sorted(c for c in det_classes | gt_classes if c >= n_classes)
        if bad:
            raise ValueError(f"class ids {bad} are outside the class table (size {n_classes})")

    image_ids = sorted(set(dets) | set(gts))
    curves: dict[int, PrCurve] = {}
    per_class_ap: dict[int, float] = {}
    total_tp = total_fp = 0
    total_gt_at_threshold = 0

    for class_id in sorted(det_classes | gt_classes):
        n_gt = sum(
            1 for gs in gts.values() for g in gs if g.class_id == class_id
        )
        # (score, image_id, input index, tp) pooled across images.
        pooled: list[tuple[float, str, int, bool]] = []
        for image_id in image_ids:
            image_dets = [
                (idx, d)
                for idx, d in enumerate(dets.get(image_id, []))
                if d.class_id == class_id
            ]
            image_gts = [g for g in gts.get(image_id, []) if g.class_id == class_id]
            flags, _ = match_detections([d for _, d in image_dets], image_gts, cfg)
            for (idx, d), tp in zip(image_dets, flags):
                pooled.append((d.score, image_id, idx, tp))

        pooled.sort(key=lambda item: (-item[0], item[1], item[2]))

        # Summary counts at the score threshold; matching in score order makes
        # the flags of the kept prefix identical to a rerun on that prefix.
        kept = [item for item in pooled if item[0] >= cfg.score_threshold]
        class_tp = sum(1 for item in kept if item[3])
        total_tp += class_tp
        total_fp += sum(1 for item in kept if not item[3])
        total_gt_at_threshold += n_gt

        if n_gt == 0:
            continue  # AP undefined for this class; detections still count above.

        points: list[tuple[float, float]] = []
        tp_cum = 0
        for rank, item in enumerate(pooled, start=1):
            tp_cum += 1 if item[3] else 0
            points.append((tp_cum / n_gt, tp_cum / rank))
        curve = PrCurve(class_id=class_id, points=tuple(points))
        curves[class_id] = curve
        per_class_ap[class_id] = average_precision(curve)

    map50 = (
        sum(per_class_ap.values()) / len(per_class_ap) if per_class_ap else 0.0
    )
    fn = total_gt_at_threshold - total_tp
    precision, recall = precision_recall(total_tp, total_fp, fn)
    summary = EvalSummary(
        per_class_ap=per_class_ap,
        map50=map50,
        precision=precision,
        recall=recall,
        tp=total_tp,
        fp=total_fp,
        fn=fn,
        class_names=dict(class_names or {}),
    )
    return summary, curves
