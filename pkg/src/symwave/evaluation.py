"""Scoring detections against ground-truth symmetry segments.

A detection is a true positive for a ground-truth segment when the acute
angle between them is under 10 degrees and its center lies within a fifth of
the segment length (segment mode) or the ground-truth center lies within a
fifth of the ground-truth length of the detected line (line mode).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import GroundTruthError, ParameterError

MAX_ANGLE = math.radians(10.0)
CENTER_FRACTION = 1.0 / 5.0


@dataclass(frozen=True)
class GroundTruthSegment:
    endpoint_a: tuple[float, float]
    endpoint_b: tuple[float, float]

    def __post_init__(self):
        if not self.length > 0:
            raise ParameterError("ground-truth segment has zero length")

    @property
    def angle(self) -> float:
        dx = self.endpoint_b[0] - self.endpoint_a[0]
        dy = self.endpoint_b[1] - self.endpoint_a[1]
        return math.atan2(dy, dx) % math.pi

    @property
    def center(self) -> tuple[float, float]:
        return (
            0.5 * (self.endpoint_a[0] + self.endpoint_b[0]),
            0.5 * (self.endpoint_a[1] + self.endpoint_b[1]),
        )

    @property
    def length(self) -> float:
        return math.dist(self.endpoint_a, self.endpoint_b)

    def scaled(self, factor: float) -> GroundTruthSegment:
        a, b = self.endpoint_a, self.endpoint_b
        return GroundTruthSegment((a[0] * factor, a[1] * factor), (b[0] * factor, b[1] * factor))


@dataclass
class MatchResult:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return 1.0 if self.tp + self.fp == 0 else self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        # no ground truth means nothing was missed
        return 1.0 if self.tp + self.fn == 0 else self.tp / (self.tp + self.fn)

    def __add__(self, other: MatchResult) -> MatchResult:
        return MatchResult(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, [])


@dataclass(frozen=True)
class PRPoint:
    sweep: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int


def angle_difference(a: float, b: float) -> float:
    """Acute angle between two undirected directions."""
    diff = abs(a - b) % math.pi
    return min(diff, math.pi - diff)


def is_tp_segment(det, gt) -> bool:
    if angle_difference(det.angle, gt.angle) >= MAX_ANGLE:
        return False
    return math.dist(det.center, gt.center) < CENTER_FRACTION * min(gt.length, det.length)


def is_tp_line(det, gt) -> bool:
    """``det`` is a line (``rho``, ``delta``) or anything with ``.line``."""
    line = getattr(det, "line", det)
    if angle_difference(line.rho, gt.angle) >= MAX_ANGLE:
        return False
    cx, cy = gt.center
    dist = abs(cx * math.sin(line.rho) - cy * math.cos(line.rho) - line.delta)
    return dist < CENTER_FRACTION * gt.length


def is_tp_center(det, gt) -> bool:
    """Center detections (``x``, ``y``) against a segment spanning the object."""
    return math.dist((det.x, det.y), gt.center) < CENTER_FRACTION * gt.length


CRITERIA: dict[str, Callable] = {
    "segments": is_tp_segment,
    "lines": is_tp_line,
    "ellipses": is_tp_center,
}


def match(detections: Sequence, ground_truths: Sequence, criterion: Callable = is_tp_segment) -> MatchResult:
    """Greedy one-to-one matching; ``detections`` must already be sorted by score."""
    claimed = [False] * len(ground_truths)
    result = MatchResult()
    for i, det in enumerate(detections):
        for j, gt in enumerate(ground_truths):
            if not claimed[j] and criterion(det, gt):
                claimed[j] = True
                result.pairs.append((i, j))
                break
        else:
            result.fp += 1
    result.tp = len(result.pairs)
    result.fn = len(ground_truths) - result.tp
    return result


def pr_curve(
    dataset: Sequence[tuple[Sequence, Sequence]],
    sweep: Sequence[float],
    criterion: Callable = is_tp_segment,
    by: str = "threshold",
    relative: bool = False,
) -> list[PRPoint]:
    """Aggregate precision and recall over images for each sweep value.

    ``dataset`` holds ``(detections, ground_truths)`` per image, detections
    sorted by descending ``score``. With ``by="threshold"`` a detection is kept
    when its score is at least the sweep value (times the image's best score
    if ``relative``); with ``by="topk"`` the first ``k`` are kept.
    """
    if not dataset:
        raise ParameterError("cannot build a PR curve from an empty dataset")
    if by not in ("threshold", "topk"):
        raise ParameterError(f"unknown sweep kind {by!r}")
    points = []
    for value in sorted(sweep):
        total = MatchResult()
        for detections, gts in dataset:
            if by == "topk":
                kept = list(detections)[: int(value)]
            else:
                cut = value
                if relative and detections:
                    cut = value * max(d.score for d in detections)
                kept = [d for d in detections if d.score >= cut]
            total = total + match(kept, gts, criterion)
        points.append(PRPoint(value, total.precision, total.recall, total.tp, total.fp, total.fn))
    return points


def load_ground_truth(path, scale: float | dict[str, float] = 1.0) -> list[tuple[str, list[GroundTruthSegment]]]:
    """Read ``image_id,ax,ay,bx,by`` rows, grouping segments by image in file order.

    ``scale`` is one factor for all images or a per-image mapping (missing ids
    use 1). A leading header row starting with ``image_id`` is skipped.
    """
    groups: dict[str, list[GroundTruthSegment]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and row[0].strip().lower() == "image_id":
                continue
            if len(row) != 5:
                raise GroundTruthError(f"{path}: row {lineno}: expected 5 fields, got {len(row)}")
            image_id = row[0].strip()
            try:
                ax, ay, bx, by = (float(v) for v in row[1:])
            except ValueError as exc:
                raise GroundTruthError(f"{path}: row {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in (ax, ay, bx, by)):
                raise GroundTruthError(f"{path}: row {lineno}: non-finite coordinate")
            if (ax, ay) == (bx, by):
                raise GroundTruthError(f"{path}: row {lineno}: zero-length segment")
            factor = scale.get(image_id, 1.0) if isinstance(scale, dict) else scale
            seg = GroundTruthSegment((ax, ay), (bx, by)).scaled(factor)
            groups.setdefault(image_id, []).append(seg)
    return list(groups.items())


def write_pr_csv(path, points: Sequence[PRPoint]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sweep", "precision", "recall", "tp", "fp", "fn"])
        for p in points:
            writer.writerow([f"{p.sweep:.6f}", f"{p.precision:.6f}", f"{p.recall:.6f}", p.tp, p.fp, p.fn])
