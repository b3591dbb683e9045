"""Response taxonomy: classify predicted points against annotated scenes.

Each prediction lands in exactly one of four categories, decided in a fixed
order: inside the target box, near the target box, near some other icon's
box, or near nothing at all. "Near" means point-to-box distance below a
configurable normalized threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyInput, InvalidScene
from .geometry import BBox, Point, contains, point_to_box_distance

DEFAULT_TAU = 0.05


class ResponseCategory(str, enum.Enum):
    CORRECT = "correct"
    BIASED = "biased"
    MISLEADING = "misleading"
    CONFUSION = "confusion"


@dataclass(frozen=True)
class ClassifierConfig:
    """Distance threshold (normalized units) separating near from far."""

    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class ClassificationResult:
    category: ResponseCategory
    distance_to_target: float
    nearest_distractor_id: Optional[str] = None
    nearest_distractor_distance: Optional[float] = None


def classify(
    p: Point,
    target: BBox,
    distractors: Sequence[tuple[str, BBox]],
    cfg: ClassifierConfig = ClassifierConfig(),
) -> ClassificationResult:
    """Assign a response category to a predicted point.

    Branch order matters: containment wins over proximity to the target,
    which wins over proximity to any distractor. The target box must not be
    listed among the distractors; the caller strips it first.

    Args:
        p: predicted point, normalized.
        target: ground-truth box.
        distractors: (icon id, box) pairs for every other annotated icon.
        cfg: classifier threshold.

    Raises:
        InvalidScene: if the target box also appears in distractors.
    """
    for icon_id, b in distractors:
        if b == target:
            raise InvalidScene(f"target box also listed as distractor {icon_id!r}")

    if contains(p, target):
        return ClassificationResult(ResponseCategory.CORRECT, 0.0)

    d_target = point_to_box_distance(p, target)
    if d_target < cfg.tau:
        return ClassificationResult(ResponseCategory.BIASED, d_target)

    nearest_id: Optional[str] = None
    nearest_d: Optional[float] = None
    for icon_id, b in distractors:
        d = point_to_box_distance(p, b)
        if nearest_d is None or d < nearest_d:
            nearest_id, nearest_d = icon_id, d

    if nearest_d is not None and nearest_d < cfg.tau:
        return ClassificationResult(
            ResponseCategory.MISLEADING, d_target, nearest_id, nearest_d
        )
    return ClassificationResult(
        ResponseCategory.CONFUSION, d_target, nearest_id, nearest_d
    )


def threshold_curve(
    results: Sequence[tuple[bool, float]],
    thresholds: Sequence[float],
) -> list[float]:
    """Cumulative proportions of predictions near the target.

    Args:
        results: (contained, distance_to_target) per record.
        thresholds: strictly ascending distance thresholds.

    Returns:
        A list whose first entry is the contained-only proportion, followed
        by one entry per threshold giving the proportion of records that are
        contained or closer than that threshold. Non-decreasing by
        construction.

    Raises:
        EmptyInput: when there are no records.
        ValueError: when thresholds are not strictly ascending.
    """
    if not results:
        raise EmptyInput("threshold_curve needs at least one record")
    for a, b in zip(thresholds, list(thresholds)[1:]):
        if not a < b:
            raise ValueError(f"thresholds not strictly ascending: {a} !< {b}")

    n = len(results)
    curve = [sum(1 for contained, _ in results if contained) / n]
    for t in thresholds:
        hit = sum(1 for contained, d in results if contained or d < t)
        curve.append(hit / n)
    return curve
