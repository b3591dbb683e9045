"""Normalized-coordinate primitives: points, boxes, containment, distances.

All classification geometry runs in the normalized unit square (both axes
divided by their image dimension). Pixel conversion happens only at image
I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Point:
    """A click location as fractions of image width and height."""

    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"point ({self.x}, {self.y}) outside [0,1]^2")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized coordinates, corners (x1,y1)-(x2,y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"bbox coordinate {v} outside [0,1]")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(
                f"bbox corners not ordered: ({self.x1},{self.y1},{self.x2},{self.y2})"
            )

    @property
    def center(self) -> Point:
        return Point((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class PixelDims:
    """Image size in whole pixels."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dims must be >= 1x1, got {self.width}x{self.height}")


def contains(p: Point, b: BBox) -> bool:
    """True iff the point lies strictly inside the box.

    Boundary points are not contained: the comparison is x1 < x < x2 and
    y1 < y < y2. A boundary point still has distance 0 to the box.
    """
    return b.x1 < p.x < b.x2 and b.y1 < p.y < b.y2


def point_to_box_distance(p: Point, b: BBox) -> float:
    """Euclidean distance from a point to the nearest edge of a box.

    Zero when the point is inside or on the boundary.
    """
    dx = max(b.x1 - p.x, 0.0, p.x - b.x2)
    dy = max(b.y1 - p.y, 0.0, p.y - b.y2)
    return math.hypot(dx, dy)


def box_to_box_gap(a: BBox, b: BBox) -> float:
    """Euclidean gap between two boxes (0 when they touch or overlap)."""
    dx = max(a.x1 - b.x2, b.x1 - a.x2, 0.0)
    dy = max(a.y1 - b.y2, b.y1 - a.y2, 0.0)
    return math.hypot(dx, dy)


def _round_half_up(v: float) -> int:
    # round() is banker's rounding; pixel conversion wants the conventional rule
    return math.floor(v + 0.5)


def to_pixels(p: Point, d: PixelDims) -> tuple[int, int]:
    """Convert a normalized point to pixel coordinates, rounding half up."""
    return _round_half_up(p.x * d.width), _round_half_up(p.y * d.height)


def from_pixels(px: int, py: int, d: PixelDims) -> Point:
    """Inverse of to_pixels; roundtrip error is at most 0.5/dim per axis."""
    return Point(px / d.width, py / d.height)


def pixel_index(p: Point, d: PixelDims) -> tuple[int, int]:
    """Index of the pixel containing the point.

    Pixel i spans [i, i+1) in continuous pixel units; a point at exactly 1.0
    maps to the last pixel.
    """
    ix = min(int(p.x * d.width), d.width - 1)
    iy = min(int(p.y * d.height), d.height - 1)
    return ix, iy
