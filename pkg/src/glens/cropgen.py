"""Context-aware cropping: plan, extract, and remap.

A crop keeps a fixed fraction of each image dimension, positioned so the
predicted point sits as close to the window center as the image borders
allow. Second-pass predictions made inside the crop are remapped back to
full-image coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImage, DimensionMismatch
from .geometry import PixelDims, Point, pixel_index

DEFAULT_ALPHA = 0.8


@dataclass(frozen=True)
class CropConfig:
    """Retained fraction of each image dimension."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")


@dataclass(frozen=True)
class CropWindow:
    """A pixel-aligned subrectangle of a parent image."""

    x_start: int
    y_start: int
    width: int
    height: int
    parent: PixelDims

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("crop window must be at least 1x1")
        if self.x_start < 0 or self.y_start < 0:
            raise ValueError("crop window starts must be >= 0")
        if self.x_start + self.width > self.parent.width:
            raise ValueError("crop window exceeds parent width")
        if self.y_start + self.height > self.parent.height:
            raise ValueError("crop window exceeds parent height")

    def to_dict(self) -> dict:
        return {
            "x_start": self.x_start,
            "y_start": self.y_start,
            "width": self.width,
            "height": self.height,
            "parent_w": self.parent.width,
            "parent_h": self.parent.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CropWindow":
        return cls(
            x_start=d["x_start"],
            y_start=d["y_start"],
            width=d["width"],
            height=d["height"],
            parent=PixelDims(d["parent_w"], d["parent_h"]),
        )


def _plan_axis(coord: float, dim: int, alpha: float) -> tuple[int, int]:
    """Start and length of the crop along one axis, in pixels."""
    length = math.floor(alpha * dim)
    if length < 1:
        raise DegenerateImage(f"crop of {alpha} x {dim}px collapses to zero")

    # clamped real-valued start, centered on the coordinate
    real_start = min(max(coord * dim - alpha * dim / 2.0, 0.0), dim - alpha * dim)
    # round-half-up keeps the point within one pixel of the window center;
    # flooring would allow a 1.5px off-center drift
    start = math.floor(real_start + 0.5)
    start = min(max(start, 0), dim - length)

    # for very small windows rounding can still strand the point's pixel
    # just outside; shift minimally to restore containment
    target_px = min(int(coord * dim), dim - 1)
    start = min(max(start, target_px - length + 1), target_px)
    start = min(max(start, 0), dim - length)
    return start, length


def plan_crop(p: Point, dims: PixelDims, cfg: CropConfig = CropConfig()) -> CropWindow:
    """Plan a crop window centered on a predicted point, clamped in-bounds.

    The returned window always lies inside the image and always contains the
    pixel under the point; when neither border clamp is active the point
    sits within one pixel of the window center.

    Raises:
        DegenerateImage: when the retained fraction of a dimension floors
            to zero pixels.
    """
    x_start, width = _plan_axis(p.x, dims.width, cfg.alpha)
    y_start, height = _plan_axis(p.y, dims.height, cfg.alpha)
    return CropWindow(x_start, y_start, width, height, dims)


def remap_to_full(p_crop: Point, w: CropWindow) -> Point:
    """Express a crop-relative point in full-image normalized coordinates."""
    return Point(
        (w.x_start + p_crop.x * w.width) / w.parent.width,
        (w.y_start + p_crop.y * w.height) / w.parent.height,
    )


def to_crop_coords(p_full: Point, w: CropWindow) -> Point:
    """Inverse of remap_to_full for points inside the window."""
    return Point(
        (p_full.x * w.parent.width - w.x_start) / w.width,
        (p_full.y * w.parent.height - w.y_start) / w.height,
    )


def window_contains(p: Point, w: CropWindow) -> bool:
    """True iff the pixel under the full-image point lies in the window."""
    ix, iy = pixel_index(p, w.parent)
    return (
        w.x_start <= ix < w.x_start + w.width
        and w.y_start <= iy < w.y_start + w.height
    )


def crop_pixels(image: np.ndarray, w: CropWindow) -> np.ndarray:
    """Bit-exact copy of the window's subrectangle.

    Args:
        image: array of shape (height, width) or (height, width, channels).
        w: window whose parent dims must match the image.

    Raises:
        DimensionMismatch: image shape does not match the window's parent.
    """
    if image.shape[0] != w.parent.height or image.shape[1] != w.parent.width:
        raise DimensionMismatch(
            f"image is {image.shape[1]}x{image.shape[0]}, "
            f"window parent is {w.parent.width}x{w.parent.height}"
        )
    return image[
        w.y_start : w.y_start + w.height, w.x_start : w.x_start + w.width
    ].copy()


def refine(second_pass_point: Point, w: CropWindow) -> Point:
    """Final answer of the two-pass pipeline: remapped second-pass point.

    The second pass is applied unconditionally; there is no fallback to the
    first-pass prediction.
    """
    return remap_to_full(second_pass_point, w)


def refine_record(first_pass: dict, second_pass: dict, w: CropWindow) -> dict:
    """Join a full-pass and a crop-pass prediction record.

    The result is a prediction record in full-image coordinates carrying the
    second pass's score vectors and both passes' raw outputs as provenance.
    The crop-relative output text is moved under provenance because the
    top-level pred no longer matches it.

    Raises:
        KeyError: either record lacks a parsed prediction point.
    """
    p_crop = Point(second_pass["pred"]["x"], second_pass["pred"]["y"])
    p_full = refine(p_crop, w)
    out = {
        "schema_version": second_pass.get("schema_version", 1),
        "scene_id": second_pass["scene_id"],
        "model_id": second_pass["model_id"],
        "pass": "crop",
        "pred": {"x": p_full.x, "y": p_full.y},
        "crop_window": w.to_dict(),
        "provenance": {
            "first_pass_pred": first_pass.get("pred"),
            "first_pass_raw_text": first_pass.get("raw_text"),
            "crop_raw_text": second_pass.get("raw_text"),
            "crop_pred": second_pass.get("pred"),
        },
    }
    for key in ("instruction", "x_digit_logits", "y_digit_logits",
                "key_token_probs", "timestamp"):
        if key in second_pass:
            out[key] = second_pass[key]
    return out
