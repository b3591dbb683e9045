"""Deterministic synthetic predictors for pipeline tests.

These emitters stand in for a real model so the full pipeline (scenes,
predictions, classification, scoring, reports) runs self-contained. Every
mode is a pure function of (tasks, manifests, seed).

Modes:
  * target-center: the ground-truth box center, one-hot digit vectors.
  * fixed-center: always (0.5, 0.5), one-hot digit vectors at "5".
  * offset: a point 0.02 outside the target box edge (mid-height), the
    canonical near-miss that classifies as biased under the default
    threshold.
  * noisy: gaussian scatter around the target center with occasional wild
    guesses; digit vectors sharpen as the error shrinks.
  * crop-oracle: a perfect second pass, the target center expressed in
    crop-window coordinates (tasks must carry crop windows).
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .cropgen import CropWindow, to_crop_coords
from .pss import normalize, parse_coordinate_pair
from .scenegen import SceneManifest

MODES = ("target-center", "fixed-center", "offset", "noisy", "crop-oracle")

OFFSET_DISTANCE = 0.02


def _format_pair(x: float, y: float, decimals: int) -> str:
    return f"[{x:.{decimals}f}, {y:.{decimals}f}]"


def _one_hot(digit: int) -> list[float]:
    return [1.0 if i == digit else 0.0 for i in range(10)]


def _tent_logits(rng: np.random.Generator, digit: int, sharpness: float) -> list[float]:
    noise = rng.normal(0.0, 0.25, 10)
    return [
        float(sharpness * (4.5 - abs(i - digit)) + noise[i]) for i in range(10)
    ]


def _tenths_digits(raw_text: str) -> tuple[int, int]:
    pair = parse_coordinate_pair(raw_text, strict=True)
    ox = pair.tenths_char_offset("x")
    oy = pair.tenths_char_offset("y")
    return int(raw_text[ox]), int(raw_text[oy])


def _offset_point(manifest: SceneManifest) -> tuple[float, float]:
    box = manifest.target_bbox
    cy = round((box.y1 + box.y2) / 2.0, 6)
    if box.x2 + OFFSET_DISTANCE <= 0.999999:
        return round(box.x2 + OFFSET_DISTANCE, 6), cy
    return round(box.x1 - OFFSET_DISTANCE, 6), cy


def emit_mock_predictions(
    tasks: Iterable[dict],
    manifests: dict[str, SceneManifest],
    mode: str,
    seed: int,
    model_id: Optional[str] = None,
) -> list[dict]:
    """One prediction record per task, in task order.

    Args:
        tasks: task rows (scene_id, image, instruction, optional
            crop_window for the crop-oracle mode).
        manifests: scene_id -> manifest, for ground-truth-aware modes.
        mode: one of MODES.
        seed: drives all randomness (only the noisy mode draws).
        model_id: defaults to "mock-<mode>".

    Raises:
        KeyError: a task's scene_id has no manifest.
        ValueError: unknown mode, or crop-oracle without a crop window.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mock mode {mode!r} (expected one of {MODES})")
    model = model_id or f"mock-{mode}"
    rng = np.random.Generator(np.random.PCG64(seed))

    records = []
    for task in tasks:
        scene_id = task["scene_id"]
        manifest = manifests[scene_id]
        target = manifest.target_bbox
        pass_label = "full"
        window = None
        sharpness = None

        if mode == "fixed-center":
            raw_text = _format_pair(0.5, 0.5, 6)
        elif mode == "target-center":
            c = target.center
            raw_text = _format_pair(round(c.x, 6), round(c.y, 6), 6)
        elif mode == "offset":
            ox, oy = _offset_point(manifest)
            raw_text = _format_pair(ox, oy, 6)
        elif mode == "crop-oracle":
            if "crop_window" not in task:
                raise ValueError(f"task {scene_id} lacks crop_window for crop-oracle")
            window = CropWindow.from_dict(task["crop_window"])
            local = to_crop_coords(target.center, window)
            raw_text = _format_pair(round(local.x, 6), round(local.y, 6), 6)
            pass_label = "crop"
        else:  # noisy
            if rng.uniform() < 0.1:
                gx = float(rng.uniform(0.01, 0.99))
                gy = float(rng.uniform(0.01, 0.99))
            else:
                c = target.center
                gx = float(np.clip(c.x + rng.normal(0.0, 0.02), 0.01, 0.99))
                gy = float(np.clip(c.y + rng.normal(0.0, 0.02), 0.01, 0.99))
            raw_text = _format_pair(gx, gy, 2)
            err = abs(gx - target.center.x) + abs(gy - target.center.y)
            sharpness = float(np.clip(2.2 - 14.0 * err, 0.25, 2.2))

        pair = parse_coordinate_pair(raw_text, strict=True)
        dx, dy = _tenths_digits(raw_text)

        if mode == "noisy":
            x_logits = _tent_logits(rng, dx, sharpness)
            y_logits = _tent_logits(rng, dy, sharpness)
            probs = [float(normalize(x_logits)[dx]), float(normalize(y_logits)[dy])]
        else:
            x_logits, y_logits = _one_hot(dx), _one_hot(dy)
            probs = [1.0, 1.0]

        record = {
            "schema_version": 1,
            "scene_id": scene_id,
            "model_id": model,
            "instruction": task.get("instruction", manifest.instruction),
            "pass": pass_label,
            "raw_text": raw_text,
            "pred": {"x": pair.x, "y": pair.y},
            "x_digit_logits": x_logits,
            "y_digit_logits": y_logits,
            "key_token_probs": probs,
        }
        if window is not None:
            record["crop_window"] = window.to_dict()
        records.append(record)
    return records
