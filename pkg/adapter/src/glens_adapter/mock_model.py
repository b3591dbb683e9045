"""Deterministic mock model emitting character-level generation traces.

The mock decodes one character per step, attaching a digit score vector to
every step the way a real capture would, so the whole trace -> capture ->
record path is exercised without model weights.

Modes:
  * center: always answers the image midpoint with one-hot scores.
  * offset: answers a point slightly outside the target box (needs scene
    manifests for ground truth).
  * noisy: seeded scatter around the target center with softer scores.
  * refuse: answers prose with no coordinates, producing a failure record.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .capture import GenerationTrace, TraceStep

MOCK_MODES = ("center", "offset", "noisy", "refuse")

REFUSAL_TEXT = "I cannot help with that request."
OFFSET_DISTANCE = 0.02


def load_manifests(scenes_dir: str | Path) -> dict[str, dict]:
    """Scene annotations from the primary's manifest files."""
    manifest_dir = Path(scenes_dir) / "manifests"
    manifests = {}
    for path in sorted(manifest_dir.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        manifests[doc["scene_id"]] = doc
    return manifests


def _target_bbox(manifest: dict) -> tuple[float, float, float, float]:
    for placement in manifest["placements"]:
        if placement["icon_id"] == manifest["target_icon_id"]:
            return tuple(placement["bbox"])
    raise KeyError(f"manifest {manifest['scene_id']} has no target placement")


class DeterministicMockModel:
    """Char-level mock; one instance per batch keeps the seed stream stable."""

    def __init__(
        self,
        mode: str,
        seed: int,
        manifests: Optional[dict[str, dict]] = None,
    ):
        if mode not in MOCK_MODES:
            raise ValueError(f"unknown mock mode {mode!r} (expected {MOCK_MODES})")
        if mode in ("offset", "noisy") and manifests is None:
            raise ValueError(f"mock mode {mode!r} needs scene manifests (--scenes)")
        self.mode = mode
        self.manifests = manifests or {}
        self.rng = np.random.Generator(np.random.PCG64(seed))

    def _answer_text(self, scene_id: str) -> str:
        if self.mode == "center":
            return "[0.500000, 0.500000]"
        if self.mode == "refuse":
            return REFUSAL_TEXT
        manifest = self.manifests[scene_id]
        x1, y1, x2, y2 = _target_bbox(manifest)
        cx, cy = (x1 + x2) / 2.0, (y1 + y2) / 2.0
        if self.mode == "offset":
            px = x2 + OFFSET_DISTANCE if x2 + OFFSET_DISTANCE <= 0.999999 else x1 - OFFSET_DISTANCE
            return f"[{px:.6f}, {round(cy, 6):.6f}]"
        gx = float(np.clip(cx + self.rng.normal(0.0, 0.02), 0.01, 0.99))
        gy = float(np.clip(cy + self.rng.normal(0.0, 0.02), 0.01, 0.99))
        return f"[{gx:.2f}, {gy:.2f}]"

    def _digit_scores(self, char: str) -> tuple[float, ...]:
        if not char.isdigit():
            return tuple([0.0] * 10)
        digit = int(char)
        if self.mode == "noisy":
            noise = self.rng.normal(0.0, 0.2, 10)
            return tuple(
                float(1.8 * (4.5 - abs(i - digit)) + noise[i]) for i in range(10)
            )
        return tuple(1.0 if i == digit else 0.0 for i in range(10))

    def generate(self, task: dict) -> GenerationTrace:
        """Decode one task into a per-character trace."""
        text = self._answer_text(task["scene_id"])
        steps = tuple(
            TraceStep(token_text=c, digit_logits=self._digit_scores(c))
            for c in text
        )
        return GenerationTrace(steps=steps)
