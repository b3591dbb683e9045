"""Synthetic benchmark scenes: seeded icon placement over backgrounds.

Every scene is a pure function of its inputs and seed: icons drawn without
replacement, rejection-sampled onto the background with a minimum pairwise
gap, one uniformly chosen target, and a full annotation manifest. The PCG64
generator keeps seeds reproducible across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .assets import BackgroundAsset, IconAsset
from .errors import (
    BadTemplate,
    DimensionMismatch,
    EmptyLibrary,
    EmptyName,
    OverconstrainedLayout,
)
from .geometry import BBox, PixelDims, box_to_box_gap

DEFAULT_TEMPLATE = "Click the {name} icon."
DEFAULT_MARGIN = 0.02
DEFAULT_SCALE_RANGE = (0.04, 0.10)
PLACEMENT_ATTEMPT_CAP = 1000
COORD_DECIMALS = 6


@dataclass(frozen=True)
class Placement:
    icon_id: str
    bbox: BBox


@dataclass(frozen=True)
class SceneManifest:
    scene_id: str
    background: str
    dims: PixelDims
    placements: tuple[Placement, ...]
    target_icon_id: str
    instruction: str
    seed: int
    split: str = "synthetic-icon"

    @property
    def target_bbox(self) -> BBox:
        for pl in self.placements:
            if pl.icon_id == self.target_icon_id:
                return pl.bbox
        raise KeyError(f"target {self.target_icon_id!r} not among placements")

    def distractors(self) -> list[tuple[str, BBox]]:
        return [
            (pl.icon_id, pl.bbox)
            for pl in self.placements
            if pl.icon_id != self.target_icon_id
        ]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "scene_id": self.scene_id,
            "background": self.background,
            "dims": {"width": self.dims.width, "height": self.dims.height},
            "placements": [
                {"icon_id": pl.icon_id, "bbox": pl.bbox.as_list()}
                for pl in self.placements
            ],
            "target_icon_id": self.target_icon_id,
            "instruction": self.instruction,
            "seed": self.seed,
            "split": self.split,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SceneManifest":
        return cls(
            scene_id=d["scene_id"],
            background=d["background"],
            dims=PixelDims(d["dims"]["width"], d["dims"]["height"]),
            placements=tuple(
                Placement(pl["icon_id"], BBox(*pl["bbox"])) for pl in d["placements"]
            ),
            target_icon_id=d["target_icon_id"],
            instruction=d["instruction"],
            seed=d["seed"],
            split=d.get("split", "synthetic-icon"),
        )


def load_manifest(path: str | Path) -> SceneManifest:
    return SceneManifest.from_json_dict(
        json.loads(Path(path).read_text(encoding="utf-8"))
    )


def save_manifest(manifest: SceneManifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def instruction_for(target: IconAsset, template: str = DEFAULT_TEMPLATE) -> str:
    """Render the task instruction for a target icon."""
    if "{name}" not in template:
        raise BadTemplate(f"template {template!r} has no {{name}} slot")
    if not target.name.strip():
        raise EmptyName(f"icon {target.id!r} has an empty name")
    return template.replace("{name}", target.name)


def _pixel_rect(bbox: BBox, dims: PixelDims) -> tuple[int, int, int, int]:
    import math
    return (
        math.floor(bbox.x1 * dims.width + 0.5),
        math.floor(bbox.y1 * dims.height + 0.5),
        math.floor(bbox.x2 * dims.width + 0.5),
        math.floor(bbox.y2 * dims.height + 0.5),
    )


def composite(
    background: Image.Image,
    placements: Sequence[Placement],
    icons_by_id: dict[str, IconAsset],
) -> Image.Image:
    """Alpha-blend icons onto a copy of the background at their boxes.

    Icons are resized to the box's pixel size with nearest-neighbor, then
    blended channel-wise: out = round(icon * a + background * (1 - a)).
    Fully opaque icons therefore replace background pixels exactly.
    """
    out = np.asarray(background.convert("RGB"), dtype=np.uint8).copy()
    h, w = out.shape[:2]
    dims = PixelDims(w, h)
    for pl in placements:
        x1, y1, x2, y2 = _pixel_rect(pl.bbox, dims)
        if x2 > w or y2 > h or x1 < 0 or y1 < 0 or x2 <= x1 or y2 <= y1:
            raise DimensionMismatch(
                f"placement {pl.icon_id!r} rect {(x1, y1, x2, y2)} outside {w}x{h}"
            )
        asset = icons_by_id[pl.icon_id]
        with Image.open(asset.path) as icon_img:
            icon = icon_img.convert("RGBA").resize(
                (x2 - x1, y2 - y1), Image.NEAREST
            )
        icon_arr = np.asarray(icon, dtype=np.float64)
        alpha = icon_arr[:, :, 3:4] / 255.0
        region = out[y1:y2, x1:x2, :].astype(np.float64)
        blended = np.rint(icon_arr[:, :, :3] * alpha + region * (1.0 - alpha))
        out[y1:y2, x1:x2, :] = blended.astype(np.uint8)
    return Image.fromarray(out, mode="RGB")


def _scaled_icon_px(asset: IconAsset, long_side: int) -> tuple[int, int]:
    if asset.width >= asset.height:
        w = long_side
        h = max(1, round(long_side * asset.height / asset.width))
    else:
        h = long_side
        w = max(1, round(long_side * asset.width / asset.height))
    return w, h


def generate_scene(
    background: BackgroundAsset,
    icons: Sequence[IconAsset],
    n: int,
    seed: int,
    margin: float = DEFAULT_MARGIN,
    scale_range: tuple[float, float] = DEFAULT_SCALE_RANGE,
    template: str = DEFAULT_TEMPLATE,
    scene_id: Optional[str] = None,
    split: str = "synthetic-icon",
) -> tuple[SceneManifest, Image.Image]:
    """Place n icons on a background and composite the scene raster.

    Placement is rejection sampling: each icon gets a fresh scale and
    position until the pairwise gap to every earlier box is at least
    ``margin`` (normalized), up to a fixed attempt cap.

    Args:
        background: the backdrop; scene dims equal its pixel dims.
        icons: library to draw from, without replacement.
        n: number of icons to place.
        seed: fully determines the scene.
        margin: minimum normalized gap between any two boxes.
        scale_range: icon long side as a fraction of min(width, height).
        template: instruction template with a {name} slot.
        scene_id: manifest id; derived from the seed when omitted.
        split: split label recorded in the manifest.

    Raises:
        EmptyLibrary: fewer icons in the library than requested.
        OverconstrainedLayout: an icon could not be placed within the cap.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(icons) < n:
        raise EmptyLibrary(f"library has {len(icons)} icons, scene needs {n}")

    rng = np.random.Generator(np.random.PCG64(seed))
    dims = PixelDims(background.width, background.height)
    w_img, h_img = dims.width, dims.height
    min_side = min(w_img, h_img)

    chosen_idx = rng.choice(len(icons), size=n, replace=False)
    chosen = [icons[int(i)] for i in chosen_idx]

    placements: list[Placement] = []
    for asset in chosen:
        placed = False
        for _ in range(PLACEMENT_ATTEMPT_CAP):
            frac = float(rng.uniform(scale_range[0], scale_range[1]))
            long_side = max(1, round(frac * min_side))
            w_px, h_px = _scaled_icon_px(asset, long_side)
            if w_px + 2 > w_img or h_px + 2 > h_img:
                continue
            x0 = int(rng.integers(1, w_img - w_px))
            y0 = int(rng.integers(1, h_img - h_px))
            bbox = BBox(
                round(x0 / w_img, COORD_DECIMALS),
                round(y0 / h_img, COORD_DECIMALS),
                round((x0 + w_px) / w_img, COORD_DECIMALS),
                round((y0 + h_px) / h_img, COORD_DECIMALS),
            )
            if all(box_to_box_gap(bbox, pl.bbox) >= margin for pl in placements):
                placements.append(Placement(asset.id, bbox))
                placed = True
                break
        if not placed:
            raise OverconstrainedLayout(
                f"could not place {asset.id!r} after {PLACEMENT_ATTEMPT_CAP} attempts "
                f"(n={n}, margin={margin})"
            )

    target = chosen[int(rng.integers(0, n))]
    manifest = SceneManifest(
        scene_id=scene_id if scene_id is not None else f"scene-{seed:016x}",
        background=background.id,
        dims=dims,
        placements=tuple(placements),
        target_icon_id=target.id,
        instruction=instruction_for(target, template),
        seed=seed,
        split=split,
    )

    with Image.open(background.path) as bg_img:
        raster = composite(bg_img, placements, {a.id: a for a in chosen})
    return manifest, raster


def derive_scene_seed(master_seed: int, index: int) -> int:
    """Per-scene 64-bit seed derived from a master seed and scene index."""
    child = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(child.generate_state(1, dtype=np.uint64)[0])
