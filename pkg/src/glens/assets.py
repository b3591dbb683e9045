"""Icon libraries, background images, and annotation-format plumbing.

A library is a directory of image files plus an ``index.json`` mapping icon
id to ``{"name": ..., "file": ...}``. The builtin generators synthesize a
small deterministic library of geometric glyphs and a handful of
wallpaper-like backgrounds so the pipeline can run self-contained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from .errors import EmptyLibrary

ICON_SIZE = 64


@dataclass(frozen=True)
class IconAsset:
    id: str
    name: str
    width: int
    height: int
    path: Path
    has_alpha: bool = True


@dataclass(frozen=True)
class BackgroundAsset:
    id: str
    path: Path
    width: int
    height: int


def load_icon_library(directory: str | Path) -> list[IconAsset]:
    """Read a library directory with an index.json id -> {name, file} map."""
    directory = Path(directory)
    index_path = directory / "index.json"
    if not index_path.exists():
        raise EmptyLibrary(f"no index.json in {directory}")
    index = json.loads(index_path.read_text(encoding="utf-8"))
    icons = []
    for icon_id in sorted(index):
        entry = index[icon_id]
        path = directory / entry["file"]
        with Image.open(path) as img:
            w, h = img.size
            has_alpha = img.mode in ("RGBA", "LA", "PA")
        icons.append(IconAsset(icon_id, entry["name"], w, h, path, has_alpha))
    if not icons:
        raise EmptyLibrary(f"index.json in {directory} lists no icons")
    return icons


def load_backgrounds(directory: str | Path) -> list[BackgroundAsset]:
    directory = Path(directory)
    out = []
    for path in sorted(directory.glob("*.png")):
        with Image.open(path) as img:
            w, h = img.size
        out.append(BackgroundAsset(path.stem, path, w, h))
    if not out:
        raise EmptyLibrary(f"no PNG backgrounds in {directory}")
    return out


# ---------------------------------------------------------------------------
# Builtin deterministic assets
# ---------------------------------------------------------------------------

_PALETTE = [
    ("crimson", (200, 40, 60)),
    ("teal", (0, 140, 140)),
    ("amber", (235, 170, 20)),
    ("indigo", (70, 60, 170)),
    ("olive", (120, 130, 40)),
    ("coral", (250, 120, 95)),
    ("navy", (25, 40, 110)),
    ("magenta", (200, 30, 160)),
    ("forest", (30, 110, 50)),
    ("slate", (100, 115, 130)),
    ("gold", (215, 180, 50)),
    ("plum", (145, 60, 120)),
    ("rust", (175, 85, 30)),
    ("cyan", (40, 190, 215)),
    ("lime", (150, 210, 50)),
    ("maroon", (120, 25, 45)),
    ("orchid", (190, 110, 215)),
    ("salmon", (250, 145, 130)),
    ("turquoise", (55, 200, 170)),
    ("violet", (135, 80, 220)),
    ("khaki", (195, 175, 110)),
    ("azure", (55, 130, 230)),
    ("sienna", (150, 90, 55)),
    ("mint", (140, 225, 175)),
]


def _glyph_painters():
    s = ICON_SIZE
    c = s // 2
    pad = 6
    lo, hi = pad, s - pad

    def circle(d, col):
        d.ellipse([lo, lo, hi, hi], fill=col)

    def ring(d, col):
        d.ellipse([lo, lo, hi, hi], outline=col, width=9)

    def square(d, col):
        d.rectangle([lo, lo, hi, hi], fill=col)

    def frame(d, col):
        d.rectangle([lo, lo, hi, hi], outline=col, width=9)

    def diamond(d, col):
        d.polygon([(c, lo), (hi, c), (c, hi), (lo, c)], fill=col)

    def triangle(d, col):
        d.polygon([(c, lo), (hi, hi), (lo, hi)], fill=col)

    def wedge(d, col):
        d.polygon([(lo, lo), (hi, lo), (c, hi)], fill=col)

    def cross(d, col):
        d.line([lo, lo, hi, hi], fill=col, width=11)
        d.line([lo, hi, hi, lo], fill=col, width=11)

    def plus(d, col):
        t = 9
        d.rectangle([c - t, lo, c + t, hi], fill=col)
        d.rectangle([lo, c - t, hi, c + t], fill=col)

    def star(d, col):
        import math
        pts = []
        for k in range(10):
            r = (c - pad) if k % 2 == 0 else (c - pad) * 0.45
            ang = -math.pi / 2 + k * math.pi / 5
            pts.append((c + r * math.cos(ang), c + r * math.sin(ang)))
        d.polygon(pts, fill=col)

    def hexagon(d, col):
        import math
        pts = [
            (c + (c - pad) * math.cos(math.pi / 6 + k * math.pi / 3),
             c + (c - pad) * math.sin(math.pi / 6 + k * math.pi / 3))
            for k in range(6)
        ]
        d.polygon(pts, fill=col)

    def pentagon(d, col):
        import math
        pts = [
            (c + (c - pad) * math.cos(-math.pi / 2 + k * 2 * math.pi / 5),
             c + (c - pad) * math.sin(-math.pi / 2 + k * 2 * math.pi / 5))
            for k in range(5)
        ]
        d.polygon(pts, fill=col)

    def crescent(d, col):
        d.ellipse([lo, lo, hi, hi], fill=col)
        d.ellipse([lo + 14, lo - 4, hi + 14, hi - 4], fill=(0, 0, 0, 0))

    def arrow_up(d, col):
        t = 8
        d.polygon([(c, lo), (hi, c), (lo, c)], fill=col)
        d.rectangle([c - t, c, c + t, hi], fill=col)

    def arrow_right(d, col):
        t = 8
        d.polygon([(hi, c), (c, lo), (c, hi)], fill=col)
        d.rectangle([lo, c - t, c, c + t], fill=col)

    def arrow_down(d, col):
        t = 8
        d.polygon([(c, hi), (lo, c), (hi, c)], fill=col)
        d.rectangle([c - t, lo, c + t, c], fill=col)

    def arrow_left(d, col):
        t = 8
        d.polygon([(lo, c), (c, lo), (c, hi)], fill=col)
        d.rectangle([c, c - t, hi, c + t], fill=col)

    def hourglass(d, col):
        d.polygon([(lo, lo), (hi, lo), (c, c)], fill=col)
        d.polygon([(c, c), (lo, hi), (hi, hi)], fill=col)

    def bowtie(d, col):
        d.polygon([(lo, lo), (c, c), (lo, hi)], fill=col)
        d.polygon([(hi, lo), (c, c), (hi, hi)], fill=col)

    def chevron(d, col):
        d.line([lo, c + 10, c, lo + 10], fill=col, width=11)
        d.line([c, lo + 10, hi, c + 10], fill=col, width=11)
        d.line([lo, hi - 4, c, c + 6], fill=col, width=11)
        d.line([c, c + 6, hi, hi - 4], fill=col, width=11)

    def droplet(d, col):
        d.polygon([(c, lo), (hi - 8, c), (lo + 8, c)], fill=col)
        d.ellipse([lo + 8, c - 12, hi - 8, hi], fill=col)

    def half_disc(d, col):
        d.pieslice([lo, lo, hi, hi], 180, 360, fill=col)

    def target(d, col):
        d.ellipse([lo, lo, hi, hi], outline=col, width=7)
        d.ellipse([c - 10, c - 10, c + 10, c + 10], fill=col)

    def stripes(d, col):
        for y in range(lo, hi, 12):
            d.rectangle([lo, y, hi, y + 6], fill=col)

    return [
        ("circle", circle), ("ring", ring), ("square", square),
        ("frame", frame), ("diamond", diamond), ("triangle", triangle),
        ("wedge", wedge), ("cross", cross), ("plus", plus),
        ("star", star), ("hexagon", hexagon), ("pentagon", pentagon),
        ("crescent", crescent), ("arrow-up", arrow_up),
        ("arrow-right", arrow_right), ("arrow-down", arrow_down),
        ("arrow-left", arrow_left), ("hourglass", hourglass),
        ("bowtie", bowtie), ("chevron", chevron), ("droplet", droplet),
        ("half-disc", half_disc), ("target", target), ("stripes", stripes),
    ]


def make_builtin_icon_library(directory: str | Path) -> list[IconAsset]:
    """Write the builtin glyph library (24 icons) and return it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = {}
    for (shape, painter), (color_name, rgb) in zip(_glyph_painters(), _PALETTE):
        img = Image.new("RGBA", (ICON_SIZE, ICON_SIZE), (0, 0, 0, 0))
        painter(ImageDraw.Draw(img), rgb + (255,))
        fname = f"{shape}.png"
        img.save(directory / fname)
        index[shape] = {"name": f"{color_name} {shape}", "file": fname}
    (directory / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return load_icon_library(directory)


_BG_THEMES = [
    ((18, 32, 58), (86, 125, 170)),
    ((40, 18, 52), (150, 90, 130)),
    ((16, 50, 44), (95, 160, 135)),
    ((52, 40, 18), (170, 140, 85)),
]


def make_builtin_backgrounds(
    directory: str | Path, width: int = 960, height: int = 540
) -> list[BackgroundAsset]:
    """Write deterministic gradient wallpapers and return them."""
    import numpy as np

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ys = np.linspace(0.0, 1.0, height)[:, None]
    xs = np.linspace(0.0, 1.0, width)[None, :]
    for i, (top, bottom) in enumerate(_BG_THEMES):
        top_a = np.array(top, dtype=np.float64)
        bot_a = np.array(bottom, dtype=np.float64)
        grad = top_a[None, None, :] * (1 - ys[:, :, None]) + bot_a[None, None, :] * ys[:, :, None]
        # soft radial highlight off-center, shifted per theme
        cx, cy = 0.25 + 0.18 * i, 0.35
        r2 = (xs - cx) ** 2 + (ys - cy) ** 2
        glow = 26.0 * np.exp(-r2 / 0.08)
        pixels = np.clip(grad + glow[:, :, None], 0, 255)
        # faint grid to suggest a desktop alignment raster
        pixels[::45, :, :] = np.clip(pixels[::45, :, :] + 6, 0, 255)
        pixels[:, ::45, :] = np.clip(pixels[:, ::45, :] + 6, 0, 255)
        img = Image.fromarray(np.floor(pixels + 0.5).astype(np.uint8), mode="RGB")
        img.save(directory / f"bg-{i:02d}.png")
    return load_backgrounds(directory)


# ---------------------------------------------------------------------------
# ScreenSpot annotation plumbing
# ---------------------------------------------------------------------------

_SOURCE_GROUP = {
    "windows": "desktop", "macos": "desktop",
    "ios": "mobile", "android": "mobile",
    "web": "web", "gitlab": "web", "shop": "web", "forum": "web", "tool": "web",
}


def load_screenspot(annotation_path: str | Path, images_dir: str | Path) -> list[dict]:
    """Convert ScreenSpot-style annotations into single-target scene dicts.

    Each annotation carries a pixel bbox ``[x, y, w, h]``, an instruction,
    and source/type labels; image dims are read from the referenced files.
    The resulting scenes have exactly one placement (the target), so the
    misleading category is unreachable on this data and errors group into
    the confusion bucket.
    """
    annotation_path = Path(annotation_path)
    images_dir = Path(images_dir)
    entries = json.loads(annotation_path.read_text(encoding="utf-8"))
    scenes = []
    for i, entry in enumerate(entries):
        img_path = images_dir / entry["img_filename"]
        with Image.open(img_path) as img:
            w, h = img.size
        x, y, bw, bh = entry["bbox"]
        group = _SOURCE_GROUP.get(str(entry.get("data_source", "")).lower(), "web")
        split = f"{group}-{str(entry.get('data_type', 'icon')).lower()}"
        scenes.append({
            "schema_version": 1,
            "scene_id": f"screenspot-{i:05d}",
            "background": entry["img_filename"],
            "dims": {"width": w, "height": h},
            "placements": [{
                "icon_id": "target",
                "bbox": [
                    round(x / w, 6), round(y / h, 6),
                    round((x + bw) / w, 6), round((y + bh) / h, 6),
                ],
            }],
            "target_icon_id": "target",
            "instruction": entry["instruction"],
            "seed": 0,
            "split": split,
        })
    return scenes
