"""Command-line pipeline: scenes, validation, classification, scoring,
crop planning, refinement, and reports.

Exit codes: 0 success; 1 usage or configuration error; 2 data errors were
encountered (partial output is still written). Every command is
deterministic given its inputs, configuration, and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from . import __version__
from .assets import (
    load_backgrounds,
    load_icon_library,
    make_builtin_backgrounds,
    make_builtin_icon_library,
)
from .config import RunConfig, resolve_config
from .cropgen import CropConfig, CropWindow, crop_pixels, plan_crop, refine_record
from .errors import GlensError, ConfigError, EmptyInput, OverconstrainedLayout
from .geometry import Point
from .jsonl import read_jsonl, write_jsonl
from .mockpred import MODES as MOCK_MODES, emit_mock_predictions
from .pss import PssConfig, perplexity as token_perplexity, score_axes
from .reports import build_report, write_report_bundle
from .scenegen import (
    SceneManifest,
    derive_scene_seed,
    generate_scene,
    save_manifest,
)
from .schemas import SCHEMAS, validate_record
from .taxonomy import ClassifierConfig, classify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _bool_flag(value: str) -> bool:
    text = value.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {value!r}")


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (or GLENS_CONFIG)")
    parser.add_argument("--seed", type=int, help="master random seed")
    parser.add_argument("--tau", type=float, help="classification distance threshold")
    parser.add_argument("--alpha", type=float, help="crop retained fraction")
    parser.add_argument(
        "--strict-format", type=_bool_flag, metavar="BOOL",
        help="require square-bracket coordinate pairs (default true)",
    )


def _resolve(args: argparse.Namespace, **extra) -> RunConfig:
    cli_values = {
        "seed": getattr(args, "seed", None),
        "tau": getattr(args, "tau", None),
        "alpha": getattr(args, "alpha", None),
        "strict_format": getattr(args, "strict_format", None),
        **extra,
    }
    return resolve_config(cli_values, config_path=getattr(args, "config", None))


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_manifests(scenes_dir: Path) -> dict[str, SceneManifest]:
    manifest_dir = scenes_dir / "manifests"
    if not manifest_dir.is_dir():
        raise ConfigError(f"no manifests directory under {scenes_dir}")
    manifests = {}
    for path in sorted(manifest_dir.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        problems = validate_record(doc, "manifest")
        if problems:
            _err(f"{path}: skipping invalid manifest: {problems[0]}")
            continue
        manifest = SceneManifest.from_json_dict(doc)
        manifests[manifest.scene_id] = manifest
    return manifests


def _read_records(path: Path, kind: str, strict: bool):
    """Yield (line, record, problems); corrupt lines have record None."""
    for line_no, record, parse_error in read_jsonl(path):
        if parse_error is not None:
            yield line_no, None, [parse_error]
            continue
        yield line_no, record, validate_record(record, kind, strict)


# ---------------------------------------------------------------------------
# gen-scenes
# ---------------------------------------------------------------------------

def cmd_gen_scenes(args: argparse.Namespace) -> int:
    cfg = _resolve(
        args,
        template=args.template,
        margin=args.margin,
        n_icons=args.n_icons,
        scale_min=args.scale_min,
        scale_max=args.scale_max,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.icons:
        icons = load_icon_library(args.icons)
    else:
        icons = make_builtin_icon_library(out / "assets" / "icons")
    if args.backgrounds:
        backgrounds = load_backgrounds(args.backgrounds)
    else:
        backgrounds = make_builtin_backgrounds(out / "assets" / "backgrounds")

    (out / "manifests").mkdir(exist_ok=True)
    (out / "images").mkdir(exist_ok=True)

    tasks = []
    try:
        for i in range(args.count):
            scene_seed = derive_scene_seed(cfg.seed, i)
            background = backgrounds[i % len(backgrounds)]
            scene_id = f"scene-{i:05d}"
            manifest, raster = generate_scene(
                background,
                icons,
                n=cfg.n_icons,
                seed=scene_seed,
                margin=cfg.margin,
                scale_range=(cfg.scale_min, cfg.scale_max),
                template=cfg.template,
                scene_id=scene_id,
                split=args.split,
            )
            save_manifest(manifest, out / "manifests" / f"{scene_id}.json")
            raster.save(out / "images" / f"{scene_id}.png")
            tasks.append({
                "scene_id": scene_id,
                "image": f"images/{scene_id}.png",
                "instruction": manifest.instruction,
                "split": manifest.split,
            })
    except OverconstrainedLayout as exc:
        _err(f"gen-scenes: {exc}")
        write_jsonl(out / "tasks.jsonl", tasks)
        return EXIT_DATA

    write_jsonl(out / "tasks.jsonl", tasks)
    print(f"wrote {len(tasks)} scenes under {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"input not found: {path}")

    n_ok = 0
    n_bad = 0
    if args.kind == "manifest":
        doc = json.loads(path.read_text(encoding="utf-8"))
        problems = validate_record(doc, "manifest")
        for problem in problems:
            _err(f"{path}: {problem}")
        n_bad = len(problems)
        n_ok = 0 if problems else 1
    else:
        for line_no, record, problems in _read_records(
            path, args.kind, cfg.strict_format
        ):
            if problems:
                n_bad += 1
                for problem in problems:
                    _err(f"{path}:{line_no}: {problem}")
            else:
                n_ok += 1

    if n_bad:
        _err(f"validate: {n_bad} invalid, {n_ok} valid")
        return EXIT_DATA
    print(f"OK: {n_ok} valid {args.kind} record(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    manifests = _load_manifests(Path(args.scenes))
    classifier_cfg = ClassifierConfig(tau=cfg.tau)

    out_records = []
    n_errors = 0

    def record_error(line_no: int, message: str, record: Optional[dict] = None):
        nonlocal n_errors
        n_errors += 1
        _err(f"{args.predictions}:{line_no}: {message}")
        entry = {"schema_version": 1, "line": line_no, "error": message}
        if record:
            for key in ("scene_id", "model_id", "pass"):
                if isinstance(record.get(key), str):
                    entry[key] = record[key]
        out_records.append(entry)

    for line_no, record, problems in _read_records(
        Path(args.predictions), "predictions", cfg.strict_format
    ):
        if record is None:
            record_error(line_no, problems[0])
            continue
        if problems:
            record_error(line_no, "; ".join(problems), record)
            continue
        if "error" in record:
            record_error(line_no, f"upstream failure record: {record['error']}", record)
            continue
        manifest = manifests.get(record["scene_id"])
        if manifest is None:
            record_error(line_no, f"unknown scene_id {record['scene_id']!r}", record)
            continue

        point = Point(record["pred"]["x"], record["pred"]["y"])
        result = classify(
            point, manifest.target_bbox, manifest.distractors(), classifier_cfg
        )
        out_records.append({
            **record,
            "split": manifest.split,
            "category": result.category.value,
            "distance_to_target": result.distance_to_target,
            "nearest_distractor_id": result.nearest_distractor_id,
            "nearest_distractor_distance": result.nearest_distractor_distance,
        })

    write_jsonl(Path(args.out), out_records)
    print(f"classified {len(out_records) - n_errors} records, {n_errors} error(s)")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def cmd_score(args: argparse.Namespace) -> int:
    cfg = _resolve(args, normalize_input=args.normalize_input, pss_c=args.pss_c)
    pss_cfg = PssConfig(peak_constant=cfg.pss_c, normalize_input=cfg.normalize_input)
    kind = args.kind

    out_records = []
    n_errors = 0
    for line_no, record, problems in _read_records(
        Path(args.input), kind, cfg.strict_format
    ):
        if record is None or problems:
            n_errors += 1
            message = problems[0] if problems else "unreadable record"
            _err(f"{args.input}:{line_no}: {message}")
            out_records.append(
                {"schema_version": 1, "line": line_no, "error": message}
            )
            continue
        if "error" in record:
            n_errors += 1
            out_records.append(record)
            continue
        if "x_digit_logits" not in record or "y_digit_logits" not in record:
            n_errors += 1
            message = "missing digit score vectors"
            _err(f"{args.input}:{line_no}: {message}")
            out_records.append({**record, "error": message})
            continue

        scores = score_axes(
            record["x_digit_logits"], record["y_digit_logits"], pss_cfg
        )
        scored = {
            **record,
            "pss": {
                "score": scores.score,
                "x": {
                    "score": scores.x.score,
                    "peak_index": scores.x.peak_index,
                    "peak_value": scores.x.peak_value,
                    "branch": scores.x.branch.value,
                },
                "y": {
                    "score": scores.y.score,
                    "peak_index": scores.y.peak_index,
                    "peak_value": scores.y.peak_value,
                    "branch": scores.y.branch.value,
                },
            },
        }
        if record.get("key_token_probs"):
            scored["perplexity"] = token_perplexity(record["key_token_probs"])
        out_records.append(scored)

    write_jsonl(Path(args.out), out_records)
    print(f"scored {len(out_records) - n_errors} records, {n_errors} error(s)")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# crop-plan
# ---------------------------------------------------------------------------

def cmd_crop_plan(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    alphas = args.alphas if args.alphas else [cfg.alpha]
    manifests = _load_manifests(Path(args.scenes))
    scenes_dir = Path(args.scenes)
    out_root = Path(args.out)

    n_errors = 0
    for alpha in alphas:
        crop_cfg = CropConfig(alpha=alpha)
        out = out_root if len(alphas) == 1 else out_root / f"alpha-{alpha:g}"
        (out / "images").mkdir(parents=True, exist_ok=True)
        tasks = []
        for line_no, record, problems in _read_records(
            Path(args.predictions), "predictions", cfg.strict_format
        ):
            if record is None or problems or "pred" not in record:
                n_errors += 1
                detail = problems[0] if problems else "no prediction point"
                _err(f"{args.predictions}:{line_no}: {detail}")
                continue
            manifest = manifests.get(record["scene_id"])
            if manifest is None:
                n_errors += 1
                _err(
                    f"{args.predictions}:{line_no}: "
                    f"unknown scene_id {record['scene_id']!r}"
                )
                continue

            window = plan_crop(
                Point(record["pred"]["x"], record["pred"]["y"]),
                manifest.dims,
                crop_cfg,
            )
            image_path = scenes_dir / "images" / f"{manifest.scene_id}.png"
            with Image.open(image_path) as img:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
            cropped = crop_pixels(pixels, window)
            crop_name = f"{manifest.scene_id}.png"
            Image.fromarray(cropped, mode="RGB").save(out / "images" / crop_name)
            tasks.append({
                "scene_id": manifest.scene_id,
                "image": f"images/{crop_name}",
                "instruction": record.get("instruction", manifest.instruction),
                "split": manifest.split,
                "crop_window": window.to_dict(),
            })
        write_jsonl(out / "crop_tasks.jsonl", tasks)
        print(f"planned {len(tasks)} crops at alpha={alpha:g} under {out}")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# refine
# ---------------------------------------------------------------------------

def cmd_refine(args: argparse.Namespace) -> int:
    cfg = _resolve(args)

    def load_by_scene(path: Path) -> tuple[dict[str, dict], int]:
        by_scene: dict[str, dict] = {}
        errors = 0
        for line_no, record, problems in _read_records(
            path, "predictions", cfg.strict_format
        ):
            if record is None or problems:
                errors += 1
                detail = problems[0] if problems else "unreadable record"
                _err(f"{path}:{line_no}: {detail}")
                continue
            if record["scene_id"] in by_scene:
                errors += 1
                _err(f"{path}:{line_no}: duplicate scene_id {record['scene_id']!r}")
                continue
            by_scene[record["scene_id"]] = record
        return by_scene, errors

    full_path, crop_path = Path(args.full), Path(args.crop)
    crop_by_scene, n_errors = load_by_scene(crop_path)

    out_records = []
    joined_scenes = set()
    for line_no, record, problems in _read_records(
        full_path, "predictions", cfg.strict_format
    ):
        if record is None or problems:
            n_errors += 1
            detail = problems[0] if problems else "unreadable record"
            _err(f"{full_path}:{line_no}: {detail}")
            continue
        scene_id = record["scene_id"]
        if scene_id in joined_scenes:
            n_errors += 1
            _err(f"{full_path}:{line_no}: duplicate scene_id {scene_id!r}")
            continue
        joined_scenes.add(scene_id)
        crop = crop_by_scene.get(scene_id)
        if crop is None:
            n_errors += 1
            _err(f"{full_path}:{line_no}: no crop-pass record for {scene_id!r}")
            continue
        if "error" in crop or "pred" not in crop:
            n_errors += 1
            _err(f"{full_path}:{line_no}: crop pass failed for {scene_id!r}")
            continue
        if "crop_window" not in crop:
            n_errors += 1
            _err(f"{full_path}:{line_no}: crop record lacks crop_window")
            continue
        window = CropWindow.from_dict(crop["crop_window"])
        out_records.append(refine_record(record, crop, window))

    unmatched = set(crop_by_scene) - joined_scenes
    for scene_id in sorted(unmatched):
        n_errors += 1
        _err(f"{crop_path}: crop record {scene_id!r} has no full-pass counterpart")

    write_jsonl(Path(args.out), out_records)
    print(f"refined {len(out_records)} records, {n_errors} error(s)")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args: argparse.Namespace) -> int:
    cfg = _resolve(args, thresholds=args.thresholds)

    records = []
    n_errors = 0
    n_skipped = 0
    for line_no, record, problems in _read_records(
        Path(args.eval), "eval", cfg.strict_format
    ):
        if record is None or problems:
            n_errors += 1
            detail = problems[0] if problems else "unreadable record"
            _err(f"{args.eval}:{line_no}: {detail}")
            continue
        if "error" in record:
            n_skipped += 1
            continue
        records.append(record)

    if not records:
        _err("report: no usable eval records")
        return EXIT_DATA

    try:
        bundle = build_report(
            records, cfg.thresholds, weighted_average=args.weighted_average
        )
    except EmptyInput as exc:
        _err(f"report: {exc}")
        return EXIT_DATA

    written = write_report_bundle(bundle, Path(args.out))
    if n_skipped:
        print(f"skipped {n_skipped} upstream error record(s)")
    for path in written:
        print(f"wrote {path}")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# mock-predict
# ---------------------------------------------------------------------------

def cmd_mock_predict(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    manifests = _load_manifests(Path(args.scenes))

    tasks = []
    n_errors = 0
    for line_no, record, problems in _read_records(
        Path(args.tasks), "tasks", cfg.strict_format
    ):
        if record is None or problems:
            n_errors += 1
            detail = problems[0] if problems else "unreadable record"
            _err(f"{args.tasks}:{line_no}: {detail}")
            continue
        if record["scene_id"] not in manifests:
            n_errors += 1
            _err(f"{args.tasks}:{line_no}: unknown scene_id {record['scene_id']!r}")
            continue
        tasks.append(record)

    records = emit_mock_predictions(
        tasks, manifests, mode=args.mode, seed=cfg.seed, model_id=args.model_id
    )
    write_jsonl(Path(args.out), records)
    print(f"emitted {len(records)} mock predictions ({args.mode})")
    return EXIT_DATA if n_errors else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="glens",
        description="Evaluation toolkit for GUI agent click predictions",
    )
    parser.add_argument("--version", action="version", version=f"glens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenes", help="generate annotated synthetic scenes")
    _common_flags(p)
    p.add_argument("--out", required=True, help="output scene directory")
    p.add_argument("--count", type=int, default=10, help="number of scenes")
    p.add_argument("--icons", help="icon library directory (default: builtin)")
    p.add_argument("--backgrounds", help="background directory (default: builtin)")
    p.add_argument("--n-icons", type=int, dest="n_icons", help="icons per scene")
    p.add_argument("--margin", type=float, help="minimum normalized gap between boxes")
    p.add_argument("--scale-min", type=float, dest="scale_min")
    p.add_argument("--scale-max", type=float, dest="scale_max")
    p.add_argument("--template", help="instruction template with a {name} slot")
    p.add_argument("--split", default="synthetic-icon", help="split label for manifests")
    p.set_defaults(func=cmd_gen_scenes)

    p = sub.add_parser("validate", help="validate a record stream against its schema")
    _common_flags(p)
    p.add_argument("--in", dest="input", required=True, help="file to validate")
    p.add_argument(
        "--kind", choices=sorted(SCHEMAS), default="predictions",
        help="record kind (default: predictions)",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="categorize predictions against scenes")
    _common_flags(p)
    p.add_argument("--predictions", required=True, help="predictions JSONL")
    p.add_argument("--scenes", required=True, help="scene directory from gen-scenes")
    p.add_argument("--out", required=True, help="output eval JSONL")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("score", help="attach confidence scores to records")
    _common_flags(p)
    p.add_argument("--in", dest="input", required=True, help="records JSONL")
    p.add_argument("--out", required=True, help="output JSONL")
    p.add_argument(
        "--kind", choices=["predictions", "eval"], default="eval",
        help="input record kind (default: eval)",
    )
    p.add_argument("--pss-c", type=float, dest="pss_c", help="peak score constant")
    p.add_argument(
        "--normalize-input", type=_bool_flag, dest="normalize_input", metavar="BOOL",
        help="softmax raw logits before scoring (default true)",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("crop-plan", help="plan crop windows around predictions")
    _common_flags(p)
    p.add_argument("--predictions", required=True, help="first-pass predictions JSONL")
    p.add_argument("--scenes", required=True, help="scene directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--alphas", type=float, nargs="*",
        help="sweep of crop fractions (default: the configured alpha)",
    )
    p.set_defaults(func=cmd_crop_plan)

    p = sub.add_parser("refine", help="join full and crop passes, remap predictions")
    _common_flags(p)
    p.add_argument("--full", required=True, help="full-pass predictions JSONL")
    p.add_argument("--crop", required=True, help="crop-pass predictions JSONL")
    p.add_argument("--out", required=True, help="output refined predictions JSONL")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("report", help="aggregate eval records into report tables")
    _common_flags(p)
    p.add_argument("--eval", required=True, help="scored eval JSONL")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--thresholds", help="comma-separated distance thresholds")
    p.add_argument(
        "--weighted-average", action="store_true",
        help="weight the accuracy average by per-split record counts",
    )
    p.set_defaults(func=cmd_report)

    p = sub.add_parser(
        "mock-predict", help="emit deterministic synthetic predictions (testing)"
    )
    _common_flags(p)
    p.add_argument("--tasks", required=True, help="tasks JSONL")
    p.add_argument("--scenes", required=True, help="scene directory")
    p.add_argument("--mode", choices=MOCK_MODES, default="noisy")
    p.add_argument("--out", required=True, help="output predictions JSONL")
    p.add_argument("--model-id", dest="model_id", help="override the emitted model id")
    p.set_defaults(func=cmd_mock_predict)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _err(f"missing file: {exc}")
        return EXIT_USAGE
    except GlensError as exc:
        _err(f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
