"""Batch inference over grounding tasks with resumable JSONL output.

Every task yields exactly one record: a parsed prediction with its digit
score vectors, or a failure record carrying the reason. The batch never
aborts on a single task. Output is sorted by scene_id before writing so
reruns and resumed runs produce identical bytes.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .capture import capture_digit_logits, parse_pair
from .errors import AdapterError
from .jsonl_io import read_jsonl, write_jsonl
from .mock_model import DeterministicMockModel, load_manifests
from .prompts import TEMPLATE_IDS, render_prompt

SCHEMA_VERSION = 1


@dataclass
class AdapterConfig:
    tasks_path: str
    output_path: str
    model: Optional[str] = None          # HF model identifier
    mock_mode: Optional[str] = None      # mutually exclusive with model
    template_id: str = "showui"
    device: Optional[str] = None
    max_new_tokens: int = 32
    pass_mode: str = "full"
    scenes_dir: Optional[str] = None     # manifests for ground-truth mock modes
    seed: int = 0
    resume: bool = False

    def validate(self) -> None:
        if self.template_id not in TEMPLATE_IDS:
            raise AdapterError(f"unknown template {self.template_id!r}")
        if (self.model is None) == (self.mock_mode is None):
            raise AdapterError("exactly one of model or mock_mode must be set")
        if self.pass_mode not in ("full", "crop"):
            raise AdapterError(f"pass_mode must be full or crop, got {self.pass_mode!r}")


def _softmax_prob(scores: list[float], index: int) -> float:
    peak = max(scores)
    exps = [math.exp(v - peak) for v in scores]
    return exps[index] / sum(exps)


def _build_model(cfg: AdapterConfig):
    if cfg.mock_mode is not None:
        manifests = load_manifests(cfg.scenes_dir) if cfg.scenes_dir else None
        return DeterministicMockModel(cfg.mock_mode, cfg.seed, manifests), (
            f"mock-{cfg.mock_mode}"
        )
    from .hf import HfModelRunner  # deferred: pulls in torch/transformers

    runner = HfModelRunner(
        cfg.model, device=cfg.device, max_new_tokens=cfg.max_new_tokens
    )
    return runner, cfg.model


def _record_for(task: dict, trace_text: str, x_logits, y_logits,
                model_id: str, pass_mode: str) -> dict:
    x, y, x_off, y_off = parse_pair(trace_text)
    x_digit = int(trace_text[x_off])
    y_digit = int(trace_text[y_off])
    record = {
        "schema_version": SCHEMA_VERSION,
        "scene_id": task["scene_id"],
        "model_id": model_id,
        "instruction": task["instruction"],
        "pass": pass_mode,
        "raw_text": trace_text,
        "pred": {"x": x, "y": y},
        "x_digit_logits": x_logits,
        "y_digit_logits": y_logits,
        "key_token_probs": [
            _softmax_prob(x_logits, x_digit),
            _softmax_prob(y_logits, y_digit),
        ],
    }
    if "crop_window" in task:
        record["crop_window"] = task["crop_window"]
    return record


def run_inference(cfg: AdapterConfig) -> tuple[int, int]:
    """Process the task file; returns (ok_count, failure_count)."""
    cfg.validate()
    tasks_path = Path(cfg.tasks_path)
    if not tasks_path.exists():
        raise AdapterError(f"tasks file not found: {tasks_path}")
    tasks_root = tasks_path.parent

    tasks = []
    for line_no, task in read_jsonl(tasks_path):
        if not all(k in task for k in ("scene_id", "image", "instruction")):
            print(f"{tasks_path}:{line_no}: skipping malformed task",
                  file=sys.stderr)
            continue
        tasks.append(task)

    out_path = Path(cfg.output_path)
    existing: dict[str, dict] = {}
    if cfg.resume and out_path.exists():
        for _, record in read_jsonl(out_path):
            if "scene_id" in record:
                existing[record["scene_id"]] = record

    model, model_id = _build_model(cfg)

    records = dict(existing)
    n_failed = 0
    for task in tasks:
        scene_id = task["scene_id"]
        if scene_id in existing:
            continue
        if cfg.pass_mode == "crop" and "crop_window" not in task:
            records[scene_id] = _failure(task, model_id, cfg.pass_mode,
                                         "crop pass task lacks crop_window")
            n_failed += 1
            continue
        image_path = tasks_root / task["image"]
        if not image_path.exists():
            records[scene_id] = _failure(task, model_id, cfg.pass_mode,
                                         f"image not readable: {image_path}")
            n_failed += 1
            continue
        prompt = render_prompt(cfg.template_id, task["instruction"])
        try:
            trace = model.generate(_with_prompt(task, prompt, image_path))
            x_logits, y_logits = capture_digit_logits(trace)
            records[scene_id] = _record_for(
                task, trace.text, x_logits, y_logits, model_id, cfg.pass_mode
            )
        except AdapterError as exc:
            records[scene_id] = _failure(
                task, model_id, cfg.pass_mode, f"{type(exc).__name__}: {exc}"
            )
            n_failed += 1
        except Exception as exc:  # a single bad task must not kill the batch
            records[scene_id] = _failure(
                task, model_id, cfg.pass_mode, f"unexpected {type(exc).__name__}: {exc}"
            )
            n_failed += 1

    ordered = [records[k] for k in sorted(records)]
    write_jsonl(out_path, ordered)
    return len(ordered) - _count_failures(ordered), _count_failures(ordered)


def _with_prompt(task: dict, prompt: dict, image_path: Path) -> dict:
    return {**task, "prompt": prompt, "image_path": str(image_path)}


def _failure(task: dict, model_id: str, pass_mode: str, reason: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "scene_id": task["scene_id"],
        "model_id": model_id,
        "pass": pass_mode,
        "error": reason,
    }


def _count_failures(records: list[dict]) -> int:
    return sum(1 for r in records if "error" in r)
