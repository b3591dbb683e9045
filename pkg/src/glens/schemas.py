"""Wire-format schemas and line validation.

Record kinds: "tasks" (scene_id, image, instruction), "predictions" (one
model response with optional digit score vectors), "eval" (a prediction
enriched with category, distance, and scores), and "manifest" (a scene
annotation document). Violations are reported with JSON-pointer paths.
"""

from __future__ import annotations

import jsonschema

from .pss import parse_coordinate_pair
from .errors import UnparsableOutput

_POINT = {
    "type": "object",
    "properties": {
        "x": {"type": "number", "minimum": 0, "maximum": 1},
        "y": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "required": ["x", "y"],
    "additionalProperties": False,
}

_DIGIT_VECTOR = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 10,
    "maxItems": 10,
}

_CROP_WINDOW = {
    "type": "object",
    "properties": {
        "x_start": {"type": "integer", "minimum": 0},
        "y_start": {"type": "integer", "minimum": 0},
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
        "parent_w": {"type": "integer", "minimum": 1},
        "parent_h": {"type": "integer", "minimum": 1},
    },
    "required": ["x_start", "y_start", "width", "height", "parent_w", "parent_h"],
    "additionalProperties": False,
}

TASK_SCHEMA = {
    "type": "object",
    "properties": {
        "scene_id": {"type": "string", "minLength": 1},
        "image": {"type": "string", "minLength": 1},
        "instruction": {"type": "string", "minLength": 1},
        "split": {"type": "string"},
        "crop_window": _CROP_WINDOW,
    },
    "required": ["scene_id", "image", "instruction"],
    "additionalProperties": False,
}

_PREDICTION_PROPERTIES = {
    "schema_version": {"const": 1},
    "scene_id": {"type": "string", "minLength": 1},
    "model_id": {"type": "string", "minLength": 1},
    "instruction": {"type": "string"},
    "pass": {"enum": ["full", "crop"]},
    "raw_text": {"type": "string"},
    "pred": _POINT,
    "x_digit_logits": _DIGIT_VECTOR,
    "y_digit_logits": _DIGIT_VECTOR,
    "key_token_probs": {
        "type": "array",
        "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "minItems": 1,
    },
    "crop_window": _CROP_WINDOW,
    "timestamp": {"type": "string"},
    "error": {"type": "string", "minLength": 1},
    "provenance": {"type": "object"},
}

PREDICTION_SCHEMA = {
    "type": "object",
    "properties": _PREDICTION_PROPERTIES,
    "required": ["schema_version", "scene_id", "model_id", "pass"],
    "additionalProperties": False,
    "anyOf": [
        {"required": ["pred"]},
        {"required": ["error"]},
    ],
    # a parsed crop-pass prediction must carry its window
    "if": {"properties": {"pass": {"const": "crop"}}, "required": ["pred"]},
    "then": {"required": ["crop_window"]},
}

EVAL_SCHEMA = {
    "type": "object",
    "properties": {
        **_PREDICTION_PROPERTIES,
        "split": {"type": "string", "minLength": 1},
        "category": {"enum": ["correct", "biased", "misleading", "confusion"]},
        "distance_to_target": {"type": "number", "minimum": 0},
        "nearest_distractor_id": {"type": ["string", "null"]},
        "nearest_distractor_distance": {"type": ["number", "null"], "minimum": 0},
        "pss": {
            "type": "object",
            "properties": {
                "score": {"type": "number", "minimum": 0},
                "x": {"type": "object"},
                "y": {"type": "object"},
            },
            "required": ["score"],
        },
        "perplexity": {"type": "number", "minimum": 1},
        "line": {"type": "integer", "minimum": 1},
    },
    "required": ["schema_version"],
    "additionalProperties": False,
    # either a fully classified record or a record-level error entry
    "anyOf": [
        {
            "required": [
                "scene_id", "model_id", "pass",
                "split", "category", "distance_to_target",
            ],
        },
        {"required": ["error"]},
    ],
}

MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "scene_id": {"type": "string", "minLength": 1},
        "background": {"type": "string"},
        "dims": {
            "type": "object",
            "properties": {
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
            },
            "required": ["width", "height"],
            "additionalProperties": False,
        },
        "placements": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "icon_id": {"type": "string", "minLength": 1},
                    "bbox": {
                        "type": "array",
                        "items": {"type": "number", "minimum": 0, "maximum": 1},
                        "minItems": 4,
                        "maxItems": 4,
                    },
                },
                "required": ["icon_id", "bbox"],
                "additionalProperties": False,
            },
        },
        "target_icon_id": {"type": "string", "minLength": 1},
        "instruction": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
        "split": {"type": "string"},
    },
    "required": [
        "schema_version", "scene_id", "background", "dims",
        "placements", "target_icon_id", "instruction", "seed",
    ],
    "additionalProperties": False,
}

SCHEMAS = {
    "tasks": TASK_SCHEMA,
    "predictions": PREDICTION_SCHEMA,
    "eval": EVAL_SCHEMA,
    "manifest": MANIFEST_SCHEMA,
}

_VALIDATORS = {
    kind: jsonschema.Draft202012Validator(schema) for kind, schema in SCHEMAS.items()
}

PRED_TEXT_TOLERANCE = 1e-6


def _pointer(error: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(part) for part in error.absolute_path)


def validate_record(record: dict, kind: str, strict_format: bool = True) -> list[str]:
    """Schema plus cross-field checks; returns violations as pointer: message."""
    validator = _VALIDATORS[kind]
    problems = [
        f"{_pointer(e)}: {e.message}"
        for e in sorted(validator.iter_errors(record), key=_pointer)
    ]
    if problems:
        return problems

    if kind in ("predictions", "eval"):
        problems.extend(_check_pred_text(record, strict_format))
        if record.get("category") == "correct":
            if record.get("distance_to_target", 0.0) != 0.0:
                problems.append(
                    "/distance_to_target: must be 0 for a correct response"
                )
    return problems


def _check_pred_text(record: dict, strict_format: bool) -> list[str]:
    # remapped records keep the crop-relative text under provenance instead
    raw_text, pred = record.get("raw_text"), record.get("pred")
    if raw_text is None or pred is None:
        return []
    try:
        pair = parse_coordinate_pair(raw_text, strict=strict_format)
    except UnparsableOutput:
        return [f"/raw_text: pred present but text unparsable: {raw_text!r}"]
    if abs(pair.x - pred["x"]) > PRED_TEXT_TOLERANCE or (
        abs(pair.y - pred["y"]) > PRED_TEXT_TOLERANCE
    ):
        return [
            f"/pred: does not match raw_text (parsed [{pair.x}, {pair.y}], "
            f"pred [{pred['x']}, {pred['y']}])"
        ]
    return []
