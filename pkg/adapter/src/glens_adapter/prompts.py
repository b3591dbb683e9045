"""Instruction templates for the supported model families.

The "showui" template uses a system prompt that pins the output format to a
bracketed relative-coordinate pair; the "generic" template folds the task
into a single user turn for models without GUI-specific tuning.
"""

from __future__ import annotations

SHOWUI_SYSTEM = (
    "According to the image I provide, identify the relative coordinates of "
    "the specified object, with values ranging from 0 to 1. The output "
    "format must be [x, y], and do not output anything else."
)

GENERIC_USER = (
    "Your task is to help the user identify the precise coordinates (x, y) "
    "of a specific area/element/object on the screen based on a "
    "description.\n\nDescription: {task}\n\nAnswer:"
)

TEMPLATE_IDS = ("showui", "generic")


def render_prompt(template_id: str, task: str) -> dict[str, str]:
    """Build {system, user} message texts for a task instruction."""
    if template_id == "showui":
        return {"system": SHOWUI_SYSTEM, "user": task}
    if template_id == "generic":
        return {"system": "", "user": GENERIC_USER.format(task=task)}
    raise ValueError(f"unknown template {template_id!r} (expected {TEMPLATE_IDS})")
