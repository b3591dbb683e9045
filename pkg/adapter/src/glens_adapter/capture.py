"""Digit-logit capture from a generation trace.

A trace is the per-step record of a greedy decode: each step carries the
token's text and the model's raw scores restricted to the ten digit tokens.
The key steps are the ones emitting the tenths digit of each coordinate;
their 10-vectors travel to the primary toolkit unnormalized.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MissingKeyStep, UnparsableOutput, UnsupportedTokenizer

DIGITS = "0123456789"

_NUMBER = r"(\d+\.\d+|\d+|\.\d+)"
_PAIR = re.compile(r"\[\s*" + _NUMBER + r"\s*,\s*" + _NUMBER + r"\s*\]")


@dataclass(frozen=True)
class TraceStep:
    token_text: str
    digit_logits: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class GenerationTrace:
    steps: tuple[TraceStep, ...]

    @property
    def text(self) -> str:
        return "".join(step.token_text for step in self.steps)


def check_digit_tokens(tokenizer) -> dict[str, int]:
    """Map each digit to its single token id, or refuse the tokenizer.

    Raises:
        UnsupportedTokenizer: some digit encodes to zero or multiple tokens.
    """
    mapping = {}
    for digit in DIGITS:
        try:
            ids = tokenizer.encode(digit, add_special_tokens=False)
        except TypeError:
            ids = tokenizer.encode(digit)
        if len(ids) != 1:
            raise UnsupportedTokenizer(
                f"digit {digit!r} tokenizes to {len(ids)} tokens; "
                "digit-level score capture needs single-token digits"
            )
        mapping[digit] = ids[0]
    return mapping


def parse_pair(text: str) -> tuple[float, float, int, int]:
    """Coordinates plus the char offsets of each tenths digit.

    Raises:
        UnparsableOutput: no bracketed pair in the text.
        MissingKeyStep: a coordinate has no fractional digits.
    """
    match = _PAIR.search(text)
    if match is None:
        raise UnparsableOutput(f"no coordinate pair in {text!r}")
    offsets = []
    for group in (1, 2):
        number = match.group(group)
        dot = number.find(".")
        if dot < 0 or dot + 1 >= len(number):
            raise MissingKeyStep(f"coordinate {number!r} has no tenths digit")
        offsets.append(match.start(group) + dot + 1)
    return float(match.group(1)), float(match.group(2)), offsets[0], offsets[1]


def _step_covering(trace: GenerationTrace, char_offset: int) -> tuple[int, TraceStep]:
    consumed = 0
    for index, step in enumerate(trace.steps):
        end = consumed + len(step.token_text)
        if consumed <= char_offset < end:
            return index, step
        consumed = end
    raise MissingKeyStep(
        f"trace ends at char {consumed}, key token expected at {char_offset}"
    )


def capture_digit_logits(
    trace: GenerationTrace,
) -> tuple[list[float], list[float]]:
    """Digit score vectors at the two tenths-digit steps of a decode.

    Raises:
        UnparsableOutput: output text lacks a coordinate pair.
        MissingKeyStep: a tenths digit is merged into a larger token, or the
            step carries no digit scores.
    """
    text = trace.text
    _, _, x_offset, y_offset = parse_pair(text)
    vectors = []
    for axis, offset in (("x", x_offset), ("y", y_offset)):
        index, step = _step_covering(trace, offset)
        if step.token_text != text[offset]:
            raise MissingKeyStep(
                f"{axis} tenths digit is inside token {step.token_text!r} "
                f"at step {index}; cannot isolate its score vector"
            )
        if step.digit_logits is None or len(step.digit_logits) != 10:
            raise MissingKeyStep(f"step {index} has no digit score vector")
        if not all(math.isfinite(v) for v in step.digit_logits):
            raise MissingKeyStep(f"step {index} has non-finite digit scores")
        vectors.append([float(v) for v in step.digit_logits])
    return vectors[0], vectors[1]


def restrict_to_digits(
    full_scores: Sequence[float], digit_ids: dict[str, int]
) -> tuple[float, ...]:
    """Project a full-vocabulary score row onto the ten digit token ids."""
    return tuple(float(full_scores[digit_ids[d]]) for d in DIGITS)
