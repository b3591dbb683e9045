"""Confidence metrics over digit-token score vectors.

A coordinate answer like "[0.71, 0.23]" is decided by two key tokens: the
tenths digit of each axis. At those generation steps the model's scores over
the ten digit tokens form a 10-vector whose shape tells us how sure the
model is. A sharp unimodal peak means confident; a flat or ragged vector
means the model is guessing. The peak sharpness score combines the peak
height with the average slopes on each side of the peak.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateEmbedding,
    InvalidProbability,
    MalformedDistribution,
    MissingKeyStep,
    UnparsableOutput,
)

N_DIGITS = 10
DEFAULT_PEAK_CONSTANT = 4.5


class PeakBranch(str, enum.Enum):
    EDGE = "edge"
    INTERIOR = "interior"


@dataclass(frozen=True)
class PssConfig:
    """Scoring knobs.

    peak_constant scales the interior-peak branch; 4.5 makes a one-hot
    probability vector with an interior peak score exactly 1.0.
    normalize_input applies exponential normalization (softmax over the ten
    digit entries) before scoring, for raw-logit inputs.
    """

    peak_constant: float = DEFAULT_PEAK_CONSTANT
    normalize_input: bool = True

    def __post_init__(self):
        if self.peak_constant <= 0:
            raise ValueError(f"peak_constant must be > 0, got {self.peak_constant}")


@dataclass(frozen=True)
class PssResult:
    score: float
    peak_index: int
    peak_value: float
    branch: PeakBranch


@dataclass(frozen=True)
class AxisScores:
    """Record-level score: mean of the two per-axis key-token scores."""

    x: PssResult
    y: PssResult

    @property
    def score(self) -> float:
        return (self.x.score + self.y.score) / 2.0


def as_distribution(values: Sequence[float]) -> np.ndarray:
    """Validate and convert a 10-entry digit score vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (N_DIGITS,):
        raise MalformedDistribution(
            f"expected exactly {N_DIGITS} values, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise MalformedDistribution("distribution contains non-finite values")
    return arr


def normalize(values: Sequence[float]) -> np.ndarray:
    """Exponential normalization over the ten digit entries."""
    arr = as_distribution(values)
    shifted = np.exp(arr - arr.max())
    return shifted / shifted.sum()


def peak(values: Sequence[float]) -> tuple[int, float]:
    """Index and value of the peak entry; ties break to the lowest index."""
    arr = as_distribution(values)
    p = int(np.argmax(arr))
    return p, float(arr[p])


def pss(values: Sequence[float], cfg: PssConfig = PssConfig()) -> PssResult:
    """Peak sharpness score of a digit score vector.

    With the peak at an edge index (0 or 9) only one side exists, so the
    score is twice the absolute mean slope across the whole vector times the
    peak value. With an interior peak, the mean slopes of the left and right
    segments are combined in a length-weighted average before multiplying by
    the peak value and the scale constant.
    """
    arr = as_distribution(values)
    if cfg.normalize_input:
        arr = normalize(arr)

    p = int(np.argmax(arr))
    m = float(arr[p])

    if p == 0 or p == N_DIGITS - 1:
        # mean slope telescopes to (last - first) / 9
        s = (float(arr[-1]) - float(arr[0])) / (N_DIGITS - 1)
        return PssResult(2.0 * abs(s) * m, p, m, PeakBranch.EDGE)

    a_left = (float(arr[p]) - float(arr[0])) / p
    a_right = (float(arr[-1]) - float(arr[p])) / (N_DIGITS - 1 - p)
    w = (p * abs(a_left) + (N_DIGITS - 1 - p) * abs(a_right)) / (N_DIGITS - 1)
    return PssResult(cfg.peak_constant * w * m, p, m, PeakBranch.INTERIOR)


def score_axes(
    x_values: Sequence[float],
    y_values: Sequence[float],
    cfg: PssConfig = PssConfig(),
) -> AxisScores:
    """Score both coordinate axes of one prediction."""
    return AxisScores(x=pss(x_values, cfg), y=pss(y_values, cfg))


def perplexity(key_token_probs: Sequence[float]) -> float:
    """exp of the negative mean log probability of the key tokens.

    1.0 means the model put full probability on every key token; larger
    values mean flatter, less confident choices.
    """
    probs = list(key_token_probs)
    if not probs:
        raise InvalidProbability("need at least one probability")
    for v in probs:
        if not (0.0 < v <= 1.0):
            raise InvalidProbability(f"probability {v} outside (0, 1]")
    return math.exp(-math.fsum(math.log(v) for v in probs) / len(probs))


# ---------------------------------------------------------------------------
# Coordinate text parsing and key-token extraction
# ---------------------------------------------------------------------------

_NUMBER = r"(\d+\.\d+|\d+|\.\d+)"
_STRICT_PAIR = re.compile(r"\[\s*" + _NUMBER + r"\s*,\s*" + _NUMBER + r"\s*\]")
_PAREN_PAIR = re.compile(r"\(\s*" + _NUMBER + r"\s*,\s*" + _NUMBER + r"\s*\)")
_BARE_PAIR = re.compile(_NUMBER + r"\s*,\s*" + _NUMBER)


@dataclass(frozen=True)
class ParsedPair:
    """A coordinate pair located in model output text."""

    x: float
    y: float
    x_text: str
    y_text: str
    x_start: int  # char offset of x_text in the raw text
    y_start: int

    def tenths_char_offset(self, axis: str) -> Optional[int]:
        """Offset of the tenths digit character, or None if no fraction."""
        text, start = (self.x_text, self.x_start) if axis == "x" else (self.y_text, self.y_start)
        dot = text.find(".")
        if dot < 0 or dot + 1 >= len(text):
            return None
        return start + dot + 1


@dataclass(frozen=True)
class KeyTokenSpec:
    """How to find the key-token generation steps for a coordinate answer.

    strict_format accepts only the square-bracket pair "[x, y]"; the lenient
    mode also accepts parentheses and a bare "x, y".

    alignment describes what the per-step score list is aligned to:
      * "digit_chars": one entry per digit character of the output text, in
        order of appearance (the usual wire layout).
      * "all_chars": one entry per character of the output text.
    """

    strict_format: bool = True
    alignment: str = "digit_chars"

    def __post_init__(self):
        if self.alignment not in ("digit_chars", "all_chars"):
            raise ValueError(f"unknown alignment {self.alignment!r}")


def parse_coordinate_pair(raw_text: str, strict: bool = True) -> ParsedPair:
    """Locate the coordinate pair in model output text.

    Raises:
        UnparsableOutput: no pair found under the active format rule.
    """
    if raw_text is None:
        raise UnparsableOutput("no output text")
    match = _STRICT_PAIR.search(raw_text)
    if match is None and not strict:
        match = _PAREN_PAIR.search(raw_text) or _BARE_PAIR.search(raw_text)
    if match is None:
        raise UnparsableOutput(f"no coordinate pair in {raw_text!r}")
    return ParsedPair(
        x=float(match.group(1)),
        y=float(match.group(2)),
        x_text=match.group(1),
        y_text=match.group(2),
        x_start=match.start(1),
        y_start=match.start(2),
    )


def _step_index(raw_text: str, char_offset: int, alignment: str) -> int:
    if alignment == "all_chars":
        return char_offset
    # digit_chars: ordinal of this digit among all digit characters
    return sum(1 for c in raw_text[:char_offset] if c.isdigit())


def extract_key_digits(
    raw_text: str,
    per_step_digit_logits: Sequence[Sequence[float]],
    spec: KeyTokenSpec = KeyTokenSpec(),
) -> tuple[np.ndarray, np.ndarray]:
    """Pick the digit score vectors at the two tenths-digit steps.

    Args:
        raw_text: the model's output text containing a coordinate pair.
        per_step_digit_logits: one 10-vector per generation step, aligned
            per spec.alignment.
        spec: format and alignment rules.

    Returns:
        (x distribution, y distribution) at the key-token steps.

    Raises:
        UnparsableOutput: no coordinate pair in the text.
        MissingKeyStep: a coordinate has no tenths digit, or the step list
            does not cover its position.
    """
    pair = parse_coordinate_pair(raw_text, strict=spec.strict_format)
    out = []
    for axis in ("x", "y"):
        offset = pair.tenths_char_offset(axis)
        if offset is None:
            raise MissingKeyStep(f"{axis} coordinate has no tenths digit in {raw_text!r}")
        idx = _step_index(raw_text, offset, spec.alignment)
        if idx >= len(per_step_digit_logits):
            raise MissingKeyStep(
                f"step list has {len(per_step_digit_logits)} entries, "
                f"{axis} key token is step {idx}"
            )
        out.append(as_distribution(per_step_digit_logits[idx]))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Semantic continuity diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuityReport:
    """Adjacent cosine similarities and second-difference norms."""

    cosines: list[float] = field(default_factory=list)
    second_difference_norms: list[float] = field(default_factory=list)


def semantic_continuity(seq: Sequence[Sequence[float]]) -> ContinuityReport:
    """Measure how linearly a sequence of embeddings progresses.

    Numeric token embeddings tend to advance along a nearly straight line:
    adjacent cosines near 1 and second differences near zero. Unrelated
    tokens show neither.

    Raises:
        ValueError: fewer than 3 vectors, or inconsistent dimensions.
        DegenerateEmbedding: a vector with zero norm.
    """
    vecs = [np.asarray(v, dtype=np.float64) for v in seq]
    if len(vecs) < 3:
        raise ValueError(f"need at least 3 vectors, got {len(vecs)}")
    dim = vecs[0].shape
    if len(dim) != 1 or dim[0] < 1:
        raise ValueError(f"vectors must be 1-D, got shape {dim}")
    for v in vecs:
        if v.shape != dim:
            raise ValueError("inconsistent embedding dimensions")
        if np.linalg.norm(v) == 0.0:
            raise DegenerateEmbedding("zero-norm embedding vector")

    cosines = []
    for a, b in zip(vecs, vecs[1:]):
        cosines.append(float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))))

    second_diffs = []
    for prev, cur, nxt in zip(vecs, vecs[1:], vecs[2:]):
        second_diffs.append(float(np.linalg.norm((nxt - cur) - (cur - prev))))

    return ContinuityReport(cosines=cosines, second_difference_norms=second_diffs)
