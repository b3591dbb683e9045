"""JSONL record streams with stable float serialization.

All floating-point output is rounded to 9 significant digits before
serialization so golden files stay byte-identical across platforms.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

FLOAT_SIG_DIGITS = 9


def round_sig(value: float, digits: int = FLOAT_SIG_DIGITS) -> float:
    return float(f"{value:.{digits}g}")


def round_floats(obj: Any, digits: int = FLOAT_SIG_DIGITS) -> Any:
    """Recursively round every float in a JSON-like structure."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dumps_record(record: dict) -> str:
    return json.dumps(round_floats(record), sort_keys=True, separators=(",", ":"))


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write records one per line; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict | None, str | None]]:
    """Yield (line_number, record, error) for every non-blank line.

    Corrupt lines yield (n, None, message) so callers can report and keep
    going.
    """
    with Path(path).open("r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                yield i, None, f"invalid JSON: {exc.msg}"
                continue
            if not isinstance(record, dict):
                yield i, None, "record is not a JSON object"
                continue
            yield i, record, None
