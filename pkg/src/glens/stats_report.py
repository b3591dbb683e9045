"""Aggregations over classified, scored evaluation records.

Covers the summary numbers behind the report tables: score means and
standard deviations per response category, pairwise Welch significance
tests, category distributions per model, and before/after-crop accuracy by
split. The t-distribution tail probability is computed here via the
regularized incomplete beta function rather than an external stats
dependency; the test suite checks it against an independent reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import DegenerateSample, EmptyInput, MissingSplit
from .taxonomy import ResponseCategory

SIGNIFICANCE_LEVEL = 0.05

# Categories whose score profiles the tables keep apart; misleading and
# confusion are indistinguishable on target-only datasets, so they pool.
MERGED_OTHER = "other"


@dataclass(frozen=True)
class GroupStats:
    n: int
    mean: float
    std: Optional[float]  # sample std (n-1); None when n < 2


@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: float
    p: float

    @property
    def significant(self) -> bool:
        return self.p < SIGNIFICANCE_LEVEL


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _sample_var(values: Sequence[float], mean: float) -> float:
    return math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)


def group_stats(values: Sequence[float]) -> GroupStats:
    """Count, mean, and sample standard deviation of a score group."""
    if not values:
        raise EmptyInput("empty score group")
    m = _mean(values)
    if len(values) < 2:
        return GroupStats(1, m, None)
    return GroupStats(len(values), m, math.sqrt(_sample_var(values, m)))


# ---------------------------------------------------------------------------
# Regularized incomplete beta and the t-distribution tail
# ---------------------------------------------------------------------------

_IBETA_EPS = 3e-16
_IBETA_FPMIN = 1e-300
_IBETA_MAXIT = 300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _IBETA_FPMIN:
        d = _IBETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _IBETA_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _IBETA_FPMIN:
            d = _IBETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _IBETA_FPMIN:
            c = _IBETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _IBETA_FPMIN:
            d = _IBETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _IBETA_FPMIN:
            c = _IBETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _IBETA_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # continued fraction converges fast only on one side of the split point
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, dof: float) -> float:
    """Two-sided tail probability of the t-distribution."""
    if dof <= 0:
        raise ValueError(f"dof must be > 0, got {dof}")
    if t == 0.0:
        return 1.0
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def welch_t_test(
    a: Sequence[float], b: Sequence[float], pooled: bool = False
) -> TTestResult:
    """Two-sided unequal-variance t-test (or pooled Student when asked).

    Args:
        a, b: score samples, each with at least two values.
        pooled: use the classic equal-variance test instead of Welch.

    Raises:
        ValueError: a sample has fewer than two values.
        DegenerateSample: both samples have zero variance.
    """
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError(f"need >= 2 values per sample, got {n1} and {n2}")
    m1, m2 = _mean(a), _mean(b)
    v1, v2 = _sample_var(a, m1), _sample_var(b, m2)
    if v1 == 0.0 and v2 == 0.0:
        raise DegenerateSample("all values identical in both groups")

    if pooled:
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
        t = (m1 - m2) / math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
        dof = float(n1 + n2 - 2)
    else:
        se2 = v1 / n1 + v2 / n2
        t = (m1 - m2) / math.sqrt(se2)
        dof = se2 * se2 / (
            (v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1)
        )
    return TTestResult(t=t, dof=dof, p=t_two_sided_p(t, dof))


# ---------------------------------------------------------------------------
# Record-level aggregations
# ---------------------------------------------------------------------------

def merged_category(category: str) -> str:
    """Collapse misleading and confusion into the pooled error bucket."""
    cat = ResponseCategory(category)
    if cat in (ResponseCategory.MISLEADING, ResponseCategory.CONFUSION):
        return MERGED_OTHER
    return cat.value


def _record_score(record: dict) -> Optional[float]:
    pss_field = record.get("pss")
    if isinstance(pss_field, dict):
        return pss_field.get("score")
    return pss_field


def aggregate_pss(records: Iterable[dict]) -> dict[str, GroupStats]:
    """Score statistics per merged category ("correct"/"biased"/"other").

    Categories with no scored records are absent from the result rather
    than reported as zero.
    """
    groups: dict[str, list[float]] = {}
    for record in records:
        score = _record_score(record)
        if score is None:
            continue
        groups.setdefault(merged_category(record["category"]), []).append(score)
    return {cat: group_stats(vals) for cat, vals in sorted(groups.items())}


def aggregate_perplexity(records: Iterable[dict]) -> dict[str, GroupStats]:
    """Perplexity statistics per (unmerged) category."""
    groups: dict[str, list[float]] = {}
    for record in records:
        value = record.get("perplexity")
        if value is None:
            continue
        groups.setdefault(ResponseCategory(record["category"]).value, []).append(value)
    return {cat: group_stats(vals) for cat, vals in sorted(groups.items())}


def pss_significance(records: Iterable[dict]) -> dict[str, Optional[TTestResult]]:
    """Pairwise Welch tests between the merged category score groups.

    Pairs lacking two scored records on either side come back as None.
    """
    groups: dict[str, list[float]] = {}
    for record in records:
        score = _record_score(record)
        if score is None:
            continue
        groups.setdefault(merged_category(record["category"]), []).append(score)

    pairs = [
        ("biased_vs_correct", "biased", "correct"),
        ("other_vs_correct", MERGED_OTHER, "correct"),
        ("biased_vs_other", "biased", MERGED_OTHER),
    ]
    out: dict[str, Optional[TTestResult]] = {}
    for label, left, right in pairs:
        a, b = groups.get(left, []), groups.get(right, [])
        if len(a) < 2 or len(b) < 2:
            out[label] = None
            continue
        try:
            out[label] = welch_t_test(a, b)
        except DegenerateSample:
            out[label] = None
    return out


def category_distribution(records: Iterable[dict]) -> dict[str, dict[str, float]]:
    """Proportion of each response category, per model.

    All four categories appear for every model, zeros included; proportions
    sum to 1 per model.
    """
    counts: dict[str, dict[str, int]] = {}
    for record in records:
        model = record["model_id"]
        cat = ResponseCategory(record["category"]).value
        counts.setdefault(model, {c.value: 0 for c in ResponseCategory})
        counts[model][cat] += 1
    if not counts:
        raise EmptyInput("no records to distribute")
    out: dict[str, dict[str, float]] = {}
    for model in sorted(counts):
        total = sum(counts[model].values())
        out[model] = {cat: counts[model][cat] / total for cat in counts[model]}
    return out


@dataclass(frozen=True)
class AccuracyRow:
    model_id: str
    pass_label: str  # "full" | "crop"
    by_split: dict[str, float]  # split -> accuracy percentage
    average: float


def accuracy_table(
    records: Iterable[dict],
    splits: Optional[Sequence[str]] = None,
    weighted: bool = False,
) -> tuple[list[str], list[AccuracyRow]]:
    """Percent-correct per (model, pass) row and per split column.

    The average column is the unweighted mean over split accuracies by
    default; ``weighted`` pools all records instead.

    Raises:
        MissingSplit: a requested split has no records for some row.
    """
    tallies: dict[tuple[str, str], dict[str, list[int]]] = {}
    for record in records:
        key = (record["model_id"], record["pass"])
        split = record["split"]
        cell = tallies.setdefault(key, {}).setdefault(split, [0, 0])
        cell[0] += 1 if ResponseCategory(record["category"]) is ResponseCategory.CORRECT else 0
        cell[1] += 1
    if not tallies:
        raise EmptyInput("no records to tabulate")

    if splits is None:
        splits = sorted({s for cells in tallies.values() for s in cells})
    else:
        splits = list(splits)

    pass_order = {"full": 0, "crop": 1}
    rows = []
    for model_id, pass_label in sorted(
        tallies, key=lambda k: (k[0], pass_order.get(k[1], 9), k[1])
    ):
        cells = tallies[(model_id, pass_label)]
        by_split = {}
        for split in splits:
            if split not in cells or cells[split][1] == 0:
                raise MissingSplit(
                    f"split {split!r} has no records for {model_id}/{pass_label}"
                )
            correct, total = cells[split]
            by_split[split] = 100.0 * correct / total
        if weighted:
            correct = sum(cells[s][0] for s in splits)
            total = sum(cells[s][1] for s in splits)
            average = 100.0 * correct / total
        else:
            average = _mean([by_split[s] for s in splits])
        rows.append(AccuracyRow(model_id, pass_label, by_split, average))
    return splits, rows
