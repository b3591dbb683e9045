"""Report assembly: tables as JSON, markdown, and plot-ready CSV.

Markdown tables round to the displayed precision (one decimal for
percentages, two for scores); report.json keeps full precision so numbers
can be re-derived without rerunning the pipeline.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional, Sequence

from .jsonl import round_floats
from .stats_report import (
    GroupStats,
    TTestResult,
    accuracy_table,
    aggregate_perplexity,
    aggregate_pss,
    category_distribution,
    pss_significance,
)
from .taxonomy import ResponseCategory, threshold_curve

CATEGORY_ORDER = [c.value for c in ResponseCategory]
MERGED_ORDER = ["correct", "biased", "other"]
SIGNIFICANCE_PAIRS = [
    ("biased_vs_correct", "Biased vs. Correct"),
    ("other_vs_correct", "Other vs. Correct"),
    ("biased_vs_other", "Biased vs. Other"),
]


def display_label(model_id: str, pass_label: str) -> str:
    return model_id if pass_label == "full" else f"{model_id} + crop"


def _stats_dict(s: GroupStats) -> dict:
    return {"n": s.n, "mean": s.mean, "std": s.std}


def _ttest_dict(t: Optional[TTestResult]) -> Optional[dict]:
    if t is None:
        return None
    return {"t": t.t, "dof": t.dof, "p": t.p, "significant": t.significant}


def build_report(
    records: Sequence[dict],
    thresholds: Sequence[float],
    weighted_average: bool = False,
) -> dict:
    """Aggregate eval records into the full report bundle."""
    labeled = [
        {**r, "model_id": display_label(r["model_id"], r.get("pass", "full"))}
        for r in records
    ]
    labels = sorted({r["model_id"] for r in labeled})
    by_label = {
        label: [r for r in labeled if r["model_id"] == label] for label in labels
    }

    curves = {}
    for label, recs in by_label.items():
        points = [
            (r["category"] == "correct", r["distance_to_target"]) for r in recs
        ]
        curves[label] = threshold_curve(points, thresholds)

    bundle = {
        "schema_version": 1,
        "n_records": len(records),
        "models": labels,
        "category_distribution": category_distribution(labeled),
        "threshold_curve": {
            "thresholds": list(thresholds),
            "proportions": curves,  # index 0 is the contained-only entry
        },
        "pss_by_category": {
            label: {
                cat: _stats_dict(s)
                for cat, s in aggregate_pss(by_label[label]).items()
            }
            for label in labels
        },
        "pss_significance": {
            label: {
                pair: _ttest_dict(t)
                for pair, t in pss_significance(by_label[label]).items()
            }
            for label in labels
        },
        "perplexity_by_category": {
            label: {
                cat: _stats_dict(s)
                for cat, s in aggregate_perplexity(by_label[label]).items()
            }
            for label in labels
        },
    }

    splits, rows = accuracy_table(records, weighted=weighted_average)
    bundle["accuracy"] = {
        "splits": list(splits),
        "weighted_average": weighted_average,
        "rows": [
            {
                "model_id": row.model_id,
                "pass": row.pass_label,
                "label": display_label(row.model_id, row.pass_label),
                "by_split": row.by_split,
                "average": row.average,
            }
            for row in rows
        ],
    }
    return bundle


# ---------------------------------------------------------------------------
# Markdown rendering
# ---------------------------------------------------------------------------

def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] * len(header)) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines)


def _fmt_pct(v: float) -> str:
    return f"{100.0 * v:.1f}"


def _fmt_stats(s: Optional[dict], decimals: int = 2) -> str:
    if s is None:
        return "—"
    if s["std"] is None:
        return f"{s['mean']:.{decimals}f}"
    return f"{s['mean']:.{decimals}f} ± {s['std']:.{decimals}f}"


def _fmt_mark(t: Optional[dict]) -> str:
    if t is None:
        return "—"
    return "✓" if t["significant"] else "×"


def render_markdown(bundle: dict) -> str:
    labels = bundle["models"]
    parts = ["# Grounding evaluation report", ""]
    parts.append(
        f"{bundle['n_records']} records across {len(labels)} model run(s)."
    )
    parts.append("")

    parts.append("## Response type distribution")
    parts.append("")
    rows = []
    for label in labels:
        dist = bundle["category_distribution"][label]
        rows.append(
            [label] + [f"{_fmt_pct(dist[cat])}%" for cat in CATEGORY_ORDER]
        )
    parts.append(_md_table(
        ["Model"] + [c.capitalize() for c in CATEGORY_ORDER], rows
    ))
    parts.append("")

    parts.append("## Predictions within distance thresholds (%)")
    parts.append("")
    thresholds = bundle["threshold_curve"]["thresholds"]
    conditions = ["Correct response"] + [
        f"Relative distance < {t:g}" for t in thresholds
    ]
    rows = []
    for i, condition in enumerate(conditions):
        rows.append(
            [condition]
            + [
                _fmt_pct(bundle["threshold_curve"]["proportions"][label][i])
                for label in labels
            ]
        )
    parts.append(_md_table(["Evaluation condition"] + labels, rows))
    parts.append("")

    if any(bundle["pss_by_category"][label] for label in labels):
        parts.append("## Confidence score by response category (mean ± std)")
        parts.append("")
        rows = []
        for label in labels:
            per_cat = bundle["pss_by_category"][label]
            rows.append(
                [label]
                + [_fmt_stats(per_cat.get(cat)) for cat in MERGED_ORDER]
            )
        parts.append(_md_table(
            ["Model", "Correct", "Biased", "Other"], rows
        ))
        parts.append("")

        parts.append("## Pairwise significance of confidence scores (p < 0.05)")
        parts.append("")
        rows = []
        for label in labels:
            tests = bundle["pss_significance"][label]
            rows.append(
                [label] + [_fmt_mark(tests.get(pair)) for pair, _ in SIGNIFICANCE_PAIRS]
            )
        parts.append(_md_table(
            ["Model"] + [title for _, title in SIGNIFICANCE_PAIRS], rows
        ))
        parts.append("")

    parts.append("## Localization accuracy by split (%)")
    parts.append("")
    splits = bundle["accuracy"]["splits"]
    rows = []
    for row in bundle["accuracy"]["rows"]:
        rows.append(
            [row["label"]]
            + [f"{row['by_split'][s]:.1f}" for s in splits]
            + [f"{row['average']:.1f}"]
        )
    parts.append(_md_table(["Model"] + splits + ["Avg."], rows))
    parts.append("")

    if any(bundle["perplexity_by_category"][label] for label in labels):
        parts.append("## Perplexity by response type")
        parts.append("")
        rows = []
        for label in labels:
            per_cat = bundle["perplexity_by_category"][label]
            rows.append(
                [label] + [_fmt_stats(per_cat.get(cat)) for cat in CATEGORY_ORDER]
            )
        parts.append(_md_table(
            ["Model"] + [c.capitalize() for c in CATEGORY_ORDER], rows
        ))
        parts.append("")

    return "\n".join(parts)


# ---------------------------------------------------------------------------
# CSV plot data
# ---------------------------------------------------------------------------

def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_plot_csvs(bundle: dict) -> dict[str, str]:
    """CSV payloads keyed by file name, ready for external plotting."""
    labels = bundle["models"]

    dist_rows = []
    for label in labels:
        for cat in CATEGORY_ORDER:
            dist_rows.append(
                [label, cat, round_floats(bundle["category_distribution"][label][cat])]
            )

    curve_rows = []
    thresholds = bundle["threshold_curve"]["thresholds"]
    conditions = ["correct"] + [f"<{t:g}" for t in thresholds]
    for label in labels:
        proportions = bundle["threshold_curve"]["proportions"][label]
        for condition, value in zip(conditions, proportions):
            curve_rows.append([label, condition, round_floats(value)])

    pss_rows = []
    for label in labels:
        for cat in MERGED_ORDER:
            stats = bundle["pss_by_category"][label].get(cat)
            if stats is None:
                continue
            pss_rows.append([
                label, cat, stats["n"],
                round_floats(stats["mean"]),
                round_floats(stats["std"]) if stats["std"] is not None else "",
            ])

    return {
        "category_distribution.csv": _csv_text(
            ["model", "category", "proportion"], dist_rows
        ),
        "threshold_curve.csv": _csv_text(
            ["model", "condition", "proportion"], curve_rows
        ),
        "pss_by_category.csv": _csv_text(
            ["model", "category", "n", "mean", "std"], pss_rows
        ),
    }


def write_report_bundle(bundle: dict, out_dir: str | Path) -> list[Path]:
    """Write report.json, report.md, and plots/*.csv; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out_dir / "report.json"
    json_path.write_text(
        json.dumps(round_floats(bundle), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    written.append(json_path)

    md_path = out_dir / "report.md"
    md_path.write_text(render_markdown(bundle), encoding="utf-8")
    written.append(md_path)

    plots_dir = out_dir / "plots"
    plots_dir.mkdir(exist_ok=True)
    for name, text in render_plot_csvs(bundle).items():
        path = plots_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
