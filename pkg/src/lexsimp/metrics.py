"""Evaluation: identification/simplification counts, F1, and weighted F1-20.

For a sentence with P gold complex words where a system edited Q words and q
of those were correctly simplified: precision = q/Q, recall = q/P. The
weighted variants divide each correctly simplified word's annotator count
by w_max (default 20), so harder words are worth more:

    precision_w = sum(H_i) / (Q * w_max)      recall_w = sum(H_i) / (P * w_max)

F1-20 is the harmonic mean of the weighted pair. Aggregation over a corpus
is micro (sum counts, score once) by default, with macro (mean of
per-instance scores) available; reports can carry both side by side.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .corpus import DEFAULT_W_MAX, Instance
from .errors import InputError
from .pipeline import SimplificationOutcome

MICRO = "micro"
MACRO = "macro"


@dataclass(frozen=True)
class EvalCounts:
    gold_p: int
    pred_q: int
    correct_cw: int
    correct_simp: int
    weight_sum: int


@dataclass(frozen=True)
class MetricConfig:
    w_max: int = DEFAULT_W_MAX
    aggregation: str = MICRO


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    precision_w: float
    recall_w: float
    f1_20: float


@dataclass(frozen=True)
class ReportRow:
    """One evaluation row (a dataset/method pair) ready for emission."""

    label: str
    aggregation: str
    num_cw: int
    correct_cw: int
    correct_simp: int
    precision: float
    recall: float
    f1: float
    precision_w: float
    recall_w: float
    f1_20: float


def score_outcome(
    outcome: SimplificationOutcome, gold: Instance, config: MetricConfig | None = None
) -> EvalCounts:
    """Count correct identifications and simplifications against one gold instance.

    An edit identifies a gold word when the surfaces match case-insensitively;
    the occurrence is located by span overlap, falling back to surface lookup
    only when no gold word covers the edited span. Each gold word is credited
    at most once.
    """
    del config  # reserved for future matching options
    if outcome.original != gold.sentence:
        raise InputError(
            f"outcome sentence does not match gold instance {gold.id!r}"
        )
    gold_words = gold.complex_words
    claimed: set[int] = set()
    correct_cw = 0
    correct_simp = 0
    weight_sum = 0
    for edit in outcome.edits:
        surface_key = edit.original_surface.casefold()
        start, end = edit.span
        overlapping = [
            i for i, w in enumerate(gold_words) if w.span[0] < end and start < w.span[1]
        ]
        picked: int | None = None
        if overlapping:
            for i in overlapping:
                if i not in claimed and gold_words[i].surface.casefold() == surface_key:
                    picked = i
                    break
        else:
            for i, w in enumerate(gold_words):
                if i not in claimed and w.surface.casefold() == surface_key:
                    picked = i
                    break
        if picked is None:
            continue
        claimed.add(picked)
        correct_cw += 1
        gold_word = gold_words[picked]
        substitute_key = edit.substitute.strip().casefold()
        if any(substitute_key == s.casefold() for s in gold_word.substitutes):
            correct_simp += 1
            weight_sum += gold_word.weight
    return EvalCounts(
        gold_p=len(gold_words),
        pred_q=len(outcome.edits),
        correct_cw=correct_cw,
        correct_simp=correct_simp,
        weight_sum=weight_sum,
    )


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def f1_scores(counts: EvalCounts, config: MetricConfig | None = None) -> Scores:
    config = config or MetricConfig()
    p = counts.correct_simp / counts.pred_q if counts.pred_q else 0.0
    r = counts.correct_simp / counts.gold_p if counts.gold_p else 0.0
    pw = counts.weight_sum / (counts.pred_q * config.w_max) if counts.pred_q else 0.0
    rw = counts.weight_sum / (counts.gold_p * config.w_max) if counts.gold_p else 0.0
    return Scores(p, r, _harmonic(p, r), pw, rw, _harmonic(pw, rw))


def sum_counts(per_instance: Iterable[EvalCounts]) -> EvalCounts:
    totals = [0, 0, 0, 0, 0]
    for counts in per_instance:
        totals[0] += counts.gold_p
        totals[1] += counts.pred_q
        totals[2] += counts.correct_cw
        totals[3] += counts.correct_simp
        totals[4] += counts.weight_sum
    return EvalCounts(*totals)


def aggregate(
    per_instance: Sequence[EvalCounts],
    config: MetricConfig | None = None,
    label: str = "all",
) -> ReportRow:
    """Fold per-instance counts into one report row (micro or macro)."""
    config = config or MetricConfig()
    total = sum_counts(per_instance)
    if config.aggregation == MACRO and per_instance:
        per_scores = [f1_scores(c, config) for c in per_instance]
        n = len(per_scores)
        scores = Scores(
            precision=sum(s.precision for s in per_scores) / n,
            recall=sum(s.recall for s in per_scores) / n,
            f1=sum(s.f1 for s in per_scores) / n,
            precision_w=sum(s.precision_w for s in per_scores) / n,
            recall_w=sum(s.recall_w for s in per_scores) / n,
            f1_20=sum(s.f1_20 for s in per_scores) / n,
        )
    else:
        scores = f1_scores(total, config)
    return ReportRow(
        label=label,
        aggregation=config.aggregation,
        num_cw=total.pred_q,
        correct_cw=total.correct_cw,
        correct_simp=total.correct_simp,
        precision=scores.precision,
        recall=scores.recall,
        f1=scores.f1,
        precision_w=scores.precision_w,
        recall_w=scores.recall_w,
        f1_20=scores.f1_20,
    )


# --------------------------------------------------------------------------
# Report emission
# --------------------------------------------------------------------------

_COLUMNS = (
    ("Label", "label"),
    ("Agg", "aggregation"),
    ("NumCW", "num_cw"),
    ("CorrectCW", "correct_cw"),
    ("CorrectSimp", "correct_simp"),
    ("F1", "f1"),
    ("F1-20", "f1_20"),
    ("Precision", "precision"),
    ("Recall", "recall"),
    ("Precision-20", "precision_w"),
    ("Recall-20", "recall_w"),
)


def _cell(value) -> str:
    return f"{value:.3f}" if isinstance(value, float) else str(value)


def report_table(rows: Sequence[ReportRow]) -> str:
    headers = [h for h, _ in _COLUMNS]
    grid = [headers] + [[_cell(getattr(row, attr)) for _, attr in _COLUMNS] for row in rows]
    widths = [max(len(line[i]) for line in grid) for i in range(len(headers))]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
        for line in grid
    )


def report_json(rows: Sequence[ReportRow]) -> str:
    payload = [{f.name: getattr(row, f.name) for f in fields(ReportRow)} for row in rows]
    return json.dumps(payload, indent=2)


def report_csv(rows: Sequence[ReportRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([h for h, _ in _COLUMNS])
    for row in rows:
        writer.writerow([getattr(row, attr) for _, attr in _COLUMNS])
    return buffer.getvalue()
