"""Line-level authorship attribution: label each line of a final
submission as AI-generated, AI-modified, or user-written by fuzzy
matching against the historical insertion corpus.

The reference similarity metric is the normalized Levenshtein ratio,
rounded half-up to an integer 0..100; alternatives can be swapped in via
the ``metric`` parameter. Thresholds: >= 95 AI-generated, 80..94
AI-modified, < 80 user-written.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

AI_GENERATED_THRESHOLD = 95
AI_MODIFIED_THRESHOLD = 80


class LineLabelKind(str, Enum):
    AI_GENERATED = "AIGenerated"
    AI_MODIFIED = "AIModified"
    USER_WRITTEN = "UserWritten"


LABEL_ORDER = (
    LineLabelKind.AI_GENERATED,
    LineLabelKind.AI_MODIFIED,
    LineLabelKind.USER_WRITTEN,
)


@dataclass(frozen=True)
class LineLabel:
    line_index: int
    content: str
    normalized: str
    label: LineLabelKind
    best_score: int
    matched_line: Optional[str]


@dataclass(frozen=True)
class ClassificationReport:
    labels: tuple[LineLabel, ...]
    counts: dict[LineLabelKind, int]
    percentages: dict[LineLabelKind, float]
    skipped_lines: tuple[int, ...]


@dataclass(frozen=True)
class EvaluationResult:
    confusion: dict[LineLabelKind, dict[LineLabelKind, int]]  # truth -> predicted
    precision: dict[LineLabelKind, Fraction]
    recall: dict[LineLabelKind, Fraction]
    f1: dict[LineLabelKind, Fraction]
    overall_precision: Fraction
    overall_recall: Fraction
    overall_f1: Fraction
    degenerate: frozenset[tuple[LineLabelKind, str]]


def normalize_line(raw: str) -> str:
    """Strip and collapse internal whitespace runs; case is preserved."""
    return " ".join(raw.split())


def levenshtein(a: str, b: str) -> int:
    """Edit distance, two-row dynamic program."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def similarity(a: str, b: str, distance: Callable[[str, str], int] = levenshtein) -> int:
    """Normalized edit-distance ratio as an integer 0..100, half-up.

    100 iff the strings are equal (two empty strings score 100).
    """
    m = max(len(a), len(b))
    if m == 0:
        return 100
    d = distance(a, b)
    # round(100 * (m - d) / m) with half-up rounding, in exact integer math
    return (200 * (m - d) + m) // (2 * m)


def label_for_score(score: int) -> LineLabelKind:
    if score >= AI_GENERATED_THRESHOLD:
        return LineLabelKind.AI_GENERATED
    if score >= AI_MODIFIED_THRESHOLD:
        return LineLabelKind.AI_MODIFIED
    return LineLabelKind.USER_WRITTEN


def label_line(
    final_line: str,
    history: Sequence[str],
    line_index: int = 0,
    content: Optional[str] = None,
    metric: Callable[[str, str], int] = similarity,
) -> LineLabel:
    """Label one normalized line against the historical corpus.

    Best match is the highest-scoring historical line, earliest wins on
    ties. An empty corpus scores 0 and labels the line user-written.
    """
    best_score = 0
    matched: Optional[str] = None
    for historical in history:
        score = metric(final_line, historical)
        if matched is None or score > best_score:
            best_score = score
            matched = historical
    if matched is None:
        best_score = 0
    return LineLabel(
        line_index=line_index,
        content=content if content is not None else final_line,
        normalized=final_line,
        label=label_for_score(best_score),
        best_score=best_score,
        matched_line=matched,
    )


def classify_lines(
    final_code: str,
    history: Sequence[str],
    metric: Callable[[str, str], int] = similarity,
) -> ClassificationReport:
    """Split the submission into lines, skip whitespace-only ones, and
    label the rest against the normalized history."""
    labels: list[LineLabel] = []
    skipped: list[int] = []
    for index, raw in enumerate(final_code.split("\n")):
        normalized = normalize_line(raw)
        if not normalized:
            skipped.append(index)
            continue
        labels.append(label_line(normalized, history, line_index=index, content=raw, metric=metric))

    counts = {kind: 0 for kind in LABEL_ORDER}
    for entry in labels:
        counts[entry.label] += 1
    return ClassificationReport(
        labels=tuple(labels),
        counts=counts,
        percentages=_percentages(counts),
        skipped_lines=tuple(skipped),
    )


def classify_submission(final_code: str, logs, metric=similarity,
                        include_line_field: bool = True) -> ClassificationReport:
    """End-to-end: extract the historical corpus from session logs and
    classify every line of the final submission."""
    from .timeline import extract_historical_lines  # avoids an import cycle

    history = extract_historical_lines(list(logs), include_line_field=include_line_field)
    return classify_lines(final_code, history.normalized_lines, metric=metric)


def _percentages(counts: dict[LineLabelKind, int]) -> dict[LineLabelKind, float]:
    """One-decimal percentages normalized to sum to exactly 100.0 via the
    largest-remainder method. All zero when nothing was labeled."""
    total = sum(counts.values())
    if total == 0:
        return {kind: 0.0 for kind in LABEL_ORDER}
    tenths = {kind: (counts[kind] * 1000) // total for kind in LABEL_ORDER}
    remainders = {kind: (counts[kind] * 1000) % total for kind in LABEL_ORDER}
    shortfall = 1000 - sum(tenths.values())
    for kind in sorted(LABEL_ORDER, key=lambda k: -remainders[k])[:shortfall]:
        tenths[kind] += 1
    return {kind: tenths[kind] / 10.0 for kind in LABEL_ORDER}


def evaluate(
    report: ClassificationReport, ground_truth: Sequence[LineLabelKind]
) -> EvaluationResult:
    """Score predicted labels against per-line ground truth.

    Per-class precision/recall/F1 as exact rationals plus the 3x3
    confusion matrix. Classes with no predicted (or no true) instances
    report 0 for the undefined metric and are flagged degenerate.
    Overall metrics are unweighted macro averages.
    """
    if len(ground_truth) != len(report.labels):
        raise ValueError(
            f"ground truth length {len(ground_truth)} != labeled line count {len(report.labels)}"
        )

    confusion = {t: {p: 0 for p in LABEL_ORDER} for t in LABEL_ORDER}
    for entry, truth in zip(report.labels, ground_truth):
        confusion[truth][entry.label] += 1

    precision: dict[LineLabelKind, Fraction] = {}
    recall: dict[LineLabelKind, Fraction] = {}
    f1: dict[LineLabelKind, Fraction] = {}
    degenerate: set[tuple[LineLabelKind, str]] = set()
    for kind in LABEL_ORDER:
        tp = confusion[kind][kind]
        predicted = sum(confusion[t][kind] for t in LABEL_ORDER)
        actual = sum(confusion[kind].values())
        if predicted == 0:
            precision[kind] = Fraction(0)
            degenerate.add((kind, "precision"))
        else:
            precision[kind] = Fraction(tp, predicted)
        if actual == 0:
            recall[kind] = Fraction(0)
            degenerate.add((kind, "recall"))
        else:
            recall[kind] = Fraction(tp, actual)
        denom = precision[kind] + recall[kind]
        f1[kind] = Fraction(0) if denom == 0 else 2 * precision[kind] * recall[kind] / denom

    n = Fraction(len(LABEL_ORDER))
    return EvaluationResult(
        confusion=confusion,
        precision=precision,
        recall=recall,
        f1=f1,
        overall_precision=sum(precision.values()) / n,
        overall_recall=sum(recall.values()) / n,
        overall_f1=sum(f1.values()) / n,
        degenerate=frozenset(degenerate),
    )


def report_to_dict(report: ClassificationReport) -> dict[str, Any]:
    """Canonical-document form of a classification report."""
    return {
        "lines": [
            {
                "index": entry.line_index,
                "content": entry.content,
                "label": entry.label.value,
                "score": entry.best_score,
                "matched_line": entry.matched_line,
            }
            for entry in report.labels
        ],
        "summary": {
            "counts": {kind.value: report.counts[kind] for kind in LABEL_ORDER},
            "percentages": {kind.value: report.percentages[kind] for kind in LABEL_ORDER},
            "skipped_lines": list(report.skipped_lines),
        },
    }


def evaluation_to_dict(result: EvaluationResult) -> dict[str, Any]:
    def as_float(value: Fraction) -> float:
        return float(value)

    return {
        "confusion": {
            t.value: {p.value: result.confusion[t][p] for p in LABEL_ORDER}
            for t in LABEL_ORDER
        },
        "per_class": {
            kind.value: {
                "precision": as_float(result.precision[kind]),
                "recall": as_float(result.recall[kind]),
                "f1": as_float(result.f1[kind]),
            }
            for kind in LABEL_ORDER
        },
        "overall": {
            "precision": as_float(result.overall_precision),
            "recall": as_float(result.overall_recall),
            "f1": as_float(result.overall_f1),
        },
        "degenerate": sorted(f"{kind.value}:{metric}" for kind, metric in result.degenerate),
    }
