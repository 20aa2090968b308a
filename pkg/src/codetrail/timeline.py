"""Post-hoc session reconstruction: focus accounting, copy/paste pairing,
insertion-origin tagging, and extraction of the historical line corpus
consumed by the authorship classifier."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .events import EventKind, InteractionEvent, SessionLog
from .classify import normalize_line

# An Insertion pairs with the most recent unconsumed Paste no older than
# this. Editors may transform pasted text, so text equality is preferred
# but not required inside the window.
PASTE_PAIRING_WINDOW_MS = 500

ORIGIN_PASTE = "paste_in_ide"
ORIGIN_EXTERNAL = "external_or_cgt"


@dataclass(frozen=True)
class InsertionRecord:
    time: int
    text: str
    line: str
    origin: str


@dataclass(frozen=True)
class DeletionRecord:
    time: int
    text: str
    line: str


@dataclass(frozen=True)
class CopyPastePair:
    """A paste with its originating in-IDE copy (absent for external
    clipboard content) and the insertion that delivered the text."""

    paste: InteractionEvent
    copy: Optional[InteractionEvent]
    insertion: Optional[InsertionRecord]


@dataclass(frozen=True)
class SessionTimeline:
    session_span: tuple[int, int]
    focus_intervals: tuple[tuple[int, int], ...]
    insertions: tuple[InsertionRecord, ...]
    deletions: tuple[DeletionRecord, ...]
    copy_paste_pairs: tuple[CopyPastePair, ...]
    unpaired_copies: tuple[InteractionEvent, ...]


@dataclass(frozen=True)
class SourceRef:
    log_index: int
    event_index: int
    text_line: Optional[int]  # index into the split text, None for the line field


@dataclass(frozen=True)
class HistoricalLine:
    normalized: str
    source: SourceRef


@dataclass(frozen=True)
class HistoricalLineSet:
    lines: tuple[HistoricalLine, ...]

    @property
    def normalized_lines(self) -> list[str]:
        return [entry.normalized for entry in self.lines]


@dataclass(frozen=True)
class SessionMetrics:
    total_duration_ms: int
    focused_ms: int
    unfocused_ms: int
    insertion_chars: int
    deletion_chars: int
    paste_count: int
    external_insertion_count: int


def reconstruct(log: SessionLog) -> SessionTimeline:
    """Deterministically rebuild the timeline of a valid session log.

    Focus rules: the session is focused from Start (the file was just
    opened); Unfocus closes the interval, Focus reopens one; an interval
    still open at End closes there. Redundant Focus/Unfocus are ignored.
    """
    start_time = log.events[0].time or 0
    end_time = log.events[-1].time or start_time

    focus_intervals: list[tuple[int, int]] = []
    focused = True
    interval_start = start_time

    insertions: list[InsertionRecord] = []
    deletions: list[DeletionRecord] = []
    pairs: list[CopyPastePair] = []
    open_copies: list[InteractionEvent] = []
    # pastes awaiting their insertion, most recent last
    open_pastes: list[tuple[InteractionEvent, Optional[InteractionEvent]]] = []

    def close_paste(paste: InteractionEvent, copy: Optional[InteractionEvent],
                    insertion: Optional[InsertionRecord]) -> None:
        pairs.append(CopyPastePair(paste=paste, copy=copy, insertion=insertion))

    for event in log.events:
        t = event.time or 0
        kind = event.kind
        if kind is EventKind.UNFOCUS:
            if focused:
                focus_intervals.append((interval_start, t))
                focused = False
        elif kind is EventKind.FOCUS:
            if not focused:
                interval_start = t
                focused = True
        elif kind is EventKind.COPY:
            open_copies.append(event)
        elif kind is EventKind.PASTE:
            copy = None
            for i in range(len(open_copies) - 1, -1, -1):
                if open_copies[i].text == event.text:
                    copy = open_copies.pop(i)
                    break
            open_pastes.append((event, copy))
        elif kind is EventKind.INSERTION:
            origin = ORIGIN_EXTERNAL
            matched_paste: Optional[int] = None
            in_window = [
                i for i, (p, _) in enumerate(open_pastes)
                if t - (p.time or 0) <= PASTE_PAIRING_WINDOW_MS
            ]
            for i in reversed(in_window):
                if open_pastes[i][0].text == event.text:
                    matched_paste = i
                    break
            if matched_paste is None and in_window:
                matched_paste = in_window[-1]
            record = InsertionRecord(
                time=t,
                text=event.text or "",
                line=event.line or "",
                origin=ORIGIN_PASTE if matched_paste is not None else ORIGIN_EXTERNAL,
            )
            insertions.append(record)
            if matched_paste is not None:
                paste, copy = open_pastes.pop(matched_paste)
                close_paste(paste, copy, record)
        elif kind is EventKind.DELETION:
            deletions.append(DeletionRecord(time=t, text=event.text or "", line=event.line or ""))

    if focused:
        focus_intervals.append((interval_start, end_time))

    for paste, copy in open_pastes:
        close_paste(paste, copy, None)

    return SessionTimeline(
        session_span=(start_time, end_time),
        focus_intervals=tuple(focus_intervals),
        insertions=tuple(insertions),
        deletions=tuple(deletions),
        copy_paste_pairs=tuple(pairs),
        unpaired_copies=tuple(open_copies),
    )


def extract_historical_lines(
    logs: list[SessionLog], include_line_field: bool = True
) -> HistoricalLineSet:
    """Collect the normalized line corpus from Insertion events, in event
    order across logs: each insertion's text split on newlines, then its
    line field (toggleable). Lines empty after normalization are dropped.
    """
    entries: list[HistoricalLine] = []
    for log_index, log in enumerate(logs):
        for event_index, event in enumerate(log.events):
            if event.kind is not EventKind.INSERTION:
                continue
            for text_line, raw in enumerate((event.text or "").split("\n")):
                normalized = normalize_line(raw)
                if normalized:
                    entries.append(
                        HistoricalLine(normalized, SourceRef(log_index, event_index, text_line))
                    )
            if include_line_field and event.line is not None:
                normalized = normalize_line(event.line)
                if normalized:
                    entries.append(
                        HistoricalLine(normalized, SourceRef(log_index, event_index, None))
                    )
    return HistoricalLineSet(tuple(entries))


def session_metrics(timeline: SessionTimeline) -> SessionMetrics:
    start, end = timeline.session_span
    focused = sum(b - a for a, b in timeline.focus_intervals)
    total = end - start
    return SessionMetrics(
        total_duration_ms=total,
        focused_ms=focused,
        unfocused_ms=total - focused,
        insertion_chars=sum(len(r.text) for r in timeline.insertions),
        deletion_chars=sum(len(r.text) for r in timeline.deletions),
        paste_count=len(timeline.copy_paste_pairs),
        external_insertion_count=sum(
            1 for r in timeline.insertions if r.origin == ORIGIN_EXTERNAL
        ),
    )


def timeline_to_dict(timeline: SessionTimeline) -> dict[str, Any]:
    """Canonical-document form of a timeline for downstream tooling."""
    return {
        "session_span": list(timeline.session_span),
        "focus_intervals": [list(pair) for pair in timeline.focus_intervals],
        "insertions": [
            {"time": r.time, "text": r.text, "line": r.line, "origin": r.origin}
            for r in timeline.insertions
        ],
        "deletions": [
            {"time": r.time, "text": r.text, "line": r.line} for r in timeline.deletions
        ],
        "copy_paste_pairs": [
            {
                "paste_time": p.paste.time,
                "copy_time": p.copy.time if p.copy else None,
                "insertion_time": p.insertion.time if p.insertion else None,
                "text": p.paste.text,
            }
            for p in timeline.copy_paste_pairs
        ],
        "unpaired_copies": [
            {"time": c.time, "text": c.text} for c in timeline.unpaired_copies
        ],
    }


def metrics_to_dict(metrics: SessionMetrics) -> dict[str, Any]:
    return {
        "total_duration_ms": metrics.total_duration_ms,
        "focused_ms": metrics.focused_ms,
        "unfocused_ms": metrics.unfocused_ms,
        "insertion_chars": metrics.insertion_chars,
        "deletion_chars": metrics.deletion_chars,
        "paste_count": metrics.paste_count,
        "external_insertion_count": metrics.external_insertion_count,
    }
