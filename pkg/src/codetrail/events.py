"""Event and session types, validation, and the canonical wire codec.

This module is the single source of truth for the wire format: the eight
event kinds, which fields each kind may carry, session-level ordering
rules, and the canonical JSON document that crosses every boundary
(plugin -> service -> store -> analysis).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class EventKind(str, Enum):
    START = "Start"
    END = "End"
    INSERTION = "Insertion"
    DELETION = "Deletion"
    FOCUS = "Focus"
    UNFOCUS = "Unfocus"
    COPY = "Copy"
    PASTE = "Paste"


# Field applicability matrix: which optional fields each kind carries.
# Kinds absent from a set must not carry that field; kinds present must.
_TEXT_KINDS = frozenset(
    {EventKind.INSERTION, EventKind.DELETION, EventKind.COPY, EventKind.PASTE}
)
_LINE_KINDS = frozenset({EventKind.INSERTION, EventKind.DELETION})

# Insertions shorter than this are keystroke noise and invalid on the wire.
MIN_INSERTION_CHARS = 4


class Permission(str, Enum):
    SUBJECT = "Subject"
    ANALYST = "Analyst"
    ADMIN = "Admin"


@dataclass(frozen=True)
class InteractionEvent:
    """One timestamped editor event. Immutable after construction."""

    kind: EventKind
    time: Optional[int]
    text: Optional[str] = None
    line: Optional[str] = None


@dataclass(frozen=True)
class SessionLog:
    """Ordered per-file, per-user event stream bracketed by Start and End."""

    session_id: str
    user_id: str
    file_path: str
    events: tuple[InteractionEvent, ...]
    client_version: str = "0"

    def __post_init__(self) -> None:
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    username: str
    credential_hash: str
    permission: Permission
    created_at: int


class MalformedDocumentError(ValueError):
    """Document cannot be parsed into the model at all (bad JSON, wrong
    shapes, unknown event kind). Distinct from validation failure, which
    means the document parsed but violates schema invariants."""


class SessionValidationError(ValueError):
    """Parsed document violates schema invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def validate_event(event: InteractionEvent) -> list[str]:
    """Return the list of violated rules; empty list means the event is valid."""
    violations: list[str] = []
    kind = event.kind

    if event.time is None:
        violations.append("time required")
    elif event.time < 0:
        violations.append("time must be a non-negative integer")

    if kind in _TEXT_KINDS:
        if event.text is None:
            violations.append(f"field text required for {kind.value}")
        elif kind is EventKind.INSERTION:
            if len(event.text) < MIN_INSERTION_CHARS:
                violations.append("insertion payload ≤ 3 chars")
        elif event.text == "":
            violations.append(f"field text empty for {kind.value}")
    elif event.text is not None:
        violations.append(f"field text not applicable to {kind.value}")

    if kind in _LINE_KINDS:
        if event.line is None:
            violations.append(f"field line required for {kind.value}")
    elif event.line is not None:
        violations.append(f"field line not applicable to {kind.value}")

    return violations


def validate_session(log: SessionLog) -> list[str]:
    """Return all session-level and per-event violations; empty means valid."""
    violations: list[str] = []

    if not log.session_id:
        violations.append("session_id required")
    if not log.user_id:
        violations.append("user_id required")
    if not log.file_path:
        violations.append("file_path required")

    if not log.events:
        violations.append("events must be non-empty")
        return violations

    if log.events[0].kind is not EventKind.START:
        violations.append("first event must be Start")
    if log.events[-1].kind is not EventKind.END:
        violations.append("last event must be End")

    prev_time: Optional[int] = None
    for i, event in enumerate(log.events):
        for v in validate_event(event):
            violations.append(f"event {i}: {v}")
        if event.time is not None:
            if prev_time is not None and event.time < prev_time:
                violations.append("non-monotonic timestamps")
                prev_time = event.time  # report once per descent
            else:
                prev_time = event.time

    return violations


def event_to_dict(event: InteractionEvent) -> dict[str, Any]:
    """Canonical field order: type, time, text, line. Absent means absent."""
    doc: dict[str, Any] = {"type": event.kind.value, "time": event.time}
    if event.text is not None:
        doc["text"] = event.text
    if event.line is not None:
        doc["line"] = event.line
    return doc


def log_to_dict(log: SessionLog) -> dict[str, Any]:
    return {
        "session_id": log.session_id,
        "user_id": log.user_id,
        "file_path": log.file_path,
        "client_version": log.client_version,
        "events": [event_to_dict(e) for e in log.events],
    }


def encode_log(log: SessionLog) -> str:
    """Serialize a valid SessionLog to its canonical document.

    Byte-stable for equal inputs: fixed field order, no extra whitespace,
    non-ASCII preserved as-is.
    """
    violations = validate_session(log)
    if violations:
        raise SessionValidationError(violations)
    return json.dumps(log_to_dict(log), ensure_ascii=False, separators=(",", ":"))


_TOP_FIELDS = ("session_id", "user_id", "file_path", "client_version")
_EVENT_FIELDS = frozenset({"type", "time", "text", "line"})
_KIND_BY_TAG = {k.value: k for k in EventKind}


def event_from_dict(doc: Any, violations: Optional[list[str]] = None) -> InteractionEvent:
    """Build an InteractionEvent from a decoded JSON object.

    Shape errors raise MalformedDocumentError. Null-valued fields are
    representable mistakes and are appended to `violations` instead (null
    is not absent on the wire).
    """
    if not isinstance(doc, dict):
        raise MalformedDocumentError("event must be an object")
    unknown = set(doc) - _EVENT_FIELDS
    if unknown:
        raise MalformedDocumentError(f"unknown event field {sorted(unknown)[0]!r}")

    tag = doc.get("type")
    if tag not in _KIND_BY_TAG:
        raise MalformedDocumentError(f"unknown event kind {tag!r}")

    time = doc.get("time")
    if time is not None and (not isinstance(time, int) or isinstance(time, bool)):
        raise MalformedDocumentError("event time must be an integer")

    out_text: Optional[str] = None
    out_line: Optional[str] = None
    for name in ("text", "line"):
        if name not in doc:
            continue
        value = doc[name]
        if value is None:
            if violations is not None:
                violations.append(f"field {name} must not be null")
            continue
        if not isinstance(value, str):
            raise MalformedDocumentError(f"event {name} must be a string")
        if name == "text":
            out_text = value
        else:
            out_line = value

    return InteractionEvent(kind=_KIND_BY_TAG[tag], time=time, text=out_text, line=out_line)


def log_from_dict(doc: Any) -> SessionLog:
    """Build a SessionLog from a decoded JSON object without validating it."""
    if not isinstance(doc, dict):
        raise MalformedDocumentError("document must be an object")
    for name in _TOP_FIELDS:
        value = doc.get(name)
        if not isinstance(value, str):
            raise MalformedDocumentError(f"field {name} must be a string")
    events_doc = doc.get("events")
    if not isinstance(events_doc, list):
        raise MalformedDocumentError("field events must be an array")

    null_violations: list[str] = []
    events = []
    for i, event_doc in enumerate(events_doc):
        before = len(null_violations)
        event = event_from_dict(event_doc, null_violations)
        null_violations[before:] = [f"event {i}: {v}" for v in null_violations[before:]]
        events.append(event)

    log = SessionLog(
        session_id=doc["session_id"],
        user_id=doc["user_id"],
        file_path=doc["file_path"],
        client_version=doc["client_version"],
        events=tuple(events),
    )
    if null_violations:
        raise SessionValidationError(null_violations + validate_session(log))
    return log


def decode_log(document: str) -> SessionLog:
    """Parse and validate a canonical document.

    Raises MalformedDocumentError for unparseable input and
    SessionValidationError (carrying the same violation names as
    validate_session) for parseable but invalid documents.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"invalid JSON: {exc}") from exc
    log = log_from_dict(doc)
    violations = validate_session(log)
    if violations:
        raise SessionValidationError(violations)
    return log
