"""codetrail: editor interaction telemetry capture schema, ingestion
service, session reconstruction, and line-level authorship attribution."""

from .events import (
    EventKind,
    InteractionEvent,
    MalformedDocumentError,
    Permission,
    SessionLog,
    SessionValidationError,
    UserAccount,
    decode_log,
    encode_log,
    validate_event,
    validate_session,
)
from .classify import (
    ClassificationReport,
    EvaluationResult,
    LineLabel,
    LineLabelKind,
    classify_lines,
    classify_submission,
    evaluate,
    label_line,
    levenshtein,
    normalize_line,
    similarity,
)
from .store import QueryFilter, Repository, StoredDocument
from .timeline import (
    HistoricalLineSet,
    SessionMetrics,
    SessionTimeline,
    extract_historical_lines,
    reconstruct,
    session_metrics,
)

__all__ = [
    "EventKind",
    "InteractionEvent",
    "SessionLog",
    "UserAccount",
    "Permission",
    "MalformedDocumentError",
    "SessionValidationError",
    "validate_event",
    "validate_session",
    "encode_log",
    "decode_log",
    "Repository",
    "QueryFilter",
    "StoredDocument",
    "SessionTimeline",
    "SessionMetrics",
    "HistoricalLineSet",
    "reconstruct",
    "session_metrics",
    "extract_historical_lines",
    "LineLabelKind",
    "LineLabel",
    "ClassificationReport",
    "EvaluationResult",
    "normalize_line",
    "levenshtein",
    "similarity",
    "label_line",
    "classify_lines",
    "classify_submission",
    "evaluate",
]

__version__ = "0.1.0"
