"""Append-only document store with two collections: ``user`` and
``interaction_logs``.

The reference backend writes one JSON record per line to a per-collection
log file (fsync on every write) and keeps an in-memory index rebuilt on
startup. Deletes are tombstone records, so recovery is a single forward
scan. The same `Repository` interface can front an external document
database.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from .events import SessionValidationError, log_from_dict, validate_session

USER_COLLECTION = "user"
LOG_COLLECTION = "interaction_logs"
COLLECTIONS = (USER_COLLECTION, LOG_COLLECTION)


class StorageError(RuntimeError):
    pass


@dataclass(frozen=True)
class StoredDocument:
    id: str
    collection: str
    body: dict[str, Any]
    stored_at: int


@dataclass(frozen=True)
class QueryFilter:
    """Conjunction of optional predicates over the indexed fields."""

    user_id: Optional[str] = None
    file_path: Optional[str] = None
    time_from: Optional[int] = None  # inclusive, against first-event time
    time_to: Optional[int] = None  # inclusive

    def matches(self, body: dict[str, Any]) -> bool:
        if self.user_id is not None and body.get("user_id") != self.user_id:
            return False
        if self.file_path is not None and body.get("file_path") != self.file_path:
            return False
        if self.time_from is not None or self.time_to is not None:
            first_time = _first_event_time(body)
            if first_time is None:
                return False
            if self.time_from is not None and first_time < self.time_from:
                return False
            if self.time_to is not None and first_time > self.time_to:
                return False
        return True


def _first_event_time(body: dict[str, Any]) -> Optional[int]:
    events = body.get("events")
    if isinstance(events, list) and events:
        first = events[0]
        if isinstance(first, dict) and isinstance(first.get("time"), int):
            return first["time"]
    return None


def _validate_user_body(body: dict[str, Any]) -> list[str]:
    violations = []
    for name in ("user_id", "username", "credential_hash", "permission"):
        if not isinstance(body.get(name), str) or not body[name]:
            violations.append(f"field {name} required")
    return violations


def _validate_log_body(body: dict[str, Any]) -> list[str]:
    try:
        log = log_from_dict(body)
    except (SessionValidationError, ValueError) as exc:
        if isinstance(exc, SessionValidationError):
            return exc.violations
        return [str(exc)]
    return validate_session(log)


_VALIDATORS: dict[str, Callable[[dict[str, Any]], list[str]]] = {
    USER_COLLECTION: _validate_user_body,
    LOG_COLLECTION: _validate_log_body,
}


class Repository:
    """File-backed reference store. Single writer per collection, many
    readers; all mutations serialized under one lock."""

    def __init__(self, directory: str | Path, clock: Optional[Callable[[], int]] = None):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._clock = clock or _epoch_ms
        self._lock = threading.Lock()
        self._index: dict[str, dict[str, StoredDocument]] = {c: {} for c in COLLECTIONS}
        self._recover()

    def _path(self, collection: str) -> Path:
        return self._dir / f"{collection}.log"

    def _recover(self) -> None:
        for collection in COLLECTIONS:
            path = self._path(collection)
            if not path.exists():
                continue
            with path.open("r", encoding="utf-8") as fh:
                for raw in fh:
                    raw = raw.strip()
                    if not raw:
                        continue
                    try:
                        record = json.loads(raw)
                    except json.JSONDecodeError:
                        # torn tail write from a crash; everything before it
                        # is intact, so stop the scan here
                        break
                    if record.get("op") == "delete":
                        self._index[collection].pop(record["id"], None)
                    else:
                        self._index[collection][record["id"]] = StoredDocument(
                            id=record["id"],
                            collection=collection,
                            body=record["body"],
                            stored_at=record["stored_at"],
                        )

    def _append(self, collection: str, record: dict[str, Any]) -> None:
        line = json.dumps(record, ensure_ascii=False, separators=(",", ":"))
        try:
            with self._path(collection).open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(str(exc)) from exc

    def insert(self, collection: str, body: dict[str, Any]) -> str:
        self._check_collection(collection)
        violations = _VALIDATORS[collection](body)
        if violations:
            raise SessionValidationError(violations)
        doc_id = uuid.uuid4().hex
        with self._lock:
            record = {
                "op": "insert",
                "id": doc_id,
                "stored_at": self._clock(),
                "body": body,
            }
            self._append(collection, record)
            self._index[collection][doc_id] = StoredDocument(
                id=doc_id, collection=collection, body=body, stored_at=record["stored_at"]
            )
        return doc_id

    def get(self, collection: str, doc_id: str) -> Optional[StoredDocument]:
        self._check_collection(collection)
        with self._lock:
            return self._index[collection].get(doc_id)

    def delete(self, collection: str, doc_id: str) -> bool:
        """Tombstone the document. Returns False when it was absent."""
        self._check_collection(collection)
        with self._lock:
            if doc_id not in self._index[collection]:
                return False
            self._append(collection, {"op": "delete", "id": doc_id})
            del self._index[collection][doc_id]
        return True

    def query(self, collection: str, where: Optional[QueryFilter] = None) -> list[StoredDocument]:
        """All documents matching the filter, sorted by (stored_at, id)."""
        self._check_collection(collection)
        where = where or QueryFilter()
        with self._lock:
            docs = list(self._index[collection].values())
        matched = [d for d in docs if where.matches(d.body)]
        matched.sort(key=lambda d: (d.stored_at, d.id))
        return matched

    def count(self, collection: str) -> int:
        self._check_collection(collection)
        with self._lock:
            return len(self._index[collection])

    def scan(self, collection: str) -> Iterable[StoredDocument]:
        return self.query(collection)

    @staticmethod
    def _check_collection(collection: str) -> None:
        if collection not in COLLECTIONS:
            raise StorageError(f"unknown collection {collection!r}")


def _epoch_ms() -> int:
    import time

    return int(time.time() * 1000)
