import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from codetrail.events import (
    EventKind,
    InteractionEvent,
    MalformedDocumentError,
    SessionLog,
    SessionValidationError,
    decode_log,
    encode_log,
    log_to_dict,
    validate_event,
    validate_session,
)
from codetrail.harness import random_session_log

from corpus import minimal_session

TIME_ONLY = (EventKind.START, EventKind.END, EventKind.FOCUS, EventKind.UNFOCUS)
TIME_TEXT = (EventKind.COPY, EventKind.PASTE)
TIME_TEXT_LINE = (EventKind.INSERTION, EventKind.DELETION)


def valid_event(kind: EventKind, time: int = 1000) -> InteractionEvent:
    if kind in TIME_ONLY:
        return InteractionEvent(kind, time)
    if kind in TIME_TEXT:
        return InteractionEvent(kind, time, text="some text")
    return InteractionEvent(kind, time, text="some text", line="a line")


class TestEventFieldMatrix:
    @pytest.mark.parametrize("kind", list(EventKind))
    def test_canonical_shape_is_valid(self, kind):
        assert validate_event(valid_event(kind)) == []

    @pytest.mark.parametrize("kind", TIME_ONLY + TIME_TEXT)
    def test_disallowed_line_is_named(self, kind):
        event = InteractionEvent(kind, 1000, text="some text" if kind in TIME_TEXT else None,
                                 line="sneaky")
        assert f"field line not applicable to {kind.value}" in validate_event(event)

    @pytest.mark.parametrize("kind", TIME_ONLY)
    def test_disallowed_text_is_named(self, kind):
        event = InteractionEvent(kind, 1000, text="x")
        assert f"field text not applicable to {kind.value}" in validate_event(event)

    @pytest.mark.parametrize("kind", TIME_TEXT + TIME_TEXT_LINE)
    def test_missing_text_is_named(self, kind):
        event = InteractionEvent(kind, 1000, line="a line" if kind in TIME_TEXT_LINE else None)
        assert f"field text required for {kind.value}" in validate_event(event)

    @pytest.mark.parametrize("kind", TIME_TEXT_LINE)
    def test_missing_line_is_named(self, kind):
        event = InteractionEvent(kind, 1000, text="some text")
        assert f"field line required for {kind.value}" in validate_event(event)

    @pytest.mark.parametrize("kind", list(EventKind))
    def test_missing_time_is_named(self, kind):
        event = valid_event(kind)
        assert "time required" in validate_event(
            InteractionEvent(kind, None, text=event.text, line=event.line)
        )

    def test_negative_time(self):
        assert "time must be a non-negative integer" in validate_event(
            InteractionEvent(EventKind.FOCUS, -1)
        )

    def test_focus_time_only_ok(self):
        assert validate_event(InteractionEvent(EventKind.FOCUS, 1000)) == []


class TestInsertionThreshold:
    def test_three_chars_rejected(self):
        event = InteractionEvent(EventKind.INSERTION, 1000, text="abc", line="abc")
        assert "insertion payload ≤ 3 chars" in validate_event(event)

    def test_four_chars_accepted(self):
        event = InteractionEvent(EventKind.INSERTION, 1000, text="abcd", line="abcd")
        assert validate_event(event) == []

    def test_unicode_scalars_counted(self):
        # four scalar values, no trimming
        event = InteractionEvent(EventKind.INSERTION, 1000, text="é ñ\t", line="x")
        assert validate_event(event) == []

    @pytest.mark.parametrize("kind", (EventKind.DELETION, EventKind.COPY, EventKind.PASTE))
    def test_empty_payload_rejected(self, kind):
        event = InteractionEvent(kind, 1000, text="",
                                 line="l" if kind is EventKind.DELETION else None)
        assert f"field text empty for {kind.value}" in validate_event(event)

    def test_single_char_deletion_valid(self):
        event = InteractionEvent(EventKind.DELETION, 1000, text="x", line="x = 1")
        assert validate_event(event) == []


class TestSessionValidation:
    def test_minimal_session_ok(self):
        assert validate_session(minimal_session()) == []

    def test_missing_start(self):
        log = minimal_session()
        log = SessionLog(log.session_id, log.user_id, log.file_path, log.events[1:],
                         log.client_version)
        assert "first event must be Start" in validate_session(log)

    def test_missing_end(self):
        log = minimal_session()
        log = SessionLog(log.session_id, log.user_id, log.file_path, log.events[:-1],
                         log.client_version)
        assert "last event must be End" in validate_session(log)

    def test_non_monotonic_timestamps(self):
        log = SessionLog("s", "u", "f", (
            InteractionEvent(EventKind.START, 10),
            InteractionEvent(EventKind.END, 5),
        ))
        assert "non-monotonic timestamps" in validate_session(log)

    def test_empty_events(self):
        log = SessionLog("s", "u", "f", ())
        assert "events must be non-empty" in validate_session(log)

    def test_per_event_violations_carry_index(self):
        log = SessionLog("s", "u", "f", (
            InteractionEvent(EventKind.START, 0),
            InteractionEvent(EventKind.INSERTION, 5, text="abc", line="abc"),
            InteractionEvent(EventKind.END, 9),
        ))
        assert "event 1: insertion payload ≤ 3 chars" in validate_session(log)

    def test_equal_timestamps_allowed(self):
        log = SessionLog("s", "u", "f", (
            InteractionEvent(EventKind.START, 5),
            InteractionEvent(EventKind.END, 5),
        ))
        assert validate_session(log) == []


class TestCodec:
    def test_round_trip_minimal(self):
        log = minimal_session()
        assert decode_log(encode_log(log)) == log

    def test_encode_is_byte_stable(self):
        log = minimal_session()
        assert encode_log(log) == encode_log(minimal_session())

    def test_canonical_field_order(self):
        document = encode_log(minimal_session())
        top = list(json.loads(document).keys())
        assert top == ["session_id", "user_id", "file_path", "client_version", "events"]

    def test_unknown_kind_is_malformed(self):
        doc = log_to_dict(minimal_session())
        doc["events"][0]["type"] = "Hover"
        with pytest.raises(MalformedDocumentError):
            decode_log(json.dumps(doc))

    def test_unparseable_is_malformed(self):
        with pytest.raises(MalformedDocumentError):
            decode_log("{not json")

    def test_missing_time_is_validation_error(self):
        doc = log_to_dict(minimal_session())
        del doc["events"][1]["time"]
        with pytest.raises(SessionValidationError) as exc:
            decode_log(json.dumps(doc))
        assert any("time required" in v for v in exc.value.violations)

    def test_null_field_is_validation_error(self):
        doc = log_to_dict(minimal_session())
        doc["events"][0]["text"] = None
        with pytest.raises(SessionValidationError) as exc:
            decode_log(json.dumps(doc))
        assert any("must not be null" in v for v in exc.value.violations)

    def test_string_time_is_malformed(self):
        doc = log_to_dict(minimal_session())
        doc["events"][0]["time"] = "0"
        with pytest.raises(MalformedDocumentError):
            decode_log(json.dumps(doc))

    def test_unknown_event_field_is_malformed(self):
        doc = log_to_dict(minimal_session())
        doc["events"][0]["cursor"] = 3
        with pytest.raises(MalformedDocumentError):
            decode_log(json.dumps(doc))

    def test_encode_rejects_invalid_log(self):
        log = SessionLog("s", "u", "f", (InteractionEvent(EventKind.END, 0),))
        with pytest.raises(SessionValidationError):
            encode_log(log)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**9))
    def test_round_trip_random_logs(self, seed):
        log = random_session_log(random.Random(seed))
        assert decode_log(encode_log(log)) == log

    def test_decode_names_session_violations(self):
        doc = log_to_dict(minimal_session())
        doc["events"] = doc["events"][1:]
        with pytest.raises(SessionValidationError) as exc:
            decode_log(json.dumps(doc))
        assert "first event must be Start" in exc.value.violations
