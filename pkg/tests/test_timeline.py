import random

import pytest

from codetrail.events import EventKind, InteractionEvent, SessionLog
from codetrail.harness import random_session_log
from codetrail.timeline import (
    ORIGIN_EXTERNAL,
    ORIGIN_PASTE,
    extract_historical_lines,
    metrics_to_dict,
    reconstruct,
    session_metrics,
    timeline_to_dict,
)

from corpus import minimal_session


def session(*events):
    return SessionLog("s", "u", "f.py", tuple(events), "test")


START = lambda t: InteractionEvent(EventKind.START, t)
END = lambda t: InteractionEvent(EventKind.END, t)
FOCUS = lambda t: InteractionEvent(EventKind.FOCUS, t)
UNFOCUS = lambda t: InteractionEvent(EventKind.UNFOCUS, t)


def INS(t, text, line=None):
    return InteractionEvent(EventKind.INSERTION, t, text=text, line=line or text)


def DEL(t, text, line=None):
    return InteractionEvent(EventKind.DELETION, t, text=text, line=line or text)


def COPY(t, text):
    return InteractionEvent(EventKind.COPY, t, text=text)


def PASTE(t, text):
    return InteractionEvent(EventKind.PASTE, t, text=text)


class TestFocusAccounting:
    def test_focused_from_start(self):
        timeline = reconstruct(session(START(0), UNFOCUS(10), FOCUS(20), END(30)))
        assert timeline.focus_intervals == ((0, 10), (20, 30))

    def test_open_interval_closes_at_end(self):
        timeline = reconstruct(session(START(0), END(100)))
        assert timeline.focus_intervals == ((0, 100),)

    def test_unpaired_unfocus_closes_at_end(self):
        timeline = reconstruct(session(START(0), UNFOCUS(40), END(100)))
        assert timeline.focus_intervals == ((0, 40),)

    def test_redundant_focus_ignored(self):
        timeline = reconstruct(session(START(0), FOCUS(5), END(50)))
        assert timeline.focus_intervals == ((0, 50),)

    def test_intervals_disjoint_and_ordered(self):
        timeline = reconstruct(
            session(START(0), UNFOCUS(10), FOCUS(20), UNFOCUS(30), FOCUS(40), END(50))
        )
        flat = [t for pair in timeline.focus_intervals for t in pair]
        assert flat == sorted(flat)


class TestPairing:
    def test_copy_paste_insertion_chain(self):
        timeline = reconstruct(session(
            START(0), COPY(5, "x+1"), PASTE(8, "x+1"), INS(8, "x+1", "y = x+1"), END(9)
        ))
        assert len(timeline.copy_paste_pairs) == 1
        pair = timeline.copy_paste_pairs[0]
        assert pair.copy is not None and pair.copy.time == 5
        assert pair.paste.time == 8
        assert pair.insertion is not None and pair.insertion.origin == ORIGIN_PASTE
        assert timeline.unpaired_copies == ()

    def test_insertion_without_paste_is_external(self):
        timeline = reconstruct(session(START(0), INS(5, "def f():"), END(9)))
        assert timeline.insertions[0].origin == ORIGIN_EXTERNAL

    def test_insertion_outside_window_is_external(self):
        timeline = reconstruct(session(
            START(0), PASTE(10, "abcd"), INS(600, "abcd"), END(700)
        ))
        assert timeline.insertions[0].origin == ORIGIN_EXTERNAL
        assert timeline.copy_paste_pairs[0].insertion is None

    def test_transformed_paste_pairs_inside_window(self):
        timeline = reconstruct(session(
            START(0), PASTE(10, "x =1"), INS(200, "x = 1"), END(700)
        ))
        assert timeline.insertions[0].origin == ORIGIN_PASTE

    def test_unpaired_copy_reported(self):
        timeline = reconstruct(session(START(0), COPY(5, "orphan"), END(9)))
        assert [c.text for c in timeline.unpaired_copies] == ["orphan"]

    def test_pairing_soundness_random(self):
        rng = random.Random(3)
        for _ in range(200):
            timeline = reconstruct(random_session_log(rng))
            for pair in timeline.copy_paste_pairs:
                if pair.copy is not None:
                    assert pair.paste.time >= pair.copy.time
                if pair.insertion is not None:
                    assert 0 <= pair.insertion.time - pair.paste.time <= 500


class TestHistoricalLines:
    def test_split_and_line_field(self):
        log = session(START(0), INS(5, "a = 1\nb = 2", "a = 1"), END(9))
        got = extract_historical_lines([log])
        assert got.normalized_lines == ["a = 1", "b = 2", "a = 1"]

    def test_whitespace_only_dropped(self):
        log = session(START(0), INS(5, "    \n", "   "), END(9))
        assert extract_historical_lines([log]).normalized_lines == []

    def test_two_logs_concatenate_in_order(self):
        first = session(START(0), INS(5, "aaaa"), END(9))
        second = session(START(0), INS(5, "bbbb"), END(9))
        assert extract_historical_lines([first, second]).normalized_lines == \
            ["aaaa", "aaaa", "bbbb", "bbbb"]

    def test_line_field_toggle(self):
        log = session(START(0), INS(5, "a = 1", "b = 2"), END(9))
        assert extract_historical_lines([log], include_line_field=False).normalized_lines == \
            ["a = 1"]

    def test_non_insertion_events_excluded(self):
        log = session(START(0), COPY(3, "nope"), DEL(4, "gone"), PASTE(5, "nah"), END(9))
        assert extract_historical_lines([log]).normalized_lines == []


class TestMetrics:
    def test_empty_activity_session(self):
        metrics = session_metrics(reconstruct(session(START(0), END(100))))
        assert metrics.total_duration_ms == 100
        assert metrics.focused_ms == 100
        assert metrics.unfocused_ms == 0
        assert metrics.insertion_chars == 0 and metrics.deletion_chars == 0

    def test_copy_paste_counts(self):
        metrics = session_metrics(reconstruct(session(
            START(0), COPY(5, "x+1"), PASTE(8, "x+1"), INS(8, "x+1", "y = x+1"), END(9)
        )))
        assert metrics.paste_count == 1
        assert metrics.external_insertion_count == 0

    def test_conservation_against_interval_sum_oracle(self):
        rng = random.Random(11)
        for _ in range(300):
            log = random_session_log(rng)
            timeline = reconstruct(log)
            metrics = session_metrics(timeline)
            span = timeline.session_span[1] - timeline.session_span[0]
            focused = sum(b - a for a, b in timeline.focus_intervals)
            assert metrics.focused_ms == focused
            assert metrics.focused_ms + metrics.unfocused_ms == span
            assert metrics.total_duration_ms == span

    def test_every_insertion_in_one_origin_class(self):
        rng = random.Random(13)
        for _ in range(300):
            timeline = reconstruct(random_session_log(rng))
            for record in timeline.insertions:
                assert record.origin in (ORIGIN_PASTE, ORIGIN_EXTERNAL)


class TestDeterminismAndExport:
    def test_reconstruct_is_pure(self):
        log = random_session_log(random.Random(5))
        assert reconstruct(log) == reconstruct(log)

    def test_exports_are_canonical_documents(self):
        timeline = reconstruct(minimal_session())
        doc = timeline_to_dict(timeline)
        assert set(doc) == {"session_span", "focus_intervals", "insertions",
                            "deletions", "copy_paste_pairs", "unpaired_copies"}
        mdoc = metrics_to_dict(session_metrics(timeline))
        assert mdoc["insertion_chars"] == 4
