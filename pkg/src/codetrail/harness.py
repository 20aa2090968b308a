"""Synthetic validation harness: seeded scenario generators, greedy
order-preserving event scoring (precision/recall), and end-to-end runs
against either the in-process pipeline or a live service instance."""
from __future__ import annotations

import random
import threading
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .events import (
    EventKind,
    InteractionEvent,
    SessionLog,
    decode_log,
    encode_log,
    log_from_dict,
    validate_session,
)

SCENARIO_NAMES = (
    "insertion_accuracy",
    "deletion_detection",
    "copy_paste",
    "focus_switching",
    "back_and_forth",
    "multi_file",
    "load_single_user",
    "concurrent_users",
)

# Table 2 analogs whose synthetic runs must score a perfect 1.00/1.00.
PERFECT_SCENARIOS = (
    "insertion_accuracy",
    "deletion_detection",
    "back_and_forth",
    "multi_file",
    "concurrent_users",
)

_SNIPPETS = (
    "total = total + value",
    "def handler(request):",
    "return response.json()",
    "for item in items:",
    "if count > threshold:",
    "result = compute(data)",
    "print(f\"done: {result}\")",
    "items.sort(key=len)",
    "with open(path) as fh:",
    "raise ValueError(msg)",
)


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    sessions: tuple[SessionLog, ...]  # scripted sessions, already bracketed

    @property
    def expected_events(self) -> dict[str, tuple[InteractionEvent, ...]]:
        return {s.session_id: s.events for s in self.sessions}


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    precision: Fraction
    recall: Fraction
    matched: int
    observed: int
    expected: int
    mismatches: tuple[tuple[Optional[str], Optional[str]], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.name,
            "precision": float(self.precision),
            "recall": float(self.recall),
            "matched": self.matched,
            "observed": self.observed,
            "expected": self.expected,
            "mismatch_count": len(self.mismatches),
        }


def _event_key(event: InteractionEvent) -> tuple:
    return (event.kind.value, event.text, event.line)


def _lcs_matches(keys_e: list[tuple], keys_o: list[tuple]) -> tuple[set[int], set[int]]:
    """Indices of expected/observed events in an optimal order-preserving
    matching (longest common subsequence of the match keys)."""
    n, m = len(keys_e), len(keys_o)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            if keys_e[i] == keys_o[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])
    matched_e: set[int] = set()
    matched_o: set[int] = set()
    i = j = 0
    while i < n and j < m:
        if keys_e[i] == keys_o[j]:
            matched_e.add(i)
            matched_o.add(j)
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return matched_e, matched_o


def score(expected: list[InteractionEvent], observed: list[InteractionEvent],
          name: str = "") -> ScenarioResult:
    """Order-preserving matching on (kind, text, line); timestamps only
    constrain relative order. Events are paired by the best matching that
    keeps both streams' order (a greedy first-fit would let one spurious
    event steal a later genuine one and corrupt recall). Unmatched
    observed events cost precision, unmatched expected events cost
    recall; empty-over-empty scores 1."""
    keys_e = [_event_key(e) for e in expected]
    keys_o = [_event_key(e) for e in observed]
    if keys_e == keys_o:
        matched_e = set(range(len(keys_e)))
        matched_o = set(range(len(keys_o)))
    else:
        matched_e, matched_o = _lcs_matches(keys_e, keys_o)
    matched = len(matched_e)

    mismatches: list[tuple[Optional[str], Optional[str]]] = []
    for j, key in enumerate(keys_e):
        if j not in matched_e:
            mismatches.append((repr(key), None))
    for j, key in enumerate(keys_o):
        if j not in matched_o:
            mismatches.append((None, repr(key)))

    precision = Fraction(matched, len(observed)) if observed else Fraction(1)
    recall = Fraction(matched, len(expected)) if expected else Fraction(1)
    return ScenarioResult(
        name=name,
        precision=precision,
        recall=recall,
        matched=matched,
        observed=len(observed),
        expected=len(expected),
        mismatches=tuple(mismatches),
    )


def _combine(name: str, results: list[ScenarioResult]) -> ScenarioResult:
    matched = sum(r.matched for r in results)
    observed = sum(r.observed for r in results)
    expected = sum(r.expected for r in results)
    mismatches: list[tuple[Optional[str], Optional[str]]] = []
    for r in results:
        mismatches.extend(r.mismatches)
    return ScenarioResult(
        name=name,
        precision=Fraction(matched, observed) if observed else Fraction(1),
        recall=Fraction(matched, expected) if expected else Fraction(1),
        matched=matched,
        observed=observed,
        expected=expected,
        mismatches=tuple(mismatches),
    )


# -- scenario generation ------------------------------------------------------


def _snippet(rng: random.Random) -> str:
    return rng.choice(_SNIPPETS)


def _session(events: list[InteractionEvent], user_id: str, file_path: str,
             rng: random.Random) -> SessionLog:
    return SessionLog(
        session_id=uuid.UUID(int=rng.getrandbits(128)).hex,
        user_id=user_id,
        file_path=file_path,
        events=tuple(events),
        client_version="harness-1",
    )


class _Clock:
    def __init__(self, rng: random.Random, start: int = 0):
        self.rng = rng
        self.t = start

    def tick(self, max_step: int = 2000) -> int:
        self.t += self.rng.randint(1, max_step)
        return self.t


def _insertion(clock: _Clock, rng: random.Random) -> InteractionEvent:
    text = _snippet(rng)
    return InteractionEvent(EventKind.INSERTION, clock.tick(), text=text, line=text)


def _deletion(clock: _Clock, rng: random.Random) -> InteractionEvent:
    text = _snippet(rng)[: rng.randint(1, 12)]
    return InteractionEvent(EventKind.DELETION, clock.tick(), text=text, line=text)


def generate(name: str, seed: int, **params: int) -> Scenario:
    """Build the named scenario deterministically from the seed.

    Size knobs (all optional): ``events`` for the single-session
    scenarios, ``files`` for multi_file, ``users`` and ``logs_per_user``
    for concurrent_users.
    """
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}")
    rng = random.Random((name, seed).__repr__())
    sessions: list[SessionLog] = []

    def bracketed(middle: list[InteractionEvent], clock: _Clock, user: str,
                  path: str, start: int) -> SessionLog:
        events = [InteractionEvent(EventKind.START, start)] + middle + [
            InteractionEvent(EventKind.END, clock.tick())
        ]
        return _session(events, user, path, rng)

    if name in ("insertion_accuracy", "deletion_detection", "back_and_forth",
                "focus_switching", "copy_paste", "load_single_user"):
        n = params.get("events", 1000 if name == "load_single_user" else 20)
        clock = _Clock(rng)
        start = clock.t
        middle: list[InteractionEvent] = []
        if name == "insertion_accuracy":
            middle = [_insertion(clock, rng) for _ in range(n)]
        elif name == "deletion_detection":
            for _ in range(n):
                middle.append(_insertion(clock, rng) if rng.random() < 0.5
                              else _deletion(clock, rng))
        elif name == "back_and_forth":
            for i in range(n):
                middle.append(_insertion(clock, rng) if i % 2 == 0
                              else _deletion(clock, rng))
        elif name == "focus_switching":
            for _ in range(max(1, n // 2)):
                middle.append(InteractionEvent(EventKind.UNFOCUS, clock.tick()))
                middle.append(InteractionEvent(EventKind.FOCUS, clock.tick()))
        elif name == "copy_paste":
            for _ in range(max(1, n // 3)):
                text = _snippet(rng)
                middle.append(InteractionEvent(EventKind.COPY, clock.tick(), text=text))
                middle.append(InteractionEvent(EventKind.PASTE, clock.tick(100), text=text))
                middle.append(InteractionEvent(EventKind.INSERTION, clock.tick(100),
                                               text=text, line=text))
        else:  # load_single_user: all kinds mixed
            for i in range(n):
                roll = rng.random()
                if roll < 0.45:
                    middle.append(_insertion(clock, rng))
                elif roll < 0.75:
                    middle.append(_deletion(clock, rng))
                elif roll < 0.85:
                    text = _snippet(rng)
                    middle.append(InteractionEvent(EventKind.COPY, clock.tick(), text=text))
                elif roll < 0.95:
                    text = _snippet(rng)
                    middle.append(InteractionEvent(EventKind.PASTE, clock.tick(), text=text))
                else:
                    middle.append(InteractionEvent(EventKind.UNFOCUS, clock.tick()))
                    middle.append(InteractionEvent(EventKind.FOCUS, clock.tick()))
        sessions.append(bracketed(middle, clock, f"user-{seed}", "src/main.py", start))

    elif name == "multi_file":
        files = params.get("files", 3)
        for f in range(max(2, files)):
            clock = _Clock(rng, start=f * 1_000_000)
            start = clock.t
            middle = [_insertion(clock, rng) for _ in range(params.get("events", 8))]
            sessions.append(bracketed(middle, clock, f"user-{seed}", f"src/file_{f}.py", start))

    elif name == "concurrent_users":
        users = max(2, params.get("users", 2))
        logs_per_user = params.get("logs_per_user", 3)
        for u in range(users):
            for s in range(logs_per_user):
                clock = _Clock(rng, start=s * 1_000_000)
                start = clock.t
                middle = [_insertion(clock, rng) for _ in range(params.get("events", 5))]
                sessions.append(
                    bracketed(middle, clock, f"user-{u}", f"src/u{u}_s{s}.py", start)
                )

    scenario = Scenario(name=name, seed=seed, sessions=tuple(sessions))
    for session in scenario.sessions:
        violations = validate_session(session)
        if violations:
            raise AssertionError(f"generated session invalid: {violations}")
    return scenario


def random_session_log(rng: random.Random, user_id: str = "user-r",
                       file_path: str = "src/random.py",
                       max_events: int = 40) -> SessionLog:
    """A structurally valid random session mixing all eight kinds; used by
    round-trip and conservation property checks."""
    clock = _Clock(rng)
    start = clock.t
    middle: list[InteractionEvent] = []
    for _ in range(rng.randint(0, max_events)):
        roll = rng.random()
        if roll < 0.35:
            middle.append(_insertion(clock, rng))
        elif roll < 0.55:
            middle.append(_deletion(clock, rng))
        elif roll < 0.65:
            middle.append(InteractionEvent(EventKind.COPY, clock.tick(), text=_snippet(rng)))
        elif roll < 0.80:
            text = _snippet(rng)
            middle.append(InteractionEvent(EventKind.PASTE, clock.tick(), text=text))
            if rng.random() < 0.7:
                middle.append(InteractionEvent(EventKind.INSERTION, clock.tick(400),
                                               text=text, line=text))
        elif roll < 0.90:
            middle.append(InteractionEvent(EventKind.UNFOCUS, clock.tick()))
        else:
            middle.append(InteractionEvent(EventKind.FOCUS, clock.tick()))
    events = [InteractionEvent(EventKind.START, start)] + middle + [
        InteractionEvent(EventKind.END, clock.tick())
    ]
    return _session(events, user_id, file_path, rng)


# -- pipeline runs ------------------------------------------------------------


def _inject_spurious(events: list[InteractionEvent], rate: float,
                     rng: random.Random) -> list[InteractionEvent]:
    """Insert spurious Focus events into the observed stream, mimicking
    window-manager noise."""
    out: list[InteractionEvent] = []
    for event in events:
        out.append(event)
        if rng.random() < rate:
            out.append(InteractionEvent(EventKind.FOCUS, event.time))
    return out


def run_in_process(scenario: Scenario, spurious_rate: float = 0.0,
                   noise_seed: int = 0) -> ScenarioResult:
    """Push every session through encode -> decode -> validate and score
    the observed streams against the scripted ground truth."""
    rng = random.Random(noise_seed)
    results = []
    for session in scenario.sessions:
        observed_log = decode_log(encode_log(session))
        observed = list(observed_log.events)
        if spurious_rate > 0:
            observed = _inject_spurious(observed, spurious_rate, rng)
        results.append(score(list(session.events), observed, scenario.name))
    return _combine(scenario.name, results)


def run_against_service(scenario: Scenario, base_url: str, token_by_user: dict[str, str],
                        parallel: bool = True, timeout: float = 30.0,
                        workers: int = 10) -> ScenarioResult:
    """Submit every session over HTTP, read each user's logs back, and
    score what the store returns against the scripted ground truth.

    Submissions run on a worker pool with one persistent connection per
    worker; per-request connection setup would dominate large runs."""
    import httpx
    from concurrent.futures import ThreadPoolExecutor

    errors: list[str] = []
    local = threading.local()

    def client() -> httpx.Client:
        if not hasattr(local, "client"):
            local.client = httpx.Client(base_url=base_url, timeout=timeout)
        return local.client

    def submit(session: SessionLog) -> None:
        token = token_by_user[session.user_id]
        response = client().post(
            "/logs",
            content=encode_log(session).encode("utf-8"),
            headers={"authorization": f"Bearer {token}",
                     "content-type": "application/json"},
        )
        if response.status_code != 201:
            errors.append(f"{session.session_id}: {response.status_code} {response.text}")

    if parallel:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(submit, scenario.sessions))
    else:
        for session in scenario.sessions:
            submit(session)
    if errors:
        raise RuntimeError("submission failures: " + "; ".join(errors[:5]))

    observed_by_session: dict[str, SessionLog] = {}
    with httpx.Client(base_url=base_url, timeout=timeout) as reader:
        for user_id, token in token_by_user.items():
            response = reader.get(
                "/logs",
                params={"user_id": user_id},
                headers={"authorization": f"Bearer {token}"},
            )
            response.raise_for_status()
            for body in response.json()["logs"]:
                log = log_from_dict(body)
                observed_by_session[log.session_id] = log

    results = []
    for session in scenario.sessions:
        found = observed_by_session.get(session.session_id)
        observed = list(found.events) if found else []
        if found is not None and found.user_id != session.user_id:
            observed = []  # misattributed logs count as lost
        results.append(score(list(session.events), observed, scenario.name))
    return _combine(scenario.name, results)


def format_report(results: list[ScenarioResult]) -> str:
    header = f"{'scenario':<20} {'precision':>9} {'recall':>7} {'mismatches':>10}"
    rows = [header, "-" * len(header)]
    for r in results:
        rows.append(
            f"{r.name:<20} {float(r.precision):>9.2f} {float(r.recall):>7.2f} "
            f"{len(r.mismatches):>10}"
        )
    return "\n".join(rows)
