"""Shared synthetic fixtures: a 10-line submission whose per-line scores
were verified against the edit-distance oracle (see oracle.py) before the
expected labels were frozen, plus a minimal well-formed session."""
from __future__ import annotations

from codetrail.events import EventKind, InteractionEvent, SessionLog

# Lines delivered by the (simulated) code generation tool.
HISTORY_LINES = [
    "def add(a, b):",
    "return a + b",
    "total = sum(values)",
    "print(total)",
    "for v in values:",
]

# Exact copies: oracle score 100 against their history line.
EXACT_LINES = list(HISTORY_LINES)

# Lightly edited: oracle best scores 92 and 90 (in [80, 94]).
EDITED_LINES = [
    "return a + c",
    "total = sum(values())",
]

# Novel: oracle best scores 17, 20, 24 (all < 80).
NOVEL_LINES = [
    "import os",
    "assert result == expected",
    "while queue and not done:",
]

FINAL_CODE = "\n".join(EXACT_LINES + EDITED_LINES + NOVEL_LINES) + "\n"

# AIGenerated / AIModified / UserWritten shares of the 10 labeled lines.
EXPECTED_SPLIT = (50.0, 20.0, 30.0)


def history_session(user_id: str = "subject-1",
                    session_id: str = "corpus-session") -> SessionLog:
    """One session whose insertions carry exactly the history lines."""
    events = [InteractionEvent(EventKind.START, 0)]
    t = 100
    for line in HISTORY_LINES:
        events.append(InteractionEvent(EventKind.INSERTION, t, text=line, line=line))
        t += 100
    events.append(InteractionEvent(EventKind.END, t))
    return SessionLog(
        session_id=session_id,
        user_id=user_id,
        file_path="src/solution.py",
        events=tuple(events),
        client_version="test",
    )


def minimal_session(user_id: str = "subject-1",
                    session_id: str = "minimal") -> SessionLog:
    return SessionLog(
        session_id=session_id,
        user_id=user_id,
        file_path="src/minimal.py",
        events=(
            InteractionEvent(EventKind.START, 0),
            InteractionEvent(EventKind.INSERTION, 5, text="abcd", line="abcd"),
            InteractionEvent(EventKind.END, 9),
        ),
        client_version="test",
    )
