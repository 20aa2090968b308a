import json
import random

import pytest

from codetrail.events import SessionValidationError, log_to_dict
from codetrail.harness import random_session_log
from codetrail.store import (
    LOG_COLLECTION,
    USER_COLLECTION,
    QueryFilter,
    Repository,
    StorageError,
)

from corpus import minimal_session


def user_body(name="alice", user_id="u1", permission="Subject", **extra):
    body = {
        "user_id": user_id,
        "username": name,
        "credential_hash": "pbkdf2-sha256$1$00$00",
        "permission": permission,
        "created_at": 0,
    }
    body.update(extra)
    return body


@pytest.fixture
def repo(tmp_path):
    return Repository(tmp_path)


class TestInsertGetDelete:
    def test_insert_then_get(self, repo):
        body = log_to_dict(minimal_session())
        doc_id = repo.insert(LOG_COLLECTION, body)
        stored = repo.get(LOG_COLLECTION, doc_id)
        assert stored is not None and stored.body == body

    def test_invalid_body_rejected_store_unchanged(self, repo):
        with pytest.raises(SessionValidationError):
            repo.insert(LOG_COLLECTION, {"session_id": "x"})
        assert repo.count(LOG_COLLECTION) == 0

    def test_two_inserts_distinct_ids(self, repo):
        body = log_to_dict(minimal_session())
        assert repo.insert(LOG_COLLECTION, body) != repo.insert(LOG_COLLECTION, body)

    def test_get_unknown_absent(self, repo):
        assert repo.get(USER_COLLECTION, "nope") is None

    def test_delete_then_get_absent(self, repo):
        doc_id = repo.insert(USER_COLLECTION, user_body())
        assert repo.delete(USER_COLLECTION, doc_id) is True
        assert repo.get(USER_COLLECTION, doc_id) is None

    def test_delete_twice_reports_absent(self, repo):
        doc_id = repo.insert(USER_COLLECTION, user_body())
        assert repo.delete(USER_COLLECTION, doc_id) is True
        assert repo.delete(USER_COLLECTION, doc_id) is False

    def test_unknown_collection(self, repo):
        with pytest.raises(StorageError):
            repo.insert("tokens", {})


class TestRecovery:
    def test_reopen_preserves_documents(self, tmp_path):
        repo = Repository(tmp_path)
        body = log_to_dict(minimal_session())
        doc_id = repo.insert(LOG_COLLECTION, body)
        user_id = repo.insert(USER_COLLECTION, user_body())
        repo.delete(USER_COLLECTION, user_id)

        reopened = Repository(tmp_path)
        assert reopened.get(LOG_COLLECTION, doc_id).body == body
        assert reopened.get(USER_COLLECTION, user_id) is None

    def test_torn_tail_write_is_dropped(self, tmp_path):
        repo = Repository(tmp_path)
        doc_id = repo.insert(USER_COLLECTION, user_body())
        path = tmp_path / "user.log"
        with path.open("a", encoding="utf-8") as fh:
            fh.write('{"op":"insert","id":"torn","stor')  # crash mid-record

        reopened = Repository(tmp_path)
        assert reopened.get(USER_COLLECTION, doc_id) is not None
        assert reopened.get(USER_COLLECTION, "torn") is None

    def test_extra_fields_survive_round_trip(self, tmp_path):
        repo = Repository(tmp_path)
        body = user_body(locale="pt-BR", cohort=7)
        doc_id = repo.insert(USER_COLLECTION, body)
        reopened = Repository(tmp_path)
        stored = reopened.get(USER_COLLECTION, doc_id)
        assert stored.body["locale"] == "pt-BR" and stored.body["cohort"] == 7


class TestQuery:
    def test_empty_predicate_empty_store(self, repo):
        assert repo.query(LOG_COLLECTION) == []

    def test_all_true_predicate_returns_everything(self, repo):
        for _ in range(5):
            repo.insert(LOG_COLLECTION, log_to_dict(minimal_session()))
        assert len(repo.query(LOG_COLLECTION)) == 5

    def test_filter_by_user(self, repo):
        rng = random.Random(7)
        a = log_to_dict(random_session_log(rng, user_id="alice"))
        b = log_to_dict(random_session_log(rng, user_id="bob"))
        repo.insert(LOG_COLLECTION, a)
        repo.insert(LOG_COLLECTION, b)
        got = repo.query(LOG_COLLECTION, QueryFilter(user_id="alice"))
        assert [d.body["user_id"] for d in got] == ["alice"]

    def test_query_matches_linear_scan_oracle(self, tmp_path):
        """Randomized store of >= 1000 documents: every query must equal a
        from-scratch linear scan of the raw log file."""
        rng = random.Random(42)
        repo = Repository(tmp_path, clock=lambda: rng.randint(0, 10**6))
        users = [f"user-{i}" for i in range(8)]
        paths = [f"src/f{i}.py" for i in range(5)]
        for _ in range(1000):
            log = random_session_log(rng, user_id=rng.choice(users),
                                     file_path=rng.choice(paths), max_events=4)
            repo.insert(LOG_COLLECTION, log_to_dict(log))

        raw_records = []
        with (tmp_path / "interaction_logs.log").open(encoding="utf-8") as fh:
            for line in fh:
                raw_records.append(json.loads(line))

        def linear_scan(where):
            alive = {}
            for record in raw_records:
                if record["op"] == "delete":
                    alive.pop(record["id"], None)
                else:
                    alive[record["id"]] = record
            hits = [r for r in alive.values() if where.matches(r["body"])]
            hits.sort(key=lambda r: (r["stored_at"], r["id"]))
            return [(r["id"], r["body"]) for r in hits]

        filters = [
            QueryFilter(),
            QueryFilter(user_id="user-3"),
            QueryFilter(file_path="src/f2.py"),
            QueryFilter(user_id="user-0", file_path="src/f0.py"),
            QueryFilter(time_from=1000, time_to=50_000),
            QueryFilter(user_id="user-5", time_from=0, time_to=10**9),
            QueryFilter(time_from=10**9),  # excludes everything
        ]
        for where in filters:
            got = [(d.id, d.body) for d in repo.query(LOG_COLLECTION, where)]
            assert got == linear_scan(where)

    def test_time_range_uses_first_event_time(self, repo):
        log = minimal_session()  # first event at t=0
        repo.insert(LOG_COLLECTION, log_to_dict(log))
        assert repo.query(LOG_COLLECTION, QueryFilter(time_from=0, time_to=0)) != []
        assert repo.query(LOG_COLLECTION, QueryFilter(time_from=1)) == []

    def test_results_sorted_by_stored_at_then_id(self, tmp_path):
        clock_values = iter([5, 5, 1])
        repo = Repository(tmp_path, clock=lambda: next(clock_values))
        ids = [repo.insert(LOG_COLLECTION, log_to_dict(minimal_session())) for _ in range(3)]
        got = repo.query(LOG_COLLECTION)
        assert [d.id for d in got] == [ids[2]] + sorted(ids[:2])
