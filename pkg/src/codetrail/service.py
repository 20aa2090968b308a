"""HTTP ingestion service: account lifecycle, login, permission
management, and session-log registration with validation before storage.

Request bodies are parsed by hand rather than through framework models so
that the error contract stays exact: 400 malformed, 422 validation_failed
(with the violation list), 401/403/404/409 per the auth and store rules.
Auth tokens live in a process-lifetime table, not in the durable store.
"""
from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import threading
import time
import uuid
from dataclasses import dataclass
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .events import (
    MalformedDocumentError,
    Permission,
    SessionValidationError,
    UserAccount,
    log_from_dict,
    log_to_dict,
    validate_session,
)
from .store import LOG_COLLECTION, USER_COLLECTION, QueryFilter, Repository

DEFAULT_TOKEN_LIFETIME_MS = 24 * 60 * 60 * 1000

_STATUS = {
    "malformed": 400,
    "unauthorized": 401,
    "forbidden": 403,
    "not_found": 404,
    "conflict": 409,
    "validation_failed": 422,
    "internal": 500,
}


class ApiException(Exception):
    def __init__(self, code: str, message: str, violations: Optional[list[str]] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.violations = violations

    def response(self) -> JSONResponse:
        body: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.violations is not None:
            body["violations"] = self.violations
        return JSONResponse(status_code=_STATUS[self.code], content=body)


@dataclass(frozen=True)
class AuthToken:
    token: str
    user_id: str
    issued_at: int
    expires_at: int


def hash_credential(credential: str, salt: Optional[bytes] = None) -> str:
    """Salted PBKDF2-SHA256; plaintext is never stored."""
    salt = salt if salt is not None else secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", credential.encode("utf-8"), salt, 50_000)
    return f"pbkdf2-sha256$50000${salt.hex()}${digest.hex()}"


def verify_credential(credential: str, stored: str) -> bool:
    try:
        _, _, salt_hex, digest_hex = stored.split("$")
    except ValueError:
        return False
    recomputed = hash_credential(credential, bytes.fromhex(salt_hex))
    return hmac.compare_digest(recomputed.split("$")[3], digest_hex)


def _now_ms() -> int:
    return int(time.time() * 1000)


class TokenTable:
    """Process-lifetime bearer-token store with atomic operations."""

    def __init__(self, lifetime_ms: int = DEFAULT_TOKEN_LIFETIME_MS):
        self._lifetime_ms = lifetime_ms
        self._tokens: dict[str, AuthToken] = {}
        self._lock = threading.Lock()

    def issue(self, user_id: str, now: Optional[int] = None) -> AuthToken:
        now = now if now is not None else _now_ms()
        token = AuthToken(
            token=secrets.token_hex(24),
            user_id=user_id,
            issued_at=now,
            expires_at=now + self._lifetime_ms,
        )
        with self._lock:
            self._tokens[token.token] = token
        return token

    def resolve(self, token: str, now: Optional[int] = None) -> Optional[AuthToken]:
        now = now if now is not None else _now_ms()
        with self._lock:
            found = self._tokens.get(token)
            if found is None:
                return None
            if found.expires_at <= now:
                del self._tokens[token]
                return None
            return found

    def revoke_user(self, user_id: str) -> None:
        with self._lock:
            stale = [t for t, tok in self._tokens.items() if tok.user_id == user_id]
            for t in stale:
                del self._tokens[t]


def account_to_dict(account: UserAccount) -> dict[str, Any]:
    """API-facing shape: credential_hash is deliberately absent."""
    return {
        "user_id": account.user_id,
        "username": account.username,
        "permission": account.permission.value,
        "created_at": account.created_at,
    }


def _account_from_body(body: dict[str, Any]) -> UserAccount:
    return UserAccount(
        user_id=body["user_id"],
        username=body["username"],
        credential_hash=body["credential_hash"],
        permission=Permission(body["permission"]),
        created_at=body.get("created_at", 0),
    )


class ServiceCore:
    """Transport-independent service logic shared by HTTP routes and the CLI."""

    def __init__(self, store: Repository, token_lifetime_ms: int = DEFAULT_TOKEN_LIFETIME_MS):
        self.store = store
        self.tokens = TokenTable(token_lifetime_ms)
        self._user_write_lock = threading.Lock()

    # -- accounts -----------------------------------------------------------

    def _find_account(self, *, username: Optional[str] = None,
                      user_id: Optional[str] = None) -> Optional[UserAccount]:
        for doc in self.store.query(USER_COLLECTION):
            if username is not None and doc.body.get("username") == username:
                return _account_from_body(doc.body)
            if user_id is not None and doc.body.get("user_id") == user_id:
                return _account_from_body(doc.body)
        return None

    def _doc_id_for_user(self, user_id: str) -> Optional[str]:
        for doc in self.store.query(USER_COLLECTION):
            if doc.body.get("user_id") == user_id:
                return doc.id
        return None

    def create_user(self, caller: Optional[UserAccount], username: str,
                    credential: str, permission: Permission) -> UserAccount:
        if not username:
            raise ApiException("validation_failed", "username must be non-empty",
                               ["username required"])
        with self._user_write_lock:
            bootstrap = self.store.count(USER_COLLECTION) == 0
            if not bootstrap:
                if caller is None:
                    raise ApiException("unauthorized", "authentication required")
                if caller.permission is not Permission.ADMIN:
                    raise ApiException("forbidden", "admin permission required")
            if self._find_account(username=username) is not None:
                raise ApiException("conflict", f"username {username!r} is taken")
            account = UserAccount(
                user_id=uuid.uuid4().hex,
                username=username,
                credential_hash=hash_credential(credential),
                permission=permission,
                created_at=_now_ms(),
            )
            self.store.insert(
                USER_COLLECTION,
                {
                    "user_id": account.user_id,
                    "username": account.username,
                    "credential_hash": account.credential_hash,
                    "permission": account.permission.value,
                    "created_at": account.created_at,
                },
            )
        return account

    def login(self, username: str, credential: str) -> AuthToken:
        account = self._find_account(username=username)
        # unknown user and wrong credential are indistinguishable
        if account is None or not verify_credential(credential, account.credential_hash):
            raise ApiException("unauthorized", "invalid credentials")
        return self.tokens.issue(account.user_id)

    def delete_user(self, caller: UserAccount, user_id: str, purge_logs: bool = False) -> None:
        self._require_admin(caller)
        doc_id = self._doc_id_for_user(user_id)
        if doc_id is None:
            raise ApiException("not_found", f"no user {user_id!r}")
        self.store.delete(USER_COLLECTION, doc_id)
        self.tokens.revoke_user(user_id)
        if purge_logs:
            for doc in self.store.query(LOG_COLLECTION, QueryFilter(user_id=user_id)):
                self.store.delete(LOG_COLLECTION, doc.id)

    def set_permission(self, caller: UserAccount, user_id: str, permission: Permission) -> UserAccount:
        self._require_admin(caller)
        with self._user_write_lock:
            doc_id = self._doc_id_for_user(user_id)
            if doc_id is None:
                raise ApiException("not_found", f"no user {user_id!r}")
            doc = self.store.get(USER_COLLECTION, doc_id)
            assert doc is not None
            body = dict(doc.body)
            body["permission"] = permission.value
            # replace atomically under the write lock: insert new, drop old
            self.store.insert(USER_COLLECTION, body)
            self.store.delete(USER_COLLECTION, doc_id)
        return _account_from_body(body)

    # -- logs ---------------------------------------------------------------

    def register_log(self, caller: UserAccount, document: dict[str, Any]) -> str:
        try:
            log = log_from_dict(document)
        except SessionValidationError as exc:
            raise ApiException("validation_failed", "invalid session log", exc.violations)
        except MalformedDocumentError as exc:
            raise ApiException("malformed", str(exc))
        if caller.permission is not Permission.ADMIN and log.user_id != caller.user_id:
            raise ApiException("forbidden", "cannot submit logs for another user")
        violations = validate_session(log)
        if violations:
            raise ApiException("validation_failed", "invalid session log", violations)
        return self.store.insert(LOG_COLLECTION, log_to_dict(log))

    def query_logs(self, caller: UserAccount, where: QueryFilter) -> list[dict[str, Any]]:
        if caller.permission is Permission.SUBJECT:
            if where.user_id is not None and where.user_id != caller.user_id:
                raise ApiException("forbidden", "subjects may query only their own logs")
            where = QueryFilter(
                user_id=caller.user_id,
                file_path=where.file_path,
                time_from=where.time_from,
                time_to=where.time_to,
            )
        docs = self.store.query(LOG_COLLECTION, where)
        docs.sort(key=lambda d: (_first_event_time(d.body), d.stored_at, d.id))
        return [d.body for d in docs]

    # -- auth ---------------------------------------------------------------

    def authenticate(self, bearer: Optional[str]) -> UserAccount:
        if not bearer:
            raise ApiException("unauthorized", "missing bearer token")
        token = self.tokens.resolve(bearer)
        if token is None:
            raise ApiException("unauthorized", "invalid or expired token")
        account = self._find_account(user_id=token.user_id)
        if account is None:
            raise ApiException("unauthorized", "account no longer exists")
        return account

    @staticmethod
    def _require_admin(caller: UserAccount) -> None:
        if caller.permission is not Permission.ADMIN:
            raise ApiException("forbidden", "admin permission required")


def _first_event_time(body: dict[str, Any]) -> int:
    events = body.get("events") or [{}]
    return events[0].get("time") or 0


# -- HTTP layer --------------------------------------------------------------


async def _json_body(request: Request) -> dict[str, Any]:
    raw = await request.body()
    try:
        body = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ApiException("malformed", f"invalid JSON body: {exc}")
    if not isinstance(body, dict):
        raise ApiException("malformed", "request body must be a JSON object")
    return body


def _bearer(request: Request) -> Optional[str]:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


def _parse_permission(value: Any) -> Permission:
    try:
        return Permission(value)
    except ValueError:
        raise ApiException(
            "validation_failed",
            f"unknown permission {value!r}",
            [f"permission must be one of {[p.value for p in Permission]}"],
        )


def create_app(store: Repository,
               token_lifetime_ms: int = DEFAULT_TOKEN_LIFETIME_MS) -> FastAPI:
    app = FastAPI(title="codetrail ingestion service")
    core = ServiceCore(store, token_lifetime_ms)
    app.state.core = core

    @app.exception_handler(ApiException)
    async def handle_api_error(_request: Request, exc: ApiException) -> JSONResponse:
        return exc.response()

    @app.post("/users", status_code=201)
    async def create_user(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        caller = None
        bearer = _bearer(request)
        if bearer is not None:
            caller = core.authenticate(bearer)
        account = core.create_user(
            caller,
            username=str(body.get("username", "")),
            credential=str(body.get("credential", "")),
            permission=_parse_permission(body.get("permission", "Subject")),
        )
        return account_to_dict(account)

    @app.post("/auth/login")
    async def login(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        token = core.login(str(body.get("username", "")), str(body.get("credential", "")))
        return {
            "token": token.token,
            "user_id": token.user_id,
            "issued_at": token.issued_at,
            "expires_at": token.expires_at,
        }

    @app.delete("/users/{user_id}")
    async def delete_user(user_id: str, request: Request, purge: bool = False) -> dict[str, Any]:
        caller = core.authenticate(_bearer(request))
        core.delete_user(caller, user_id, purge_logs=purge)
        return {"deleted": user_id}

    @app.put("/users/{user_id}/permission")
    async def set_permission(user_id: str, request: Request) -> dict[str, Any]:
        caller = core.authenticate(_bearer(request))
        body = await _json_body(request)
        account = core.set_permission(caller, user_id, _parse_permission(body.get("permission")))
        return account_to_dict(account)

    @app.post("/logs", status_code=201)
    async def register_log(request: Request) -> dict[str, Any]:
        caller = core.authenticate(_bearer(request))
        body = await _json_body(request)
        log_id = core.register_log(caller, body)
        return {"id": log_id}

    @app.get("/logs")
    async def query_logs(
        request: Request,
        user_id: Optional[str] = None,
        file_path: Optional[str] = None,
        time_from: Optional[int] = Query(None, alias="from"),
        time_to: Optional[int] = Query(None, alias="to"),
    ) -> dict[str, Any]:
        caller = core.authenticate(_bearer(request))
        where = QueryFilter(
            user_id=user_id, file_path=file_path, time_from=time_from, time_to=time_to
        )
        return {"logs": core.query_logs(caller, where)}

    return app
