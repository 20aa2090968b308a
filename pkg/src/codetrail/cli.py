"""Command-line entry point.

Subcommands: serve, submit, query, reconstruct, classify, evaluate,
validate. Machine-readable output is always a canonical JSON document;
``--quiet`` suppresses everything else. Exit codes: 0 success, 1
operational error, 2 usage error (argparse's convention).
"""
from __future__ import annotations

import argparse
import glob as globlib
import json
import os
import sys
import uuid
from fractions import Fraction
from typing import Any, Optional

from . import harness
from .classify import (
    LineLabelKind,
    classify_submission,
    evaluation_to_dict,
    evaluate,
    report_to_dict,
    classify_lines,
)
from .events import (
    MalformedDocumentError,
    SessionLog,
    SessionValidationError,
    decode_log,
    encode_log,
    log_from_dict,
)
from .store import LOG_COLLECTION, QueryFilter, Repository
from .timeline import (
    extract_historical_lines,
    metrics_to_dict,
    reconstruct,
    session_metrics,
    timeline_to_dict,
)

SERVER_ENV = "CODETRAIL_SERVER"
TOKEN_ENV = "CODETRAIL_TOKEN"


class CliError(RuntimeError):
    pass


def _emit(doc: Any, args: argparse.Namespace) -> None:
    json.dump(doc, sys.stdout, ensure_ascii=False, indent=None if args.quiet else 2)
    sys.stdout.write("\n")


def _info(message: str, args: argparse.Namespace) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _load_config(path: Optional[str]) -> dict[str, Any]:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise CliError("config file must hold a JSON object")
    return config


def _setting(args: argparse.Namespace, config: dict[str, Any], flag: str,
             env: Optional[str] = None, default: Optional[str] = None) -> Optional[str]:
    """Precedence: flag > environment variable > config file > default."""
    value = getattr(args, flag, None)
    if value is not None:
        return value
    if env and os.environ.get(env):
        return os.environ[env]
    if flag in config:
        return config[flag]
    return default


def _read_logs_from_files(pattern: str) -> list[SessionLog]:
    paths = sorted(globlib.glob(pattern)) if any(c in pattern for c in "*?[") else [pattern]
    if not paths:
        raise CliError(f"no log files match {pattern!r}")
    logs = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                logs.append(decode_log(fh.read()))
            except (MalformedDocumentError, SessionValidationError) as exc:
                raise CliError(f"{path}: {exc}")
    return logs


def _read_logs_from_service(server: str, token: Optional[str],
                            user_id: Optional[str] = None) -> list[SessionLog]:
    import httpx

    if not token:
        raise CliError("a token is required for service access (flag, env, or config)")
    params = {}
    if user_id:
        params["user_id"] = user_id
    response = httpx.get(f"{server}/logs", params=params,
                         headers={"authorization": f"Bearer {token}"}, timeout=30.0)
    if response.status_code != 200:
        raise CliError(f"service query failed: {response.status_code} {response.text}")
    return [log_from_dict(body) for body in response.json()["logs"]]


def _resolve_logs(args: argparse.Namespace, config: dict[str, Any]) -> list[SessionLog]:
    if args.logs:
        return _read_logs_from_files(args.logs)
    server = _setting(args, config, "server", SERVER_ENV)
    if server:
        token = _setting(args, config, "token", TOKEN_ENV)
        return _read_logs_from_service(server, token, getattr(args, "user_id", None))
    raise CliError("no log source: pass --logs or configure a server")


# -- subcommands --------------------------------------------------------------


def _cmd_serve(args: argparse.Namespace, config: dict[str, Any]) -> int:
    import uvicorn

    from .service import DEFAULT_TOKEN_LIFETIME_MS, create_app

    store_path = _setting(args, config, "store", default="./codetrail-store")
    lifetime = int(_setting(args, config, "token_lifetime_ms",
                            default=str(DEFAULT_TOKEN_LIFETIME_MS)))
    app = create_app(Repository(store_path), token_lifetime_ms=lifetime)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_submit(args: argparse.Namespace, config: dict[str, Any]) -> int:
    import httpx

    server = _setting(args, config, "server", SERVER_ENV)
    token = _setting(args, config, "token", TOKEN_ENV)
    if not server or not token:
        raise CliError("submit requires a server URL and token")
    for path in args.log_files:
        with open(path, "r", encoding="utf-8") as fh:
            document = fh.read()
        decode_log(document)  # fail fast with local violation names
        response = httpx.post(
            f"{server}/logs", content=document.encode("utf-8"),
            headers={"authorization": f"Bearer {token}",
                     "content-type": "application/json"},
            timeout=30.0,
        )
        if response.status_code != 201:
            raise CliError(f"{path}: {response.status_code} {response.text}")
        _info(f"{path}: stored as {response.json()['id']}", args)
    return 0


def _cmd_query(args: argparse.Namespace, config: dict[str, Any]) -> int:
    if args.store:
        repo = Repository(args.store)
        where = QueryFilter(user_id=args.user_id, file_path=args.file_path,
                            time_from=args.time_from, time_to=args.time_to)
        bodies = [d.body for d in repo.query(LOG_COLLECTION, where)]
    else:
        server = _setting(args, config, "server", SERVER_ENV)
        if not server:
            raise CliError("query requires --store or a server")
        token = _setting(args, config, "token", TOKEN_ENV)
        bodies = [
            json.loads(encode_log(log))
            for log in _read_logs_from_service(server, token, args.user_id)
        ]
    _emit({"logs": bodies}, args)
    return 0


def _cmd_reconstruct(args: argparse.Namespace, config: dict[str, Any]) -> int:
    logs = _read_logs_from_files(args.log)
    documents = []
    for log in logs:
        timeline = reconstruct(log)
        documents.append({
            "session_id": log.session_id,
            "timeline": timeline_to_dict(timeline),
            "metrics": metrics_to_dict(session_metrics(timeline)),
        })
    _emit(documents[0] if len(documents) == 1 else documents, args)
    return 0


def _cmd_classify(args: argparse.Namespace, config: dict[str, Any]) -> int:
    with open(args.final, "r", encoding="utf-8") as fh:
        final_code = fh.read()
    logs = _resolve_logs(args, config)
    history = extract_historical_lines(logs, include_line_field=not args.no_line_field)
    report = classify_lines(final_code, history.normalized_lines)
    doc = report_to_dict(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
        _info(f"report written to {args.output}", args)
    else:
        _emit(doc, args)
    return 0


def _cmd_evaluate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        report_doc = json.load(fh)
    with open(args.truth, "r", encoding="utf-8") as fh:
        truth_doc = json.load(fh)
    predicted = [LineLabelKind(entry["label"]) for entry in report_doc["lines"]]
    truth = [LineLabelKind(v) for v in truth_doc]
    if len(predicted) != len(truth):
        raise CliError(
            f"ground truth has {len(truth)} labels but report has {len(predicted)} lines"
        )
    # rebuild a minimal report carrying only the labels; evaluate() needs no scores
    from .classify import ClassificationReport, LineLabel, LABEL_ORDER

    labels = tuple(
        LineLabel(i, entry.get("content", ""), entry.get("content", ""),
                  LineLabelKind(entry["label"]), entry.get("score", 0),
                  entry.get("matched_line"))
        for i, entry in enumerate(report_doc["lines"])
    )
    counts = {kind: 0 for kind in LABEL_ORDER}
    for entry in labels:
        counts[entry.label] += 1
    report = ClassificationReport(labels=labels, counts=counts,
                                  percentages={k: 0.0 for k in LABEL_ORDER},
                                  skipped_lines=())
    _emit(evaluation_to_dict(evaluate(report, truth)), args)
    return 0


def _cmd_validate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    results = []
    live_url = args.live
    provisioner = _LiveUserPool(live_url, args.seed) if live_url else None
    for name in harness.SCENARIO_NAMES:
        scenario = harness.generate(name, args.seed)
        if provisioner is not None:
            scenario, token_by_user = provisioner.adopt(scenario)
            result = harness.run_against_service(scenario, live_url, token_by_user)
        else:
            result = harness.run_in_process(scenario)
        results.append(result)
    spurious = harness.run_in_process(
        harness.generate("focus_switching", args.seed), spurious_rate=0.2,
        noise_seed=args.seed,
    )
    spurious = harness.ScenarioResult(
        name="focus_switching+noise", precision=spurious.precision,
        recall=spurious.recall, matched=spurious.matched,
        observed=spurious.observed, expected=spurious.expected,
        mismatches=spurious.mismatches,
    )
    results.append(spurious)

    _info(harness.format_report(results), args)
    _emit({"scenarios": [r.to_dict() for r in results]}, args)

    failed = [
        r for r in results
        if r.name in harness.PERFECT_SCENARIOS
        and (r.precision != Fraction(1) or r.recall != Fraction(1))
    ]
    if spurious.recall != Fraction(1) or spurious.precision >= Fraction(1):
        failed.append(spurious)
    return 1 if failed else 0


class _LiveUserPool:
    """Throwaway accounts on the live target for harness users.

    Harness scenarios use logical user ids; the service assigns its own.
    `adopt` rewrites each session to the real account id and returns the
    matching token map. Account creation uses CODETRAIL_TOKEN when set
    (admin), otherwise relies on the service's bootstrap rule."""

    def __init__(self, base_url: str, seed: int):
        self.base_url = base_url
        self.seed = seed
        self.run_tag = uuid.uuid4().hex[:8]
        self.admin_token = os.environ.get(TOKEN_ENV)
        self.by_logical: dict[str, tuple[str, str]] = {}  # logical -> (real_id, token)

    def _ensure_admin(self) -> None:
        import httpx

        if self.admin_token:
            return
        username = f"harness-admin-{self.run_tag}"
        credential = f"pw-{self.run_tag}-{self.seed}"
        # only works against an empty store (bootstrap rule); otherwise an
        # admin token must be supplied via the environment
        response = httpx.post(f"{self.base_url}/users",
                              json={"username": username, "credential": credential,
                                    "permission": "Admin"}, timeout=30.0)
        if response.status_code != 201:
            raise CliError(
                "no admin token and bootstrap refused: "
                f"{response.status_code} {response.text}"
            )
        self.admin_token = self._login(username, credential)

    def _create(self, logical: str) -> tuple[str, str]:
        import httpx

        self._ensure_admin()
        username = f"harness-{self.run_tag}-{logical}"
        credential = f"pw-{self.run_tag}-{self.seed}"
        response = httpx.post(f"{self.base_url}/users",
                              headers={"authorization": f"Bearer {self.admin_token}"},
                              json={"username": username, "credential": credential,
                                    "permission": "Subject"}, timeout=30.0)
        if response.status_code != 201:
            raise CliError(
                f"cannot provision {username}: {response.status_code} {response.text}"
            )
        real_id = response.json()["user_id"]
        return real_id, self._login(username, credential)

    def _login(self, username: str, credential: str) -> str:
        import httpx

        login = httpx.post(f"{self.base_url}/auth/login",
                           json={"username": username, "credential": credential},
                           timeout=30.0)
        if login.status_code != 200:
            raise CliError(f"cannot login {username}: {login.status_code} {login.text}")
        return login.json()["token"]

    def adopt(self, scenario: "harness.Scenario"):
        import dataclasses

        for logical in sorted({s.user_id for s in scenario.sessions}):
            if logical not in self.by_logical:
                self.by_logical[logical] = self._create(logical)
        sessions = tuple(
            dataclasses.replace(s, user_id=self.by_logical[s.user_id][0])
            for s in scenario.sessions
        )
        tokens = {real: token for real, token in self.by_logical.values()}
        remapped = harness.Scenario(name=scenario.name, seed=scenario.seed,
                                    sessions=sessions)
        return remapped, tokens


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codetrail",
        description="editor telemetry pipeline: serve, submit, analyze, classify",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress everything except machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the ingestion service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8057)
    serve.add_argument("--store", help="store directory")
    serve.add_argument("--token-lifetime-ms", dest="token_lifetime_ms")

    submit = sub.add_parser("submit", help="submit session log files to a service")
    submit.add_argument("log_files", nargs="+")
    submit.add_argument("--server")
    submit.add_argument("--token")

    query = sub.add_parser("query", help="query stored session logs")
    query.add_argument("--store", help="query a local store directly")
    query.add_argument("--server")
    query.add_argument("--token")
    query.add_argument("--user-id", dest="user_id")
    query.add_argument("--file-path", dest="file_path")
    query.add_argument("--from", dest="time_from", type=int)
    query.add_argument("--to", dest="time_to", type=int)

    recon = sub.add_parser("reconstruct", help="emit timeline and metrics for a log")
    recon.add_argument("log", help="log file path or glob")

    classify = sub.add_parser("classify", help="label final-code lines by authorship")
    classify.add_argument("--final", required=True, help="final submitted code file")
    classify.add_argument("--logs", help="log file path or glob")
    classify.add_argument("--server")
    classify.add_argument("--token")
    classify.add_argument("--user-id", dest="user_id")
    classify.add_argument("--output", help="write the report here instead of stdout")
    classify.add_argument("--no-line-field", action="store_true",
                          help="history from insertion text only")

    ev = sub.add_parser("evaluate", help="score a report against ground truth")
    ev.add_argument("--report", required=True)
    ev.add_argument("--truth", required=True,
                    help="JSON array of per-line labels")

    validate = sub.add_parser("validate", help="run the scenario harness")
    validate.add_argument("--live", help="target a live service at this URL")
    validate.add_argument("--seed", type=int, default=1)

    return parser


_COMMANDS = {
    "serve": _cmd_serve,
    "submit": _cmd_submit,
    "query": _cmd_query,
    "reconstruct": _cmd_reconstruct,
    "classify": _cmd_classify,
    "evaluate": _cmd_evaluate,
    "validate": _cmd_validate,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MalformedDocumentError, SessionValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
