"""Operator command line.

Works directly against a store directory (no running service needed),
except ``serve`` which starts the HTTP API.  Exit codes: 0 success,
1 usage error, 2 validation failure, 3 store or I/O failure.

The store path comes from ``--store`` or the ``JTMS_STORE`` environment
variable.  Commands refuse to touch a store locked by a running service.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

from .curriculum import validate_document
from .errors import CorruptLogError, StorageFailureError, StoreLockedError, StudyPathError
from .store import Service, StoreLock

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_STORE = 3


def _print_json(document: Any) -> None:
    print(json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False))


def _open_service(store: str | None) -> Service:
    if not store:
        raise UsageError("no store path: pass --store or set JTMS_STORE")
    StoreLock(Path(store)).ensure_unlocked()
    return Service.open(store)


class UsageError(Exception):
    pass


def _add_store_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--store",
        default=os.environ.get("JTMS_STORE"),
        help="store directory (defaults to $JTMS_STORE)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="studypath", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="validate a curriculum document")
    validate.add_argument("path", help="curriculum JSON file")

    serve = commands.add_parser("serve", help="run the HTTP service")
    _add_store_argument(serve)
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    serve.add_argument("--token-file", default=None, help="JSON file with API tokens")

    enroll = commands.add_parser("enroll", help="enroll a student in a curriculum")
    _add_store_argument(enroll)
    enroll.add_argument("--student", required=True)
    enroll.add_argument(
        "--curriculum",
        required=True,
        help="curriculum id, or path to a curriculum JSON to register on first use",
    )
    enroll.add_argument("--mode", choices=["open", "locked"], default=None)

    attempt = commands.add_parser("attempt", help="record an assessment attempt")
    _add_store_argument(attempt)
    attempt.add_argument("--enrollment", required=True)
    attempt.add_argument("--milestone", required=True)
    attempt.add_argument("--assessment", required=True)
    attempt.add_argument("--score", required=True, type=float)

    recommend = commands.add_parser("recommend", help="print ordered recommendations")
    _add_store_argument(recommend)
    recommend.add_argument("--enrollment", required=True)

    export = commands.add_parser("export-dot", help="export an enrollment map as DOT")
    _add_store_argument(export)
    export.add_argument("--enrollment", required=True)
    export.add_argument("-o", "--output", default=None, help="write to file instead of stdout")

    replay = commands.add_parser("replay-check", help="verify snapshot equals log replay")
    _add_store_argument(replay)

    return parser


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        document = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_STORE
    except json.JSONDecodeError as exc:
        print(f"not JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate_document(document)
    if violations:
        for violation in violations:
            print(f"{violation.code}: {violation.message}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{document['id']}: valid")
    return EXIT_OK


def _cmd_enroll(args: argparse.Namespace) -> int:
    service = _open_service(args.store)
    curriculum_id = args.curriculum
    path = Path(curriculum_id)
    if path.suffix == ".json" or path.exists():
        document = json.loads(path.read_text(encoding="utf-8"))
        curriculum_id = document.get("id", "")
        if curriculum_id not in service.curriculum_ids():
            service.register_curriculum(document)
    if args.student not in service.student_ids():
        service.create_student(display_name=args.student, student_id=args.student)
    enrollment = service.enroll(args.student, curriculum_id, args.mode)
    _print_json(
        {
            "enrollment_id": enrollment.id,
            "student_id": enrollment.student_id,
            "curriculum_id": enrollment.curriculum.id,
            "mode": enrollment.mode.value,
            "statuses": {mid: status.value for mid, status in enrollment.statuses().items()},
        }
    )
    return EXIT_OK


def _cmd_attempt(args: argparse.Namespace) -> int:
    service = _open_service(args.store)
    outcome = service.record_attempt(args.enrollment, args.milestone, args.assessment, args.score)
    _print_json(outcome.to_document())
    return EXIT_OK


def _cmd_recommend(args: argparse.Namespace) -> int:
    service = _open_service(args.store)
    document = service.recommendations(args.enrollment)
    for item in document["recommendations"]:
        _print_json(item)
    return EXIT_OK


def _cmd_export_dot(args: argparse.Namespace) -> int:
    service = _open_service(args.store)
    dot = service.enrollment_dot(args.enrollment)
    if args.output:
        Path(args.output).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def _cmd_replay_check(args: argparse.Namespace) -> int:
    service = _open_service(args.store)
    if service.replay_check():
        print("replay-check: ok")
        return EXIT_OK
    print("replay-check: snapshot and replayed state differ", file=sys.stderr)
    return EXIT_VALIDATION


def _cmd_serve(args: argparse.Namespace) -> int:
    from .api import ServeConfig, serve

    if not args.store:
        raise UsageError("no store path: pass --store or set JTMS_STORE")
    serve(ServeConfig(store_path=args.store, bind=args.bind, token_file=args.token_file))
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "serve": _cmd_serve,
    "enroll": _cmd_enroll,
    "attempt": _cmd_attempt,
    "recommend": _cmd_recommend,
    "export-dot": _cmd_export_dot,
    "replay-check": _cmd_replay_check,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (StoreLockedError, StorageFailureError, CorruptLogError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STORE
    except StudyPathError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
