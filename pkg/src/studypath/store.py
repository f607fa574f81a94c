"""Durable storage: an append-only event log plus replayable snapshots.

Every state-changing action is one JSON-Lines event; the log is the
authoritative record and the full application state can be rebuilt from it
alone.  ``students.json``, ``curricula/*.json`` and ``snapshots/latest.json``
are inspectable caches refreshed after each mutation.

Layout of a store directory::

    events.log        append-only JSON-Lines, one event per line
    students.json     registered student profiles
    curricula/        one JSON document per registered curriculum
    snapshots/        latest.json, canonical snapshot of the whole state
    .lock             pid file while a service owns the store
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import jsonschema

from .adaptation import StrugglePolicy, detect_struggle, recommend, recommendations_document
from .curriculum import Curriculum, Mode, color_for, export_dot, parse_curriculum, validate_document
from .errors import (
    CorruptLogError,
    DuplicateCurriculumError,
    DuplicateEnrollmentError,
    DuplicateStudentError,
    InvalidCurriculumError,
    InvalidModeError,
    SchemaViolationError,
    StorageFailureError,
    StoreLockedError,
    UnknownCurriculumError,
    UnknownEnrollmentError,
    UnknownStudentError,
)
from .students import AttemptOutcome, Enrollment, RevokeOutcome, StatusChange, StudentProfile

logger = logging.getLogger(__name__)

EVENT_VERSION = 1
SNAPSHOT_SCHEMA = "snapshot/1"


def utc_now() -> str:
    """Event timestamp source; kept module-level so tests can pin the clock."""
    return datetime.now(timezone.utc).isoformat()


_ID = {"type": "string", "minLength": 1}
_MODE = {"type": "string", "enum": [Mode.OPEN.value, Mode.LOCKED.value]}

PAYLOAD_SCHEMAS: dict[str, dict[str, Any]] = {
    "student_created": {
        "type": "object",
        "required": ["student_id", "display_name"],
        "properties": {"student_id": _ID, "display_name": {"type": "string"}},
        "additionalProperties": False,
    },
    "curriculum_registered": {
        "type": "object",
        "required": ["document"],
        "properties": {"document": {"type": "object"}},
        "additionalProperties": False,
    },
    "enrolled": {
        "type": "object",
        "required": ["enrollment_id", "student_id", "curriculum_id", "mode"],
        "properties": {
            "enrollment_id": _ID,
            "student_id": _ID,
            "curriculum_id": _ID,
            "mode": _MODE,
        },
        "additionalProperties": False,
    },
    "attempt_recorded": {
        "type": "object",
        "required": ["enrollment_id", "milestone_id", "assessment_id", "score"],
        "properties": {
            "enrollment_id": _ID,
            "milestone_id": _ID,
            "assessment_id": _ID,
            "score": {"type": "number", "minimum": 0},
        },
        "additionalProperties": False,
    },
    "pass_revoked": {
        "type": "object",
        "required": ["enrollment_id", "milestone_id", "reason"],
        "properties": {"enrollment_id": _ID, "milestone_id": _ID, "reason": {"type": "string"}},
        "additionalProperties": False,
    },
    "mode_set": {
        "type": "object",
        "required": ["enrollment_id", "mode"],
        "properties": {"enrollment_id": _ID, "mode": _MODE},
        "additionalProperties": False,
    },
}

_VALIDATORS = {kind: jsonschema.Draft7Validator(schema) for kind, schema in PAYLOAD_SCHEMAS.items()}


def validate_payload(kind: str, payload: Any) -> None:
    if kind not in _VALIDATORS:
        raise SchemaViolationError(f"unknown event kind '{kind}'")
    error = jsonschema.exceptions.best_match(_VALIDATORS[kind].iter_errors(payload))
    if error is not None:
        raise SchemaViolationError(f"invalid payload for '{kind}': {error.message}")


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: str
    kind: str
    payload: dict[str, Any]

    def to_line(self) -> str:
        record = {
            "v": EVENT_VERSION,
            "seq": self.seq,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_json_bytes(document: Any) -> bytes:
    return (
        json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
    ).encode("utf-8")


class EventLog:
    """Append-only JSON-Lines log with gapless sequence numbers."""

    def __init__(self, path: Path):
        self.path = path
        self.next_seq = 1

    def read_all(self, repair: bool = False) -> list[Event]:
        """Parse the full log, failing closed on interior corruption.

        A final line that does not parse is a torn write: it is skipped with
        a warning and, when ``repair`` is set, physically truncated away.
        """
        if not self.path.exists():
            self.next_seq = 1
            return []
        raw = self.path.read_bytes()
        events: list[Event] = []
        good_bytes = 0
        lines = raw.split(b"\n")
        # a well-formed file ends with a newline, leaving one empty tail chunk
        chunks = lines[:-1] if lines and lines[-1] == b"" else lines
        for index, chunk in enumerate(chunks):
            expected_seq = index + 1
            is_last = index == len(chunks) - 1
            terminated = index < len(chunks) - 1 or raw.endswith(b"\n")
            try:
                record = json.loads(chunk.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                if is_last:
                    logger.warning(
                        "events.log: torn final line at seq %d dropped", expected_seq
                    )
                    break
                raise CorruptLogError(
                    f"unparseable event line at seq {expected_seq}", seq=expected_seq
                ) from None
            if is_last and not terminated:
                # parseable but unterminated: still a torn write
                logger.warning("events.log: unterminated final line at seq %d dropped", expected_seq)
                break
            if not isinstance(record, dict) or record.get("v") != EVENT_VERSION:
                raise CorruptLogError(f"bad event version at seq {expected_seq}", seq=expected_seq)
            if record.get("seq") != expected_seq:
                raise CorruptLogError(
                    f"sequence gap: expected {expected_seq}, found {record.get('seq')!r}",
                    seq=expected_seq,
                )
            kind = record.get("kind")
            payload = record.get("payload")
            timestamp = record.get("timestamp")
            if not isinstance(timestamp, str):
                raise CorruptLogError(f"missing timestamp at seq {expected_seq}", seq=expected_seq)
            try:
                validate_payload(kind, payload)
            except SchemaViolationError as exc:
                raise CorruptLogError(f"{exc} at seq {expected_seq}", seq=expected_seq) from None
            events.append(Event(seq=expected_seq, timestamp=timestamp, kind=kind, payload=payload))
            good_bytes += len(chunk) + 1
        if repair and good_bytes < len(raw):
            with open(self.path, "r+b") as handle:
                handle.truncate(good_bytes)
        self.next_seq = len(events) + 1
        return events

    def append(self, kind: str, payload: dict[str, Any], timestamp: str) -> Event:
        validate_payload(kind, payload)
        event = Event(seq=self.next_seq, timestamp=timestamp, kind=kind, payload=payload)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as handle:
                handle.write(event.to_line().encode("utf-8") + b"\n")
                handle.flush()
                os.fsync(handle.fileno())
        except OSError as exc:
            raise StorageFailureError(f"cannot append to {self.path}: {exc}") from exc
        self.next_seq += 1
        return event


class StoreLock:
    """Pid-file lock marking a store as owned by a running service."""

    def __init__(self, root: Path):
        self.path = Path(root) / ".lock"

    def holder(self) -> int | None:
        try:
            pid = int(self.path.read_text().strip())
        except (OSError, ValueError):
            return None
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return None  # stale lock from a dead process
        except PermissionError:
            pass  # alive, owned by someone else
        return pid

    def ensure_unlocked(self) -> None:
        pid = self.holder()
        if pid is not None:
            raise StoreLockedError(f"store is locked by running process {pid}")

    def acquire(self) -> None:
        self.ensure_unlocked()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(f"{os.getpid()}\n")

    def release(self) -> None:
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass


class Service:
    """Application state over a store directory.

    All mutations funnel through one appender under a single lock: validate
    against live state, durably append the event, then apply it through the
    same code path replay uses.
    """

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        if create:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
                (self.root / "curricula").mkdir(exist_ok=True)
                (self.root / "snapshots").mkdir(exist_ok=True)
            except OSError as exc:
                raise StorageFailureError(f"cannot create store at {self.root}: {exc}") from exc
        self._log = EventLog(self.root / "events.log")
        self._lock = threading.Lock()
        self._students: dict[str, StudentProfile] = {}
        self._curricula: dict[str, Curriculum] = {}
        self._curriculum_docs: dict[str, dict[str, Any]] = {}
        self._enrollments: dict[str, Enrollment] = {}
        self.last_seq = 0
        for event in self._log.read_all(repair=create):
            self._apply(event)
            self.last_seq = event.seq

    @classmethod
    def open(cls, root: str | Path) -> "Service":
        return cls(root, create=True)

    @classmethod
    def replay(cls, root: str | Path) -> "Service":
        """Rebuild state strictly from the log, writing nothing."""
        return cls(root, create=False)

    # -- event machinery ---------------------------------------------------------

    def _apply(self, event: Event) -> Any:
        payload = event.payload
        kind = event.kind
        if kind == "student_created":
            profile = StudentProfile(
                id=payload["student_id"],
                display_name=payload["display_name"],
                created_at=event.timestamp,
            )
            self._students[profile.id] = profile
            return profile
        if kind == "curriculum_registered":
            curriculum = parse_curriculum(payload["document"])
            self._curricula[curriculum.id] = curriculum
            self._curriculum_docs[curriculum.id] = payload["document"]
            return curriculum
        if kind == "enrolled":
            enrollment = Enrollment(
                enrollment_id=payload["enrollment_id"],
                student_id=payload["student_id"],
                curriculum=self._curricula[payload["curriculum_id"]],
                mode=payload["mode"],
            )
            self._enrollments[enrollment.id] = enrollment
            return enrollment
        if kind == "attempt_recorded":
            return self._enrollments[payload["enrollment_id"]].apply_attempt(
                payload["milestone_id"],
                payload["assessment_id"],
                payload["score"],
                timestamp=event.timestamp,
            )
        if kind == "pass_revoked":
            return self._enrollments[payload["enrollment_id"]].apply_revoke(
                payload["milestone_id"], payload["reason"]
            )
        if kind == "mode_set":
            return self._enrollments[payload["enrollment_id"]].apply_mode(payload["mode"])
        raise CorruptLogError(f"unknown event kind '{kind}'")  # pragma: no cover

    def _commit(self, kind: str, payload: dict[str, Any]) -> Any:
        event = self._log.append(kind, payload, utc_now())
        result = self._apply(event)
        self.last_seq = event.seq
        self._write_views(kind)
        self._write_snapshot()
        return result

    def _write_views(self, kind: str) -> None:
        if kind == "student_created":
            document = {
                "schema": "students/1",
                "students": {sid: s.to_document() for sid, s in sorted(self._students.items())},
            }
            (self.root / "students.json").write_bytes(
                json.dumps(document, sort_keys=True, indent=2).encode("utf-8") + b"\n"
            )
        elif kind == "curriculum_registered":
            for cid, doc in self._curriculum_docs.items():
                path = self.root / "curricula" / f"{cid}.json"
                if not path.exists():
                    path.write_bytes(json.dumps(doc, sort_keys=True, indent=2).encode("utf-8") + b"\n")

    def _write_snapshot(self) -> None:
        path = self.root / "snapshots" / "latest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.snapshot_bytes())

    # -- lookups ----------------------------------------------------------------

    def _require_student(self, student_id: str) -> StudentProfile:
        if student_id not in self._students:
            raise UnknownStudentError(f"unknown student '{student_id}'")
        return self._students[student_id]

    def _require_curriculum(self, curriculum_id: str) -> Curriculum:
        if curriculum_id not in self._curricula:
            raise UnknownCurriculumError(f"unknown curriculum '{curriculum_id}'")
        return self._curricula[curriculum_id]

    def enrollment(self, enrollment_id: str) -> Enrollment:
        if enrollment_id not in self._enrollments:
            raise UnknownEnrollmentError(f"unknown enrollment '{enrollment_id}'")
        return self._enrollments[enrollment_id]

    def student(self, student_id: str) -> StudentProfile:
        return self._require_student(student_id)

    def student_ids(self) -> list[str]:
        return sorted(self._students)

    def curriculum(self, curriculum_id: str) -> Curriculum:
        return self._require_curriculum(curriculum_id)

    def curriculum_document(self, curriculum_id: str) -> dict[str, Any]:
        self._require_curriculum(curriculum_id)
        return self._curriculum_docs[curriculum_id]

    def curriculum_ids(self) -> list[str]:
        return sorted(self._curricula)

    def enrollment_ids(self) -> list[str]:
        return sorted(self._enrollments)

    # -- mutations ----------------------------------------------------------------

    def create_student(self, display_name: str, student_id: str | None = None) -> StudentProfile:
        with self._lock:
            if student_id is None:
                student_id = f"s-{len(self._students) + 1:04d}"
            if student_id in self._students:
                raise DuplicateStudentError(f"student '{student_id}' already exists")
            return self._commit(
                "student_created", {"student_id": student_id, "display_name": display_name}
            )

    def register_curriculum(self, document: dict[str, Any]) -> Curriculum:
        with self._lock:
            violations = validate_document(document)
            if violations:
                raise InvalidCurriculumError(violations)
            if document["id"] in self._curricula:
                raise DuplicateCurriculumError(f"curriculum '{document['id']}' already registered")
            return self._commit("curriculum_registered", {"document": document})

    def enroll(self, student_id: str, curriculum_id: str, mode: str | None = None) -> Enrollment:
        with self._lock:
            self._require_student(student_id)
            curriculum = self._require_curriculum(curriculum_id)
            if mode is None:
                mode = curriculum.mode_default.value
            try:
                mode = Mode(mode).value
            except ValueError:
                raise InvalidModeError(f"mode must be 'open' or 'locked', got {mode!r}") from None
            for enrollment in self._enrollments.values():
                if enrollment.student_id == student_id and enrollment.curriculum.id == curriculum_id:
                    raise DuplicateEnrollmentError(
                        f"student '{student_id}' is already enrolled in '{curriculum_id}'"
                    )
            enrollment_id = f"e-{len(self._enrollments) + 1:04d}"
            return self._commit(
                "enrolled",
                {
                    "enrollment_id": enrollment_id,
                    "student_id": student_id,
                    "curriculum_id": curriculum_id,
                    "mode": mode,
                },
            )

    def record_attempt(
        self, enrollment_id: str, milestone_id: str, assessment_id: str, score: float
    ) -> AttemptOutcome:
        with self._lock:
            enrollment = self.enrollment(enrollment_id)
            enrollment.validate_attempt(milestone_id, assessment_id, score)
            return self._commit(
                "attempt_recorded",
                {
                    "enrollment_id": enrollment_id,
                    "milestone_id": milestone_id,
                    "assessment_id": assessment_id,
                    "score": score,
                },
            )

    def revoke_pass(self, enrollment_id: str, milestone_id: str, reason: str) -> RevokeOutcome:
        with self._lock:
            enrollment = self.enrollment(enrollment_id)
            enrollment.validate_revoke(milestone_id)
            return self._commit(
                "pass_revoked",
                {"enrollment_id": enrollment_id, "milestone_id": milestone_id, "reason": reason},
            )

    def set_mode(self, enrollment_id: str, mode: str) -> list[StatusChange]:
        with self._lock:
            enrollment = self.enrollment(enrollment_id)
            valid = enrollment.validate_mode(mode)
            return self._commit("mode_set", {"enrollment_id": enrollment_id, "mode": valid.value})

    # -- reads ----------------------------------------------------------------

    def enrollment_map(self, enrollment_id: str, policy: StrugglePolicy | None = None) -> dict[str, Any]:
        enrollment = self.enrollment(enrollment_id)
        policy = policy or StrugglePolicy()
        milestones = {}
        for mid in enrollment.curriculum.milestone_ids():
            state = enrollment.states[mid]
            status = enrollment.status_of(mid)
            milestones[mid] = {
                "status": status.value,
                "color": color_for(status),
                "mastering_level": state.mastering_level,
                "consecutive_failures": state.consecutive_failures,
                "struggling": detect_struggle(state, policy),
            }
        return {
            "schema": "enrollment_map/1",
            "enrollment_id": enrollment.id,
            "student_id": enrollment.student_id,
            "curriculum_id": enrollment.curriculum.id,
            "mode": enrollment.mode.value,
            "milestones": milestones,
        }

    def enrollment_dot(self, enrollment_id: str) -> str:
        enrollment = self.enrollment(enrollment_id)
        return export_dot(enrollment.curriculum, enrollment.statuses())

    def recommendations(
        self, enrollment_id: str, policy: StrugglePolicy | None = None
    ) -> dict[str, Any]:
        enrollment = self.enrollment(enrollment_id)
        items = recommend(enrollment, policy or StrugglePolicy())
        return recommendations_document(enrollment, items)

    # -- snapshots ----------------------------------------------------------------

    def snapshot_document(self) -> dict[str, Any]:
        return {
            "schema": SNAPSHOT_SCHEMA,
            "last_seq": self.last_seq,
            "students": {sid: s.to_document() for sid, s in sorted(self._students.items())},
            "curricula": dict(sorted(self._curriculum_docs.items())),
            "enrollments": {
                eid: e.to_document() for eid, e in sorted(self._enrollments.items())
            },
        }

    def snapshot_bytes(self) -> bytes:
        return canonical_json_bytes(self.snapshot_document())

    def stored_snapshot_bytes(self) -> bytes:
        path = self.root / "snapshots" / "latest.json"
        if path.exists():
            return path.read_bytes()
        return canonical_json_bytes(
            {
                "schema": SNAPSHOT_SCHEMA,
                "last_seq": 0,
                "students": {},
                "curricula": {},
                "enrollments": {},
            }
        )

    def replay_check(self) -> bool:
        """True iff the stored snapshot equals a from-scratch replay byte for byte."""
        replayed = Service.replay(self.root)
        return self.stored_snapshot_bytes() == replayed.snapshot_bytes()
