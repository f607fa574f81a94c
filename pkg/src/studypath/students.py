"""Per-student state: enrollments, milestone statuses, mastery, attempts.

Each enrollment owns a private compiled network, so progress in one
enrollment can never leak into another.  Milestone status is a pure
function of that network: Passed when the milestone's assumption is
enabled, else Exploring when its unlocked node is IN, else Locked.  The
cached status is recomputed and cross-checked on every read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from . import assessments
from .curriculum import Curriculum, Mode, Status, compile_network
from .errors import (
    BelowPassThresholdError,
    InvalidModeError,
    MilestoneLockedError,
    NotPassedError,
    ScoreOutOfRangeError,
)
from .jtms import Label

ENROLLMENT_SCHEMA = "enrollment/1"

#: Fractional positions of the mastery band edges inside [threshold, 100].
#: At the default threshold of 50 these give band starts 50 / 65 / 80 / 93.
_BAND_FRACTIONS = (0.3, 0.6, 0.86)

MASTERY_LABELS = {1: "Minimum", 2: "Average", 3: "High", 4: "Excellent"}


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def mastery_from_score(score_pct: float, pass_threshold_pct: float = 50.0) -> int:
    """Map a passing percentage onto mastery level 1..4.

    Band edges sit at fixed fractions of the passing range [threshold, 100],
    so stricter thresholds still use all four levels.
    """
    if score_pct < pass_threshold_pct:
        raise BelowPassThresholdError(
            f"{score_pct} is below the pass threshold {pass_threshold_pct}"
        )
    span = 100.0 - pass_threshold_pct
    position = 1.0 if span == 0 else (score_pct - pass_threshold_pct) / span
    level = 1
    for edge in _BAND_FRACTIONS:
        if position >= edge:
            level += 1
    return level


@dataclass
class StudentProfile:
    id: str
    display_name: str
    created_at: str

    def to_document(self) -> dict[str, Any]:
        return {"id": self.id, "display_name": self.display_name, "created_at": self.created_at}


@dataclass
class AttemptRecord:
    assessment_id: str
    score: float
    score_pct: float
    passed: bool
    timestamp: str

    def to_document(self) -> dict[str, Any]:
        return {
            "assessment_id": self.assessment_id,
            "score": self.score,
            "score_pct": self.score_pct,
            "passed": self.passed,
            "timestamp": self.timestamp,
        }


@dataclass
class NodeState:
    status: Status
    mastering_level: int | None = None
    attempts: list[AttemptRecord] = field(default_factory=list)
    consecutive_failures: int = 0

    def to_document(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "mastering_level": self.mastering_level,
            "consecutive_failures": self.consecutive_failures,
            "attempts": [a.to_document() for a in self.attempts],
        }


@dataclass(frozen=True)
class StatusChange:
    milestone_id: str
    old: Status
    new: Status

    def to_document(self) -> dict[str, Any]:
        from .curriculum import color_for

        return {
            "milestone_id": self.milestone_id,
            "old": self.old.value,
            "new": self.new.value,
            "color": color_for(self.new),
        }


@dataclass
class AttemptOutcome:
    milestone_id: str
    attempt: AttemptRecord
    status_changes: list[StatusChange]
    mastering_level: int | None
    consecutive_failures: int

    def to_document(self) -> dict[str, Any]:
        return {
            "milestone_id": self.milestone_id,
            "attempt": self.attempt.to_document(),
            "status_changes": [c.to_document() for c in self.status_changes],
            "mastering_level": self.mastering_level,
            "consecutive_failures": self.consecutive_failures,
        }


@dataclass
class RevokeOutcome:
    milestone_id: str
    reason: str
    status_changes: list[StatusChange]

    def to_document(self) -> dict[str, Any]:
        return {
            "milestone_id": self.milestone_id,
            "reason": self.reason,
            "status_changes": [c.to_document() for c in self.status_changes],
        }


class Enrollment:
    """One student's journey through one curriculum.

    All mutations must be serialized per enrollment by the caller; methods
    named ``validate_*`` never mutate, so callers can check first, commit a
    durable record, then apply.
    """

    def __init__(self, enrollment_id: str, student_id: str, curriculum: Curriculum, mode: Mode | str):
        self.id = enrollment_id
        self.student_id = student_id
        self.curriculum = curriculum
        self.mode = Mode(mode)
        self.compiled = compile_network(curriculum, self.mode)
        self.states: dict[str, NodeState] = {
            mid: NodeState(status=self._status_from_network(mid))
            for mid in curriculum.milestone_ids()
        }
        # chronological journal across milestones; drives revision planning
        self.history: list[dict[str, Any]] = []

    # -- status ---------------------------------------------------------------

    @property
    def network(self):
        return self.compiled.network

    def _status_from_network(self, milestone_id: str) -> Status:
        if self.network.node(self.compiled.passed[milestone_id]).enabled:
            return Status.PASSED
        if self.network.label_of(self.compiled.unlocked[milestone_id]) is Label.IN:
            return Status.EXPLORING
        return Status.LOCKED

    def status_of(self, milestone_id: str) -> Status:
        self.curriculum.milestone(milestone_id)  # raises UnknownMilestoneError
        status = self._status_from_network(milestone_id)
        cached = self.states[milestone_id].status
        if cached is not status:  # pragma: no cover - guards an internal invariant
            raise AssertionError(
                f"cached status {cached} of '{milestone_id}' diverged from network {status}"
            )
        return status

    def statuses(self) -> dict[str, Status]:
        return {mid: self.status_of(mid) for mid in self.curriculum.milestone_ids()}

    def _refresh_statuses(self) -> list[StatusChange]:
        changes = []
        for mid in self.curriculum.milestone_ids():
            state = self.states[mid]
            new = self._status_from_network(mid)
            if state.status is not new:
                changes.append(StatusChange(milestone_id=mid, old=state.status, new=new))
                state.status = new
        return changes

    # -- attempts ---------------------------------------------------------------

    def validate_attempt(self, milestone_id: str, assessment_id: str, score: float) -> None:
        milestone = self.curriculum.milestone(milestone_id)
        if self.states[milestone_id].status is Status.LOCKED:
            raise MilestoneLockedError(
                f"milestone '{milestone_id}' is locked; prerequisites are unmet"
            )
        assessment = milestone.assessment(assessment_id)
        if not 0 <= score <= assessment.max_score:
            raise ScoreOutOfRangeError(
                f"score {score} outside [0, {assessment.max_score}] "
                f"for assessment '{assessment_id}'"
            )

    def apply_attempt(
        self, milestone_id: str, assessment_id: str, score: float, timestamp: str | None = None
    ) -> AttemptOutcome:
        """Record a validated attempt and propagate any new pass."""
        timestamp = timestamp or utc_now_iso()
        milestone = self.curriculum.milestone(milestone_id)
        assessment = milestone.assessment(assessment_id)
        scored = assessments.score(assessment, score)
        state = self.states[milestone_id]
        record = AttemptRecord(
            assessment_id=assessment_id,
            score=score,
            score_pct=scored.score_pct,
            passed=scored.passed,
            timestamp=timestamp,
        )
        state.attempts.append(record)

        level: int | None = None
        status_changes: list[StatusChange] = []
        if scored.passed:
            level = mastery_from_score(scored.score_pct, assessment.pass_threshold_pct)
            state.consecutive_failures = 0
            if state.status is Status.PASSED:
                # revision attempt: a better pass raises mastery, never lowers it
                state.mastering_level = max(state.mastering_level or 0, level)
            else:
                state.mastering_level = level
                self.network.enable_assumption(self.compiled.passed[milestone_id])
                status_changes = self._refresh_statuses()
        else:
            state.consecutive_failures += 1

        self.history.append(
            {
                "kind": "attempt",
                "milestone": milestone_id,
                "passed": scored.passed,
                "level": level,
            }
        )
        return AttemptOutcome(
            milestone_id=milestone_id,
            attempt=record,
            status_changes=status_changes,
            mastering_level=state.mastering_level,
            consecutive_failures=state.consecutive_failures,
        )

    def record_attempt(
        self, milestone_id: str, assessment_id: str, score: float, timestamp: str | None = None
    ) -> AttemptOutcome:
        self.validate_attempt(milestone_id, assessment_id, score)
        return self.apply_attempt(milestone_id, assessment_id, score, timestamp)

    # -- revocation ---------------------------------------------------------------

    def validate_revoke(self, milestone_id: str) -> None:
        self.curriculum.milestone(milestone_id)
        if self.states[milestone_id].status is not Status.PASSED:
            raise NotPassedError(f"milestone '{milestone_id}' is not passed")

    def apply_revoke(self, milestone_id: str, reason: str) -> RevokeOutcome:
        """Retract a pass; downstream milestones re-lock via label propagation."""
        state = self.states[milestone_id]
        state.mastering_level = None
        self.network.retract_assumption(self.compiled.passed[milestone_id])
        status_changes = self._refresh_statuses()
        self.history.append({"kind": "revoke", "milestone": milestone_id})
        return RevokeOutcome(
            milestone_id=milestone_id, reason=reason, status_changes=status_changes
        )

    def revoke_pass(self, milestone_id: str, reason: str) -> RevokeOutcome:
        self.validate_revoke(milestone_id)
        return self.apply_revoke(milestone_id, reason)

    # -- mode switch ---------------------------------------------------------------

    def validate_mode(self, mode: Mode | str) -> Mode:
        try:
            return Mode(mode)
        except ValueError:
            raise InvalidModeError(f"mode must be 'open' or 'locked', got {mode!r}") from None

    def apply_mode(self, mode: Mode | str) -> list[StatusChange]:
        """Recompile the network in the new mode, preserving passes."""
        self.mode = Mode(mode)
        passed = [mid for mid, state in self.states.items() if state.status is Status.PASSED]
        self.compiled = compile_network(self.curriculum, self.mode)
        for mid in sorted(passed):
            self.network.enable_assumption(self.compiled.passed[mid])
        return self._refresh_statuses()

    def set_mode(self, mode: Mode | str) -> list[StatusChange]:
        return self.apply_mode(self.validate_mode(mode))

    # -- serialization ---------------------------------------------------------------

    def progress_snapshot(self) -> dict[str, Any]:
        """Status/mastery map plus network labels; attempt history excluded."""
        return {
            "states": {
                mid: [state.status.value, state.mastering_level]
                for mid, state in sorted(self.states.items())
            },
            "network": self.network.dump(),
        }

    def to_document(self) -> dict[str, Any]:
        return {
            "schema": ENROLLMENT_SCHEMA,
            "id": self.id,
            "student_id": self.student_id,
            "curriculum_id": self.curriculum.id,
            "mode": self.mode.value,
            "states": {mid: state.to_document() for mid, state in sorted(self.states.items())},
            "history": list(self.history),
            "network": self.network.dump(),
        }
