"""Domain errors raised across the package.

Every error carries a stable ``code`` (snake_case) so transport layers can
map exceptions to wire-level error envelopes without string matching.
"""

from __future__ import annotations


class StudyPathError(Exception):
    """Base class for all domain errors."""

    code = "error"


# --- truth maintenance network ---------------------------------------------

class UnknownNodeError(StudyPathError):
    code = "unknown_node"


class NotAnAssumptionError(StudyPathError):
    code = "not_an_assumption"


class IllegalConsequentError(StudyPathError):
    code = "illegal_consequent"


class NonMonotonicCycleError(StudyPathError):
    code = "non_monotonic_cycle"


class NodeIsOutError(StudyPathError):
    code = "node_is_out"


# --- curriculum --------------------------------------------------------------

class InvalidCurriculumError(StudyPathError):
    code = "invalid_curriculum"

    def __init__(self, violations, message: str | None = None):
        self.violations = list(violations)
        if message is None:
            message = "; ".join(v.message for v in self.violations) or "invalid curriculum"
        super().__init__(message)


class CycleDetectedError(StudyPathError):
    code = "cycle_detected"


class InvalidModeError(StudyPathError):
    code = "invalid_mode"


class MissingStatusError(StudyPathError):
    code = "missing_status"


class UnknownMilestoneError(StudyPathError):
    code = "unknown_milestone"


class UnknownAssessmentError(StudyPathError):
    code = "unknown_assessment"


# --- assessment / student state ----------------------------------------------

class ScoreOutOfRangeError(StudyPathError):
    code = "score_out_of_range"


class BelowPassThresholdError(StudyPathError):
    code = "below_pass_threshold"


class UnknownStudentError(StudyPathError):
    code = "unknown_student"


class UnknownCurriculumError(StudyPathError):
    code = "unknown_curriculum"


class UnknownEnrollmentError(StudyPathError):
    code = "unknown_enrollment"


class DuplicateEnrollmentError(StudyPathError):
    code = "duplicate_enrollment"


class DuplicateStudentError(StudyPathError):
    code = "duplicate_student"


class DuplicateCurriculumError(StudyPathError):
    code = "duplicate_curriculum"


class MilestoneLockedError(StudyPathError):
    code = "milestone_locked"


class NotPassedError(StudyPathError):
    code = "not_passed"


# --- adaptation ---------------------------------------------------------------

class NotStrugglingError(StudyPathError):
    code = "not_struggling"


class NoPrerequisitesError(StudyPathError):
    code = "no_prerequisites"


# --- persistence ---------------------------------------------------------------

class SchemaViolationError(StudyPathError):
    code = "schema_violation"


class CorruptLogError(StudyPathError):
    code = "corrupt_log"

    def __init__(self, message: str, seq: int | None = None):
        super().__init__(message)
        self.seq = seq


class StorageFailureError(StudyPathError):
    code = "storage_failure"


class StoreLockedError(StudyPathError):
    code = "store_locked"
