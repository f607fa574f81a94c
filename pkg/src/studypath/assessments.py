"""Assessment scoring: raw score to percentage and pass decision.

Percentages are computed as exact rationals and rounded half-up to two
decimals before the threshold comparison, so pass decisions are bit-stable
across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .curriculum import Assessment
from .errors import ScoreOutOfRangeError


@dataclass(frozen=True)
class ScoredAttempt:
    assessment_id: str
    raw_score: float
    score_pct: float
    passed: bool


def score_pct_of(raw_score: float, max_score: float) -> float:
    """100 * raw/max as an exact rational, rounded half-up to 2 decimals."""
    pct = Fraction(raw_score) * 100 / Fraction(max_score)
    return math.floor(pct * 100 + Fraction(1, 2)) / 100


def score(assessment: Assessment, raw_score: float) -> ScoredAttempt:
    if not 0 <= raw_score <= assessment.max_score:
        raise ScoreOutOfRangeError(
            f"score {raw_score} outside [0, {assessment.max_score}] "
            f"for assessment '{assessment.id}'"
        )
    pct = score_pct_of(raw_score, assessment.max_score)
    return ScoredAttempt(
        assessment_id=assessment.id,
        raw_score=raw_score,
        score_pct=pct,
        passed=pct >= assessment.pass_threshold_pct,
    )
