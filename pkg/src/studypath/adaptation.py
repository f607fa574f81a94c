"""Turns enrollment state into ordered, explained recommendations.

Composition per call: struggling milestones get a revise-prerequisite step
(weakest mastered prerequisite first, advancing only after that
prerequisite was revisited and the milestone failed again), remaining
explorable milestones get study-next items, and excellently passed
milestones surface their challenge material.  Everything here is a pure
read over a snapshot of enrollment state.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Any

from .curriculum import AssetKind, Mode, Status, topological_order
from .errors import NoPrerequisitesError, NotStrugglingError
from .students import Enrollment, NodeState

RECOMMENDATION_SCHEMA = "recommendation/1"


@dataclass(frozen=True)
class Recommendation:
    kind: str  # study_next | revise_prerequisite | extra_support | challenge
    milestone_id: str
    asset_ids: tuple[str, ...]
    rationale: str
    rank: int

    def to_document(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "milestone": self.milestone_id,
            "assets": list(self.asset_ids),
            "rationale": self.rationale,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class StrugglePolicy:
    k_failures: int = 2

    def __post_init__(self) -> None:
        if self.k_failures < 1:
            raise ValueError("k_failures must be >= 1")


def detect_struggle(node_state: NodeState, policy: StrugglePolicy = StrugglePolicy()) -> bool:
    return node_state.consecutive_failures >= policy.k_failures


@dataclass
class _PlanState:
    plan: list[str]
    head: int = 0
    revised_since_head: bool = False


def _mark_revised(plans: dict[str, _PlanState], milestone_id: str) -> None:
    for plan in plans.values():
        if plan.head < len(plan.plan) and plan.plan[plan.head] == milestone_id:
            plan.revised_since_head = True


def _derive_plans(enrollment: Enrollment, policy: StrugglePolicy) -> dict[str, _PlanState]:
    """Replay the enrollment journal to reconstruct every revision plan.

    A plan freezes when a milestone reaches ``k_failures`` consecutive
    failures: its passed direct prerequisites sorted by mastery at that
    moment (topological position, then id, as tie-breaks).  The head
    advances only after the head prerequisite saw a new attempt and the
    struggling milestone failed again; passing the milestone discards the
    plan.
    """
    curriculum = enrollment.curriculum
    topo_pos = {mid: i for i, mid in enumerate(topological_order(curriculum))}
    levels: dict[str, int] = {}
    passed: set[str] = set()
    consecutive: dict[str, int] = {}
    plans: dict[str, _PlanState] = {}

    for entry in enrollment.history:
        milestone_id = entry["milestone"]
        if entry["kind"] == "revoke":
            passed.discard(milestone_id)
            levels.pop(milestone_id, None)
            continue
        _mark_revised(plans, milestone_id)
        if entry["passed"]:
            consecutive[milestone_id] = 0
            passed.add(milestone_id)
            levels[milestone_id] = max(levels.get(milestone_id, 0), entry["level"])
            plans.pop(milestone_id, None)
            continue
        consecutive[milestone_id] = consecutive.get(milestone_id, 0) + 1
        plan = plans.get(milestone_id)
        if plan is not None:
            if plan.revised_since_head and plan.head < len(plan.plan):
                plan.head += 1
                plan.revised_since_head = False
        elif consecutive[milestone_id] >= policy.k_failures:
            candidates = [
                p for p in sorted(curriculum.milestone(milestone_id).prerequisites) if p in passed
            ]
            candidates.sort(key=lambda p: (levels.get(p, 0), topo_pos[p], p))
            plans[milestone_id] = _PlanState(plan=candidates)
    return plans


def revision_plan(
    enrollment: Enrollment,
    milestone_id: str,
    policy: StrugglePolicy = StrugglePolicy(),
) -> list[str]:
    """Prerequisites the struggling student should revisit, weakest first."""
    enrollment.curriculum.milestone(milestone_id)
    state = enrollment.states[milestone_id]
    if state.status is not Status.EXPLORING or not detect_struggle(state, policy):
        raise NotStrugglingError(
            f"milestone '{milestone_id}' is not a struggling exploring milestone"
        )
    plan = _derive_plans(enrollment, policy).get(milestone_id)
    if plan is None or not plan.plan:
        raise NoPrerequisitesError(
            f"milestone '{milestone_id}' has no passed prerequisites to revise"
        )
    return list(plan.plan)


def _prerequisite_mastery(enrollment: Enrollment, milestone_id: str) -> float | None:
    """Mean mastery over passed direct prerequisites; 4 when none are
    authored, None when none are passed yet."""
    prerequisites = enrollment.curriculum.milestone(milestone_id).prerequisites
    if not prerequisites:
        return 4.0
    levels = [
        enrollment.states[p].mastering_level
        for p in sorted(prerequisites)
        if enrollment.states[p].status is Status.PASSED
        and enrollment.states[p].mastering_level is not None
    ]
    if not levels:
        return None
    return fmean(levels)


def select_assets(
    enrollment: Enrollment,
    milestone_id: str,
    policy: StrugglePolicy = StrugglePolicy(),
) -> list[str]:
    """Asset ids for a milestone: core always, support for weak or struggling
    students, challenge when prerequisite mastery is high."""
    milestone = enrollment.curriculum.milestone(milestone_id)
    mastery = _prerequisite_mastery(enrollment, milestone_id)
    struggling = detect_struggle(enrollment.states[milestone_id], policy)
    chosen = [a.id for a in milestone.assets_of_kind(AssetKind.CORE)]
    if struggling or (mastery is not None and mastery <= 1):
        chosen.extend(a.id for a in milestone.assets_of_kind(AssetKind.SUPPORT))
    if mastery is not None and mastery >= 3:
        chosen.extend(a.id for a in milestone.assets_of_kind(AssetKind.CHALLENGE))
    return chosen


def _study_rationale(enrollment: Enrollment, milestone_id: str) -> str:
    if enrollment.mode is Mode.OPEN:
        return f"'{milestone_id}' is available: open mode unlocks every milestone"
    prerequisites = sorted(enrollment.curriculum.milestone(milestone_id).prerequisites)
    if not prerequisites:
        return f"'{milestone_id}' is an entry milestone with no prerequisites"
    supports = ", ".join(
        f"'{p}' (level {enrollment.states[p].mastering_level})" for p in prerequisites
    )
    return f"'{milestone_id}' unlocked: passed prerequisites {supports}"


def recommend(
    enrollment: Enrollment, policy: StrugglePolicy = StrugglePolicy()
) -> list[Recommendation]:
    """Deterministic, ordered adaptation actions for an enrollment."""
    topo = topological_order(enrollment.curriculum)
    plans = _derive_plans(enrollment, policy)
    drafts: list[tuple[str, str, list[str], str]] = []

    exploring = [mid for mid in topo if enrollment.states[mid].status is Status.EXPLORING]
    flagged = [mid for mid in exploring if detect_struggle(enrollment.states[mid], policy)]

    for mid in flagged:
        failures = enrollment.states[mid].consecutive_failures
        plan = plans.get(mid)
        target = None
        if plan is not None:
            index = plan.head
            # skip plan entries whose pass has been revoked since the plan froze
            while index < len(plan.plan) and enrollment.states[plan.plan[index]].status is not Status.PASSED:
                index += 1
            if index < len(plan.plan):
                target = plan.plan[index]
        if target is not None:
            level = enrollment.states[target].mastering_level
            drafts.append(
                (
                    "revise_prerequisite",
                    target,
                    select_assets(enrollment, target, policy),
                    f"'{mid}' failed {failures} times in a row; revise prerequisite "
                    f"'{target}' (mastery level {level}, weakest first)",
                )
            )
        else:
            reason = (
                "revision plan exhausted"
                if plan is not None and plan.plan
                else "no passed prerequisites to revise"
            )
            drafts.append(
                (
                    "extra_support",
                    mid,
                    select_assets(enrollment, mid, policy),
                    f"'{mid}' failed {failures} times in a row; {reason}, "
                    "work through the support material",
                )
            )

    for mid in exploring:
        if mid in flagged:
            continue
        drafts.append(
            ("study_next", mid, select_assets(enrollment, mid, policy), _study_rationale(enrollment, mid))
        )

    offered = {asset_id for _, _, asset_ids, _ in drafts for asset_id in asset_ids}
    for mid in topo:
        state = enrollment.states[mid]
        if state.status is Status.PASSED and state.mastering_level == 4:
            challenge_ids = [
                a.id for a in enrollment.curriculum.milestone(mid).assets_of_kind(AssetKind.CHALLENGE)
            ]
            if challenge_ids and not set(challenge_ids) <= offered:
                drafts.append(
                    (
                        "challenge",
                        mid,
                        challenge_ids,
                        f"'{mid}' passed at level 4 (Excellent); challenge material available",
                    )
                )
                offered.update(challenge_ids)

    return [
        Recommendation(
            kind=kind,
            milestone_id=milestone_id,
            asset_ids=tuple(asset_ids),
            rationale=rationale,
            rank=rank,
        )
        for rank, (kind, milestone_id, asset_ids, rationale) in enumerate(drafts, start=1)
    ]


def recommendations_document(enrollment: Enrollment, items: list[Recommendation]) -> dict[str, Any]:
    return {
        "schema": RECOMMENDATION_SCHEMA,
        "enrollment_id": enrollment.id,
        "recommendations": [item.to_document() for item in items],
    }
