"""Course authoring model: milestones, prerequisites, assets, assessments.

A curriculum is a prerequisite DAG of knowledge milestones.  Validated
curricula are immutable; they compile into a per-student truth maintenance
network (one ``passed`` assumption and one ``unlocked`` derived node per
milestone) and export to Graphviz DOT colored by per-student status.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from .errors import (
    CycleDetectedError,
    InvalidCurriculumError,
    InvalidModeError,
    MissingStatusError,
    UnknownAssessmentError,
    UnknownMilestoneError,
)
from .jtms import Network, NodeKind

CURRICULUM_SCHEMA = "curriculum/1"


class Mode(str, Enum):
    OPEN = "open"
    LOCKED = "locked"


class Status(str, Enum):
    LOCKED = "Locked"
    EXPLORING = "Exploring"
    PASSED = "Passed"


#: Node status to display color.
STATUS_COLORS: dict[Status, str] = {
    Status.LOCKED: "red",
    Status.EXPLORING: "yellow",
    Status.PASSED: "green",
}


def color_for(status: Status) -> str:
    return STATUS_COLORS[Status(status)]


class AssetKind(str, Enum):
    CORE = "core"
    SUPPORT = "support"
    CHALLENGE = "challenge"


@dataclass(frozen=True)
class Asset:
    id: str
    kind: AssetKind
    difficulty: int
    uri: str
    title: str


@dataclass(frozen=True)
class Assessment:
    id: str
    title: str
    max_score: float
    pass_threshold_pct: float = 50.0


@dataclass(frozen=True)
class Milestone:
    id: str
    title: str
    prerequisites: frozenset[str]
    assets: tuple[Asset, ...]
    assessments: tuple[Assessment, ...]

    def assessment(self, assessment_id: str) -> Assessment:
        for assessment in self.assessments:
            if assessment.id == assessment_id:
                return assessment
        raise UnknownAssessmentError(
            f"assessment '{assessment_id}' does not belong to milestone '{self.id}'"
        )

    def assets_of_kind(self, kind: AssetKind) -> list[Asset]:
        return [asset for asset in self.assets if asset.kind is kind]


@dataclass(frozen=True)
class Curriculum:
    id: str
    title: str
    mode_default: Mode
    milestones: tuple[Milestone, ...]

    def milestone(self, milestone_id: str) -> Milestone:
        for milestone in self.milestones:
            if milestone.id == milestone_id:
                return milestone
        raise UnknownMilestoneError(f"unknown milestone '{milestone_id}'")

    def has_milestone(self, milestone_id: str) -> bool:
        return any(m.id == milestone_id for m in self.milestones)

    def milestone_ids(self) -> list[str]:
        return sorted(m.id for m in self.milestones)

    def dependents_of(self, milestone_id: str) -> list[str]:
        """Milestones that list the given one as a direct prerequisite."""
        return sorted(m.id for m in self.milestones if milestone_id in m.prerequisites)

    def to_document(self) -> dict[str, Any]:
        return {
            "schema": CURRICULUM_SCHEMA,
            "id": self.id,
            "title": self.title,
            "mode_default": self.mode_default.value,
            "milestones": [
                {
                    "id": m.id,
                    "title": m.title,
                    "prerequisites": sorted(m.prerequisites),
                    "assets": [
                        {
                            "id": a.id,
                            "kind": a.kind.value,
                            "difficulty": a.difficulty,
                            "uri": a.uri,
                            "title": a.title,
                        }
                        for a in m.assets
                    ],
                    "assessments": [
                        {
                            "id": t.id,
                            "title": t.title,
                            "max_score": t.max_score,
                            "pass_threshold_pct": t.pass_threshold_pct,
                        }
                        for t in m.assessments
                    ],
                }
                for m in self.milestones
            ],
        }


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_document(doc: Any) -> list[Violation]:
    """Check an arbitrary parsed document against the curriculum rules.

    Returns all violations found; an empty list means the document is a
    valid ``curriculum/1`` course.  Never raises.
    """
    violations: list[Violation] = []

    def bad(code: str, message: str) -> None:
        violations.append(Violation(code, message))

    if not isinstance(doc, dict):
        return [Violation("bad-schema", "curriculum document must be a JSON object")]
    if doc.get("schema") != CURRICULUM_SCHEMA:
        bad("bad-schema", f"schema field must be '{CURRICULUM_SCHEMA}'")
    if not isinstance(doc.get("id"), str) or not doc.get("id"):
        bad("bad-schema", "curriculum id must be a non-empty string")
    if not isinstance(doc.get("title"), str) or not doc.get("title"):
        bad("bad-schema", "curriculum title must be a non-empty string")
    mode = doc.get("mode_default", Mode.LOCKED.value)
    if mode not in (Mode.OPEN.value, Mode.LOCKED.value):
        bad("bad-mode", f"mode_default must be 'open' or 'locked', got {mode!r}")

    raw_milestones = doc.get("milestones")
    if not isinstance(raw_milestones, list):
        bad("bad-schema", "milestones must be a list")
        return violations
    if not raw_milestones:
        bad("no-milestones", "curriculum has no milestones")

    milestone_ids: list[str] = []
    prereq_map: dict[str, set[str]] = {}
    seen_assets: set[str] = set()
    seen_assessments: set[str] = set()

    for index, raw in enumerate(raw_milestones):
        where = f"milestones[{index}]"
        if not isinstance(raw, dict):
            bad("bad-schema", f"{where} must be an object")
            continue
        mid = raw.get("id")
        if not isinstance(mid, str) or not mid:
            bad("bad-schema", f"{where} id must be a non-empty string")
            continue
        where = f"milestone '{mid}'"
        if mid in prereq_map:
            bad("duplicate-id", f"duplicate milestone id '{mid}'")
            continue
        milestone_ids.append(mid)
        if not isinstance(raw.get("title"), str) or not raw.get("title"):
            bad("bad-schema", f"{where}: title must be a non-empty string")

        prereqs = raw.get("prerequisites", [])
        if not isinstance(prereqs, list) or not all(isinstance(p, str) for p in prereqs):
            bad("bad-schema", f"{where}: prerequisites must be a list of milestone ids")
            prereqs = []
        prereq_map[mid] = set(prereqs)

        assets = raw.get("assets")
        if not isinstance(assets, list) or not assets:
            bad("no-assets", f"{where}: at least one asset is required")
            assets = []
        for asset in assets:
            if not isinstance(asset, dict):
                bad("bad-schema", f"{where}: assets must be objects")
                continue
            aid = asset.get("id")
            if not isinstance(aid, str) or not aid:
                bad("bad-schema", f"{where}: asset id must be a non-empty string")
                continue
            if aid in seen_assets:
                bad("duplicate-id", f"duplicate asset id '{aid}'")
            seen_assets.add(aid)
            if asset.get("kind") not in (k.value for k in AssetKind):
                bad("bad-kind", f"asset '{aid}': kind must be core, support or challenge")
            difficulty = asset.get("difficulty")
            if not isinstance(difficulty, int) or isinstance(difficulty, bool) or not 1 <= difficulty <= 4:
                bad("bad-difficulty", f"asset '{aid}': difficulty must be an integer in [1, 4]")
            if not isinstance(asset.get("uri"), str) or not asset.get("uri"):
                bad("bad-schema", f"asset '{aid}': uri must be a non-empty string")
            if not isinstance(asset.get("title"), str) or not asset.get("title"):
                bad("bad-schema", f"asset '{aid}': title must be a non-empty string")

        assessments = raw.get("assessments")
        if not isinstance(assessments, list) or not assessments:
            bad("no-assessments", f"{where}: at least one assessment is required")
            assessments = []
        for assessment in assessments:
            if not isinstance(assessment, dict):
                bad("bad-schema", f"{where}: assessments must be objects")
                continue
            tid = assessment.get("id")
            if not isinstance(tid, str) or not tid:
                bad("bad-schema", f"{where}: assessment id must be a non-empty string")
                continue
            if tid in seen_assessments:
                bad("duplicate-id", f"duplicate assessment id '{tid}'")
            seen_assessments.add(tid)
            if not isinstance(assessment.get("title"), str) or not assessment.get("title"):
                bad("bad-schema", f"assessment '{tid}': title must be a non-empty string")
            max_score = assessment.get("max_score")
            if not _is_number(max_score) or max_score <= 0:
                bad("bad-max-score", f"assessment '{tid}': max_score must be > 0")
            threshold = assessment.get("pass_threshold_pct", 50)
            if not _is_number(threshold) or not 0 < threshold <= 100:
                bad("bad-threshold", f"assessment '{tid}': pass_threshold_pct must be in (0, 100]")

    known = set(milestone_ids)
    for mid in milestone_ids:
        for prereq in sorted(prereq_map[mid]):
            if prereq not in known:
                bad("dangling-prerequisite", f"milestone '{mid}' references missing prerequisite '{prereq}'")

    # cycle detection by Kahn peeling over resolvable references
    in_degree = {mid: len(prereq_map[mid] & known) for mid in milestone_ids}
    queue = [mid for mid in milestone_ids if in_degree[mid] == 0]
    emitted = 0
    while queue:
        current = queue.pop()
        emitted += 1
        for mid in milestone_ids:
            if current in prereq_map[mid]:
                in_degree[mid] -= 1
                if in_degree[mid] == 0:
                    queue.append(mid)
    if emitted < len(milestone_ids):
        stuck = sorted(mid for mid in milestone_ids if in_degree[mid] > 0)
        bad("cycle", f"prerequisite cycle involving: {', '.join(stuck)}")

    if milestone_ids and not any(len(prereq_map[mid] & known) == 0 for mid in milestone_ids):
        bad("no-entry-point", "no milestone has an empty prerequisite set")

    return violations


def parse_curriculum(doc: Any) -> Curriculum:
    """Build an immutable curriculum from a document, or raise with the full
    violation report."""
    violations = validate_document(doc)
    if violations:
        raise InvalidCurriculumError(violations)
    milestones = tuple(
        Milestone(
            id=raw["id"],
            title=raw["title"],
            prerequisites=frozenset(raw.get("prerequisites", [])),
            assets=tuple(
                Asset(
                    id=a["id"],
                    kind=AssetKind(a["kind"]),
                    difficulty=a["difficulty"],
                    uri=a["uri"],
                    title=a["title"],
                )
                for a in raw["assets"]
            ),
            assessments=tuple(
                Assessment(
                    id=t["id"],
                    title=t["title"],
                    max_score=t["max_score"],
                    pass_threshold_pct=t.get("pass_threshold_pct", 50),
                )
                for t in raw["assessments"]
            ),
        )
        for raw in doc["milestones"]
    )
    return Curriculum(
        id=doc["id"],
        title=doc["title"],
        mode_default=Mode(doc.get("mode_default", Mode.LOCKED.value)),
        milestones=milestones,
    )


def validate(curriculum: Curriculum) -> list[Violation]:
    """Re-check a constructed curriculum (round-trips through its document)."""
    return validate_document(curriculum.to_document())


def topological_order(curriculum: Curriculum) -> list[str]:
    """Prerequisite-respecting milestone order, ties broken by ascending id."""
    in_degree = {m.id: len(m.prerequisites) for m in curriculum.milestones}
    dependents: dict[str, list[str]] = {}
    for m in curriculum.milestones:
        for prereq in m.prerequisites:
            dependents.setdefault(prereq, []).append(m.id)
    ready = [mid for mid, degree in in_degree.items() if degree == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        current = heapq.heappop(ready)
        order.append(current)
        for mid in dependents.get(current, ()):
            in_degree[mid] -= 1
            if in_degree[mid] == 0:
                heapq.heappush(ready, mid)
    if len(order) < len(curriculum.milestones):
        emitted = set(order)
        stuck = sorted(mid for mid in in_degree if mid not in emitted)
        raise CycleDetectedError(f"prerequisite cycle involving: {', '.join(stuck)}")
    return order


@dataclass
class CompiledCourse:
    """A curriculum compiled into a truth maintenance network.

    ``passed`` maps each milestone to its assumption node, ``unlocked`` to
    the derived node that is IN when the milestone may be explored.
    """

    network: Network
    mode: Mode
    passed: dict[str, int]
    unlocked: dict[str, int]


def compile_network(curriculum: Curriculum, mode: Mode | str) -> CompiledCourse:
    """Build the per-student network for a curriculum in the given mode.

    Locked mode gives every unlocked node one justification requiring all
    prerequisite passed nodes; open mode makes every unlocked node
    unconditional.  Node ids depend only on the sorted milestone ids, so
    recompilation is reproducible.
    """
    try:
        mode = Mode(mode)
    except ValueError:
        raise InvalidModeError(f"mode must be 'open' or 'locked', got {mode!r}") from None
    violations = validate(curriculum)
    if violations:
        raise InvalidCurriculumError(violations)

    network = Network()
    ordered = curriculum.milestone_ids()
    passed = {mid: network.add_node(NodeKind.ASSUMPTION) for mid in ordered}
    unlocked = {mid: network.add_node(NodeKind.DERIVED) for mid in ordered}
    for mid in ordered:
        if mode is Mode.LOCKED:
            in_list = [passed[p] for p in sorted(curriculum.milestone(mid).prerequisites)]
        else:
            in_list = []
        network.add_justification(unlocked[mid], in_list=in_list)
    return CompiledCourse(network=network, mode=mode, passed=passed, unlocked=unlocked)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(curriculum: Curriculum, statuses: Mapping[str, Status]) -> str:
    """Render the prerequisite graph as Graphviz DOT, one node per milestone
    filled with its status color.  Output is byte-stable for equal inputs."""
    lines = [
        "digraph curriculum {",
        "  rankdir=LR;",
        "  node [shape=box, style=filled];",
    ]
    for mid in curriculum.milestone_ids():
        try:
            status = Status(statuses[mid])
        except KeyError:
            raise MissingStatusError(f"no status supplied for milestone '{mid}'") from None
        title = _dot_escape(curriculum.milestone(mid).title)
        lines.append(f'  "{_dot_escape(mid)}" [label="{title}", fillcolor="{color_for(status)}"];')
    edges = sorted(
        (prereq, m.id) for m in curriculum.milestones for prereq in m.prerequisites
    )
    for prereq, dependent in edges:
        lines.append(f'  "{_dot_escape(prereq)}" -> "{_dot_escape(dependent)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
