"""Acceptance suite: one test per release criterion, in spec order.

Run with ``pytest tests/test_acceptance.py -v -s`` to get one PASS line per
criterion (a pytest failure is the FAIL line).
"""

import itertools
import json
import random
import time

import jsonschema
import pytest
from fastapi.testclient import TestClient

from studypath import cli
from studypath.adaptation import recommend
from studypath.api import ApiToken, create_app
from studypath.curriculum import (
    Mode,
    Status,
    STATUS_COLORS,
    color_for,
    compile_network,
    export_dot,
    parse_curriculum,
)
from studypath.jtms import Label
from studypath.store import Service
from studypath.students import Enrollment, mastery_from_score

from jtms_oracle import assert_labels_match, assert_well_founded, random_network

TOKENS = {
    "t-admin": ApiToken(token="t-admin", role="admin", subject_id="ops"),
    "t-teach": ApiToken(token="t-teach", role="instructor", subject_id="i-1"),
    "t-dana": ApiToken(token="t-dana", role="student", subject_id="s-dana"),
}
ADMIN = {"Authorization": "Bearer t-admin"}
TEACHER = {"Authorization": "Bearer t-teach"}
STUDENT = {"Authorization": "Bearer t-dana"}


def _report(line):
    print(f"\nACCEPTANCE PASS: {line}")


def _milestone(mid, prereqs):
    return {
        "id": mid,
        "title": mid.upper(),
        "prerequisites": sorted(prereqs),
        "assets": [
            {"id": f"{mid}-a", "kind": "core", "difficulty": 2, "uri": f"asset://{mid}", "title": mid}
        ],
        "assessments": [{"id": f"{mid}-q", "title": f"{mid} quiz", "max_score": 100}],
    }


def _course_from_edges(n, edges):
    ids = [f"m{i}" for i in range(n)]
    prereqs = {mid: set() for mid in ids}
    for a, b in edges:
        prereqs[ids[b]].add(ids[a])
    return {
        "schema": "curriculum/1",
        "id": "gen",
        "title": "Generated",
        "mode_default": "locked",
        "milestones": [_milestone(mid, prereqs[mid]) for mid in ids],
    }


def test_jtms_oracle_equivalence_and_well_foundedness():
    """Criteria 1+2: incremental labels equal the brute-force grounded
    fixpoint on >= 1000 random networks, with zero circular supports."""
    started = time.monotonic()
    networks = 0
    operations = 0
    for seed in range(1000):
        rng = random.Random(10_000 + seed)
        net, oracle, assumptions = random_network(rng, max_nodes=12, max_justifications=20)
        networks += 1
        assert_labels_match(net, oracle)
        assert_well_founded(net)
        for _ in range(rng.randint(0, 15)):
            if not assumptions:
                break
            target = rng.choice(assumptions)
            if rng.random() < 0.5:
                net.enable_assumption(target)
                oracle.enabled.add(target)
            else:
                net.retract_assumption(target)
                oracle.enabled.discard(target)
            operations += 1
            assert_labels_match(net, oracle)
            assert_well_founded(net)
    elapsed = time.monotonic() - started
    assert networks >= 1000
    assert elapsed < 60, f"fuzz run took {elapsed:.1f}s (budget 60s)"
    _report(
        f"oracle equivalence + well-foundedness on {networks} networks / "
        f"{operations} label ops in {elapsed:.1f}s"
    )


def test_unlock_rule_exhaustive():
    """Criterion 3: unlocked(m) is IN iff every prerequisite is passed, for
    every curriculum shape up to 5 milestones and every pass-subset."""
    checked = 0

    # every labeled digraph on up to 4 milestones (kept if acyclic)
    for n in range(1, 5):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for mask in range(1 << len(pairs)):
            edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
            doc = _course_from_edges(n, edges)
            try:
                curriculum = parse_curriculum(doc)
            except Exception:
                continue  # cyclic variants are rejected by validation
            checked += _check_unlock_rule_all_subsets(curriculum)

    # every isomorphism class on 5 milestones (edges forward in some order)
    pairs = [(i, j) for i in range(5) for j in range(5) if i < j]
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        curriculum = parse_curriculum(_course_from_edges(5, edges))
        checked += _check_unlock_rule_all_subsets(curriculum)

    _report(f"unlock rule exhaustive: {checked} (curriculum, pass-subset) cases, zero violations")


def _check_unlock_rule_all_subsets(curriculum):
    ids = curriculum.milestone_ids()
    compiled = compile_network(curriculum, Mode.LOCKED)
    net = compiled.network
    current = 0
    checked = 0
    for i in range(1 << len(ids)):
        gray = i ^ (i >> 1)
        flipped = current ^ gray
        if flipped:
            bit = flipped.bit_length() - 1
            mid = ids[bit]
            if gray >> bit & 1:
                net.enable_assumption(compiled.passed[mid])
            else:
                net.retract_assumption(compiled.passed[mid])
            current = gray
        passed = {ids[b] for b in range(len(ids)) if gray >> b & 1}
        for milestone in curriculum.milestones:
            expected = milestone.prerequisites <= passed
            actual = net.label_of(compiled.unlocked[milestone.id]) is Label.IN
            assert actual == expected, (
                f"unlock rule violated for {milestone.id} with passed={sorted(passed)}"
            )
            checked += 1
    return checked


def test_status_color_mapping_exact(course, tmp_path, course_doc):
    """Criterion 4: Locked->red, Exploring->yellow, Passed->green in the map
    endpoint and the DOT export."""
    assert STATUS_COLORS == {
        Status.LOCKED: "red",
        Status.EXPLORING: "yellow",
        Status.PASSED: "green",
    }

    golden = (
        "digraph curriculum {\n"
        "  rankdir=LR;\n"
        "  node [shape=box, style=filled];\n"
        '  "odb" [label="ODB, ORDB, XML", fillcolor="red"];\n'
        '  "ra" [label="Relational Algebra", fillcolor="green"];\n'
        '  "sql" [label="SQL", fillcolor="yellow"];\n'
        '  "ra" -> "odb";\n'
        '  "sql" -> "odb";\n'
        "}\n"
    )
    statuses = {"ra": Status.PASSED, "sql": Status.EXPLORING, "odb": Status.LOCKED}
    assert export_dot(course, statuses) == golden

    service = Service.open(tmp_path / "store")
    client = TestClient(create_app(service, TOKENS))
    client.post("/students", json={"display_name": "Dana", "id": "s-dana"}, headers=ADMIN)
    client.post("/curricula", json=course_doc, headers=TEACHER)
    eid = client.post("/enrollments", json={"curriculum_id": "db101"}, headers=STUDENT).json()["id"]
    client.post(
        f"/enrollments/{eid}/attempts",
        json={"milestone_id": "ra", "assessment_id": "ra-quiz", "score": 85},
        headers=STUDENT,
    )
    milestones = client.get(f"/enrollments/{eid}/map").json()["milestones"]
    assert milestones["ra"] == {
        "status": "Passed",
        "color": "green",
        "mastering_level": 3,
        "consecutive_failures": 0,
        "struggling": False,
    }
    assert milestones["sql"]["color"] == "yellow"
    assert milestones["odb"]["color"] == "red"
    assert client.get(f"/enrollments/{eid}/map.dot").text == export_dot(
        course, {"ra": Status.PASSED, "sql": Status.EXPLORING, "odb": Status.LOCKED}
    )
    _report("Locked/Exploring/Passed map to red/yellow/green in map endpoint and DOT export")


def test_mastery_level_mapping():
    """Criterion 5: levels are only 1..4, monotone in score, and hit the
    decided band boundaries at the default threshold."""
    previous = 0
    seen = set()
    for centi in range(50_00, 100_01):
        level = mastery_from_score(centi / 100)
        assert level in (1, 2, 3, 4)
        assert level >= previous
        previous = level
        seen.add(level)
    assert seen == {1, 2, 3, 4}
    for pct, expected in [(50, 1), (65, 2), (80, 3), (93, 4)]:
        assert mastery_from_score(pct) == expected
        if pct > 50:
            assert mastery_from_score(pct - 0.01) == expected - 1
    _report("mastery bands: boundaries 50/65/80/93, monotone, levels limited to 1..4")


def test_struggling_student_scenario(course):
    """Criterion 6: weakest prerequisite first, advance on revise-then-fail,
    plan exhausts after both prerequisites."""
    e = Enrollment("e-0001", "s-dana", course, Mode.LOCKED)
    e.record_attempt("ra", "ra-quiz", 55)    # level 1 (not very strong)
    e.record_attempt("sql", "sql-quiz", 85)  # level 3
    e.record_attempt("odb", "odb-quiz", 30)
    e.record_attempt("odb", "odb-quiz", 25)

    first = recommend(e)[0]
    assert (first.kind, first.milestone_id) == ("revise_prerequisite", "ra")

    e.record_attempt("ra", "ra-quiz", 60)    # revise ra
    e.record_attempt("odb", "odb-quiz", 20)  # problem still remains
    second = recommend(e)[0]
    assert (second.kind, second.milestone_id) == ("revise_prerequisite", "sql")

    e.record_attempt("sql", "sql-quiz", 88)  # revise sql
    e.record_attempt("odb", "odb-quiz", 20)  # still failing: plan exhausted
    final = recommend(e)[0]
    assert final.kind == "extra_support"
    assert final.milestone_id == "odb"
    _report("struggling-student scenario: revise ra, then sql, then plan exhausts")


def test_revocation_cascade_and_round_trip(tmp_path, course_doc):
    """Criterion 7: revoking ra re-locks odb but not sql; revoke/re-pass
    restores the exact prior progress state."""
    service = Service.open(tmp_path / "store")
    service.create_student("Dana", "s-dana")
    service.register_curriculum(course_doc)
    enrollment = service.enroll("s-dana", "db101")
    service.record_attempt(enrollment.id, "ra", "ra-quiz", 85)
    service.record_attempt(enrollment.id, "sql", "sql-quiz", 95)
    assert enrollment.status_of("odb") is Status.EXPLORING
    before = enrollment.progress_snapshot()

    outcome = service.revoke_pass(enrollment.id, "ra", "spot audit")
    changed = {c.milestone_id: (c.old, c.new) for c in outcome.status_changes}
    assert changed["ra"] == (Status.PASSED, Status.EXPLORING)
    assert changed["odb"] == (Status.EXPLORING, Status.LOCKED)
    assert "sql" not in changed

    service.record_attempt(enrollment.id, "ra", "ra-quiz", 85)
    assert enrollment.progress_snapshot() == before
    _report("revocation cascade re-locks odb only; revoke/re-pass restores prior state")


def test_live_replay_equivalence(tmp_path, course_doc, capsys):
    """Criterion 8: a scripted CLI+HTTP session replays to a byte-identical
    snapshot and replay-check exits 0."""
    store = str(tmp_path / "store")
    course_file = tmp_path / "course.json"
    course_file.write_text(json.dumps(course_doc), encoding="utf-8")

    assert cli.run(["enroll", "--store", store, "--student", "s-dana", "--curriculum", str(course_file)]) == 0
    for milestone, points in [("ra", 55), ("sql", 85), ("odb", 20)]:
        assert cli.run(
            [
                "attempt",
                "--store", store,
                "--enrollment", "e-0001",
                "--milestone", milestone,
                "--assessment", f"{milestone}-quiz",
                "--score", str(points),
            ]
        ) == 0

    service = Service.open(store)
    client = TestClient(create_app(service, TOKENS))
    client.post(
        "/enrollments/e-0001/attempts",
        json={"milestone_id": "odb", "assessment_id": "odb-quiz", "score": 15},
        headers=STUDENT,
    )
    client.post(
        "/enrollments/e-0001/revoke",
        json={"milestone_id": "sql", "reason": "recheck"},
        headers=TEACHER,
    )

    assert Service.replay(store).snapshot_bytes() == service.snapshot_bytes()
    assert cli.run(["replay-check", "--store", store]) == 0
    capsys.readouterr()
    _report("live state, stored snapshot and log replay agree byte-for-byte")


def test_open_mode_never_locks(course_doc):
    """Criterion 9: open-mode enrollment has zero locked milestones on any
    valid curriculum (random DAGs up to 10 milestones)."""
    rng = random.Random(424242)
    for _ in range(300):
        n = rng.randint(1, 10)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35]
        curriculum = parse_curriculum(_course_from_edges(n, edges))
        enrollment = Enrollment("e-x", "s-x", curriculum, Mode.OPEN)
        assert all(status is not Status.LOCKED for status in enrollment.statuses().values())
    _report("open mode: zero locked milestones across 300 random curricula")


ERROR_ENVELOPE = {
    "type": "object",
    "required": ["error"],
    "properties": {
        "error": {
            "type": "object",
            "required": ["code", "message"],
            "properties": {"code": {"type": "string"}, "message": {"type": "string"}},
        }
    },
}

MAP_SCHEMA = {
    "type": "object",
    "required": ["schema", "enrollment_id", "student_id", "curriculum_id", "mode", "milestones"],
    "properties": {
        "schema": {"const": "enrollment_map/1"},
        "milestones": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["status", "color", "mastering_level", "consecutive_failures", "struggling"],
                "properties": {
                    "status": {"enum": ["Locked", "Exploring", "Passed"]},
                    "color": {"enum": ["red", "yellow", "green"]},
                    "mastering_level": {"anyOf": [{"type": "null"}, {"enum": [1, 2, 3, 4]}]},
                    "consecutive_failures": {"type": "integer", "minimum": 0},
                    "struggling": {"type": "boolean"},
                },
            },
        },
    },
}

DELTA_SCHEMA = {
    "type": "object",
    "required": ["milestone_id", "attempt", "status_changes", "mastering_level", "consecutive_failures"],
    "properties": {
        "attempt": {
            "type": "object",
            "required": ["assessment_id", "score", "score_pct", "passed", "timestamp"],
        },
        "status_changes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["milestone_id", "old", "new", "color"],
                "properties": {
                    "old": {"enum": ["Locked", "Exploring", "Passed"]},
                    "new": {"enum": ["Locked", "Exploring", "Passed"]},
                    "color": {"enum": ["red", "yellow", "green"]},
                },
            },
        },
    },
}

RECOMMENDATIONS_SCHEMA = {
    "type": "object",
    "required": ["schema", "enrollment_id", "recommendations"],
    "properties": {
        "schema": {"const": "recommendation/1"},
        "recommendations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "milestone", "assets", "rationale", "rank"],
                "properties": {
                    "kind": {"enum": ["study_next", "revise_prerequisite", "extra_support", "challenge"]},
                    "milestone": {"type": "string"},
                    "assets": {"type": "array", "items": {"type": "string"}},
                    "rationale": {"type": "string", "minLength": 1},
                    "rank": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}


def test_api_contract_suite(tmp_path, course_doc):
    """Criterion 10: every documented route answers with the documented
    status codes and JSON shapes."""
    service = Service.open(tmp_path / "store")
    client = TestClient(create_app(service, TOKENS))

    response = client.get("/healthz")
    assert response.status_code == 200 and response.json() == {"status": "ok"}

    # POST /students: 403 without admin, 201 with
    assert client.post("/students", json={"display_name": "Dana"}).status_code == 403
    response = client.post("/students", json={"display_name": "Dana", "id": "s-dana"}, headers=ADMIN)
    assert response.status_code == 201
    assert set(response.json()) == {"id", "display_name", "created_at"}

    # POST /curricula: 403 for students, 422 with report on invalid, 201 on success
    assert client.post("/curricula", json=course_doc, headers=STUDENT).status_code == 403
    broken = {**course_doc, "id": "broken", "milestones": []}
    response = client.post("/curricula", json=broken, headers=TEACHER)
    assert response.status_code == 422
    jsonschema.validate(response.json(), ERROR_ENVELOPE)
    assert response.json()["validation_report"]
    assert client.post("/curricula", json=course_doc, headers=TEACHER).status_code == 201

    # GET /curricula/{id}: document round-trip + 404 envelope
    assert client.get("/curricula/db101").json() == course_doc
    response = client.get("/curricula/none")
    assert response.status_code == 404
    jsonschema.validate(response.json(), ERROR_ENVELOPE)

    # POST /enrollments: 201 with map, duplicate 409
    response = client.post("/enrollments", json={"curriculum_id": "db101"}, headers=STUDENT)
    assert response.status_code == 201
    eid = response.json()["id"]
    jsonschema.validate(response.json()["map"], MAP_SCHEMA)
    duplicate = client.post("/enrollments", json={"curriculum_id": "db101"}, headers=STUDENT)
    assert duplicate.status_code == 409
    jsonschema.validate(duplicate.json(), ERROR_ENVELOPE)

    # GET map / map.dot
    response = client.get(f"/enrollments/{eid}/map")
    assert response.status_code == 200
    jsonschema.validate(response.json(), MAP_SCHEMA)
    response = client.get(f"/enrollments/{eid}/map.dot")
    assert response.status_code == 200 and response.text.startswith("digraph curriculum {")

    # POST attempts: 200 with delta, 409 when locked, 400 out of range, 403 foreign
    response = client.post(
        f"/enrollments/{eid}/attempts",
        json={"milestone_id": "ra", "assessment_id": "ra-quiz", "score": 85},
        headers=STUDENT,
    )
    assert response.status_code == 200
    jsonschema.validate(response.json(), DELTA_SCHEMA)
    locked = client.post(
        f"/enrollments/{eid}/attempts",
        json={"milestone_id": "odb", "assessment_id": "odb-quiz", "score": 85},
        headers=STUDENT,
    )
    assert locked.status_code == 409 and locked.json()["error"]["code"] == "milestone_locked"
    out_of_range = client.post(
        f"/enrollments/{eid}/attempts",
        json={"milestone_id": "ra", "assessment_id": "ra-quiz", "score": 999},
        headers=STUDENT,
    )
    assert out_of_range.status_code == 400
    jsonschema.validate(out_of_range.json(), ERROR_ENVELOPE)

    # GET recommendations
    response = client.get(f"/enrollments/{eid}/recommendations")
    assert response.status_code == 200
    jsonschema.validate(response.json(), RECOMMENDATIONS_SCHEMA)

    # POST revoke: 403 for students, 200 for instructors, 409 when not passed
    body = {"milestone_id": "ra", "reason": "audit"}
    assert client.post(f"/enrollments/{eid}/revoke", json=body, headers=STUDENT).status_code == 403
    response = client.post(f"/enrollments/{eid}/revoke", json=body, headers=TEACHER)
    assert response.status_code == 200
    not_passed = client.post(f"/enrollments/{eid}/revoke", json=body, headers=TEACHER)
    assert not_passed.status_code == 409
    jsonschema.validate(not_passed.json(), ERROR_ENVELOPE)

    # 404 envelope for unknown enrollments on every enrollment route
    for url in (
        "/enrollments/e-9999/map",
        "/enrollments/e-9999/map.dot",
        "/enrollments/e-9999/recommendations",
    ):
        response = client.get(url)
        assert response.status_code == 404
    _report("API contract: endpoint table statuses and schemas verified")
