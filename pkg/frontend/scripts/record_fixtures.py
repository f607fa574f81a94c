"""Record the struggling-student session as real API responses.

Drives the live service (in-process) through the exact request sequence the
dashboard issues and freezes every response body into
``frontend/test/fixtures/fig5.json``.  The vitest traceability suite replays
these fixtures through the UI code, so every rendered color and card is
checked against genuine server output.

Run from the repository root:  python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from studypath.api import ApiToken, create_app
from studypath.sample import sample_course_document
from studypath.store import Service

TOKENS = {
    "t-admin": ApiToken(token="t-admin", role="admin", subject_id="ops"),
    "t-teach": ApiToken(token="t-teach", role="instructor", subject_id="i-1"),
    "t-dana": ApiToken(token="t-dana", role="student", subject_id="s-dana"),
}
STUDENT = {"Authorization": "Bearer t-dana"}

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "fig5.json"


def main() -> None:
    steps = []
    with tempfile.TemporaryDirectory() as tmp:
        service = Service.open(Path(tmp) / "store")
        client = TestClient(create_app(service, TOKENS))

        client.post(
            "/students",
            json={"display_name": "Dana", "id": "s-dana"},
            headers={"Authorization": "Bearer t-admin"},
        ).raise_for_status()
        client.post(
            "/curricula",
            json=sample_course_document(),
            headers={"Authorization": "Bearer t-teach"},
        ).raise_for_status()

        def record(label, method, path, body=None):
            if method == "GET":
                response = client.get(path)
            else:
                response = client.post(path, json=body, headers=STUDENT)
            response.raise_for_status()
            steps.append(
                {
                    "label": label,
                    "method": method,
                    "path": path,
                    "status": response.status_code,
                    "body": response.json(),
                }
            )
            return response.json()

        enrolled = record("enroll", "POST", "/enrollments", {"curriculum_id": "db101"})
        eid = enrolled["id"]
        record("curriculum", "GET", "/curricula/db101")
        record("recs-initial", "GET", f"/enrollments/{eid}/recommendations")

        session = [
            ("ra", "ra-quiz", 55),    # pass at level 1 (not very strong)
            ("sql", "sql-quiz", 85),  # pass at level 3; odb unlocks here
            ("odb", "odb-quiz", 30),  # first failure
            ("odb", "odb-quiz", 25),  # second failure -> struggling
        ]
        for milestone, assessment, score in session:
            record(
                f"attempt-{milestone}-{score}",
                "POST",
                f"/enrollments/{eid}/attempts",
                {"milestone_id": milestone, "assessment_id": assessment, "score": score},
            )
            record(f"recs-after-{milestone}-{score}", "GET", f"/enrollments/{eid}/recommendations")

        record("map-final", "GET", f"/enrollments/{eid}/map")

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(steps, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(steps)} steps to {OUT}")


if __name__ == "__main__":
    main()
