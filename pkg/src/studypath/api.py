"""HTTP/JSON facade over the engine.

Routes (role required for mutations in parentheses):

    GET  /healthz
    POST /students                      (admin)
    POST /curricula                     (instructor)
    GET  /curricula/{id}
    POST /enrollments                   (student; enrolls the token subject)
    GET  /enrollments/{id}/map
    GET  /enrollments/{id}/map.dot
    POST /enrollments/{id}/attempts     (student; must own the enrollment)
    GET  /enrollments/{id}/recommendations
    POST /enrollments/{id}/revoke       (instructor)

All responses are JSON; errors use ``{"error": {"code", "message"}}``.
Authentication is static bearer tokens loaded from a JSON token file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .errors import InvalidCurriculumError, StudyPathError
from .store import Service, StoreLock

#: HTTP status per domain error code; anything unlisted becomes a 400.
ERROR_STATUS = {
    "unknown_student": 404,
    "unknown_curriculum": 404,
    "unknown_enrollment": 404,
    "unknown_milestone": 404,
    "unknown_assessment": 404,
    "milestone_locked": 409,
    "duplicate_enrollment": 409,
    "duplicate_student": 409,
    "duplicate_curriculum": 409,
    "not_passed": 409,
    "invalid_curriculum": 422,
    "score_out_of_range": 400,
    "invalid_mode": 400,
    "schema_violation": 400,
    "storage_failure": 503,
    "store_locked": 503,
}


@dataclass(frozen=True)
class ApiToken:
    token: str
    role: str  # student | instructor | admin
    subject_id: str


def load_tokens(path: str | Path) -> dict[str, ApiToken]:
    """Token file format: {"tokens": [{"token", "role", "subject_id"}, ...]}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    tokens = {}
    for entry in raw.get("tokens", []):
        token = ApiToken(
            token=entry["token"], role=entry["role"], subject_id=entry.get("subject_id", "")
        )
        tokens[token.token] = token
    return tokens


class StudentBody(BaseModel):
    display_name: str
    id: str | None = None


class EnrollBody(BaseModel):
    curriculum_id: str
    mode: str | None = None


class AttemptBody(BaseModel):
    milestone_id: str
    assessment_id: str
    score: float


class RevokeBody(BaseModel):
    milestone_id: str
    reason: str


def _error_response(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    body: dict[str, Any] = {"error": {"code": code, "message": message}}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


def create_app(
    service: Service,
    tokens: dict[str, ApiToken] | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="studypath", docs_url=None, redoc_url=None)
    app.state.service = service
    app.state.tokens = tokens or {}
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(StudyPathError)
    async def domain_error_handler(_request: Request, exc: StudyPathError) -> JSONResponse:
        status = ERROR_STATUS.get(exc.code, 400)
        extra: dict[str, Any] = {}
        if isinstance(exc, InvalidCurriculumError):
            extra["validation_report"] = [
                {"code": v.code, "message": v.message} for v in exc.violations
            ]
        return _error_response(status, exc.code, str(exc), **extra)

    def require_role(role: str):
        def dependency(request: Request) -> ApiToken:
            header = request.headers.get("authorization", "")
            token_value = header.removeprefix("Bearer ").strip()
            token = app.state.tokens.get(token_value)
            if token is None or token.role != role:
                raise _Forbidden(role)
            return token

        return dependency

    @app.exception_handler(_Forbidden)
    async def forbidden_handler(_request: Request, exc: "_Forbidden") -> JSONResponse:
        return _error_response(403, "forbidden", f"this endpoint requires the {exc.role} role")

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error_response(400, "bad_request", str(exc.errors()[:1]))

    @app.get("/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/students", status_code=201)
    def create_student(body: StudentBody, token: ApiToken = Depends(require_role("admin"))):
        profile = service.create_student(body.display_name, body.id)
        return profile.to_document()

    @app.post("/curricula", status_code=201)
    def register_curriculum(
        body: dict, token: ApiToken = Depends(require_role("instructor"))
    ):
        curriculum = service.register_curriculum(body)
        return {"id": curriculum.id, "title": curriculum.title, "registered": True}

    @app.get("/curricula/{curriculum_id}")
    def get_curriculum(curriculum_id: str):
        return service.curriculum_document(curriculum_id)

    @app.post("/enrollments", status_code=201)
    def enroll(body: EnrollBody, token: ApiToken = Depends(require_role("student"))):
        enrollment = service.enroll(token.subject_id, body.curriculum_id, body.mode)
        return {
            "id": enrollment.id,
            "student_id": enrollment.student_id,
            "curriculum_id": enrollment.curriculum.id,
            "mode": enrollment.mode.value,
            "map": service.enrollment_map(enrollment.id),
        }

    @app.get("/enrollments/{enrollment_id}/map")
    def enrollment_map(enrollment_id: str):
        return service.enrollment_map(enrollment_id)

    @app.get("/enrollments/{enrollment_id}/map.dot")
    def enrollment_dot(enrollment_id: str) -> Response:
        return PlainTextResponse(service.enrollment_dot(enrollment_id))

    @app.post("/enrollments/{enrollment_id}/attempts")
    def record_attempt(
        enrollment_id: str,
        body: AttemptBody,
        token: ApiToken = Depends(require_role("student")),
    ):
        enrollment = service.enrollment(enrollment_id)
        if enrollment.student_id != token.subject_id:
            raise _Forbidden("owning student")
        outcome = service.record_attempt(
            enrollment_id, body.milestone_id, body.assessment_id, body.score
        )
        document = outcome.to_document()
        document["enrollment_id"] = enrollment_id
        return document

    @app.get("/enrollments/{enrollment_id}/recommendations")
    def recommendations(enrollment_id: str):
        return service.recommendations(enrollment_id)

    @app.post("/enrollments/{enrollment_id}/revoke")
    def revoke(
        enrollment_id: str,
        body: RevokeBody,
        token: ApiToken = Depends(require_role("instructor")),
    ):
        outcome = service.revoke_pass(enrollment_id, body.milestone_id, body.reason)
        document = outcome.to_document()
        document["enrollment_id"] = enrollment_id
        return document

    return app


class _Forbidden(Exception):
    def __init__(self, role: str):
        self.role = role
        super().__init__(f"requires role {role}")


@dataclass
class ServeConfig:
    store_path: str
    bind: str = "127.0.0.1:8000"
    token_file: str | None = None
    cors_origins: list[str] | None = None


def serve(config: ServeConfig) -> None:
    """Run the service until interrupted, holding the store lock."""
    import uvicorn

    host, _, port = config.bind.rpartition(":")
    tokens = load_tokens(config.token_file) if config.token_file else {}
    lock = StoreLock(Path(config.store_path))
    lock.acquire()
    try:
        service = Service.open(config.store_path)
        app = create_app(service, tokens, config.cors_origins)
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    finally:
        lock.release()
