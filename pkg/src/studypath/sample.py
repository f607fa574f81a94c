"""Bundled sample course: a three-milestone database curriculum."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from .curriculum import Curriculum, parse_curriculum


def sample_course_document() -> dict[str, Any]:
    """The sample course as a raw ``curriculum/1`` document."""
    data = resources.files("studypath.data").joinpath("sample_course.json")
    return json.loads(data.read_text(encoding="utf-8"))


def sample_course() -> Curriculum:
    return parse_curriculum(sample_course_document())
