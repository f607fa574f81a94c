import pytest

from studypath.sample import sample_course, sample_course_document


@pytest.fixture()
def course():
    return sample_course()


@pytest.fixture()
def course_doc():
    return sample_course_document()


@pytest.fixture()
def fixed_clock(monkeypatch):
    """Pin event timestamps so logically equal sessions snapshot identically."""
    monkeypatch.setattr("studypath.store.utc_now", lambda: "2026-01-01T00:00:00+00:00")
