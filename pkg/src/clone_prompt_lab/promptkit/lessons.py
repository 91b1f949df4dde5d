"""The corrective-lesson library: load, validate, and version lesson sets.

Each lesson is one remediation sentence targeting a known mistake category;
injecting a lesson into the detection prompt tells the model what evidence
to discount. The stock set of eight ships as a package asset; edited sets
are saved as new content-addressed versions, never mutated in place.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class Lesson:
    id: int
    text: str

    def __post_init__(self) -> None:
        if not 1 <= self.id:
            raise ValueError(f"lesson id must be a positive integer, got {self.id}")
        if not self.text or not self.text.endswith("."):
            raise ValueError(f"lesson {self.id}: text must be non-empty and end with a period")


class DuplicateLessonIdError(ValueError):
    def __init__(self, lesson_id: int) -> None:
        super().__init__(f"duplicate lesson id {lesson_id}")
        self.lesson_id = lesson_id


@dataclass(frozen=True)
class LessonSet:
    lessons: tuple[Lesson, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for lesson in self.lessons:
            if lesson.id in seen:
                raise DuplicateLessonIdError(lesson.id)
            seen.add(lesson.id)

    def get(self, lesson_id: int) -> Lesson:
        for lesson in self.lessons:
            if lesson.id == lesson_id:
                return lesson
        raise KeyError(f"no lesson with id {lesson_id}")

    def select(self, ids: list[int]) -> list[Lesson]:
        return [self.get(i) for i in ids]

    @property
    def ids(self) -> list[int]:
        return [lesson.id for lesson in self.lessons]

    def to_payload(self) -> dict:
        return {"lessons": [{"id": l.id, "text": l.text} for l in self.lessons]}

    def version_hash(self) -> str:
        """Content hash over the canonical serialization of the set."""
        canonical = json.dumps(self.to_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def lesson_set_from_payload(payload: dict) -> LessonSet:
    entries = payload.get("lessons")
    if not isinstance(entries, list) or not entries:
        raise ValueError("lesson payload must contain a non-empty 'lessons' list")
    return LessonSet(
        tuple(Lesson(id=int(e["id"]), text=str(e["text"])) for e in entries)
    )


def load_lessons(path: str | Path | None = None) -> LessonSet:
    """Load a lesson set from ``path``, or the stock eight-lesson asset."""
    if path is None:
        raw = resources.files("clone_prompt_lab").joinpath("assets/lessons.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return lesson_set_from_payload(json.loads(raw))


def save_lessons(lesson_set: LessonSet, directory: str | Path) -> Path:
    """Persist a lesson set as a new version file named by its content hash."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{lesson_set.version_hash()}.json"
    if not path.exists():
        path.write_text(json.dumps(lesson_set.to_payload(), indent=2) + "\n", encoding="utf-8")
    return path
