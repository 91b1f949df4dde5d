"""Prompt templates, lesson library, and byte-exact rendering."""

from .lessons import (
    DuplicateLessonIdError,
    Lesson,
    LessonSet,
    lesson_set_from_payload,
    load_lessons,
    save_lessons,
)
from .templates import (
    NotAMistakeError,
    RenderedPrompt,
    TemplateId,
    label_word,
    render_confidence,
    render_default,
    render_rationale,
    render_with_lessons,
    template_body,
    template_checksum,
    template_checksums,
)

__all__ = [
    "DuplicateLessonIdError",
    "Lesson",
    "LessonSet",
    "NotAMistakeError",
    "RenderedPrompt",
    "TemplateId",
    "label_word",
    "lesson_set_from_payload",
    "load_lessons",
    "render_confidence",
    "render_default",
    "render_rationale",
    "render_with_lessons",
    "save_lessons",
    "template_body",
    "template_checksum",
    "template_checksums",
]
