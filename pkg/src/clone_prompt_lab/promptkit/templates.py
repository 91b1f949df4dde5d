"""Byte-exact rendering of the four detection-prompt templates.

Templates ship as plain-text assets with ``<placeholder>`` markers and are
substituted in a single pass, so placeholder-looking text inside inserted
code is never re-expanded. Lessons are injected between the language
sentence and the "Here are the two code snippets" sentence, in ascending
id order, each followed by a single space.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from ..corpus.types import ClonePair, Label
from .lessons import DuplicateLessonIdError, Lesson


class TemplateId(str, Enum):
    DEFAULT = "default"
    CONFIDENCE = "confidence"
    RATIONALE = "rationale"
    LESSON_AUGMENTED = "lesson_augmented"


_ASSET_FILES = {
    TemplateId.DEFAULT: "default_prompt.txt",
    TemplateId.CONFIDENCE: "confidence_prompt.txt",
    TemplateId.RATIONALE: "rationale_prompt.txt",
    TemplateId.LESSON_AUGMENTED: "lesson_prompt.txt",
}

_PLACEHOLDER_RE = re.compile(
    r"(<language1>|<language2>|<code1>|<code2>|<prediction>|<model_prediction>|<label>|<lessons>)"
)


class NotAMistakeError(ValueError):
    """Rationale prompts are only defined for incorrect predictions."""


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    pair_id: str
    template_id: TemplateId
    lesson_ids: tuple[int, ...] = field(default_factory=tuple)


@lru_cache(maxsize=None)
def template_body(template_id: TemplateId) -> str:
    """Raw template text, byte-for-byte as shipped."""
    name = _ASSET_FILES[template_id]
    return resources.files("clone_prompt_lab").joinpath(f"assets/{name}").read_text("utf-8")


def template_checksum(template_id: TemplateId) -> str:
    return hashlib.sha256(template_body(template_id).encode("utf-8")).hexdigest()


def template_checksums() -> dict[str, str]:
    return {tid.value: template_checksum(tid) for tid in TemplateId}


def label_word(label: Label) -> str:
    """The Yes/No wording the prompts use for a clone verdict."""
    return "Yes" if label is Label.CLONE else "No"


def _substitute(body: str, values: dict[str, str]) -> str:
    parts = _PLACEHOLDER_RE.split(body)
    out: list[str] = []
    for part in parts:
        if part in values:
            out.append(values[part])
        elif _PLACEHOLDER_RE.fullmatch(part):
            raise ValueError(f"template placeholder {part} has no value")
        else:
            out.append(part)
    return "".join(out)


def _pair_values(pair: ClonePair, max_code_chars: int | None) -> dict[str, str]:
    code_a, code_b = pair.a.text, pair.b.text
    if max_code_chars is not None:
        code_a = code_a[:max_code_chars]
        code_b = code_b[:max_code_chars]
    return {
        "<language1>": pair.a.language.value,
        "<language2>": pair.b.language.value,
        "<code1>": code_a,
        "<code2>": code_b,
    }


def render_default(pair: ClonePair, max_code_chars: int | None = None) -> RenderedPrompt:
    text = _substitute(template_body(TemplateId.DEFAULT), _pair_values(pair, max_code_chars))
    return RenderedPrompt(text=text, pair_id=pair.id, template_id=TemplateId.DEFAULT)


def render_with_lessons(
    pair: ClonePair, lessons: list[Lesson], max_code_chars: int | None = None
) -> RenderedPrompt:
    """Render the lesson-augmented prompt; an empty list is the default prompt."""
    ids = [lesson.id for lesson in lessons]
    if len(set(ids)) != len(ids):
        raise DuplicateLessonIdError(next(i for i in ids if ids.count(i) > 1))
    if not lessons:
        return render_default(pair, max_code_chars)
    ordered = sorted(lessons, key=lambda lesson: lesson.id)
    block = "".join(lesson.text + " " for lesson in ordered)
    values = _pair_values(pair, max_code_chars)
    values["<lessons>"] = block
    text = _substitute(template_body(TemplateId.LESSON_AUGMENTED), values)
    return RenderedPrompt(
        text=text,
        pair_id=pair.id,
        template_id=TemplateId.LESSON_AUGMENTED,
        lesson_ids=tuple(lesson.id for lesson in ordered),
    )


def render_confidence(
    pair: ClonePair, prediction: Label, max_code_chars: int | None = None
) -> RenderedPrompt:
    values = _pair_values(pair, max_code_chars)
    values["<prediction>"] = label_word(prediction)
    text = _substitute(template_body(TemplateId.CONFIDENCE), values)
    return RenderedPrompt(text=text, pair_id=pair.id, template_id=TemplateId.CONFIDENCE)


def render_rationale(
    pair: ClonePair, prediction: Label, gold_label: Label, max_code_chars: int | None = None
) -> RenderedPrompt:
    if prediction == gold_label:
        raise NotAMistakeError(
            f"pair {pair.id}: prediction matches the gold label; rationales are mined "
            "only from mistakes"
        )
    values = _pair_values(pair, max_code_chars)
    values["<model_prediction>"] = label_word(prediction)
    values["<label>"] = label_word(gold_label)
    text = _substitute(template_body(TemplateId.RATIONALE), values)
    return RenderedPrompt(text=text, pair_id=pair.id, template_id=TemplateId.RATIONALE)
