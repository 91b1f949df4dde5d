"""Core dataset types: code snippets, clone pairs, and sampling specs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Language(str, Enum):
    JAVA = "Java"
    PYTHON = "Python"


class Label(str, Enum):
    CLONE = "Clone"
    NOT_CLONE = "NotClone"

    @property
    def as_int(self) -> int:
        return 1 if self is Label.CLONE else 0

    @classmethod
    def from_int(cls, value: int) -> "Label":
        if value not in (0, 1):
            raise ValueError(f"clone label must be 0 or 1, got {value!r}")
        return cls.CLONE if value == 1 else cls.NOT_CLONE


class Origin(str, Enum):
    AVATAR = "Avatar"
    POOLC = "PoolC"
    SYNTHETIC = "Synthetic"


@dataclass(frozen=True)
class CodeSnippet:
    """A source snippet with its language and comment-variant flag.

    ``comments_stripped=True`` promises that stripping the snippet again
    is a no-op (the stripper enforces this by construction).
    """

    text: str
    language: Language
    comments_stripped: bool = False

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("snippet text must be non-empty")


@dataclass(frozen=True)
class ClonePair:
    """Two snippets with a ground-truth clone label and provenance."""

    id: str
    a: CodeSnippet
    b: CodeSnippet
    label: Label
    origin: Origin

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("pair id must be non-empty")
        if self.origin is Origin.AVATAR:
            if self.a.language is not Language.JAVA or self.b.language is not Language.PYTHON:
                raise ValueError(
                    f"avatar pair {self.id}: expected (Java, Python) snippets, "
                    f"got ({self.a.language.value}, {self.b.language.value})"
                )


@dataclass(frozen=True)
class TranslationRecord:
    """One line of a translation corpus: Java/Python renditions of a theme."""

    java: str
    python: str
    idx: str

    def __post_init__(self) -> None:
        for name in ("java", "python", "idx"):
            if not getattr(self, name):
                raise ValueError(f"translation record field {name!r} must be non-empty")


@dataclass(frozen=True)
class SamplingSpec:
    """Parameters for a finite-population sample-size calculation."""

    population_size: int
    confidence_level: float
    margin_of_error: float
    seed: int = 0
    balanced: bool = True

    def __post_init__(self) -> None:
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence_level must be in (0, 1)")
        if not 0.0 < self.margin_of_error < 1.0:
            raise ValueError("margin_of_error must be in (0, 1)")
