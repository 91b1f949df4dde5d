"""Mining confident mistakes into mistake categories.

A verdict is a *reliable* mistake when the model got the pair wrong while
self-reporting confidence at or above the threshold (default 80 on the
0-100 scale). Rationales mined from those mistakes are assigned to
categories by a deterministic seeded-term matcher: a category's score on a
rationale is the fraction of its seed terms that match, and every category
scoring at or above tau is assigned (multi-label by design, so prevalences
may sum above 100%).

Term matching is case-insensitive on whole words with punctuation
stripped; a multi-word seed term matches when any of its words matches a
rationale word, and a bare trailing ``s`` is folded so plural forms agree.
No other normalization is applied.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .verdicts import VerdictRecord

DEFAULT_CONFIDENCE_THRESHOLD = 80
DEFAULT_TAU = 0.2

_WORD_RE = re.compile(r"[a-z0-9]+")


class EmptyRationaleSetError(ValueError):
    pass


@dataclass(frozen=True)
class MistakeCategory:
    id: str
    name: str
    seed_terms: tuple[str, ...]
    description: str = ""

    def __post_init__(self) -> None:
        if not self.seed_terms:
            raise ValueError(f"category {self.id!r} needs at least one seed term")


@dataclass(frozen=True)
class Taxonomy:
    categories: tuple[MistakeCategory, ...]
    alias_notes: tuple[dict, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [c.name for c in self.categories]
        ids = [c.id for c in self.categories]
        if len(set(names)) != len(names) or len(set(ids)) != len(ids):
            raise ValueError("category ids and names must be unique")

    def get(self, category_id: str) -> MistakeCategory:
        for category in self.categories:
            if category.id == category_id:
                return category
        raise KeyError(f"no category with id {category_id!r}")

    def to_payload(self) -> dict:
        payload = {
            "categories": [
                {
                    "id": c.id,
                    "name": c.name,
                    "seed_terms": list(c.seed_terms),
                    "description": c.description,
                }
                for c in self.categories
            ]
        }
        if self.alias_notes:
            payload["alias_notes"] = [dict(note) for note in self.alias_notes]
        return payload

    def version_hash(self) -> str:
        canonical = json.dumps(self.to_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def taxonomy_from_payload(payload: dict) -> Taxonomy:
    entries = payload.get("categories")
    if not isinstance(entries, list) or not entries:
        raise ValueError("taxonomy payload must contain a non-empty 'categories' list")
    categories = tuple(
        MistakeCategory(
            id=str(e["id"]),
            name=str(e["name"]),
            seed_terms=tuple(str(t).lower() for t in e["seed_terms"]),
            description=str(e.get("description", "")),
        )
        for e in entries
    )
    notes = tuple(dict(n) for n in payload.get("alias_notes", []))
    return Taxonomy(categories=categories, alias_notes=notes)


def load_taxonomy(path: str | Path | None = None) -> Taxonomy:
    """Load a taxonomy file, or the stock eight-category asset."""
    if path is None:
        raw = resources.files("clone_prompt_lab").joinpath("assets/taxonomy.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return taxonomy_from_payload(json.loads(raw))


def save_taxonomy(taxonomy: Taxonomy, directory: str | Path) -> Path:
    """Persist as a new content-addressed version file; existing versions stay."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{taxonomy.version_hash()}.json"
    if not path.exists():
        path.write_text(json.dumps(taxonomy.to_payload(), indent=2) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# reliable mistakes


def filter_reliable_mistakes(
    records: list[VerdictRecord], threshold: int = DEFAULT_CONFIDENCE_THRESHOLD
) -> list[VerdictRecord]:
    """Mistakes the model committed to with confidence >= threshold.

    Records without a confidence value cannot qualify; callers tally them
    separately via :func:`count_missing_confidence`.
    """
    return [
        r
        for r in records
        if r.is_mistake and r.confidence is not None and r.confidence >= threshold
    ]


def count_missing_confidence(records: list[VerdictRecord]) -> int:
    return sum(1 for r in records if r.is_mistake and r.confidence is None)


def sample_for_review(
    records: list[VerdictRecord], n: int = 100, seed: int = 0
) -> tuple[list[VerdictRecord], dict]:
    """Seeded sample for manual coding, plus the parameters that produced it."""
    rng = random.Random(seed)
    chosen = records if len(records) <= n else rng.sample(records, n)
    params = {"requested": n, "returned": len(chosen), "seed": seed,
              "population": len(records)}
    return chosen, params


# ---------------------------------------------------------------------------
# category assignment


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def _word_matches(seed_word: str, rationale_words: set[str]) -> bool:
    if seed_word in rationale_words:
        return True
    if seed_word + "s" in rationale_words:
        return True
    return seed_word.endswith("s") and seed_word[:-1] in rationale_words


def category_score(rationale: str, category: MistakeCategory) -> float:
    """Fraction of the category's seed terms that match the rationale."""
    rationale_words = set(_words(rationale))
    if not rationale_words:
        return 0.0
    matched = 0
    for term in category.seed_terms:
        term_words = _words(term)
        if any(_word_matches(w, rationale_words) for w in term_words):
            matched += 1
    return matched / len(category.seed_terms)


def assign_categories(
    rationale: str, taxonomy: Taxonomy, tau: float = DEFAULT_TAU
) -> set[str]:
    """Ids of every category scoring >= tau; the empty set is a legal outcome."""
    if not taxonomy.categories:
        raise ValueError("taxonomy must contain at least one category")
    return {
        category.id
        for category in taxonomy.categories
        if category_score(rationale, category) >= tau
    }


# ---------------------------------------------------------------------------
# prevalence (category_count / total generated rationales, multi-label)


@dataclass(frozen=True)
class PrevalenceReport:
    per_category: dict  # category id -> {"name", "count", "prevalence"}
    total_rationales: int
    threshold: float
    uncategorized: int

    def to_payload(self) -> dict:
        return {
            "per_category": self.per_category,
            "total_rationales": self.total_rationales,
            "threshold": self.threshold,
            "uncategorized": self.uncategorized,
        }


def prevalence_report_from_payload(payload: dict) -> PrevalenceReport:
    return PrevalenceReport(
        per_category={str(k): dict(v) for k, v in payload["per_category"].items()},
        total_rationales=int(payload["total_rationales"]),
        threshold=float(payload["threshold"]),
        uncategorized=int(payload["uncategorized"]),
    )


def prevalence(
    assignments: list[tuple[str, set[str]]],
    taxonomy: Taxonomy,
    tau: float = DEFAULT_TAU,
) -> PrevalenceReport:
    """Fold (rationale, assigned ids) pairs into per-category prevalence."""
    if not assignments:
        raise EmptyRationaleSetError("prevalence over zero rationales is undefined")
    total = len(assignments)
    counts = {category.id: 0 for category in taxonomy.categories}
    uncategorized = 0
    for _, assigned in assignments:
        if not assigned:
            uncategorized += 1
        for category_id in assigned:
            if category_id not in counts:
                raise KeyError(f"assignment references unknown category {category_id!r}")
            counts[category_id] += 1
    per_category = {
        category.id: {
            "name": category.name,
            "count": counts[category.id],
            "prevalence": counts[category.id] / total,
        }
        for category in taxonomy.categories
    }
    return PrevalenceReport(
        per_category=per_category,
        total_rationales=total,
        threshold=tau,
        uncategorized=uncategorized,
    )
