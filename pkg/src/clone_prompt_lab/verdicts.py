"""Parsing of raw model text into verdicts, confidence scores, and records.

The detection prompt demands a Yes/No answer; responses are scanned for
the first standalone yes/no token (case-insensitive, surrounding
punctuation trimmed), and the leading commitment wins when both occur.
Unparseable responses raise instead of being coerced: silently guessing a
class would bias every downstream metric, so callers exclude them from
confusion counts and tally them in the report.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus.types import Label


class UnparseableVerdictError(ValueError):
    pass


class UnparseableConfidenceError(ValueError):
    pass


@dataclass(frozen=True)
class VerdictRecord:
    pair_id: str
    predicted: Label | None  # None when the response had no parseable verdict
    gold: Label
    raw_response: str
    confidence: int | None = None
    rationale: str | None = None

    def __post_init__(self) -> None:
        if self.confidence is not None and not 0 <= self.confidence <= 100:
            raise ValueError(f"confidence must be in [0, 100], got {self.confidence}")

    @property
    def is_mistake(self) -> bool:
        return self.predicted is not None and self.predicted != self.gold

    @property
    def is_correct(self) -> bool:
        return self.predicted is not None and self.predicted == self.gold

    def with_confidence(self, confidence: int | None) -> "VerdictRecord":
        return replace(self, confidence=confidence)

    def with_rationale(self, rationale: str) -> "VerdictRecord":
        return replace(self, rationale=rationale)


_TRIM = string.punctuation + string.whitespace + "“”‘’"
_INT_RE = re.compile(r"-?\d+")


def parse_verdict(raw: str) -> Label:
    """First standalone yes/no token decides; Yes means Clone."""
    for token in raw.split():
        word = token.strip(_TRIM).lower()
        if word == "yes":
            return Label.CLONE
        if word == "no":
            return Label.NOT_CLONE
    raise UnparseableVerdictError(f"no standalone yes/no token in response: {raw[:80]!r}")


def parse_confidence(raw: str) -> int:
    """First integer literal within [0, 100]; out-of-range integers are skipped."""
    for match in _INT_RE.finditer(raw):
        value = int(match.group())
        if 0 <= value <= 100:
            return value
    raise UnparseableConfidenceError(f"no integer in [0, 100] in response: {raw[:80]!r}")


# ---------------------------------------------------------------------------
# verdict log (line-delimited)


def verdict_to_record(verdict: VerdictRecord) -> dict:
    return {
        "pair_id": verdict.pair_id,
        "predicted": None if verdict.predicted is None else verdict.predicted.as_int,
        "gold": verdict.gold.as_int,
        "confidence": verdict.confidence,
        "raw": verdict.raw_response,
        "rationale": verdict.rationale,
    }


def verdict_from_record(obj: dict) -> VerdictRecord:
    predicted = obj["predicted"]
    return VerdictRecord(
        pair_id=str(obj["pair_id"]),
        predicted=None if predicted is None else Label.from_int(int(predicted)),
        gold=Label.from_int(int(obj["gold"])),
        raw_response=obj.get("raw", ""),
        confidence=obj.get("confidence"),
        rationale=obj.get("rationale"),
    )


def write_verdict_log(verdicts: list[VerdictRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for verdict in verdicts:
            fh.write(json.dumps(verdict_to_record(verdict), ensure_ascii=False) + "\n")


def read_verdict_log(path: str | Path) -> list[VerdictRecord]:
    verdicts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                verdicts.append(verdict_from_record(json.loads(line)))
    return verdicts
