"""Line-delimited dataset readers and writers.

All readers stream line-by-line. A malformed line is fatal by default;
under ``lenient=True`` it is logged with its line number and skipped.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterator

from .types import ClonePair, CodeSnippet, Label, Language, Origin, TranslationRecord

log = logging.getLogger(__name__)

DEFAULT_POOLC_FIELDS = {"code_a": "code1", "code_b": "code2", "label": "label"}


class DatasetFormatError(ValueError):
    def __init__(self, path: Path | str, line_no: int, reason: str) -> None:
        super().__init__(f"{path}:{line_no}: {reason}")
        self.line_no = line_no


def _iter_json_lines(path: Path, lenient: bool) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not an object")
            except ValueError as exc:
                if lenient:
                    log.warning("%s:%d: skipping malformed line (%s)", path, line_no, exc)
                    continue
                raise DatasetFormatError(path, line_no, str(exc)) from exc
            yield line_no, obj


def read_avatar_records(path: str | Path, lenient: bool = False) -> list[TranslationRecord]:
    """Read translation records: one object per line with java/python/idx keys."""
    path = Path(path)
    records: list[TranslationRecord] = []
    for line_no, obj in _iter_json_lines(path, lenient):
        try:
            records.append(
                TranslationRecord(
                    java=obj["java"], python=obj["python"], idx=str(obj["idx"])
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            if lenient:
                log.warning("%s:%d: skipping bad record (%s)", path, line_no, exc)
                continue
            raise DatasetFormatError(path, line_no, str(exc)) from exc
    return records


def read_pairs(path: str | Path, lenient: bool = False) -> list[ClonePair]:
    """Read a labeled pair dataset (the workbench's own exchange format)."""
    path = Path(path)
    pairs: list[ClonePair] = []
    for line_no, obj in _iter_json_lines(path, lenient):
        try:
            pairs.append(
                ClonePair(
                    id=str(obj["id"]),
                    a=CodeSnippet(
                        obj["code_a"],
                        Language(obj["lang_a"]),
                        bool(obj.get("comments_stripped", False)),
                    ),
                    b=CodeSnippet(
                        obj["code_b"],
                        Language(obj["lang_b"]),
                        bool(obj.get("comments_stripped", False)),
                    ),
                    label=Label.from_int(int(obj["label"])),
                    origin=Origin(obj.get("origin", "Synthetic")),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            if lenient:
                log.warning("%s:%d: skipping bad pair (%s)", path, line_no, exc)
                continue
            raise DatasetFormatError(path, line_no, str(exc)) from exc
    _check_unique_ids(pairs, path)
    return pairs


def read_poolc_pairs(
    path: str | Path,
    field_map: dict[str, str] | None = None,
    language: Language = Language.PYTHON,
    lenient: bool = False,
) -> list[ClonePair]:
    """Read a within-language dataset with two code fields and a binary label.

    ``field_map`` renames the workbench's logical fields (code_a, code_b,
    label, and optionally id) to whatever the file actually uses.
    """
    path = Path(path)
    fields = dict(DEFAULT_POOLC_FIELDS)
    fields.update(field_map or {})
    pairs: list[ClonePair] = []
    for line_no, obj in _iter_json_lines(path, lenient):
        try:
            pair_id = str(obj[fields["id"]]) if "id" in fields else f"poolc-{line_no:06d}"
            pairs.append(
                ClonePair(
                    id=pair_id,
                    a=CodeSnippet(obj[fields["code_a"]], language),
                    b=CodeSnippet(obj[fields["code_b"]], language),
                    label=Label.from_int(int(obj[fields["label"]])),
                    origin=Origin.POOLC,
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            if lenient:
                log.warning("%s:%d: skipping bad pair (%s)", path, line_no, exc)
                continue
            raise DatasetFormatError(path, line_no, str(exc)) from exc
    _check_unique_ids(pairs, path)
    return pairs


def write_pairs(pairs: list[ClonePair], path: str | Path) -> None:
    """Write pairs as line-delimited records with a 1/0 clone label."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_record(pair), ensure_ascii=False) + "\n")


def pair_to_record(pair: ClonePair) -> dict:
    record = {
        "id": pair.id,
        "lang_a": pair.a.language.value,
        "lang_b": pair.b.language.value,
        "code_a": pair.a.text,
        "code_b": pair.b.text,
        "label": pair.label.as_int,
        "origin": pair.origin.value,
    }
    # the flag is pair-level in this format; claim it only when it holds for both
    if pair.a.comments_stripped and pair.b.comments_stripped:
        record["comments_stripped"] = True
    return record


def _check_unique_ids(pairs: list[ClonePair], path: Path) -> None:
    seen: set[str] = set()
    for pair in pairs:
        if pair.id in seen:
            raise DatasetFormatError(path, 0, f"duplicate pair id {pair.id!r}")
        seen.add(pair.id)
