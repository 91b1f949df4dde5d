"""Conversion of Java/Python translation corpora into cross-language clone pairs.

A translation record's two renditions share a theme id, so each record
yields one Clone pair. NotClone pairs are built by pairing a record's Java
side with the Python side of records under a *different* theme, sampled
uniformly without replacement under a seed.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict

from .types import ClonePair, CodeSnippet, Label, Language, Origin, TranslationRecord

log = logging.getLogger(__name__)


class EmptyInputError(ValueError):
    pass


def find_idx_conflicts(records: list[TranslationRecord]) -> list[tuple[str, int, int]]:
    """Detect records that reuse a theme id for different code.

    Returns (idx, first_position, conflicting_position) triples; these are
    reported as warnings by the converter, never treated as failures.
    """
    first_seen: dict[str, int] = {}
    conflicts: list[tuple[str, int, int]] = []
    for pos, rec in enumerate(records):
        if rec.idx not in first_seen:
            first_seen[rec.idx] = pos
            continue
        base = records[first_seen[rec.idx]]
        if rec.java != base.java or rec.python != base.python:
            conflicts.append((rec.idx, first_seen[rec.idx], pos))
    return conflicts


def convert_avatar(
    records: list[TranslationRecord],
    negatives_per_positive: int = 1,
    seed: int = 0,
) -> list[ClonePair]:
    """Turn translation records into a labeled cross-language pair corpus.

    Output order is deterministic: one Clone pair per record in input
    order, then the NotClone pairs (grouped per source record, each group
    drawn without replacement under ``seed``).
    """
    if not records:
        raise EmptyInputError("no translation records to convert")
    if negatives_per_positive < 0:
        raise ValueError("negatives_per_positive must be >= 0")

    for idx, first_pos, dup_pos in find_idx_conflicts(records):
        log.warning(
            "duplicate idx %r with differing code (records %d and %d); both kept",
            idx, first_pos, dup_pos,
        )

    pairs: list[ClonePair] = []
    for i, rec in enumerate(records):
        pairs.append(
            ClonePair(
                id=f"av-{i:05d}-{rec.idx}",
                a=CodeSnippet(rec.java, Language.JAVA),
                b=CodeSnippet(rec.python, Language.PYTHON),
                label=Label.CLONE,
                origin=Origin.AVATAR,
            )
        )

    if negatives_per_positive == 0:
        return pairs

    by_idx: dict[str, list[int]] = defaultdict(list)
    for i, rec in enumerate(records):
        by_idx[rec.idx].append(i)

    rng = random.Random(seed)
    negatives: list[ClonePair] = []
    n = len(records)
    for i, rec in enumerate(records):
        same_theme = set(by_idx[rec.idx])
        available = n - len(same_theme)
        if available < negatives_per_positive:
            raise ValueError(
                f"record {i} (idx {rec.idx!r}): only {available} cross-theme "
                f"partners available, need {negatives_per_positive}"
            )
        # Rejection sampling: uniform over cross-theme partners, without
        # replacement, without materializing the O(n) candidate list per record.
        drawn: list[int] = []
        taken: set[int] = set()
        while len(drawn) < negatives_per_positive:
            j = rng.randrange(n)
            if j in same_theme or j in taken:
                continue
            taken.add(j)
            drawn.append(j)
        for j in drawn:
            negatives.append(
                ClonePair(
                    id=f"avn-{i:05d}-{j:05d}-{rec.idx}-vs-{records[j].idx}",
                    a=CodeSnippet(rec.java, Language.JAVA),
                    b=CodeSnippet(records[j].python, Language.PYTHON),
                    label=Label.NOT_CLONE,
                    origin=Origin.AVATAR,
                )
            )
    return pairs + negatives
