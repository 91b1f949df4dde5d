from __future__ import annotations

import random

import pytest

from clone_prompt_lab.corpus import Label
from clone_prompt_lab.verdicts import (
    UnparseableConfidenceError,
    UnparseableVerdictError,
    VerdictRecord,
    parse_confidence,
    parse_verdict,
    read_verdict_log,
    write_verdict_log,
)


def test_exact_tokens() -> None:
    assert parse_verdict("Yes") is Label.CLONE
    assert parse_verdict("No") is Label.NOT_CLONE


def test_leading_noise_and_punctuation() -> None:
    assert parse_verdict("  no, the snippets differ.") is Label.NOT_CLONE
    assert parse_verdict('"Yes." They match.') is Label.CLONE
    assert parse_verdict("YES!!!") is Label.CLONE


def test_first_token_wins_when_both_occur() -> None:
    assert parse_verdict("Yes. Although one could argue no.") is Label.CLONE
    assert parse_verdict("No — but yes, they share a loop.") is Label.NOT_CLONE


def test_embedded_words_do_not_count() -> None:
    with pytest.raises(UnparseableVerdictError):
        parse_verdict("Yesterday's notes were nothing.")
    assert parse_verdict("Yesterday I said no.") is Label.NOT_CLONE


def test_neither_token_is_unparseable() -> None:
    with pytest.raises(UnparseableVerdictError):
        parse_verdict("These are similar.")


def test_prefix_property_over_random_suffixes() -> None:
    rng = random.Random(21)
    fillers = ["the", "snippets", "differ", "match,", "clearly.", "loops;"]
    for _ in range(200):
        suffix = " " + " ".join(rng.choice(fillers) for _ in range(rng.randint(0, 6)))
        assert parse_verdict("Yes" + suffix) is Label.CLONE
        assert parse_verdict("No" + suffix) is Label.NOT_CLONE


def test_confidence_plain_and_embedded() -> None:
    assert parse_confidence("90") == 90
    assert parse_confidence("I am 95% confident.") == 95
    assert parse_confidence("Confidence: 100.") == 100


def test_confidence_skips_out_of_range_integers() -> None:
    assert parse_confidence("On a scale to 1000, I say 85.") == 85
    assert parse_confidence("-5 makes no sense, 70 does.") == 70


def test_confidence_without_digits_errors() -> None:
    with pytest.raises(UnparseableConfidenceError):
        parse_confidence("confidence: one hundred")


def test_confidence_never_silently_clamped() -> None:
    with pytest.raises(UnparseableConfidenceError):
        parse_confidence("I am 200% sure!")


def test_record_keeps_raw_bytes_and_validates_confidence() -> None:
    raw = "  Yes!\n(with trailing thoughts)"
    record = VerdictRecord(
        pair_id="p-1", predicted=parse_verdict(raw), gold=Label.NOT_CLONE, raw_response=raw
    )
    assert record.raw_response == raw
    assert record.is_mistake
    with pytest.raises(ValueError):
        VerdictRecord(pair_id="p-1", predicted=Label.CLONE, gold=Label.CLONE,
                      raw_response="", confidence=101)


def test_verdict_log_round_trip(tmp_path) -> None:
    verdicts = [
        VerdictRecord("p-1", Label.CLONE, Label.CLONE, "Yes", confidence=90),
        VerdictRecord("p-2", Label.NOT_CLONE, Label.CLONE, "no...", confidence=0,
                      rationale="They looked different."),
        VerdictRecord("p-3", None, Label.NOT_CLONE, "unclear"),
    ]
    path = tmp_path / "verdicts.jsonl"
    write_verdict_log(verdicts, path)
    assert read_verdict_log(path) == verdicts
