"""Deterministic replay workspace for pipeline and acceptance tests.

Builds a 50-pair dataset plus a recorded response corpus covering every
prompt the full pipeline issues: 10 ablation conditions, confidence
extraction for the default run's mistakes, and rationale extraction for
its reliable mistakes. The planted plan (which pairs each condition gets
wrong, what confidences and rationales come back) is returned so tests
can recompute every expected number independently.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from clone_prompt_lab.corpus import (
    ClonePair,
    CodeSnippet,
    Label,
    Language,
    Origin,
    strip_comments,
    write_pairs,
)
from clone_prompt_lab.gateway import Exchange, make_exchange, write_exchanges
from clone_prompt_lab.promptkit import (
    load_lessons,
    render_confidence,
    render_rationale,
    render_with_lessons,
)

MODEL = "fixture-model"
TEMPERATURE = 0.0

YES_POOL = ["Yes", "Yes.", "yes, they are clones.", "Yes - same logic throughout."]
NO_POOL = ["No", "No.", "no, the snippets differ.", "No; they call different APIs."]

# default-run mistakes: clone pairs answered No, non-clone pairs answered Yes
DEFAULT_WRONG_CLONE = (0, 3, 7, 11, 15, 20)
DEFAULT_WRONG_NOTCLONE = (27, 33, 40, 48)
DEFAULT_WRONG = DEFAULT_WRONG_CLONE + DEFAULT_WRONG_NOTCLONE

# confidence the model reports for each default mistake
PLANTED_CONFIDENCE = {
    0: 0, 27: 0, 3: 60, 7: 80, 33: 80, 11: 90, 40: 90, 48: 90, 15: 95, 20: 100,
}
RELIABLE = (7, 11, 15, 20, 33, 40, 48)  # confidence >= 80

# rationale text per reliable mistake; categories use the fixture taxonomy below
PLANTED_RATIONALE = {
    7: "The quartz pattern threw the prediction off.",
    11: "Both quartz and basalt features looked divergent.",
    15: "Nothing relevant can be said here.",
    20: "A mix of quartz, basalt and schist issues.",
    33: "The basalt structure differed between snippets.",
    40: "A gneiss layering mismatch was assumed.",
    48: "Both schist and gneiss textures were misread.",
}
EXPECTED_ASSIGNMENTS = {
    7: {"x"},
    11: {"x", "y"},
    15: set(),
    20: {"x", "y", "z"},
    33: {"y"},
    40: {"z"},
    48: {"z"},
}

FIXTURE_TAXONOMY = {
    "categories": [
        {"id": "x", "name": "Quartz Confusion", "seed_terms": ["quartz"],
         "description": "fixture category x"},
        {"id": "y", "name": "Basalt Confusion", "seed_terms": ["basalt"],
         "description": "fixture category y"},
        {"id": "z", "name": "Layering Confusion", "seed_terms": ["gneiss", "schist"],
         "description": "fixture category z"},
    ]
}

# per-lesson effect on the default run: indices fixed, indices broken
LESSON_EFFECTS = {
    1: ({0, 3}, set()),
    2: ({7}, set()),
    3: ({11}, {5}),
    4: (set(), set()),
    5: ({27}, set()),
    6: ({33}, {30}),
    7: ({0, 3, 7, 11, 15}, set()),
    8: (set(), {2}),
}
ALL_LESSONS_EFFECT = ({0, 3, 7, 11, 15, 20, 27, 33}, set())

# a reviewer-edited wording of lesson 7, with its own recorded responses so
# triage-driven reruns replay cleanly
EDITED_LESSON_7_TEXT = "Weigh code logic over incidental formatting."
EDITED_LESSON_7_EFFECT = ({0, 3, 7, 11, 15, 20}, set())


@dataclass
class FixtureWorkspace:
    root: Path
    config_path: Path
    pairs_path: Path
    cache_path: Path
    taxonomy_path: Path
    pairs: list[ClonePair]
    correctness: dict[str, dict[str, bool]] = field(default_factory=dict)
    predictions: dict[str, dict[str, Label]] = field(default_factory=dict)

    def pair(self, index: int) -> ClonePair:
        return self.pairs[index]


def make_fixture_pairs(n_pairs: int = 50) -> list[ClonePair]:
    """Half clone, half not; snippets carry comments so stripping matters."""
    pairs = []
    for i in range(n_pairs):
        label = Label.CLONE if i < n_pairs // 2 else Label.NOT_CLONE
        java = (
            f"public class Task{i} {{\n"
            f"    // compute variant {i}\n"
            f"    static int run(int x) {{ return x * {i + 1}; /* scaled */ }}\n"
            f"}}\n"
        )
        suffix = i if label is Label.CLONE else i + 1000
        python = (
            f"def run(x):\n"
            f"    # compute variant {suffix}\n"
            f"    return x * {suffix + 1}\n"
        )
        pairs.append(
            ClonePair(
                id=f"sp-{i:04d}",
                a=CodeSnippet(java, Language.JAVA),
                b=CodeSnippet(python, Language.PYTHON),
                label=label,
                origin=Origin.SYNTHETIC,
            )
        )
    return pairs


def condition_wrong_set(condition: str) -> set[int]:
    """Planted wrong pair indices for a condition, derived from the default."""
    wrong = set(DEFAULT_WRONG)
    if condition == "default":
        return wrong
    if condition == "all_lessons":
        fixed, broken = ALL_LESSONS_EFFECT
    else:
        lesson_id = int(condition.removeprefix("lesson_"))
        fixed, broken = LESSON_EFFECTS[lesson_id]
    return (wrong - fixed) | broken


def build_replay_workspace(root: Path, n_pairs: int = 50) -> FixtureWorkspace:
    root.mkdir(parents=True, exist_ok=True)
    pairs = make_fixture_pairs(n_pairs)
    pairs_path = root / "pairs.jsonl"
    write_pairs(pairs, pairs_path)

    taxonomy_path = root / "taxonomy.json"
    taxonomy_path.write_text(json.dumps(FIXTURE_TAXONOMY, indent=2) + "\n", encoding="utf-8")

    # prompts are rendered over the comment-stripped variant, matching the config
    stripped = [
        ClonePair(id=p.id, a=strip_comments(p.a), b=strip_comments(p.b),
                  label=p.label, origin=p.origin)
        for p in pairs
    ]
    lessons = load_lessons()
    conditions = (
        ["default"] + [f"lesson_{i}" for i in lessons.ids] + ["all_lessons"]
    )
    lesson_selection = {"default": []}
    for i in lessons.ids:
        lesson_selection[f"lesson_{i}"] = [lessons.get(i)]
    lesson_selection["all_lessons"] = list(lessons.lessons)

    rng = random.Random(20_26)
    exchanges: list[Exchange] = []
    correctness: dict[str, dict[str, bool]] = {}
    predictions: dict[str, dict[str, Label]] = {}
    for condition in conditions:
        wrong = condition_wrong_set(condition)
        correctness[condition] = {}
        predictions[condition] = {}
        for index, pair in enumerate(stripped):
            correct = index not in wrong
            predicted = pair.label if correct else (
                Label.NOT_CLONE if pair.label is Label.CLONE else Label.CLONE
            )
            pool = YES_POOL if predicted is Label.CLONE else NO_POOL
            response = pool[rng.randrange(len(pool))]
            prompt = render_with_lessons(pair, lesson_selection[condition])
            exchanges.append(make_exchange(MODEL, TEMPERATURE, prompt.text, response))
            correctness[condition][pair.id] = correct
            predictions[condition][pair.id] = predicted

    # responses for a rerun with the edited lesson-7 wording
    from clone_prompt_lab.promptkit import Lesson

    edited_lesson = Lesson(id=7, text=EDITED_LESSON_7_TEXT)
    edited_wrong = (set(DEFAULT_WRONG) - EDITED_LESSON_7_EFFECT[0]) | EDITED_LESSON_7_EFFECT[1]
    correctness["lesson_7_edited"] = {}
    predictions["lesson_7_edited"] = {}
    for index, pair in enumerate(stripped):
        correct = index not in edited_wrong
        predicted = pair.label if correct else (
            Label.NOT_CLONE if pair.label is Label.CLONE else Label.CLONE
        )
        pool = YES_POOL if predicted is Label.CLONE else NO_POOL
        response = pool[rng.randrange(len(pool))]
        prompt = render_with_lessons(pair, [edited_lesson])
        exchanges.append(make_exchange(MODEL, TEMPERATURE, prompt.text, response))
        correctness["lesson_7_edited"][pair.id] = correct
        predictions["lesson_7_edited"][pair.id] = predicted

    # confidence responses for the default run's mistakes
    for index in DEFAULT_WRONG:
        pair = stripped[index]
        predicted = predictions["default"][pair.id]
        prompt = render_confidence(pair, predicted)
        value = PLANTED_CONFIDENCE[index]
        response = f"I am {value}% confident in that answer." if value else "0"
        exchanges.append(make_exchange(MODEL, TEMPERATURE, prompt.text, response))

    # rationale responses for the reliable mistakes
    for index in RELIABLE:
        pair = stripped[index]
        predicted = predictions["default"][pair.id]
        prompt = render_rationale(pair, predicted, pair.label)
        exchanges.append(
            make_exchange(MODEL, TEMPERATURE, prompt.text, PLANTED_RATIONALE[index])
        )

    cache_path = root / "replay.jsonl"
    write_exchanges(exchanges, cache_path)

    config_path = root / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "dataset": {"path": "pairs.jsonl", "format": "pairs"},
                "backend": {
                    "provider_id": "fixture",
                    "model_name": MODEL,
                    "temperature": TEMPERATURE,
                    "mode": "replay",
                    "cache_path": "replay.jsonl",
                },
                "comment_variant": "without",
                "mining": {
                    "confidence_threshold": 80,
                    "tau": 0.2,
                    "taxonomy_path": "taxonomy.json",
                },
                "ablation": True,
                "seed": 7,
                "out_dir": "out",
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return FixtureWorkspace(
        root=root,
        config_path=config_path,
        pairs_path=pairs_path,
        cache_path=cache_path,
        taxonomy_path=taxonomy_path,
        pairs=pairs,
        correctness=correctness,
        predictions=predictions,
    )


def brute_force_confusion(
    pairs: list[ClonePair], predictions: dict[str, Label]
) -> tuple[int, int, int, int]:
    """Independent confusion oracle: explicit per-pair case analysis."""
    tp = fp = tn = fn = 0
    for pair in pairs:
        predicted = predictions[pair.id]
        if predicted is Label.CLONE and pair.label is Label.CLONE:
            tp += 1
        elif predicted is Label.CLONE and pair.label is Label.NOT_CLONE:
            fp += 1
        elif predicted is Label.NOT_CLONE and pair.label is Label.NOT_CLONE:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def brute_force_f1(tp: int, fp: int, fn: int) -> float | None:
    """F1 directly from counts (2tp / (2tp + fp + fn)), no P/R intermediate."""
    denominator = 2 * tp + fp + fn
    return None if denominator == 0 else 2 * tp / denominator
