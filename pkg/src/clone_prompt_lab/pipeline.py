"""End-to-end orchestration: eval runs, lesson ablations, bias mining.

Artifacts land under ``<out_dir>/runs/<run_id>/`` with content-addressed
run ids, so nothing is ever overwritten: re-invoking with identical
inputs finds the existing artifacts and returns them unchanged. Report
files carry no timestamps; two runs from the same fixtures are
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .corpus import (
    build_benchmark,
    convert_avatar,
    read_avatar_records,
    read_pairs,
    read_poolc_pairs,
    strip_comments,
)
from .corpus.types import ClonePair, Language
from .gateway import Gateway, GatewayError
from .manifest import RunManifest, file_sha256, load_manifest, now_iso
from .mining import (
    Taxonomy,
    assign_categories,
    count_missing_confidence,
    filter_reliable_mistakes,
    load_taxonomy,
    prevalence,
    sample_for_review,
)
from .promptkit import (
    LessonSet,
    TemplateId,
    load_lessons,
    render_confidence,
    render_rationale,
    render_with_lessons,
    template_checksum,
    template_checksums,
)
from .stats import (
    ConfusionCounts,
    MetricSet,
    PairIdMismatchError,
    ShiftCounts,
    confusion,
    delta_f1,
    metrics,
    paired_significance,
    prediction_shift,
    render_metrics_table,
    render_shift_table,
)
from .verdicts import (
    UnparseableConfidenceError,
    UnparseableVerdictError,
    VerdictRecord,
    parse_confidence,
    parse_verdict,
    read_verdict_log,
    write_verdict_log,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# dataset loading


def load_pairs(cfg: ExperimentConfig) -> list[ClonePair]:
    """Materialize the evaluation pairs a config describes.

    Deterministic given (config, seed): conversion, sampling, and comment
    stripping all key off the config's seed and flags.
    """
    path = Path(cfg.dataset.path)
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    lenient = cfg.dataset.lenient
    if cfg.dataset.format == "avatar":
        records = read_avatar_records(path, lenient=lenient)
        pairs = convert_avatar(
            records,
            negatives_per_positive=cfg.dataset.negatives_per_positive,
            seed=cfg.seed,
        )
    elif cfg.dataset.format == "poolc":
        pairs = read_poolc_pairs(
            path,
            field_map=cfg.dataset.field_map or None,
            language=Language(cfg.dataset.language),
            lenient=lenient,
        )
    else:
        pairs = read_pairs(path, lenient=lenient)

    if cfg.sampling is not None:
        pairs = build_benchmark(pairs, size=cfg.sampling.size, seed=cfg.seed)

    if cfg.comment_variant == "without":
        pairs = [
            replace(pair, a=strip_comments(pair.a), b=strip_comments(pair.b))
            for pair in pairs
        ]
    return pairs


def condition_name(lesson_ids: tuple[int, ...], lesson_set: LessonSet) -> str:
    if not lesson_ids:
        return "default"
    if sorted(lesson_ids) == sorted(lesson_set.ids):
        return "all_lessons"
    if len(lesson_ids) == 1:
        return f"lesson_{lesson_ids[0]}"
    return "lessons_" + "_".join(str(i) for i in sorted(lesson_ids))


# ---------------------------------------------------------------------------
# eval runs


@dataclass(frozen=True)
class EvalReport:
    manifest: RunManifest
    counts: ConfusionCounts
    metrics: MetricSet
    shift: ShiftCounts | None
    unparsed: int
    gateway_errors: int
    pair_count: int
    baseline_run_id: str | None
    run_dir: Path

    @property
    def run_id(self) -> str:
        return self.manifest.run_id

    def to_payload(self) -> dict:
        return {
            "run_id": self.run_id,
            "condition": self.manifest.condition,
            "pair_count": self.pair_count,
            "counts": {
                "tp": self.counts.tp, "fp": self.counts.fp,
                "tn": self.counts.tn, "fn": self.counts.fn,
            },
            "metrics": {
                "precision": self.metrics.precision,
                "recall": self.metrics.recall,
                "accuracy": self.metrics.accuracy,
                "f1": self.metrics.f1,
                "delta_f1_points": self.metrics.delta_f1_points,
                "p_value": self.metrics.p_value,
            },
            "shift": None if self.shift is None else {
                "wrong_to_right": self.shift.wrong_to_right,
                "right_to_wrong": self.shift.right_to_wrong,
            },
            "unparsed": self.unparsed,
            "gateway_errors": self.gateway_errors,
            "significance_method": self.manifest.significance_method,
            "baseline_run_id": self.baseline_run_id,
        }


def _dataset_descriptor(cfg: ExperimentConfig, pairs: list[ClonePair]) -> dict:
    descriptor = {
        "name": Path(cfg.dataset.path).name,
        "sha256": file_sha256(cfg.dataset.path),
        "format": cfg.dataset.format,
        "pair_count": len(pairs),
        "comment_variant": cfg.comment_variant,
        "sampling_size": cfg.sampling.size if cfg.sampling else None,
    }
    if cfg.dataset.format == "avatar":
        descriptor["negatives_per_positive"] = cfg.dataset.negatives_per_positive
    return descriptor


def _build_manifest(
    cfg: ExperimentConfig,
    pairs: list[ClonePair],
    lesson_set: LessonSet,
    taxonomy: Taxonomy,
    gateway: Gateway,
    lesson_ids: tuple[int, ...],
) -> RunManifest:
    template_id = TemplateId.LESSON_AUGMENTED if lesson_ids else TemplateId.DEFAULT
    return RunManifest(
        condition=condition_name(lesson_ids, lesson_set),
        dataset=_dataset_descriptor(cfg, pairs),
        template={"id": template_id.value, "sha256": template_checksum(template_id)},
        template_checksums=template_checksums(),
        lesson_ids=tuple(sorted(lesson_ids)),
        lessons_hash=lesson_set.version_hash(),
        taxonomy_hash=taxonomy.version_hash(),
        backend={
            "provider_id": cfg.backend.provider_id,
            "model_name": cfg.backend.model_name,
            "temperature": cfg.backend.temperature,
            "mode": cfg.backend.mode.value,
            "api_key_env": cfg.backend.api_key_env,  # the name, never the secret
        },
        seed=cfg.seed,
        replay_cache_sha256=(
            gateway.cache.sha256()
            if gateway.cache is not None and cfg.backend.mode.value == "replay"
            else None
        ),
        significance_method=cfg.significance_method,
        max_code_chars=cfg.max_code_chars,
        created_at=now_iso(),
    )


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_existing_report(run_dir: Path) -> EvalReport:
    manifest = load_manifest(run_dir / "manifest.json")
    payload = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    shift = payload["shift"]
    return EvalReport(
        manifest=manifest,
        counts=ConfusionCounts(**payload["counts"]),
        metrics=MetricSet(**payload["metrics"]),
        shift=None if shift is None else ShiftCounts(**shift),
        unparsed=payload["unparsed"],
        gateway_errors=payload["gateway_errors"],
        pair_count=payload["pair_count"],
        baseline_run_id=payload["baseline_run_id"],
        run_dir=run_dir,
    )


def run_eval(
    cfg: ExperimentConfig,
    gateway: Gateway | None = None,
    pairs: list[ClonePair] | None = None,
    lesson_set: LessonSet | None = None,
    taxonomy: Taxonomy | None = None,
    baseline: tuple[str, list[VerdictRecord]] | None = None,
    self_baseline: bool = False,
) -> EvalReport:
    """Evaluate every pair under the config's prompt condition.

    Re-running an identical config is a no-op that returns the artifacts
    already on disk (run ids are content addresses). With ``self_baseline``
    the run reports a zero F1 delta against itself, which is how the
    default row of an ablation is presented.
    """
    if pairs is None:
        pairs = load_pairs(cfg)
    if lesson_set is None:
        lesson_set = load_lessons(cfg.lessons_path)
    if taxonomy is None:
        taxonomy = load_taxonomy(cfg.mining.taxonomy_path)
    if gateway is None:
        gateway = Gateway(cfg.backend)

    manifest = _build_manifest(
        cfg, pairs, lesson_set, taxonomy, gateway, tuple(cfg.lesson_ids)
    )
    run_dir = Path(cfg.out_dir) / "runs" / manifest.run_id
    if (run_dir / "report.json").exists():
        log.info("run %s already complete; reusing artifacts", manifest.run_id)
        existing = _load_existing_report(run_dir)
        if self_baseline:
            own = read_verdict_log(run_dir / "verdicts.jsonl")
            return _attach_baseline(existing, (existing.run_id, own), cfg, own)
        return _attach_baseline(existing, baseline, cfg)

    lessons = lesson_set.select(list(cfg.lesson_ids))
    prompts = [
        render_with_lessons(pair, lessons, cfg.max_code_chars) for pair in pairs
    ]
    outcomes = gateway.complete_batch(prompts)

    verdicts: list[VerdictRecord] = []
    unparsed = 0
    gateway_errors = 0
    for pair, outcome in zip(pairs, outcomes):
        if isinstance(outcome, GatewayError):
            gateway_errors += 1
            log.warning("pair %s: backend failure: %s", pair.id, outcome)
            verdicts.append(
                VerdictRecord(pair_id=pair.id, predicted=None, gold=pair.label,
                              raw_response=f"[gateway error] {outcome}")
            )
            continue
        try:
            predicted = parse_verdict(outcome)
        except UnparseableVerdictError:
            unparsed += 1
            predicted = None
        verdicts.append(
            VerdictRecord(pair_id=pair.id, predicted=predicted, gold=pair.label,
                          raw_response=outcome)
        )

    scored = [v for v in verdicts if v.predicted is not None]
    counts = confusion(scored)
    metric_set = metrics(counts)

    report = EvalReport(
        manifest=manifest,
        counts=counts,
        metrics=metric_set,
        shift=None,
        unparsed=unparsed,
        gateway_errors=gateway_errors,
        pair_count=len(pairs),
        baseline_run_id=None,
        run_dir=run_dir,
    )
    if self_baseline:
        baseline = (manifest.run_id, verdicts)
    report = _attach_baseline(report, baseline, cfg, verdicts)

    manifest.save(run_dir / "manifest.json")
    write_verdict_log(verdicts, run_dir / "verdicts.jsonl")
    _write_json(run_dir / "report.json", report.to_payload())
    (run_dir / "report.txt").write_text(_render_run_table(report), encoding="utf-8")
    return report


def _attach_baseline(
    report: EvalReport,
    baseline: tuple[str, list[VerdictRecord]] | None,
    cfg: ExperimentConfig,
    verdicts: list[VerdictRecord] | None = None,
) -> EvalReport:
    if baseline is None:
        return report
    baseline_run_id, baseline_verdicts = baseline
    if verdicts is None:
        verdicts = read_verdict_log(report.run_dir / "verdicts.jsonl")
    if report.manifest.run_id == baseline_run_id:
        metric_set = replace(report.metrics, delta_f1_points=0.0, p_value=None)
        return replace(report, metrics=metric_set, shift=None,
                       baseline_run_id=baseline_run_id)
    by_id = {v.pair_id: v for v in verdicts}
    if set(by_id) != {v.pair_id for v in baseline_verdicts}:
        raise PairIdMismatchError(
            f"run {report.run_id} and baseline {baseline_run_id} cover different pairs"
        )
    ordered = [by_id[v.pair_id] for v in baseline_verdicts]
    correctness_base = [1 if v.is_correct else 0 for v in baseline_verdicts]
    correctness_run = [1 if v.is_correct else 0 for v in ordered]
    base_metrics = metrics(
        confusion([v for v in baseline_verdicts if v.predicted is not None])
    )
    metric_set = replace(
        report.metrics,
        delta_f1_points=delta_f1(report.metrics, base_metrics),
        p_value=paired_significance(
            correctness_base, correctness_run, method=cfg.significance_method
        ),
    )
    shift = prediction_shift(baseline_verdicts, ordered)
    return replace(report, metrics=metric_set, shift=shift, baseline_run_id=baseline_run_id)


def _render_run_table(report: EvalReport) -> str:
    table = render_metrics_table([(report.manifest.condition, report.metrics)])
    if report.shift is not None:
        table += "\n" + render_shift_table([(report.manifest.condition, report.shift)])
    return table


# ---------------------------------------------------------------------------
# ablation


def ablation_conditions(lesson_set: LessonSet) -> list[tuple[int, ...]]:
    """Condition order: default, each single lesson, then all lessons."""
    singles = [(i,) for i in lesson_set.ids]
    return [()] + singles + [tuple(lesson_set.ids)]


def run_ablation(cfg: ExperimentConfig, gateway: Gateway | None = None) -> list[EvalReport]:
    """One run per prompt condition, all over the same pair set.

    Every non-default report carries its F1 delta, p-value, and prediction
    shifts against the default run.
    """
    pairs = load_pairs(cfg)
    lesson_set = load_lessons(cfg.lessons_path)
    taxonomy = load_taxonomy(cfg.mining.taxonomy_path)
    if gateway is None:
        gateway = Gateway(cfg.backend)

    reports: list[EvalReport] = []
    baseline: tuple[str, list[VerdictRecord]] | None = None
    for lesson_ids in ablation_conditions(lesson_set):
        condition_cfg = cfg.with_lessons(lesson_ids)
        report = run_eval(
            condition_cfg,
            gateway=gateway,
            pairs=pairs,
            lesson_set=lesson_set,
            taxonomy=taxonomy,
            baseline=baseline,
            self_baseline=baseline is None,
        )
        if baseline is None:
            baseline = (report.run_id, read_verdict_log(report.run_dir / "verdicts.jsonl"))
        reports.append(report)

    _write_ablation_summary(cfg, reports)
    return reports


def ablation_id(reports: list[EvalReport]) -> str:
    joined = ",".join(r.run_id for r in reports)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def _write_ablation_summary(cfg: ExperimentConfig, reports: list[EvalReport]) -> None:
    summary_dir = Path(cfg.out_dir) / "ablations" / ablation_id(reports)
    payload = {
        "ablation_id": ablation_id(reports),
        "conditions": [r.manifest.condition for r in reports],
        "run_ids": [r.run_id for r in reports],
        "reports": [r.to_payload() for r in reports],
    }
    _write_json(summary_dir / "summary.json", payload)
    table = render_metrics_table([(r.manifest.condition, r.metrics) for r in reports])
    shifts = render_shift_table(
        [(r.manifest.condition, r.shift) for r in reports if r.shift is not None]
    )
    (summary_dir / "table.txt").write_text(table, encoding="utf-8")
    (summary_dir / "shifts.txt").write_text(shifts, encoding="utf-8")


# ---------------------------------------------------------------------------
# bias mining


@dataclass(frozen=True)
class MiningResult:
    run_id: str
    mining_key: str
    payload: dict
    mining_dir: Path


def mining_key(taxonomy: Taxonomy, cfg: ExperimentConfig) -> str:
    raw = "|".join(
        [
            taxonomy.version_hash(),
            str(cfg.mining.confidence_threshold),
            repr(cfg.mining.tau),
            str(cfg.mining.review_sample_size),
            str(cfg.mining.review_seed),
        ]
    )
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:8]


def mine_bias(
    cfg: ExperimentConfig,
    run_id: str,
    gateway: Gateway | None = None,
    taxonomy: Taxonomy | None = None,
) -> MiningResult:
    """Mine a completed run: confidences, rationales, category prevalence.

    Confidence prompts go out only for mistakes that lack a confidence
    value; rationale prompts only for reliable mistakes. Results land in a
    mining directory keyed by taxonomy version and thresholds, so mining
    with an edited taxonomy never disturbs earlier output.
    """
    run_dir = Path(cfg.out_dir) / "runs" / run_id
    if not (run_dir / "verdicts.jsonl").exists():
        raise ConfigError(f"run {run_id} has no verdict log under {run_dir}")
    if taxonomy is None:
        taxonomy = load_taxonomy(cfg.mining.taxonomy_path)
    if gateway is None:
        gateway = Gateway(cfg.backend)

    key = mining_key(taxonomy, cfg)
    mining_dir = run_dir / f"mining-{key}"
    if (mining_dir / "mining.json").exists():
        log.info("mining %s/%s already complete; reusing artifacts", run_id, key)
        payload = json.loads((mining_dir / "mining.json").read_text(encoding="utf-8"))
        return MiningResult(run_id=run_id, mining_key=key, payload=payload,
                            mining_dir=mining_dir)

    manifest = load_manifest(run_dir / "manifest.json")
    verdicts = read_verdict_log(run_dir / "verdicts.jsonl")
    pair_list = load_pairs(cfg)
    recomputed = _dataset_descriptor(cfg, pair_list)
    for field_name in ("sha256", "comment_variant", "pair_count"):
        if recomputed[field_name] != manifest.dataset.get(field_name):
            raise ConfigError(
                f"run {run_id}: config materializes a different dataset than the run "
                f"was evaluated on ({field_name}: {recomputed[field_name]!r} vs "
                f"{manifest.dataset.get(field_name)!r})"
            )
    pairs = {pair.id: pair for pair in pair_list}
    missing = [v.pair_id for v in verdicts if v.pair_id not in pairs]
    if missing:
        raise ConfigError(
            f"run {run_id}: {len(missing)} verdict pair ids not present in the "
            f"configured dataset (e.g. {missing[:3]}); wrong config for this run?"
        )

    # confidence extraction, lazily: only mistakes lacking a value
    updated: list[VerdictRecord] = []
    unparseable_confidence = 0
    for verdict in verdicts:
        if verdict.is_mistake and verdict.confidence is None:
            prompt = render_confidence(
                pairs[verdict.pair_id], verdict.predicted, cfg.max_code_chars
            )
            raw = gateway.complete(prompt)
            try:
                verdict = verdict.with_confidence(parse_confidence(raw))
            except UnparseableConfidenceError:
                unparseable_confidence += 1
                log.warning("pair %s: unparseable confidence response", verdict.pair_id)
        updated.append(verdict)

    mistakes = [v for v in updated if v.is_mistake]
    reliable = filter_reliable_mistakes(updated, cfg.mining.confidence_threshold)

    confidence_histogram: dict[str, int] = {}
    for verdict in mistakes:
        key_name = "none" if verdict.confidence is None else str(verdict.confidence)
        confidence_histogram[key_name] = confidence_histogram.get(key_name, 0) + 1

    index_by_pair = {v.pair_id: i for i, v in enumerate(updated)}
    assignments: list[tuple[str, set[str]]] = []
    rationale_rows: list[dict] = []
    rationales_empty = 0
    for verdict in reliable:
        prompt = render_rationale(
            pairs[verdict.pair_id], verdict.predicted, verdict.gold, cfg.max_code_chars
        )
        raw = gateway.complete(prompt)
        rationale_text = raw.strip()
        index = index_by_pair[verdict.pair_id]
        updated[index] = updated[index].with_rationale(raw)
        if not rationale_text:
            rationales_empty += 1
            log.warning("pair %s: empty rationale response", verdict.pair_id)
            continue
        assigned = assign_categories(rationale_text, taxonomy, cfg.mining.tau)
        assignments.append((rationale_text, assigned))
        rationale_rows.append(
            {
                "pair_id": verdict.pair_id,
                "rationale": raw,
                "categories": sorted(assigned),
            }
        )

    review_sample, review_params = sample_for_review(
        reliable, n=cfg.mining.review_sample_size, seed=cfg.mining.review_seed
    )

    prevalence_payload = None
    if assignments:
        prevalence_payload = prevalence(assignments, taxonomy, cfg.mining.tau).to_payload()

    payload = {
        "run_id": run_id,
        "mining_key": key,
        "taxonomy_hash": taxonomy.version_hash(),
        "confidence_threshold": cfg.mining.confidence_threshold,
        "tau": cfg.mining.tau,
        "counts": {
            "verdicts": len(updated),
            "mistakes": len(mistakes),
            "missing_confidence": count_missing_confidence(updated),
            "unparseable_confidence": unparseable_confidence,
            "reliable_mistakes": len(reliable),
            "rationales_generated": len(assignments),
            "rationales_empty": rationales_empty,
        },
        "no_reliable_mistakes": not reliable,
        "confidence_histogram": dict(sorted(confidence_histogram.items())),
        "prevalence": prevalence_payload,
        "review_sample": {**review_params, "pair_ids": [v.pair_id for v in review_sample]},
        "baseline_manifest_condition": manifest.condition,
    }

    mining_dir.mkdir(parents=True, exist_ok=True)
    write_verdict_log(updated, mining_dir / "verdicts_mined.jsonl")
    with open(mining_dir / "rationales.jsonl", "w", encoding="utf-8") as fh:
        for row in rationale_rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    _write_json(mining_dir / "mining.json", payload)
    return MiningResult(run_id=run_id, mining_key=key, payload=payload,
                        mining_dir=mining_dir)
