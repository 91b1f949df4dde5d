"""Experiment configuration: one structured file, validated before any IO.

Unknown keys are fatal at every level; a typo that silently disabled an
option would otherwise surface only as a wrong report. Relative paths are
resolved against the config file's directory so a config travels with its
fixtures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus.types import Language
from .gateway import BackendConfig, Mode


class ConfigError(ValueError):
    pass


def _take(obj: dict, context: str, required: list[str], optional: dict) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{context}: expected an object")
    remaining = dict(obj)
    values = {}
    for key in required:
        if key not in remaining:
            raise ConfigError(f"{context}: missing required key {key!r}")
        values[key] = remaining.pop(key)
    for key, default in optional.items():
        values[key] = remaining.pop(key, default)
    if remaining:
        raise ConfigError(f"{context}: unknown keys {sorted(remaining)}")
    return values


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    format: str = "pairs"  # pairs | avatar | poolc
    field_map: dict = field(default_factory=dict)
    language: str = "Python"  # poolc snippets' language
    negatives_per_positive: int = 1  # avatar conversion
    lenient: bool = False  # skip malformed lines instead of failing

    def __post_init__(self) -> None:
        if self.format not in ("pairs", "avatar", "poolc"):
            raise ConfigError(f"dataset.format must be pairs|avatar|poolc, got {self.format!r}")
        if self.format == "poolc":
            Language(self.language)


@dataclass(frozen=True)
class SamplingConfig:
    size: int

    def __post_init__(self) -> None:
        if self.size <= 0 or self.size % 2:
            raise ConfigError("sampling.size must be a positive even integer")


@dataclass(frozen=True)
class MiningConfig:
    confidence_threshold: int = 80
    tau: float = 0.2
    taxonomy_path: str | None = None
    review_sample_size: int = 100
    review_seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    backend: BackendConfig
    out_dir: str
    comment_variant: str = "with"  # with | without
    lesson_ids: tuple[int, ...] = ()
    lessons_path: str | None = None
    sampling: SamplingConfig | None = None
    mining: MiningConfig = field(default_factory=MiningConfig)
    ablation: bool = False
    seed: int = 0
    max_code_chars: int | None = None
    significance_method: str = "t_test"

    def __post_init__(self) -> None:
        if self.comment_variant not in ("with", "without"):
            raise ConfigError("comment_variant must be 'with' or 'without'")
        if self.significance_method not in ("t_test", "mcnemar"):
            raise ConfigError("significance_method must be 't_test' or 'mcnemar'")

    def with_lessons(self, lesson_ids: tuple[int, ...]) -> "ExperimentConfig":
        return replace(self, lesson_ids=lesson_ids)


def parse_config(payload: dict, base_dir: Path) -> ExperimentConfig:
    top = _take(
        payload,
        "config",
        required=["dataset", "backend", "out_dir"],
        optional={
            "comment_variant": "with",
            "lesson_ids": [],
            "lessons_path": None,
            "sampling": None,
            "mining": {},
            "ablation": False,
            "seed": 0,
            "max_code_chars": None,
            "significance_method": "t_test",
        },
    )

    ds = _take(
        top["dataset"],
        "dataset",
        required=["path"],
        optional={
            "format": "pairs",
            "field_map": {},
            "language": "Python",
            "negatives_per_positive": 1,
            "lenient": False,
        },
    )
    dataset = DatasetConfig(
        path=str(base_dir / ds["path"]),
        format=ds["format"],
        field_map=dict(ds["field_map"]),
        language=ds["language"],
        negatives_per_positive=int(ds["negatives_per_positive"]),
        lenient=bool(ds["lenient"]),
    )

    be = _take(
        top["backend"],
        "backend",
        required=["provider_id", "model_name"],
        optional={
            "temperature": 0.0,
            "max_retries": 3,
            "requests_per_minute": None,
            "cache_path": None,
            "mode": "replay",
        },
    )
    try:
        mode = Mode(be["mode"])
    except ValueError:
        raise ConfigError(f"backend.mode must be one of {[m.value for m in Mode]}") from None
    cache_path = str(base_dir / be["cache_path"]) if be["cache_path"] else None
    try:
        backend = BackendConfig(
            provider_id=be["provider_id"],
            model_name=be["model_name"],
            temperature=float(be["temperature"]),
            max_retries=int(be["max_retries"]),
            requests_per_minute=be["requests_per_minute"],
            cache_path=cache_path,
            mode=mode,
        )
    except ValueError as exc:
        raise ConfigError(f"backend: {exc}") from exc

    sampling = None
    if top["sampling"] is not None:
        sp = _take(top["sampling"], "sampling", required=["size"], optional={})
        sampling = SamplingConfig(size=int(sp["size"]))

    mi = _take(
        top["mining"],
        "mining",
        required=[],
        optional={
            "confidence_threshold": 80,
            "tau": 0.2,
            "taxonomy_path": None,
            "review_sample_size": 100,
            "review_seed": 0,
        },
    )
    mining = MiningConfig(
        confidence_threshold=int(mi["confidence_threshold"]),
        tau=float(mi["tau"]),
        taxonomy_path=str(base_dir / mi["taxonomy_path"]) if mi["taxonomy_path"] else None,
        review_sample_size=int(mi["review_sample_size"]),
        review_seed=int(mi["review_seed"]),
    )

    lesson_ids = tuple(int(i) for i in top["lesson_ids"])
    return ExperimentConfig(
        dataset=dataset,
        backend=backend,
        out_dir=str(base_dir / top["out_dir"]),
        comment_variant=top["comment_variant"],
        lesson_ids=lesson_ids,
        lessons_path=str(base_dir / top["lessons_path"]) if top["lessons_path"] else None,
        sampling=sampling,
        mining=mining,
        ablation=bool(top["ablation"]),
        seed=int(top["seed"]),
        max_code_chars=top["max_code_chars"],
        significance_method=top["significance_method"],
    )


def load_config(
    path: str | Path,
    seed: int | None = None,
    replay: str | Path | None = None,
    out_dir: str | Path | None = None,
    lenient: bool | None = None,
) -> ExperimentConfig:
    """Load a config file, applying CLI-level overrides."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    cfg = parse_config(payload, path.resolve().parent)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if replay is not None:
        cfg = replace(
            cfg,
            backend=replace(cfg.backend, cache_path=str(Path(replay)), mode=Mode.REPLAY),
        )
    if out_dir is not None:
        cfg = replace(cfg, out_dir=str(out_dir))
    if lenient:
        cfg = replace(cfg, dataset=replace(cfg.dataset, lenient=True))
    return cfg
