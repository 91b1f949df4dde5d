"""Run manifests: the provenance record that makes every run replayable.

The run id is a content address over everything that determines a
replay-mode run's outputs (dataset hash, prompt asset checksums, lesson
and taxonomy versions, backend identity, seeds). Timestamps are recorded
for humans but excluded from the hash, so identical inputs always map to
the identical run id.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


@dataclass(frozen=True)
class RunManifest:
    condition: str
    dataset: dict          # name, sha256, pair_count, format, comment_variant
    template: dict         # id, sha256 of the template this run's prompts use
    template_checksums: dict  # sha256 of every shipped template asset
    lesson_ids: tuple[int, ...]
    lessons_hash: str
    taxonomy_hash: str
    backend: dict          # provider_id, model_name, temperature, mode, api_key_env
    seed: int
    replay_cache_sha256: str | None
    significance_method: str
    max_code_chars: int | None
    prompt_protocol: str = "single_turn"
    retry_policy: str = "exponential_backoff_transport_only"
    tool_version: str = __version__
    created_at: str = ""

    def core_payload(self) -> dict:
        """Everything that determines outputs; excludes wall-clock fields."""
        payload = asdict(self)
        payload.pop("created_at")
        payload["lesson_ids"] = list(self.lesson_ids)
        return payload

    @property
    def run_id(self) -> str:
        canonical = json.dumps(self.core_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def to_payload(self) -> dict:
        payload = self.core_payload()
        payload["run_id"] = self.run_id
        payload["created_at"] = self.created_at
        return payload

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(self.to_payload(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def manifest_from_payload(payload: dict) -> RunManifest:
    manifest = RunManifest(
        condition=payload["condition"],
        dataset=dict(payload["dataset"]),
        template=dict(payload["template"]),
        template_checksums=dict(payload["template_checksums"]),
        lesson_ids=tuple(payload["lesson_ids"]),
        lessons_hash=payload["lessons_hash"],
        taxonomy_hash=payload["taxonomy_hash"],
        backend=dict(payload["backend"]),
        seed=int(payload["seed"]),
        replay_cache_sha256=payload.get("replay_cache_sha256"),
        significance_method=payload["significance_method"],
        max_code_chars=payload.get("max_code_chars"),
        prompt_protocol=payload.get("prompt_protocol", "single_turn"),
        retry_policy=payload.get("retry_policy", "exponential_backoff_transport_only"),
        tool_version=payload.get("tool_version", __version__),
        created_at=payload.get("created_at", ""),
    )
    recorded = payload.get("run_id")
    if recorded and recorded != manifest.run_id:
        raise ValueError(
            f"manifest run_id {recorded} does not match recomputed {manifest.run_id}"
        )
    return manifest


def load_manifest(path: str | Path) -> RunManifest:
    return manifest_from_payload(json.loads(Path(path).read_text(encoding="utf-8")))


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
