from __future__ import annotations

import json

import pytest

from clone_prompt_lab.manifest import RunManifest, load_manifest, manifest_from_payload


def _manifest() -> RunManifest:
    return RunManifest(
        condition="default",
        dataset={"name": "pairs.jsonl", "sha256": "ab" * 32, "pair_count": 4},
        template={"id": "default", "sha256": "cd" * 32},
        template_checksums={"default": "cd" * 32},
        lesson_ids=(),
        lessons_hash="ef" * 32,
        taxonomy_hash="01" * 32,
        backend={"provider_id": "p", "model_name": "m", "temperature": 0.0,
                 "mode": "replay", "api_key_env": "CPL_API_KEY_P"},
        seed=7,
        replay_cache_sha256="23" * 32,
        significance_method="t_test",
        max_code_chars=None,
        created_at="2026-08-10T00:00:00+00:00",
    )


def test_run_id_ignores_timestamps() -> None:
    a = _manifest()
    b = RunManifest(**{**a.__dict__, "created_at": "2030-01-01T00:00:00+00:00"})
    assert a.run_id == b.run_id
    assert len(a.run_id) == 16


def test_run_id_tracks_content() -> None:
    a = _manifest()
    b = RunManifest(**{**a.__dict__, "seed": 8})
    assert a.run_id != b.run_id


def test_round_trip_and_tamper_detection(tmp_path) -> None:
    manifest = _manifest()
    path = tmp_path / "manifest.json"
    manifest.save(path)
    assert load_manifest(path) == manifest

    payload = json.loads(path.read_text())
    payload["seed"] = 999  # recorded run_id no longer matches the content
    with pytest.raises(ValueError, match="does not match"):
        manifest_from_payload(payload)
