from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from clone_prompt_lab.config import load_config
from clone_prompt_lab.pipeline import mine_bias, run_ablation
from clone_prompt_lab.promptkit import load_lessons
from clone_prompt_lab.service import create_app

from fixtures import EDITED_LESSON_7_TEXT, RELIABLE, build_replay_workspace


@pytest.fixture(scope="module")
def service_env(tmp_path_factory):
    workspace = build_replay_workspace(tmp_path_factory.mktemp("svc"))
    cfg = load_config(workspace.config_path)
    reports = run_ablation(cfg)
    mine_bias(cfg, reports[0].run_id)
    client = TestClient(create_app(cfg))
    return workspace, cfg, reports, client


def _wait_for_job(client: TestClient, job: dict, timeout: float = 30.0) -> dict:
    deadline = time.time() + timeout
    while job["status"] == "running" and time.time() < deadline:
        time.sleep(0.05)
        job = client.get(f"/jobs/{job['job_id']}").json()
    assert job["status"] == "done", job
    return job


def test_list_runs(service_env) -> None:
    _, _, reports, client = service_env
    runs = client.get("/runs").json()
    assert {r["run_id"] for r in runs} >= {r.run_id for r in reports}
    by_id = {r["run_id"]: r for r in runs}
    default = by_id[reports[0].run_id]
    assert default["condition"] == "default"
    assert default["f1"] == pytest.approx(reports[0].metrics.f1)


def test_get_run_and_report(service_env) -> None:
    _, _, reports, client = service_env
    run_id = reports[1].run_id
    body = client.get(f"/runs/{run_id}").json()
    assert body["manifest"]["run_id"] == run_id
    assert body["report"]["condition"] == "lesson_1"
    text = client.get(f"/runs/{run_id}/report", params={"format": "text"}).json()["text"]
    assert text.splitlines()[0].split()[0] == "condition"
    assert client.get("/runs/deadbeef").status_code == 404


def test_mistakes_endpoint_serves_reliable_set_with_code(service_env) -> None:
    _, _, reports, client = service_env
    run_id = reports[0].run_id
    body = client.get(f"/runs/{run_id}/mistakes").json()
    assert {m["pair_id"] for m in body["mistakes"]} == {f"sp-{i:04d}" for i in RELIABLE}
    first = body["mistakes"][0]
    assert first["rationale"]
    assert first["confidence"] >= 80
    assert "#" not in first["code_b"]  # default variant is comment-stripped
    with_comments = client.get(
        f"/runs/{run_id}/mistakes", params={"variant": "with"}
    ).json()
    assert any("#" in m["code_b"] for m in with_comments["mistakes"])


def test_prevalence_endpoint(service_env) -> None:
    _, _, reports, client = service_env
    body = client.get(f"/runs/{reports[0].run_id}/prevalence").json()
    assert body["prevalence"]["total_rationales"] == 7
    # an un-mined run has no prevalence artifacts
    assert client.get(f"/runs/{reports[1].run_id}/prevalence").status_code == 404


def test_trigger_full_ablation_reuses_content_addressed_runs(service_env) -> None:
    _, _, reports, client = service_env
    job = client.post("/runs", json={"kind": "ablation"}).json()
    job = _wait_for_job(client, job)
    # stock lessons, same fixtures: the ablation resolves to the existing runs
    assert job["run_ids"] == [r.run_id for r in reports]


def test_lessons_versioning_round_trip(service_env) -> None:
    _, _, _, client = service_env
    current = client.get("/lessons").json()
    stock = load_lessons()
    assert current["version"] == stock.version_hash()

    payload = stock.to_payload()
    payload["lessons"][6]["text"] = "Focus on control flow, not surface wording."
    response = client.post("/lessons", json=payload)
    assert response.status_code == 200
    new_version = response.json()["version"]
    assert new_version != current["version"]
    assert client.get("/lessons").json()["version"] == new_version
    assert client.get("/lessons").json()["payload"]["lessons"][6]["text"].startswith("Focus")

    bad = {"lessons": [{"id": 1, "text": "no period"}]}
    assert client.post("/lessons", json=bad).status_code == 422


def test_taxonomy_versioning(service_env) -> None:
    _, _, _, client = service_env
    current = client.get("/taxonomy").json()
    payload = current["payload"]
    payload["categories"][0]["seed_terms"].append("granite")
    new_version = client.post("/taxonomy", json=payload).json()["version"]
    assert new_version != current["version"]
    assert client.get("/taxonomy").json()["version"] == new_version


def test_tags_and_kappa(service_env) -> None:
    _, _, reports, client = service_env
    run_id = reports[0].run_id
    taxonomy_version = client.get("/taxonomy").json()["version"]
    tags = {f"sp-{i:04d}": ["x"] for i in RELIABLE}

    first = client.post(f"/runs/{run_id}/tags",
                        json={"reviewer_id": "alice", "tags": tags})
    assert first.status_code == 200
    alice_version = first.json()["version"]

    # identical second reviewer -> kappa undefined? no: same constant labels both
    # reviewers, chance agreement is total, so server reports null kappa;
    # use a mixed tag set for bob to get kappa 1 on a non-degenerate alphabet
    mixed = dict(tags)
    mixed[f"sp-{RELIABLE[0]:04d}"] = ["y"]
    client.post(f"/runs/{run_id}/tags", json={"reviewer_id": "alice",
                                              "base_version": alice_version,
                                              "tags": mixed})
    client.post(f"/runs/{run_id}/tags", json={"reviewer_id": "bob", "tags": mixed})

    kappa = client.get(f"/runs/{run_id}/kappa").json()
    assert kappa["kappa"] == 1.0
    assert kappa["pairs"] == len(RELIABLE)

    sessions = client.get(f"/runs/{run_id}/tags").json()["sessions"]
    assert set(sessions) == {"alice", "bob"}
    assert sessions["alice"]["taxonomy_version"] == taxonomy_version

    # optimistic versioning: a stale base_version is rejected, never overwritten
    stale = client.post(f"/runs/{run_id}/tags",
                        json={"reviewer_id": "alice", "base_version": "stale",
                              "tags": tags})
    assert stale.status_code == 409

    unknown = client.post(f"/runs/{run_id}/tags",
                          json={"reviewer_id": "carol",
                                "tags": {"sp-0007": ["not-a-category"]}})
    assert unknown.status_code == 422


def test_trigger_rerun_with_edited_lessons(service_env) -> None:
    _, _, reports, client = service_env
    stock = load_lessons()
    payload = stock.to_payload()
    payload["lessons"][6]["text"] = EDITED_LESSON_7_TEXT
    lessons_version = client.post("/lessons", json=payload).json()["version"]

    job = client.post("/runs", json={"kind": "eval", "lesson_ids": [7],
                                     "lessons_version": lessons_version}).json()
    job = _wait_for_job(client, job)
    (run_id,) = job["run_ids"]
    manifest = client.get(f"/runs/{run_id}").json()["manifest"]
    assert manifest["lessons_hash"] == lessons_version
    assert manifest["lesson_ids"] == [7]
    assert run_id not in {r.run_id for r in reports}  # new lesson bytes, new run
    report = client.get(f"/runs/{run_id}/report").json()
    assert report["gateway_errors"] == 0  # edited-lesson prompts replay from fixtures
    assert report["counts"]["tp"] + report["counts"]["fn"] == 25


def test_rerun_requests_coalesce(service_env) -> None:
    _, _, _, client = service_env
    body = {"kind": "eval", "lesson_ids": [1]}
    first = client.post("/runs", json=body).json()
    second = client.post("/runs", json=body).json()
    assert first["job_id"] == second["job_id"]
    _wait_for_job(client, first)


def test_mine_job_kind(service_env) -> None:
    _, _, reports, client = service_env
    job = client.post("/runs", json={"kind": "mine", "run_id": reports[0].run_id}).json()
    job = _wait_for_job(client, job)
    assert job["run_ids"] == [reports[0].run_id]


def test_auth_token_enforced(service_env, monkeypatch) -> None:
    workspace, cfg, _, _ = service_env
    monkeypatch.setenv("CPL_SERVICE_TOKEN", "sekrit")
    client = TestClient(create_app(cfg))
    assert client.get("/runs").status_code == 401
    assert client.get("/runs", headers={"Authorization": "Bearer wrong"}).status_code == 401
    ok = client.get("/runs", headers={"Authorization": "Bearer sekrit"})
    assert ok.status_code == 200


def test_serve_requires_a_completed_run(tmp_path) -> None:
    from clone_prompt_lab.service import serve

    workspace = build_replay_workspace(tmp_path / "empty")
    cfg = load_config(workspace.config_path, out_dir=tmp_path / "untouched-out")
    with pytest.raises(SystemExit, match="no completed runs"):
        serve(cfg, port=0)
