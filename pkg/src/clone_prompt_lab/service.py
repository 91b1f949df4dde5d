"""HTTP service for the triage workflow.

Read endpoints expose completed runs, their confident mistakes, and
prevalence reports. Mutations (taxonomy and lesson edits, reviewer tags)
are versioned-append-only: every POST writes a new content-addressed
version file and returns its hash, so no completed run's provenance can
ever be corrupted from the browser. Rerun requests are coalesced by
request content, mirroring the orchestrator's content-addressed runs.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import os
import threading
from dataclasses import replace
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware

from .config import ExperimentConfig
from .manifest import load_manifest
from .mining import Taxonomy, filter_reliable_mistakes, load_taxonomy, taxonomy_from_payload
from .pipeline import load_pairs, mine_bias, mining_key, run_ablation, run_eval
from .promptkit import LessonSet, lesson_set_from_payload, load_lessons
from .stats import cohen_kappa
from .verdicts import read_verdict_log

log = logging.getLogger(__name__)

TOKEN_ENV = "CPL_SERVICE_TOKEN"


class VersionStore:
    """Append-only content-addressed JSON versions with a HEAD pointer."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def head(self) -> str | None:
        head_file = self.directory / "HEAD"
        return head_file.read_text(encoding="utf-8").strip() if head_file.exists() else None

    def load(self, version: str) -> dict:
        path = self.directory / f"{version}.json"
        if not path.exists():
            raise KeyError(version)
        return json.loads(path.read_text(encoding="utf-8"))

    def save(self, payload: dict, version: str) -> str:
        with self._lock:
            path = self.directory / f"{version}.json"
            if not path.exists():
                path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
            (self.directory / "HEAD").write_text(version + "\n", encoding="utf-8")
        return version

    def path_of(self, version: str) -> Path:
        return self.directory / f"{version}.json"


class JobRegistry:
    """Coalesces identical rerun requests onto one background job."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}

    def submit(self, key: str, work) -> dict:
        with self._lock:
            existing = self._jobs.get(key)
            if existing is not None and existing["status"] in ("running", "done"):
                return dict(existing)
            job = {"job_id": key, "status": "running", "run_ids": [], "error": None}
            self._jobs[key] = job
            snapshot = dict(job)

        def runner() -> None:
            try:
                run_ids = work()
                with self._lock:
                    job["run_ids"] = run_ids
                    job["status"] = "done"
            except Exception as exc:  # surfaced through the job, not the socket
                log.exception("background run failed")
                with self._lock:
                    job["error"] = str(exc)
                    job["status"] = "failed"

        threading.Thread(target=runner, daemon=True).start()
        return snapshot

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            job = self._jobs.get(job_id)
            return None if job is None else dict(job)


def create_app(cfg: ExperimentConfig) -> FastAPI:
    app = FastAPI(title="clone-prompt-lab triage service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    out_dir = Path(cfg.out_dir)
    runs_dir = out_dir / "runs"
    lessons_store = VersionStore(out_dir / "versions" / "lessons")
    taxonomy_store = VersionStore(out_dir / "versions" / "taxonomy")
    tags_root = out_dir / "tags"
    jobs = JobRegistry()
    tags_lock = threading.Lock()

    def require_token(request: Request) -> None:
        expected = os.environ.get(TOKEN_ENV)
        if not expected:
            return
        header = request.headers.get("authorization", "")
        if not hmac.compare_digest(header, f"Bearer {expected}"):
            raise HTTPException(status_code=401, detail="missing or invalid token")

    auth = Depends(require_token)

    def current_lessons() -> LessonSet:
        head = lessons_store.head()
        if head is not None:
            return lesson_set_from_payload(lessons_store.load(head))
        return load_lessons(cfg.lessons_path)

    def current_taxonomy() -> Taxonomy:
        head = taxonomy_store.head()
        if head is not None:
            return taxonomy_from_payload(taxonomy_store.load(head))
        return load_taxonomy(cfg.mining.taxonomy_path)

    def run_dir_of(run_id: str) -> Path:
        run_dir = runs_dir / run_id
        if not (run_dir / "manifest.json").exists():
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return run_dir

    def read_report(run_dir: Path) -> dict:
        return json.loads((run_dir / "report.json").read_text(encoding="utf-8"))

    # ------------------------------------------------------------------ runs

    @app.get("/runs", dependencies=[auth])
    def list_runs() -> list[dict]:
        entries = []
        if runs_dir.exists():
            for manifest_path in sorted(runs_dir.glob("*/manifest.json")):
                manifest = load_manifest(manifest_path)
                report = read_report(manifest_path.parent)
                entries.append(
                    {
                        "run_id": manifest.run_id,
                        "condition": manifest.condition,
                        "created_at": manifest.created_at,
                        "lesson_ids": list(manifest.lesson_ids),
                        "lessons_hash": manifest.lessons_hash,
                        "f1": report["metrics"]["f1"],
                        "delta_f1_points": report["metrics"]["delta_f1_points"],
                    }
                )
        return entries

    @app.get("/runs/{run_id}", dependencies=[auth])
    def get_run(run_id: str) -> dict:
        run_dir = run_dir_of(run_id)
        manifest = load_manifest(run_dir / "manifest.json")
        return {"manifest": manifest.to_payload(), "report": read_report(run_dir)}

    @app.get("/runs/{run_id}/report", dependencies=[auth])
    def get_report(run_id: str, format: str = Query(default="json")) -> dict:
        run_dir = run_dir_of(run_id)
        if format == "text":
            return {"text": (run_dir / "report.txt").read_text(encoding="utf-8")}
        return read_report(run_dir)

    # --------------------------------------------------------------- mining

    def mining_dir_of(run_dir: Path) -> Path:
        key = mining_key(current_taxonomy(), cfg)
        candidate = run_dir / f"mining-{key}"
        if (candidate / "mining.json").exists():
            return candidate
        fallbacks = sorted(run_dir.glob("mining-*/mining.json"))
        if fallbacks:
            return fallbacks[0].parent
        raise HTTPException(
            status_code=404,
            detail=f"run {run_dir.name} has no mining artifacts; trigger mining first",
        )

    @app.get("/runs/{run_id}/mistakes", dependencies=[auth])
    def get_mistakes(run_id: str, variant: str = Query(default="without")) -> dict:
        if variant not in ("with", "without"):
            raise HTTPException(status_code=422, detail="variant must be 'with' or 'without'")
        run_dir = run_dir_of(run_id)
        mining_dir = mining_dir_of(run_dir)
        verdicts = read_verdict_log(mining_dir / "verdicts_mined.jsonl")
        reliable = filter_reliable_mistakes(verdicts, cfg.mining.confidence_threshold)
        categories: dict[str, list[str]] = {}
        rationales_path = mining_dir / "rationales.jsonl"
        if rationales_path.exists():
            for line in rationales_path.read_text(encoding="utf-8").splitlines():
                row = json.loads(line)
                categories[row["pair_id"]] = row["categories"]
        pair_cfg = replace(cfg, comment_variant=variant)
        pairs = {pair.id: pair for pair in load_pairs(pair_cfg)}
        items = []
        for verdict in sorted(reliable, key=lambda v: v.pair_id):
            pair = pairs.get(verdict.pair_id)
            if pair is None:
                continue
            items.append(
                {
                    "pair_id": verdict.pair_id,
                    "predicted": verdict.predicted.value,
                    "gold": verdict.gold.value,
                    "confidence": verdict.confidence,
                    "rationale": verdict.rationale,
                    "categories": categories.get(verdict.pair_id, []),
                    "lang_a": pair.a.language.value,
                    "lang_b": pair.b.language.value,
                    "code_a": pair.a.text,
                    "code_b": pair.b.text,
                }
            )
        return {
            "run_id": run_id,
            "variant": variant,
            "mining_key": mining_dir.name.removeprefix("mining-"),
            "mistakes": items,
        }

    @app.get("/runs/{run_id}/prevalence", dependencies=[auth])
    def get_prevalence(run_id: str) -> dict:
        run_dir = run_dir_of(run_id)
        mining_dir = mining_dir_of(run_dir)
        return json.loads((mining_dir / "mining.json").read_text(encoding="utf-8"))

    # ------------------------------------------------------- lessons/taxonomy

    @app.get("/lessons", dependencies=[auth])
    def get_lessons() -> dict:
        lessons = current_lessons()
        return {"version": lessons.version_hash(), "payload": lessons.to_payload()}

    @app.post("/lessons", dependencies=[auth])
    def post_lessons(payload: dict) -> dict:
        try:
            lessons = lesson_set_from_payload(payload)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        version = lessons_store.save(lessons.to_payload(), lessons.version_hash())
        return {"version": version}

    @app.get("/taxonomy", dependencies=[auth])
    def get_taxonomy() -> dict:
        taxonomy = current_taxonomy()
        return {"version": taxonomy.version_hash(), "payload": taxonomy.to_payload()}

    @app.post("/taxonomy", dependencies=[auth])
    def post_taxonomy(payload: dict) -> dict:
        try:
            taxonomy = taxonomy_from_payload(payload)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        version = taxonomy_store.save(taxonomy.to_payload(), taxonomy.version_hash())
        return {"version": version}

    # ----------------------------------------------------------------- tags

    def tag_store(run_id: str, reviewer_id: str) -> VersionStore:
        safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in reviewer_id)
        return VersionStore(tags_root / run_id / safe)

    @app.post("/runs/{run_id}/tags", dependencies=[auth])
    def post_tags(run_id: str, payload: dict) -> dict:
        run_dir_of(run_id)
        reviewer = payload.get("reviewer_id")
        tags = payload.get("tags")
        if not reviewer or not isinstance(tags, dict):
            raise HTTPException(status_code=422, detail="need reviewer_id and tags object")
        taxonomy = current_taxonomy()
        known = {c.id for c in taxonomy.categories}
        for pair_id, assigned in tags.items():
            if not isinstance(assigned, list) or not set(assigned) <= known:
                raise HTTPException(
                    status_code=422,
                    detail=f"tags for {pair_id} reference unknown categories",
                )
        record = {
            "reviewer_id": reviewer,
            "taxonomy_version": taxonomy.version_hash(),
            "tags": {pid: sorted(assigned) for pid, assigned in sorted(tags.items())},
        }
        canonical = json.dumps(record, sort_keys=True, separators=(",", ":"))
        version = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
        store = tag_store(run_id, reviewer)
        with tags_lock:
            head = store.head()
            base = payload.get("base_version")
            if head is not None and base != head:
                raise HTTPException(
                    status_code=409,
                    detail=f"tag version conflict: HEAD is {head}, request based on {base}",
                )
            store.save(record, version)
        return {"version": version}

    @app.get("/runs/{run_id}/tags", dependencies=[auth])
    def get_tags(run_id: str) -> dict:
        run_dir_of(run_id)
        sessions = {}
        run_tags = tags_root / run_id
        if run_tags.exists():
            for reviewer_dir in sorted(p for p in run_tags.iterdir() if p.is_dir()):
                store = VersionStore(reviewer_dir)
                head = store.head()
                if head is not None:
                    record = store.load(head)
                    sessions[record["reviewer_id"]] = {"version": head, **record}
        return {"run_id": run_id, "sessions": sessions}

    @app.get("/runs/{run_id}/kappa", dependencies=[auth])
    def get_kappa(run_id: str) -> dict:
        sessions = get_tags(run_id)["sessions"]
        if len(sessions) < 2:
            raise HTTPException(
                status_code=409,
                detail=f"kappa needs two reviewer sessions, found {len(sessions)}",
            )
        (name_a, session_a), (name_b, session_b) = sorted(sessions.items())[:2]
        common = sorted(set(session_a["tags"]) & set(session_b["tags"]))
        if not common:
            raise HTTPException(status_code=409, detail="no commonly tagged pairs")
        labels_a = ["+".join(session_a["tags"][pid]) for pid in common]
        labels_b = ["+".join(session_b["tags"][pid]) for pid in common]
        kappa = cohen_kappa(labels_a, labels_b)
        return {
            "run_id": run_id,
            "reviewers": [name_a, name_b],
            "pairs": len(common),
            "kappa": kappa,
        }

    # ----------------------------------------------------------------- jobs

    @app.post("/runs", dependencies=[auth])
    def trigger_run(payload: dict) -> dict:
        kind = payload.get("kind", "eval")
        if kind not in ("eval", "ablation", "mine"):
            raise HTTPException(status_code=422, detail="kind must be eval, ablation, or mine")

        lessons_version = payload.get("lessons_version") or lessons_store.head()
        run_cfg = cfg
        if lessons_version is not None:
            path = lessons_store.path_of(lessons_version)
            if not path.exists():
                raise HTTPException(status_code=404, detail=f"no lesson version {lessons_version}")
            run_cfg = replace(run_cfg, lessons_path=str(path))

        taxonomy = current_taxonomy()
        taxonomy_head = taxonomy_store.head()
        if taxonomy_head is not None:
            run_cfg = replace(
                run_cfg,
                mining=replace(cfg.mining, taxonomy_path=str(taxonomy_store.path_of(taxonomy_head))),
            )

        if kind == "eval":
            lesson_ids = tuple(int(i) for i in payload.get("lesson_ids", []))
            run_cfg = run_cfg.with_lessons(lesson_ids)
            work = lambda: [run_eval(run_cfg).run_id]  # noqa: E731
        elif kind == "ablation":
            work = lambda: [r.run_id for r in run_ablation(run_cfg)]  # noqa: E731
        else:
            base_run = payload.get("run_id")
            if not base_run:
                raise HTTPException(status_code=422, detail="mine requires run_id")
            run_dir_of(base_run)
            work = lambda: [mine_bias(run_cfg, base_run).run_id]  # noqa: E731

        key_payload = {
            "kind": kind,
            "body": payload,
            "lessons_version": lessons_version,
            "taxonomy_version": taxonomy.version_hash(),
        }
        key = hashlib.sha256(
            json.dumps(key_payload, sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]
        return jobs.submit(key, work)

    @app.get("/jobs/{job_id}", dependencies=[auth])
    def get_job(job_id: str) -> dict:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job

    return app


def serve(cfg: ExperimentConfig, port: int = 8765, host: str = "127.0.0.1") -> None:
    """Run the triage service; requires at least one completed run on disk."""
    import uvicorn

    runs_dir = Path(cfg.out_dir) / "runs"
    if not runs_dir.exists() or not any(runs_dir.glob("*/manifest.json")):
        raise SystemExit(
            f"no completed runs under {runs_dir}; run an eval or ablation first"
        )
    uvicorn.run(create_app(cfg), host=host, port=port, log_level="info")
