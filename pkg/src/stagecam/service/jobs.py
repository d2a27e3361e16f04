"""Asynchronous pipeline jobs: per-project FIFO, cross-project parallel.

A job mutates its project only through the store's atomic writes, so a
crash at any instant leaves every document either absent or whole. Job
records live in the project's jobs.json; on startup, jobs found in state
"running" are marked failed (the process died under them) and pending ones
are re-enqueued.
"""

from __future__ import annotations

import os
import threading
import time
from collections import deque

from ..camplan import CamParams
from ..export import (
    EditTimeline,
    build_rush,
    emit_crop_script,
    emit_cutlist,
    emit_rush_edl,
    emit_vtt,
)
from ..framing import ShotSpec
from ..pose import validate_sequence
from ..tracking import TrackParams, build_tracklets
from .store import ProjectStore, StoreError, atomic_write_bytes, atomic_write_json

JOB_KINDS = ("ingest", "track", "frame+solve", "export")


class JobError(RuntimeError):
    """Missing prerequisite or unknown job kind at submission time."""


def _canonical_kind(kind: str) -> str:
    kind = kind.replace("_", "+") if kind == "frame_solve" else kind
    if kind not in JOB_KINDS:
        raise JobError(f"unknown job kind: {kind}")
    return kind


def check_prerequisites(store: ProjectStore, project_id: str, kind: str,
                        params: dict) -> None:
    """Raise JobError when the pipeline stage before `kind` has not run."""
    part = int(params.get("part", 0))
    if kind == "ingest":
        if not (store.part_dir(project_id, part) / "archive.bin").exists():
            raise JobError("missing prerequisite: no pose archive uploaded")
    elif kind == "track":
        if not store.poses_ready(project_id, part):
            raise JobError("missing prerequisite: poses not ingested")
    elif kind == "frame+solve":
        if not store.has_tracks(project_id, part):
            raise JobError("missing prerequisite: tracklets not built")
        tracks = store.load_tracks(project_id, part)
        if not tracks.labels():
            raise JobError("missing prerequisite: no labeled tracklets")
    elif kind == "export":
        fmt = params.get("format")
        if fmt in ("edl", "script"):
            rid = params.get("rush_id")
            if rid is None or rid not in store.list_rushes(project_id, part):
                raise JobError("missing prerequisite: rush not found")
        elif fmt == "cutlist":
            if not (store.part_dir(project_id, part) / "timeline.json").exists():
                raise JobError("missing prerequisite: no timeline")


def execute(store: ProjectStore, project_id: str, kind: str, params: dict,
            progress=lambda f: None) -> dict:
    """Run one job synchronously; returns a small result document."""
    part = int(params.get("part", 0))
    meta = store.part_meta(project_id, part)

    if kind == "ingest":
        count = store.extract_archive(project_id, part)
        progress(0.5)
        seq = store.load_seq(project_id, part)
        report = validate_sequence(seq, meta)
        atomic_write_json(store.part_dir(project_id, part) / "ingest.json", {
            "documents": count,
            "frames": len(seq),
            "validation": report.to_doc(),
        })
        return {"documents": count, "frames": len(seq)}

    if kind == "track":
        seq = store.load_seq(project_id, part)
        progress(0.3)
        tparams = TrackParams.from_doc(params["params"]) if "params" in params \
            else TrackParams()
        tracks = build_tracklets(seq, tparams)
        with store.lock(project_id):
            store.save_tracks(project_id, part, tracks)
        return {"tracklets": len(tracks.tracklets)}

    if kind == "frame+solve":
        tracks = store.load_tracks(project_id, part, with_seq=True)
        spec = ShotSpec.from_doc(params["spec"])
        cam = CamParams.from_doc(params["cam"]) if "cam" in params else CamParams()
        rush_id = params.get("rush_id") or store.new_rush_id(project_id, part)
        progress(0.1)
        rush, series = build_rush(rush_id, spec, tracks, meta, cam)
        progress(0.9)
        with store.lock(project_id):
            store.save_desired(project_id, part, rush_id, series)
            store.save_rush(project_id, part, rush)
            try:
                store.load_timeline(project_id, part)
            except KeyError:
                # first rush seeds a single-segment program timeline
                store.save_timeline(project_id, part, EditTimeline(
                    frame_count=rush.path.frame_count, cuts=((0, rush_id),)))
        return {"rush_id": rush_id, "frames": rush.path.frame_count}

    if kind == "export":
        fmt = params["format"]
        scale = params.get("scale")
        if scale:
            to_w, to_h = (int(v) for v in scale.lower().split("x"))
        else:
            to_w, to_h = meta.width, meta.height
        if fmt in ("edl", "script") and params.get("rush_id") is None:
            raise ValueError(f"{fmt} export needs a rush id")
        if fmt == "edl":
            rush = store.load_rush(project_id, part, params["rush_id"])
            text = emit_rush_edl(rush, meta, to_w, to_h)
            name = f"{rush.id}_{to_w}x{to_h}.edl"
        elif fmt == "script":
            rush = store.load_rush(project_id, part, params["rush_id"])
            template = params.get("template") or os.environ.get(
                "TRANSCODER_TEMPLATE")
            if not template:
                raise StoreError("no transcoder template configured")
            text = emit_crop_script(rush, params.get("source", "source.mp4"),
                                    to_w, to_h, template)
            name = f"{rush.id}_{to_w}x{to_h}.sh"
        elif fmt == "cutlist":
            text = emit_cutlist(store.load_timeline(project_id, part))
            name = "cutlist.csv"
        elif fmt == "vtt":
            text = emit_vtt(store.load_annotations(project_id, part))
            name = "annotations.vtt"
        else:
            raise StoreError(f"unknown export format: {fmt}")
        out = store.part_dir(project_id, part) / "exports" / name
        atomic_write_bytes(out, text.encode("utf-8"))
        return {"path": str(out)}

    raise JobError(f"unknown job kind: {kind}")


class JobQueue:
    """Background workers running jobs, serially within each project."""

    def __init__(self, store: ProjectStore, workers: int = 2):
        self.store = store
        self._cond = threading.Condition()
        self._pending: dict[str, deque[str]] = {}
        self._running: set[str] = set()
        self._stopped = False
        self._recover()
        self._threads = [
            threading.Thread(target=self._worker, daemon=True,
                             name=f"job-worker-{i}")
            for i in range(max(1, workers))
        ]
        for t in self._threads:
            t.start()

    def _recover(self) -> None:
        for project_id in self.store.list_projects():
            jobs = self.store.load_jobs(project_id)
            changed = False
            for rec in jobs:
                if rec["state"] == "running":
                    rec["state"] = "failed"
                    rec["error"] = "interrupted by restart"
                    changed = True
                elif rec["state"] == "pending":
                    self._pending.setdefault(project_id, deque()).append(rec["id"])
            if changed:
                self.store.save_jobs(project_id, jobs)

    # ---- submission and lookup ----

    def submit(self, project_id: str, kind: str, params: dict) -> str:
        kind = _canonical_kind(kind)
        self.store.load_manifest(project_id)
        check_prerequisites(self.store, project_id, kind, params)
        with self.store.lock(project_id):
            jobs = self.store.load_jobs(project_id)
            job_id = f"{project_id}.j{len(jobs)}"
            jobs.append({
                "id": job_id,
                "kind": kind,
                "params": params,
                "state": "pending",
                "progress": 0.0,
                "error": None,
                "created": time.time(),
            })
            self.store.save_jobs(project_id, jobs)
        with self._cond:
            self._pending.setdefault(project_id, deque()).append(job_id)
            self._cond.notify_all()
        return job_id

    def get(self, job_id: str) -> dict:
        project_id = job_id.split(".j")[0]
        for rec in self.store.load_jobs(project_id):
            if rec["id"] == job_id:
                return rec
        raise KeyError(f"unknown job: {job_id}")

    def wait(self, job_id: str, timeout: float = 60.0) -> dict:
        """Poll until the job settles; for tests and the synchronous CLI."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            rec = self.get(job_id)
            if rec["state"] in ("done", "failed"):
                return rec
            time.sleep(0.02)
        raise TimeoutError(f"job {job_id} still running after {timeout}s")

    def stop(self) -> None:
        with self._cond:
            self._stopped = True
            self._cond.notify_all()
        for t in self._threads:
            t.join(timeout=2.0)

    # ---- execution ----

    def _update(self, project_id: str, job_id: str, **fields) -> None:
        with self.store.lock(project_id):
            jobs = self.store.load_jobs(project_id)
            for rec in jobs:
                if rec["id"] == job_id:
                    rec.update(fields)
                    break
            self.store.save_jobs(project_id, jobs)

    def _worker(self) -> None:
        while True:
            with self._cond:
                claim = None
                while claim is None:
                    if self._stopped:
                        return
                    for project_id, queue in self._pending.items():
                        if queue and project_id not in self._running:
                            claim = (project_id, queue.popleft())
                            self._running.add(project_id)
                            break
                    if claim is None:
                        self._cond.wait(timeout=0.5)
            project_id, job_id = claim
            try:
                self._run_one(project_id, job_id)
            finally:
                with self._cond:
                    self._running.discard(project_id)
                    self._cond.notify_all()

    def _run_one(self, project_id: str, job_id: str) -> None:
        try:
            rec = self.get(job_id)
        except KeyError:
            return
        self._update(project_id, job_id, state="running", progress=0.0)
        try:
            result = execute(
                self.store, project_id, rec["kind"], rec["params"],
                progress=lambda f: self._update(project_id, job_id, progress=f))
            self._update(project_id, job_id,
                         state="done", progress=1.0, result=result)
        except Exception as exc:
            self._update(project_id, job_id, state="failed", error=str(exc))
