"""JSON-over-HTTP surface for projects, jobs, labeling, editing and export.

Validation lives in the core types (from_doc raising ValueError); handlers
translate exceptions to status codes: unknown resources are 404, invariant
violations and missing prerequisites are 409, malformed values are 422.
Mutating endpoints honor an X-Request-Id header: replaying a request id
returns the logged response without reapplying the mutation.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..export import (
    Annotation,
    EditTimeline,
    emit_crop_script,
    emit_cutlist,
    emit_rush_edl,
    emit_vtt,
    scale_path,
)
from ..framing import ShotSpec
from ..pose import SourceMeta
from ..tracking import assign_actor
from .jobs import JobError, JobQueue
from .store import ProjectStore, StoreError


def _parse_scale(scale: str | None) -> tuple[int, int] | None:
    if scale is None:
        return None
    try:
        w, h = scale.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ValueError(f"scale must look like 1920x1080, got {scale!r}") from exc


def create_app(data_dir: str | None = None, workers: int | None = None) -> FastAPI:
    data_dir = data_dir or os.environ.get("DATA_DIR", "data")
    workers = workers if workers is not None else int(os.environ.get("WORKERS", "2"))
    store = ProjectStore(data_dir)
    queue = JobQueue(store, workers=workers)
    app = FastAPI(title="stagecam", version=__version__)
    app.state.store = store
    app.state.queue = queue
    # the browser UI is a static page on another port; the service is a
    # venue-local tool, so permissive CORS is the useful default
    app.add_middleware(
        CORSMiddleware,
        allow_origins=os.environ.get("CORS_ORIGINS", "*").split(","),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(KeyError)
    async def _not_found(request, exc):
        return JSONResponse({"detail": str(exc.args[0]) if exc.args else "not found"},
                            status_code=404)

    @app.exception_handler(ValueError)
    async def _unprocessable(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=422)

    @app.exception_handler(IndexError)
    async def _unprocessable_idx(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=422)

    @app.exception_handler(JobError)
    async def _conflict(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=409)

    @app.exception_handler(StoreError)
    async def _conflict_store(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=409)

    def idempotent(request: Request, project_id: str | None, apply):
        """Replay-safe mutation: same X-Request-Id returns the logged reply."""
        request_id = request.headers.get("X-Request-Id")
        if request_id:
            logged = store.recall_request(project_id, request_id)
            if logged is not None:
                return JSONResponse(logged["body"], status_code=logged["status"])
        status, body = apply()
        if request_id:
            store.log_request(project_id, request_id, status, body)
        return JSONResponse(body, status_code=status)

    @app.get("/")
    async def root():
        return {"service": "stagecam", "version": __version__}

    # ---- projects ----

    @app.post("/projects")
    async def create_project(request: Request):
        doc = await request.json()

        def apply():
            meta = SourceMeta.from_doc(doc)
            project_id = store.create_project(meta)
            return 201, {"id": project_id}

        return idempotent(request, None, apply)

    @app.get("/projects/{project_id}")
    async def get_project(project_id: str):
        manifest = store.load_manifest(project_id)
        parts = []
        for part in store.list_parts(project_id):
            labels: list[str] = []
            if store.has_tracks(project_id, part):
                labels = sorted(store.load_tracks(project_id, part).labels())
            parts.append({
                "part": part,
                "has_poses": store.poses_ready(project_id, part),
                "has_tracks": store.has_tracks(project_id, part),
                "rushes": store.list_rushes(project_id, part),
                "labels": labels,
            })
        return {"id": project_id, "meta": manifest["meta"], "parts": parts}

    # ---- poses and jobs ----

    @app.post("/projects/{project_id}/poses")
    async def upload_poses(project_id: str, request: Request,
                           part: int = Query(0)):
        store.load_manifest(project_id)
        data = await request.body()

        def apply():
            if not data:
                raise ValueError("empty pose archive")
            store.save_archive(project_id, part, data)
            return 200, {"part": part, "bytes": len(data)}

        return idempotent(request, project_id, apply)

    @app.post("/projects/{project_id}/jobs")
    async def submit_job(project_id: str, request: Request):
        doc = await request.json()

        def apply():
            kind = doc.get("kind")
            if not isinstance(kind, str):
                raise ValueError("job kind required")
            job_id = queue.submit(project_id, kind, doc.get("params", {}))
            return 202, {"job_id": job_id}

        return idempotent(request, project_id, apply)

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        return queue.get(job_id)

    # ---- tracklets ----

    @app.get("/projects/{project_id}/tracklets")
    async def get_tracklets(project_id: str, part: int = Query(0)):
        tracks = store.load_tracks(project_id, part)
        return {
            "part": part,
            "params": tracks.params.to_doc(),
            "tracklets": [
                {"id": t.id, "start_frame": t.start_frame,
                 "length": t.length, "label": t.label}
                for t in sorted(tracks.tracklets.values(), key=lambda t: t.id)
            ],
            "warnings": tracks.warnings,
        }

    @app.put("/projects/{project_id}/tracklets/{tracklet_id}/label")
    async def put_label(project_id: str, tracklet_id: int, request: Request,
                        part: int = Query(0)):
        doc = await request.json()

        def apply():
            name = doc.get("name")
            if name is not None and (not isinstance(name, str) or not name):
                raise ValueError("name must be a non-empty string or null")
            with store.lock(project_id):
                tracks = store.load_tracks(project_id, part)
                assign_actor(tracks, tracklet_id, name)
                store.save_tracks(project_id, part, tracks)
            return 200, {"id": tracklet_id, "label": name}

        return idempotent(request, project_id, apply)

    # ---- rushes ----

    @app.post("/projects/{project_id}/rushes")
    async def post_rush(project_id: str, request: Request, part: int = Query(0)):
        doc = await request.json()

        def apply():
            spec = ShotSpec.from_doc(doc["spec"]) if "spec" in doc else None
            if spec is None:
                raise ValueError("shot spec required")
            tracks = store.load_tracks(project_id, part)
            known = set(tracks.labels())
            missing = sorted(spec.subjects - known)
            if missing:
                raise ValueError(f"unknown subjects: {', '.join(missing)}")
            rush_id = store.new_rush_id(project_id, part)
            params = {"part": part, "rush_id": rush_id, "spec": spec.to_doc()}
            if "cam" in doc:
                params["cam"] = doc["cam"]
            job_id = queue.submit(project_id, "frame+solve", params)
            return 202, {"job_id": job_id, "rush_id": rush_id}

        return idempotent(request, project_id, apply)

    @app.get("/projects/{project_id}/rushes")
    async def get_rushes(project_id: str, part: int = Query(0)):
        store.load_manifest(project_id)
        rushes = []
        for rush_id in store.list_rushes(project_id, part):
            rush = store.load_rush(project_id, part, rush_id)
            rushes.append({
                "id": rush.id,
                "spec": rush.spec.to_doc(),
                "frames": rush.path.frame_count,
                "violations": len(rush.path.violations),
            })
        return {"part": part, "rushes": rushes}

    @app.get("/rushes/{rush_id}/path")
    async def get_rush_path(rush_id: str, scale: str | None = Query(None),
                            series: str = Query("optimized")):
        project_id, part, _ = ProjectStore.split_rush_id(rush_id)
        meta = store.part_meta(project_id, part)
        target = _parse_scale(scale)
        factor = 1.0 if target is None else target[1] / meta.height
        if series == "desired":
            desired = store.load_desired(project_id, part, rush_id)
            if target is not None and abs(
                    target[0] / target[1] - meta.aspect) > 1e-3:
                raise ValueError("scale aspect does not match the source")
            frames = [
                [i, f.cx * factor, f.cy * factor, f.h * factor, f.valid]
                for i, f in enumerate(desired.frames)
            ]
            return {"rush_id": rush_id, "series": "desired",
                    "rho": desired.spec.aspect, "frames": frames}
        if series != "optimized":
            raise ValueError("series must be optimized or desired")
        rush = store.load_rush(project_id, part, rush_id)
        path = rush.path
        if target is not None:
            path = scale_path(path, meta, target[0], target[1])
        return {
            "rush_id": rush_id,
            "series": "optimized",
            "rho": path.rho,
            "width": target[0] if target else meta.width,
            "height": target[1] if target else meta.height,
            "frames": [
                [i, float(path.cx[i]), float(path.cy[i]), float(path.h[i])]
                for i in range(path.frame_count)
            ],
        }

    # ---- timeline ----

    @app.get("/projects/{project_id}/timeline")
    async def get_timeline(project_id: str, part: int = Query(0)):
        return store.load_timeline(project_id, part).to_doc()

    @app.put("/projects/{project_id}/timeline")
    async def put_timeline(project_id: str, request: Request,
                           part: int = Query(0)):
        doc = await request.json()

        def apply():
            known = set(store.list_rushes(project_id, part))
            try:
                frame_count = doc.get("frame_count")
                if frame_count is None:
                    frame_count = store.load_timeline(project_id, part).frame_count
                tl = EditTimeline(
                    frame_count=frame_count,
                    cuts=tuple((f, r) for f, r in doc.get("cuts", [])))
            except (ValueError, TypeError) as exc:
                raise JobError(f"timeline invariant violated: {exc}") from exc
            bad = sorted({r for _, r in tl.cuts} - known)
            if bad:
                raise JobError(f"timeline references unknown rushes: {bad}")
            with store.lock(project_id):
                store.save_timeline(project_id, part, tl)
            return 200, tl.to_doc()

        return idempotent(request, project_id, apply)

    # ---- annotations ----

    @app.get("/projects/{project_id}/annotations")
    async def get_annotations(project_id: str, part: int = Query(0)):
        store.load_manifest(project_id)
        return {"part": part, "annotations": [
            a.to_doc() for a in store.load_annotations(project_id, part)]}

    @app.put("/projects/{project_id}/annotations")
    async def put_annotations(project_id: str, request: Request,
                              part: int = Query(0)):
        doc = await request.json()

        def apply():
            annotations = [Annotation.from_doc(d)
                           for d in doc.get("annotations", [])]
            known = set(store.list_rushes(project_id, part)) | {"timeline"}
            bad = sorted({a.target for a in annotations
                          if a.target is not None and a.target not in known})
            if bad:
                raise JobError(f"annotations reference unknown targets: {bad}")
            with store.lock(project_id):
                store.save_annotations(project_id, part, annotations)
            return 200, {"part": part, "count": len(annotations)}

        return idempotent(request, project_id, apply)

    # ---- export ----

    @app.get("/projects/{project_id}/export/{fmt}")
    async def get_export(project_id: str, fmt: str, part: int = Query(0),
                         scale: str | None = Query(None),
                         rush: str | None = Query(None),
                         source: str = Query("source.mp4")):
        meta = store.part_meta(project_id, part)
        target = _parse_scale(scale) or (meta.width, meta.height)
        if fmt == "edl":
            if rush is None:
                raise ValueError("edl export needs a rush query parameter")
            r = store.load_rush(project_id, part, rush)
            return PlainTextResponse(emit_rush_edl(r, meta, *target),
                                     media_type="text/csv")
        if fmt == "cutlist":
            return PlainTextResponse(
                emit_cutlist(store.load_timeline(project_id, part)),
                media_type="text/csv")
        if fmt == "vtt":
            return PlainTextResponse(
                emit_vtt(store.load_annotations(project_id, part)),
                media_type="text/vtt")
        if fmt == "script":
            if rush is None:
                raise ValueError("script export needs a rush query parameter")
            template = os.environ.get("TRANSCODER_TEMPLATE")
            if not template:
                raise StoreError("no transcoder template configured")
            r = store.load_rush(project_id, part, rush)
            return PlainTextResponse(
                emit_crop_script(r, source, target[0], target[1], template),
                media_type="text/x-shellscript")
        raise KeyError(f"unknown export format: {fmt}")

    return app
