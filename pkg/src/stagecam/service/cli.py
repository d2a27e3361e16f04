"""Batch command line mirroring the HTTP API for scripted pipelines.

Commands operate directly on a data directory; a typical batch run is

    stagecam ingest --poses detections/ --width 3840 --height 2160 --fps 25
    stagecam track --project <id>
    stagecam label --project <id> --tracklet 0 --name alice
    stagecam rush --project <id> --subjects alice --size full
    stagecam export --project <id> --format edl --rush <rid> --scale 1920x1080
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
from pathlib import Path

from ..camplan import CamParams, solve_sequence
from ..export import build_rush, compute_visible_actors
from ..framing import ShotSize, ShotSpec
from ..pose import _KEYPOINT_FILE_RE, SourceMeta
from ..tracking import TrackParams, assign_actor, build_tracklets
from .jobs import execute
from .store import ProjectStore


def _parse_aspect(text: str) -> float:
    if ":" in text:
        w, h = text.split(":")
        return float(w) / float(h)
    return float(text)


def _parse_scale(text: str) -> tuple[int, int]:
    w, h = text.lower().split("x")
    return int(w), int(h)


def _store(args) -> ProjectStore:
    return ProjectStore(args.data_dir)


def cmd_ingest(args) -> int:
    store = _store(args)
    src = Path(args.poses)
    files = sorted(p for p in src.iterdir() if _KEYPOINT_FILE_RE.search(p.name))
    if not files:
        print(f"no keypoint documents in {src}", file=sys.stderr)
        return 1
    if args.project:
        project_id = args.project
        store.load_manifest(project_id)
    else:
        frame_count = args.frame_count
        if frame_count is None:
            numbers = [int(_KEYPOINT_FILE_RE.search(p.name).group(1)) for p in files]
            frame_count = max(numbers) + 1
        meta = SourceMeta(width=args.width, height=args.height, fps=args.fps,
                          frame_count=frame_count)
        project_id = store.create_project(meta)
    poses = store.part_dir(project_id, args.part) / "poses"
    poses.mkdir(parents=True, exist_ok=True)
    for p in files:
        shutil.copy2(p, poses / p.name)
    seq = store.load_seq(project_id, args.part)
    print(f"project {project_id}: part {args.part} ingested, {len(seq)} frames, "
          f"{len(files)} documents")
    print(project_id)
    return 0


def cmd_track(args) -> int:
    store = _store(args)
    seq = store.load_seq(args.project, args.part)
    params = TrackParams(tau_conf=args.tau_conf, beta=args.beta,
                         s_min=args.s_min, tau_iou=args.tau_iou)
    tracks = build_tracklets(seq, params)
    store.save_tracks(args.project, args.part, tracks)
    print(f"{len(tracks.tracklets)} tracklets over {len(seq)} frames")
    for t in sorted(tracks.tracklets.values(), key=lambda t: t.id):
        print(f"  tracklet {t.id}: frames {t.start_frame}..{t.end_frame - 1}")
    return 0


def cmd_label(args) -> int:
    store = _store(args)
    tracks = store.load_tracks(args.project, args.part)
    assign_actor(tracks, args.tracklet, None if args.clear else args.name)
    store.save_tracks(args.project, args.part, tracks)
    label = "cleared" if args.clear else args.name
    print(f"tracklet {args.tracklet}: {label}")
    return 0


def cmd_rush(args) -> int:
    store = _store(args)
    subjects = frozenset(s for s in args.subjects.split(",") if s) \
        if args.subjects else frozenset()
    spec = ShotSpec(subjects=subjects, size=ShotSize(args.size),
                    aspect=_parse_aspect(args.aspect), headroom=args.headroom,
                    lead_room=args.lead_room, margin=args.margin,
                    theta_in=args.theta_in)
    result = execute(store, args.project, "frame+solve",
                     {"part": args.part, "spec": spec.to_doc()})
    print(result["rush_id"])
    return 0


def cmd_solve(args) -> int:
    store = _store(args)
    meta = store.part_meta(args.project, args.part)
    params = CamParams(
        lambda1=args.lambda1, lambda2=args.lambda2, lambda3=args.lambda3,
        slice_seconds=args.slice_seconds, overlap_frames=args.overlap_frames,
        h_min=args.h_min)
    series = store.load_desired(args.project, args.part, args.rush)
    rush = store.load_rush(args.project, args.part, args.rush)
    rush.path = solve_sequence(series, params, meta)
    tracks = store.load_tracks(args.project, args.part, with_seq=True)
    rush.visible_actors = compute_visible_actors(rush.path, tracks)
    store.save_rush(args.project, args.part, rush)
    print(f"rush {args.rush}: {rush.path.frame_count} frames, "
          f"{len(rush.path.objectives)} slices, "
          f"{len(rush.path.violations)} violations")
    return 0


def cmd_export(args) -> int:
    store = _store(args)
    params = {"part": args.part, "format": args.format}
    if args.rush:
        params["rush_id"] = args.rush
    if args.scale:
        _parse_scale(args.scale)
        params["scale"] = args.scale
    if args.source:
        params["source"] = args.source
    if args.template:
        params["template"] = args.template
    result = execute(store, args.project, "export", params)
    text = Path(result["path"]).read_text(encoding="utf-8")
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(data_dir=args.data_dir, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagecam",
        description="virtual camera post-production over pose detections")
    parser.add_argument(
        "--data-dir", default=os.environ.get("DATA_DIR", "data"),
        help="project store directory (env DATA_DIR)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load keypoint documents into a project")
    p.add_argument("--poses", required=True, help="directory of *_keypoints.json")
    p.add_argument("--width", type=int, default=3840)
    p.add_argument("--height", type=int, default=2160)
    p.add_argument("--fps", type=float, default=25.0)
    p.add_argument("--frame-count", type=int, default=None)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--project", default=None,
                   help="existing project id (default: create new)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("track", help="build tracklets for a part")
    p.add_argument("--project", required=True)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--tau-conf", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--s-min", type=float, default=10.0)
    p.add_argument("--tau-iou", type=float, default=0.3)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("label", help="assign an actor name to a tracklet")
    p.add_argument("--project", required=True)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--tracklet", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--name")
    group.add_argument("--clear", action="store_true")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("rush", help="frame and solve one shot specification")
    p.add_argument("--project", required=True)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--subjects", default="",
                   help="comma-separated actor names (empty for ensemble)")
    p.add_argument("--size", default="full",
                   choices=[s.value for s in ShotSize])
    p.add_argument("--aspect", default="16:9")
    p.add_argument("--headroom", type=float, default=0.10)
    p.add_argument("--lead-room", type=float, default=0.15)
    p.add_argument("--margin", type=float, default=0.10)
    p.add_argument("--theta-in", type=float, default=0.30)
    p.set_defaults(func=cmd_rush)

    p = sub.add_parser("solve", help="re-solve a rush with other path weights")
    p.add_argument("--project", required=True)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--rush", required=True)
    p.add_argument("--slice-seconds", type=float, default=10.0)
    p.add_argument("--lambda1", type=float, default=10.0)
    p.add_argument("--lambda2", type=float, default=100.0)
    p.add_argument("--lambda3", type=float, default=1000.0)
    p.add_argument("--overlap-frames", type=int, default=3)
    p.add_argument("--h-min", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export", help="emit EDL, cut list, subtitles or script")
    p.add_argument("--project", required=True)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--format", required=True,
                   choices=["edl", "cutlist", "vtt", "script"])
    p.add_argument("--rush", default=None)
    p.add_argument("--scale", default=None, help="target size, e.g. 1920x1080")
    p.add_argument("--source", default=None, help="source movie path for script")
    p.add_argument("--template", default=None,
                   help="transcoder command template (env TRANSCODER_TEMPLATE)")
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("PORT", "8000")))
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("WORKERS", "2")))
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
