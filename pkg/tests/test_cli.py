from __future__ import annotations

import json
import re
from pathlib import Path

from stagecam.pose import dump_pose_frame
from stagecam.service.cli import build_parser, main
from stagecam.synth import default_meta, make_scene

from conftest import three_actor_motions

FRAMES = 80


def write_pose_dir(root: Path, frames: int = FRAMES) -> Path:
    meta = default_meta(frame_count=frames)
    seq, _ = make_scene(three_actor_motions(), frames, meta, seed=7)
    src = root / "detections"
    src.mkdir()
    for fd in seq:
        path = src / f"take_{fd.frame_index:012d}_keypoints.json"
        path.write_text(json.dumps(dump_pose_frame(fd)), encoding="utf-8")
    return src


def run(data_dir: Path, *argv: str) -> int:
    return main(["--data-dir", str(data_dir), *argv])


def ingest_and_track(tmp_path: Path, capsys) -> str:
    src = write_pose_dir(tmp_path)
    data = tmp_path / "data"
    assert run(data, "ingest", "--poses", str(src)) == 0
    project_id = capsys.readouterr().out.strip().split("\n")[-1]
    assert run(data, "track", "--project", project_id) == 0
    return project_id


def test_cli_pipeline_from_poses_to_exports(tmp_path, capsys) -> None:
    project_id = ingest_and_track(tmp_path, capsys)
    data = tmp_path / "data"
    track_out = capsys.readouterr().out
    assert "3 tracklets" in track_out
    ids = [int(m) for m in re.findall(r"tracklet (\d+):", track_out)]
    assert len(ids) == 3

    for tid, name in zip(ids, ["alice", "bob", "carol"]):
        assert run(data, "label", "--project", project_id,
                   "--tracklet", str(tid), "--name", name) == 0
    capsys.readouterr()

    assert run(data, "rush", "--project", project_id,
               "--subjects", "alice", "--size", "closeup") == 0
    rush_id = capsys.readouterr().out.strip().split("\n")[-1]
    assert rush_id.startswith(f"{project_id}.0.r")

    assert run(data, "export", "--project", project_id,
               "--format", "edl", "--rush", rush_id,
               "--scale", "1920x1080") == 0
    edl = capsys.readouterr().out
    lines = edl.strip().split("\n")
    assert lines[0] == "frame,x,y,w,h"
    assert len(lines) == FRAMES + 1

    # the first rush seeded the timeline
    assert run(data, "export", "--project", project_id,
               "--format", "cutlist") == 0
    assert capsys.readouterr().out == f"start_frame,rush_id\n0,{rush_id}\n"

    out_file = tmp_path / "clip.sh"
    assert run(data, "export", "--project", project_id,
               "--format", "script", "--rush", rush_id,
               "--template", "transcode {input} -o {output} -vf {filter}",
               "--out", str(out_file)) == 0
    assert capsys.readouterr().out.strip() == str(out_file)
    script = out_file.read_text(encoding="utf-8")
    assert script.startswith("#!/bin/sh\n")
    assert f"{rush_id}_3840x2160.mp4" in script


def test_cli_resolve_changes_the_path_weights(tmp_path, capsys) -> None:
    project_id = ingest_and_track(tmp_path, capsys)
    data = tmp_path / "data"
    track_out = capsys.readouterr().out
    tid = int(re.search(r"tracklet (\d+):", track_out).group(1))
    assert run(data, "label", "--project", project_id,
               "--tracklet", str(tid), "--name", "alice") == 0
    capsys.readouterr()
    assert run(data, "rush", "--project", project_id,
               "--subjects", "alice", "--size", "medium") == 0
    rush_id = capsys.readouterr().out.strip().split("\n")[-1]
    assert run(data, "solve", "--project", project_id, "--rush", rush_id,
               "--lambda1", "1", "--lambda2", "1", "--lambda3", "1") == 0
    out = capsys.readouterr().out
    assert f"rush {rush_id}" in out
    assert "violations" in out


def test_cli_label_clear_removes_the_name(tmp_path, capsys) -> None:
    project_id = ingest_and_track(tmp_path, capsys)
    data = tmp_path / "data"
    track_out = capsys.readouterr().out
    tid = int(re.search(r"tracklet (\d+):", track_out).group(1))
    assert run(data, "label", "--project", project_id,
               "--tracklet", str(tid), "--name", "alice") == 0
    assert run(data, "label", "--project", project_id,
               "--tracklet", str(tid), "--clear") == 0
    assert "cleared" in capsys.readouterr().out


def test_cli_reports_errors_on_stderr(tmp_path, capsys) -> None:
    data = tmp_path / "data"
    rc = run(data, "track", "--project", "nosuch")
    captured = capsys.readouterr()
    assert rc == 1
    assert captured.err.startswith("error:")


def test_cli_ingest_requires_keypoint_documents(tmp_path, capsys) -> None:
    empty = tmp_path / "empty"
    empty.mkdir()
    rc = run(tmp_path / "data", "ingest", "--poses", str(empty))
    captured = capsys.readouterr()
    assert rc == 1
    assert "no keypoint documents" in captured.err


def test_cli_parser_covers_the_documented_commands(tmp_path) -> None:
    parser = build_parser()
    sub = {a.dest: a for a in parser._actions}["command"]
    assert set(sub.choices) == {
        "ingest", "track", "label", "rush", "solve", "export", "serve"}
