"""From raw keypoint documents to labeled tracklets.

Synthesizes a three-performer scene, round-trips it through the on-disk
document format, links detections into tracklets, and attaches names.
"""

import json
import tempfile
from pathlib import Path

from stagecam import TrackParams, assign_actor, build_tracklets
from stagecam.pose import dump_pose_frame, load_pose_sequence
from stagecam.synth import ActorMotion, default_meta, make_scene

meta = default_meta(frame_count=300)
actors = [
    ActorMotion("alice", 700.0, 600.0, amp_x=180.0, gaze="left"),
    ActorMotion("bob", 1900.0, 620.0, amp_x=180.0, phase=2.1),
    ActorMotion("carol", 3100.0, 590.0, amp_x=180.0, phase=4.2, gaze="right"),
]
seq, truth = make_scene(actors, meta.frame_count, meta, seed=7)

# write one keypoint document per frame, the detector's output layout
workdir = Path(tempfile.mkdtemp(prefix="stagecam_demo_"))
for fd in seq:
    path = workdir / f"take_{fd.frame_index:012d}_keypoints.json"
    path.write_text(json.dumps(dump_pose_frame(fd)), encoding="utf-8")
print(f"wrote {meta.frame_count} keypoint documents to {workdir}")

loaded = load_pose_sequence(workdir, meta)
print(f"loaded {len(loaded)} frames, "
      f"{sum(len(fd.skeletons) for fd in loaded)} detections")

store = build_tracklets(loaded, TrackParams())
print(f"\n{len(store.tracklets)} tracklets:")
for tid, t in sorted(store.tracklets.items()):
    print(f"  tracklet {tid}: frames {t.start_frame}..{t.end_frame - 1} "
          f"({t.length} detections)")

# a human labels each tracklet once; names come from the call sheet
for tid, name in zip(sorted(store.tracklets), ["alice", "bob", "carol"]):
    assign_actor(store, tid, name)
print(f"\nlabels: {sorted(store.labels())}")
