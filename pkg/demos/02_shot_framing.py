"""Composing desired frames: shot sizes, headroom, lead room, conflicts.

Builds desired-frame series for several shot specifications over the same
scene and shows how the grammar reacts to a bystander entering the frame.
"""

import numpy as np

from stagecam import TrackParams, build_tracklets
from stagecam.framing import ShotSize, ShotSpec, build_desired_series
from stagecam.synth import ActorMotion, default_meta, make_scene
from stagecam.tracking import assign_actor

meta = default_meta(frame_count=200)
# bob drifts close enough to alice to trigger conflict handling
actors = [
    ActorMotion("alice", 1400.0, 600.0, amp_x=120.0, gaze="left"),
    ActorMotion("bob", 1900.0, 620.0, amp_x=260.0, phase=3.6),
]
seq, truth = make_scene(actors, meta.frame_count, meta, seed=3)
store = build_tracklets(seq, TrackParams())
for tid, t in sorted(store.tracklets.items()):
    votes = {}
    for f, si in t.entries():
        votes[truth[f][si]] = votes.get(truth[f][si], 0) + 1
    assign_actor(store, tid, max(votes, key=votes.get))

for size in (ShotSize.CLOSEUP, ShotSize.MEDIUM, ShotSize.FULL):
    spec = ShotSpec(subjects=frozenset({"alice"}), size=size)
    series = build_desired_series(store, spec, meta)
    hs = np.array([f.h for f in series.frames if f.valid])
    notes = {f.conflict_note for f in series.frames if f.conflict_note}
    print(f"{size.value:8s} median half-height {np.median(hs):7.1f} px, "
          f"conflict notes: {sorted(notes) or 'none'}")

spec = ShotSpec(subjects=frozenset(), size=ShotSize.ENSEMBLE)
series = build_desired_series(store, spec, meta)
f0 = series.frames[0]
print(f"\nensemble frame 0: center ({f0.cx:.0f}, {f0.cy:.0f}), "
      f"half-height {f0.h:.0f} px")
print(f"must-include box: {tuple(round(v) for v in f0.include.as_tuple())}")

# lead room: alice gazes left, so the closeup leaves space on her left
spec = ShotSpec(subjects=frozenset({"alice"}), size=ShotSize.CLOSEUP)
series = build_desired_series(store, spec, meta)
valid = [f for f in series.frames if f.valid]
print(f"\ncloseup of alice: {len(valid)} valid frames, "
      f"first center x {valid[0].cx:.1f} (shifted toward her gaze)")
