"""Turn solved rushes into deliverables: crop EDLs, a cut list, subtitles.

A rush is a virtual camera move over the fixed recording.  Downstream tools
consume it as a per-frame crop EDL plus a shell script that drives whatever
transcoder the venue uses; the program edit is a plain cut list and the notes
go out as a WebVTT description track.
"""

from stagecam import TrackParams, build_tracklets
from stagecam.export import (
    Annotation,
    AnnotationCategory,
    EditTimeline,
    build_rush,
    emit_crop_script,
    emit_cutlist,
    emit_rush_edl,
    emit_vtt,
    move_cut,
    set_cut,
)
from stagecam.framing import ShotSize, ShotSpec
from stagecam.synth import ActorMotion, default_meta, make_scene
from stagecam.tracking import assign_actor

meta = default_meta(frame_count=150)
actors = [
    ActorMotion(name="alice", x0=1200.0, y0=1150.0),
    ActorMotion(name="bob", x0=2600.0, y0=1180.0),
]
seq, truth = make_scene(actors, meta.frame_count, meta, seed=21)
store = build_tracklets(seq, TrackParams())
for tid, t in sorted(store.tracklets.items()):
    votes = {}
    for f, si in t.entries():
        votes[truth[f][si]] = votes.get(truth[f][si], 0) + 1
    assign_actor(store, tid, max(votes, key=votes.get))

# two rushes: a closeup on alice and a full shot of bob
closeup, _ = build_rush("demo.0.r0", ShotSpec(subjects=frozenset({"alice"}),
                                              size=ShotSize.CLOSEUP), store, meta)
full, _ = build_rush("demo.0.r1", ShotSpec(subjects=frozenset({"bob"}),
                                           size=ShotSize.FULL), store, meta)

# crop EDL at delivery resolution: integer pixel rects, even dimensions
edl = emit_rush_edl(closeup, meta, 1920, 1080)
head = edl.splitlines()[:4]
print("EDL for", closeup.id, "at 1920x1080:")
for line in head:
    print(" ", line)
print(f"  ... {len(edl.splitlines()) - 1} rows total")

# who is on screen: the closeup should mostly hold just alice
solo = sum(1 for names in closeup.visible_actors if names == ["alice"])
print(f"closeup frames with only alice visible: {solo}/{meta.frame_count}")

# the program edit: start on the closeup, cut to bob, trim the cut back
tl = EditTimeline(frame_count=meta.frame_count, cuts=((0, closeup.id),))
rushes = {closeup.id, full.id}
tl = set_cut(tl, 60, full.id, rushes=rushes)
tl = set_cut(tl, 110, closeup.id, rushes=rushes)
tl = move_cut(tl, 110, 95)
print("cut list:")
print(emit_cutlist(tl), end="")

# annotations become a WebVTT description track, sorted by start time
notes = [
    Annotation(start_time=3.2, end_time=4.8, text="Doors open upstage",
               category=AnnotationCategory.STAGE_DIRECTION),
    Annotation(start_time=0.5, end_time=2.0, text="Good evening",
               category=AnnotationCategory.SPEECH, target=closeup.id),
]
print("VTT:")
print(emit_vtt(notes), end="")

# the transcode script only fills a user-supplied template
template = "transcode {input} --apply {filter} --out {output}"
script = emit_crop_script(closeup, "take1.mov", 1920, 1080, template)
print("script:")
print(script, end="")
