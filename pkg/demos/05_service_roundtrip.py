"""One project end to end over the HTTP service.

Everything the desk tools do goes through this API: create a project,
upload the detector archive, run the ingest and track jobs, label the
tracklets, request a rush, lay a cut, and pull the deliverables back out.
The app here runs in-process via the test client; `stagecam serve`
exposes the same routes on a real port.
"""

import io
import json
import tempfile
import time
import zipfile

from fastapi.testclient import TestClient

from stagecam.pose import dump_pose_frame
from stagecam.service.api import create_app
from stagecam.synth import ActorMotion, default_meta, make_scene

FRAMES = 120
meta = default_meta(frame_count=FRAMES)
actors = [
    ActorMotion(name="alice", x0=1100.0, y0=1150.0),
    ActorMotion(name="bob", x0=2700.0, y0=1180.0),
]
seq, _ = make_scene(actors, FRAMES, meta, seed=31)

# the detector hands over one JSON document per frame, zipped
buf = io.BytesIO()
with zipfile.ZipFile(buf, "w") as zf:
    for fd in seq:
        zf.writestr(f"take_{fd.frame_index:012d}_keypoints.json",
                    json.dumps(dump_pose_frame(fd)))
archive = buf.getvalue()


def wait_done(client: TestClient, job_id: str) -> None:
    deadline = time.monotonic() + 90.0
    while time.monotonic() < deadline:
        rec = client.get(f"/jobs/{job_id}").json()
        if rec["state"] == "failed":
            raise RuntimeError(rec["error"])
        if rec["state"] == "done":
            return
        time.sleep(0.02)
    raise TimeoutError(job_id)


tmp = tempfile.TemporaryDirectory()
app = create_app(data_dir=tmp.name, workers=2)
client = TestClient(app)

pid = client.post("/projects", json={
    "width": meta.width, "height": meta.height,
    "fps": meta.fps, "frame_count": FRAMES,
}).json()["id"]
print("project:", pid)

client.post(f"/projects/{pid}/poses?part=0", content=archive)
for kind in ("ingest", "track"):
    job = client.post(f"/projects/{pid}/jobs",
                      json={"kind": kind, "params": {"part": 0}})
    wait_done(client, job.json()["job_id"])
    print(f"job {kind}: done")

# label what the tracker found; a real operator would eyeball thumbnails.
# the synthetic scene emits actors in list order, so ids map straight to names
listing = client.get(f"/projects/{pid}/tracklets").json()["tracklets"]
for t, name in zip(sorted(listing, key=lambda t: t["id"]), ["alice", "bob"]):
    client.put(f"/projects/{pid}/tracklets/{t['id']}/label", json={"name": name})
    start = t["start_frame"]
    print(f"tracklet {t['id']}: frames {start}..{start + t['length'] - 1} -> {name}")

# frame + solve one closeup rush on alice
r = client.post(f"/projects/{pid}/rushes",
                json={"spec": {"subjects": ["alice"], "size": "closeup"}})
body = r.json()
wait_done(client, body["job_id"])
rush_id = body["rush_id"]
print("rush:", rush_id)

# the path endpoint serves overlay geometry at any proxy scale
path = client.get(f"/rushes/{rush_id}/path?scale=1920x1080").json()
print(f"path frames at 1920x1080: {len(path['frames'])}, "
      f"first: {[round(v, 1) for v in path['frames'][0]]}")

# a one-cut program and its exports
client.put(f"/projects/{pid}/timeline",
           json={"frame_count": FRAMES, "cuts": [[0, rush_id]]})
client.put(f"/projects/{pid}/annotations", json={"annotations": [
    {"start_time": 0.5, "end_time": 2.0, "text": "Good evening",
     "category": "speech", "target": rush_id},
]})

cutlist = client.get(f"/projects/{pid}/export/cutlist").text
print("cutlist:")
print(cutlist, end="")
vtt = client.get(f"/projects/{pid}/export/vtt").text
print("vtt:")
print(vtt, end="")
edl = client.get(f"/projects/{pid}/export/edl?rush={rush_id}&scale=1920x1080")
print(f"edl: {len(edl.text.splitlines()) - 1} rows")

app.state.queue.stop()
tmp.cleanup()
