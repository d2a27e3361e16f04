"""Greedy IoU tracklet building over head boxes, plus manual actor labels.

Association compares padded upper (head) bounding boxes between frame t and
t+1 only; a one-frame dropout therefore splits a tracklet (gap tolerance 0).
Splits are repaired downstream by labeling both pieces with the same actor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pose import FOOT_KEYPOINTS, HEAD_KEYPOINTS, FrameDetections, Skeleton


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixels, corners (x0, y0) top-left, (x1, y1) bottom-right."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"degenerate box: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def intersect_area(a: BBox, b: BBox) -> float:
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 when the union has zero area."""
    inter = intersect_area(a, b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def upper_bbox(
    s: Skeleton,
    tau_conf: float = 0.1,
    beta: float = 0.25,
    s_min: float = 10.0,
) -> BBox | None:
    """Padded head box over nose, neck, eyes and ears.

    The tight box over head keypoints with confidence > tau_conf is expanded
    on each side by beta * max(dimension, s_min); the floor keeps IoU usable
    when the raw box degenerates (two nearly coincident points). Returns None
    when fewer than two head keypoints pass the threshold.
    """
    kps = s.keypoints[list(HEAD_KEYPOINTS)]
    ok = kps[:, 2] > tau_conf
    if np.count_nonzero(ok) < 2:
        return None
    xs, ys = kps[ok, 0], kps[ok, 1]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    pad_x = beta * max(x1 - x0, s_min)
    pad_y = beta * max(y1 - y0, s_min)
    return BBox(x0 - pad_x, y0 - pad_y, x1 + pad_x, y1 + pad_y)


def link_frame(
    prev: list[BBox], cur: list[BBox], tau_iou: float = 0.3
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of boxes by descending IoU.

    Pairs with IoU >= tau_iou are accepted best-first; ties break on the
    smaller previous index, then the smaller current index.
    """
    scored = []
    for i, a in enumerate(prev):
        for j, b in enumerate(cur):
            v = iou(a, b)
            if v >= tau_iou:
                scored.append((-v, i, j))
    scored.sort()
    used_prev: set[int] = set()
    used_cur: set[int] = set()
    matches: list[tuple[int, int]] = []
    for _, i, j in scored:
        if i in used_prev or j in used_cur:
            continue
        used_prev.add(i)
        used_cur.add(j)
        matches.append((i, j))
    return matches


@dataclass(frozen=True)
class TrackParams:
    """Thresholds for box construction and association."""

    tau_conf: float = 0.1
    beta: float = 0.25
    s_min: float = 10.0
    tau_iou: float = 0.3

    def to_doc(self) -> dict:
        return {
            "tau_conf": self.tau_conf,
            "beta": self.beta,
            "s_min": self.s_min,
            "tau_iou": self.tau_iou,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TrackParams":
        return cls(**doc)


@dataclass
class Tracklet:
    """A maximal chain of per-frame detections attributed to one performer.

    ``skeleton_indices[k]`` is the skeleton index within frame
    ``start_frame + k``; entries cover consecutive frames with no gaps.
    """

    id: int
    start_frame: int
    skeleton_indices: list[int]
    label: str | None = None

    @property
    def length(self) -> int:
        return len(self.skeleton_indices)

    @property
    def end_frame(self) -> int:
        """Exclusive end frame."""
        return self.start_frame + self.length

    def entries(self) -> list[tuple[int, int]]:
        return [(self.start_frame + k, si) for k, si in enumerate(self.skeleton_indices)]

    def covers(self, frame: int) -> bool:
        return self.start_frame <= frame < self.end_frame


TRACKS_SCHEMA = "stagecam/tracks/1"


@dataclass
class TrackStore:
    """All tracklets of one part, with the per-frame index and actor labels."""

    tracklets: dict[int, Tracklet] = field(default_factory=dict)
    by_frame: dict[int, dict[int, int]] = field(default_factory=dict)  # frame -> skel idx -> tid
    warnings: list[str] = field(default_factory=list)
    params: TrackParams = field(default_factory=TrackParams)
    seq: list[FrameDetections] | None = None

    def labels(self) -> dict[str, list[int]]:
        """Actor name registry: label -> tracklet ids, by start frame."""
        out: dict[str, list[int]] = {}
        for t in sorted(self.tracklets.values(), key=lambda t: (t.start_frame, t.id)):
            if t.label is not None:
                out.setdefault(t.label, []).append(t.id)
        return out

    def skeleton(self, frame: int, skeleton_index: int) -> Skeleton:
        if self.seq is None:
            raise ValueError("store has no detection sequence bound")
        return self.seq[frame].skeletons[skeleton_index]

    def to_doc(self) -> dict:
        return {
            "schema": TRACKS_SCHEMA,
            "params": self.params.to_doc(),
            "tracklets": [
                {
                    "id": t.id,
                    "start_frame": t.start_frame,
                    "skeleton_indices": list(t.skeleton_indices),
                    "label": t.label,
                }
                for t in sorted(self.tracklets.values(), key=lambda t: t.id)
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_doc(cls, doc: dict, seq: list[FrameDetections] | None = None) -> "TrackStore":
        if doc.get("schema") != TRACKS_SCHEMA:
            raise ValueError(f"unsupported tracks schema: {doc.get('schema')!r}")
        store = cls(params=TrackParams.from_doc(doc["params"]), seq=seq)
        for td in doc["tracklets"]:
            t = Tracklet(
                id=td["id"],
                start_frame=td["start_frame"],
                skeleton_indices=list(td["skeleton_indices"]),
                label=td.get("label"),
            )
            store.tracklets[t.id] = t
            for frame, si in t.entries():
                store.by_frame.setdefault(frame, {})[si] = t.id
        store.warnings = list(doc.get("warnings", []))
        return store


def build_tracklets(
    seq: list[FrameDetections], params: TrackParams = TrackParams()
) -> TrackStore:
    """Chain detections frame to frame by best head-box IoU.

    Matched detections extend the matching tracklet; unmatched detections
    with a usable head box start new tracklets; detections with no usable
    head box are skipped. Pure function of (seq, params).
    """
    store = TrackStore(params=params, seq=seq)
    next_id = 0
    # open tracklets from the previous frame: (tracklet id, box)
    prev_open: list[tuple[int, BBox]] = []

    for fd in seq:
        frame = fd.frame_index
        boxes: list[tuple[int, BBox]] = []  # (skeleton index, box)
        for si, s in enumerate(fd.skeletons):
            box = upper_bbox(s, params.tau_conf, params.beta, params.s_min)
            if box is not None:
                boxes.append((si, box))

        matches = link_frame(
            [b for _, b in prev_open], [b for _, b in boxes], params.tau_iou
        )
        matched_cur = {j: prev_open[i][0] for i, j in matches}

        cur_open: list[tuple[int, BBox]] = []
        for j, (si, box) in enumerate(boxes):
            tid = matched_cur.get(j)
            if tid is None:
                tid = next_id
                next_id += 1
                store.tracklets[tid] = Tracklet(id=tid, start_frame=frame, skeleton_indices=[])
            store.tracklets[tid].skeleton_indices.append(si)
            store.by_frame.setdefault(frame, {})[si] = tid
            cur_open.append((tid, box))
        prev_open = cur_open
    return store


def assign_actor(store: TrackStore, tracklet_id: int, name: str | None) -> TrackStore:
    """Set or clear a tracklet's actor label.

    Two tracklets with the same label may overlap in time; that is recorded
    as a warning, not rejected, since relabeling is how splits get repaired.
    """
    t = store.tracklets.get(tracklet_id)
    if t is None:
        raise KeyError(f"unknown tracklet id: {tracklet_id}")
    t.label = name
    if name is not None:
        for other in store.tracklets.values():
            if other.id == t.id or other.label != name:
                continue
            if other.start_frame < t.end_frame and t.start_frame < other.end_frame:
                store.warnings.append(
                    f"tracklets {min(t.id, other.id)} and {max(t.id, other.id)} "
                    f"share label {name!r} and overlap in time"
                )
    return store


def actor_coverage(store: TrackStore, name: str) -> dict[int, int]:
    """Per-frame skeleton index of the labeled actor.

    Where two same-label tracklets overlap, the one with the earlier start
    frame wins.
    """
    tids = store.labels().get(name)
    if not tids:
        raise KeyError(f"no tracklet labeled {name!r}")
    coverage: dict[int, int] = {}
    claimed: dict[int, int] = {}  # frame -> start_frame of the winning tracklet
    for tid in tids:
        t = store.tracklets[tid]
        for frame, si in t.entries():
            if frame in coverage and claimed[frame] <= t.start_frame:
                continue
            coverage[frame] = si
            claimed[frame] = t.start_frame
    return coverage
