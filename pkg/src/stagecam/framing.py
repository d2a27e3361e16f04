"""Shot grammar: labeled tracks plus a shot spec become desired camera frames.

A desired frame is a crop rectangle described by its center (cx, cy) and
half-height h; the half-width is rho * h for the spec's aspect ratio rho.
Composition applies the size rule for the shot class, headroom, gaze lead
room, then stage clamping; conflicts with non-subject performers are
resolved per frame by pull-in or keep-out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .pose import FOOT_KEYPOINTS, MID_HIP, NOSE, L_EAR, R_EAR, Skeleton, SourceMeta
from .tracking import BBox, TrackStore, actor_coverage, intersect_area, upper_bbox


class ShotSize(enum.Enum):
    CLOSEUP = "closeup"
    MEDIUM = "medium"
    FULL = "full"
    ENSEMBLE = "ensemble"


# pull-in escalation order
_SIZE_LADDER = [ShotSize.CLOSEUP, ShotSize.MEDIUM, ShotSize.FULL, ShotSize.ENSEMBLE]


class GazeDirection(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    FRONTAL = "frontal"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ShotSpec:
    """What the virtual camera should look at and how tightly."""

    subjects: frozenset[str]
    size: ShotSize
    aspect: float = 16 / 9
    headroom: float = 0.10
    lead_room: float = 0.15
    margin: float = 0.10
    theta_in: float = 0.30

    def __post_init__(self):
        object.__setattr__(self, "subjects", frozenset(self.subjects))
        if self.aspect <= 0:
            raise ValueError("aspect must be positive")
        if not self.subjects and self.size is not ShotSize.ENSEMBLE:
            raise ValueError("subjects required unless size is ENSEMBLE")
        if not 0 <= self.headroom < 0.5:
            raise ValueError("headroom must be in [0, 0.5)")
        if self.theta_in <= 0 or self.theta_in > 1:
            raise ValueError("theta_in must be in (0, 1]")

    def to_doc(self) -> dict:
        return {
            "subjects": sorted(self.subjects),
            "size": self.size.value,
            "aspect": self.aspect,
            "headroom": self.headroom,
            "lead_room": self.lead_room,
            "margin": self.margin,
            "theta_in": self.theta_in,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ShotSpec":
        return cls(
            subjects=frozenset(doc["subjects"]),
            size=ShotSize(doc["size"]),
            aspect=doc.get("aspect", 16 / 9),
            headroom=doc.get("headroom", 0.10),
            lead_room=doc.get("lead_room", 0.15),
            margin=doc.get("margin", 0.10),
            theta_in=doc.get("theta_in", 0.30),
        )


@dataclass
class Extent:
    """Per-performer geometry that the size rules consume.

    head_box is the unpadded tight box over head keypoints (None when fewer
    than two are confident); mid_hip_y is None when keypoint 8 is not valid.
    """

    top_y: float
    bottom_y: float
    center_x: float
    head_box: BBox | None = None
    mid_hip_y: float | None = None


@dataclass
class DesiredFrame:
    """Target crop for one video frame, before path optimization."""

    cx: float = 0.0
    cy: float = 0.0
    h: float = 0.0
    include: BBox | None = None
    valid: bool = False
    conflict_note: str | None = None
    # resolve_conflicts bookkeeping so a second pass sees its own pull-ins
    effective_subjects: frozenset[str] | None = None
    effective_size: ShotSize | None = None

    def rect(self, aspect: float) -> BBox:
        w = aspect * self.h
        return BBox(self.cx - w, self.cy - self.h, self.cx + w, self.cy + self.h)


DESIRED_SCHEMA = "stagecam/desired/1"


@dataclass
class DesiredSeries:
    """One DesiredFrame per video frame of a part."""

    frames: list[DesiredFrame]
    spec: ShotSpec

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def arrays(self) -> dict[str, np.ndarray]:
        """Column vectors for the path solver; invalid frames hold NaN."""
        n = len(self.frames)
        out = {
            "valid": np.zeros(n, dtype=bool),
            "cx": np.full(n, np.nan),
            "cy": np.full(n, np.nan),
            "h": np.full(n, np.nan),
            "ix0": np.full(n, np.nan),
            "iy0": np.full(n, np.nan),
            "ix1": np.full(n, np.nan),
            "iy1": np.full(n, np.nan),
        }
        for i, f in enumerate(self.frames):
            if not f.valid:
                continue
            out["valid"][i] = True
            out["cx"][i], out["cy"][i], out["h"][i] = f.cx, f.cy, f.h
            if f.include is not None:
                out["ix0"][i], out["iy0"][i] = f.include.x0, f.include.y0
                out["ix1"][i], out["iy1"][i] = f.include.x1, f.include.y1
        return out

    def to_doc(self) -> dict:
        records = []
        for f in self.frames:
            rec: dict = {"valid": f.valid}
            if f.valid:
                rec.update(cx=f.cx, cy=f.cy, h=f.h)
                if f.include is not None:
                    rec["include"] = list(f.include.as_tuple())
            if f.conflict_note:
                rec["conflict"] = f.conflict_note
            records.append(rec)
        return {"schema": DESIRED_SCHEMA, "spec": self.spec.to_doc(), "frames": records}

    @classmethod
    def from_doc(cls, doc: dict) -> "DesiredSeries":
        if doc.get("schema") != DESIRED_SCHEMA:
            raise ValueError(f"unsupported desired schema: {doc.get('schema')!r}")
        frames = []
        for rec in doc["frames"]:
            f = DesiredFrame(valid=rec.get("valid", False))
            if f.valid:
                f.cx, f.cy, f.h = rec["cx"], rec["cy"], rec["h"]
                if "include" in rec:
                    f.include = BBox(*rec["include"])
            f.conflict_note = rec.get("conflict")
            frames.append(f)
        return cls(frames=frames, spec=ShotSpec.from_doc(doc["spec"]))


def estimate_gaze(s: Skeleton, tau_conf: float = 0.1) -> GazeDirection:
    """Coarse gaze from which ears are visible next to the nose.

    Both ears visible reads as facing the camera; exactly one visible ear
    means the head is turned away from it, so the subject faces the side
    the nose is on relative to that ear.
    """
    v = s.valid(tau_conf)
    if not v[NOSE]:
        return GazeDirection.UNKNOWN
    if v[R_EAR] and v[L_EAR]:
        return GazeDirection.FRONTAL
    if not v[R_EAR] and not v[L_EAR]:
        return GazeDirection.UNKNOWN
    ear = R_EAR if v[R_EAR] else L_EAR
    if s.keypoints[NOSE, 0] < s.keypoints[ear, 0]:
        return GazeDirection.LEFT
    return GazeDirection.RIGHT


# body height expressed in head-box heights, for when legs are not detected
HEADS_PER_BODY = 7.5


def body_extent(s: Skeleton, tau_conf: float = 0.1) -> Extent | None:
    """Vertical extent, horizontal center and head box of one skeleton."""
    v = s.valid(tau_conf)
    if not v.any():
        return None
    kps = s.keypoints
    top_y = float(kps[v, 1].min())
    center_x = float(kps[v, 0].mean())
    head_box = upper_bbox(s, tau_conf, beta=0.0, s_min=0.0)

    foot = [i for i in FOOT_KEYPOINTS if v[i]]
    if foot:
        bottom_y = float(kps[foot, 1].max())
    elif head_box is not None:
        bottom_y = top_y + HEADS_PER_BODY * head_box.height
    else:
        bottom_y = float(kps[v, 1].max())

    mid_hip_y = float(kps[MID_HIP, 1]) if v[MID_HIP] else None
    return Extent(top_y=top_y, bottom_y=bottom_y, center_x=center_x,
                  head_box=head_box, mid_hip_y=mid_hip_y)


def _majority_gaze(gazes: list[GazeDirection]) -> GazeDirection:
    left = sum(1 for g in gazes if g is GazeDirection.LEFT)
    right = sum(1 for g in gazes if g is GazeDirection.RIGHT)
    if left > right:
        return GazeDirection.LEFT
    if right > left:
        return GazeDirection.RIGHT
    return GazeDirection.FRONTAL


def _clamp_box(b: BBox, meta: SourceMeta) -> BBox:
    """Clip to image bounds; detections slightly outside the image happen."""
    return BBox(
        min(max(b.x0, 0.0), meta.width),
        min(max(b.y0, 0.0), meta.height),
        min(max(b.x1, 0.0), meta.width),
        min(max(b.y1, 0.0), meta.height),
    )


def _union_box(boxes: list[BBox]) -> BBox:
    return BBox(
        min(b.x0 for b in boxes),
        min(b.y0 for b in boxes),
        max(b.x1 for b in boxes),
        max(b.y1 for b in boxes),
    )


def _size_rule_height(extents: list[Extent], size: ShotSize, spec: ShotSpec) -> float:
    """Frame height (full height, not h) mandated by the shot size class."""
    top = min(e.top_y for e in extents)
    bottom = max(e.bottom_y for e in extents)
    if size is ShotSize.CLOSEUP:
        heads = [e.head_box.height for e in extents if e.head_box is not None]
        head_h = max(heads) if heads else (bottom - top) / HEADS_PER_BODY
        return 4.0 * head_h
    if size is ShotSize.MEDIUM:
        hips = []
        for e in extents:
            hips.append(e.mid_hip_y if e.mid_hip_y is not None
                        else (e.top_y + e.bottom_y) / 2)
        return 1.15 * (max(hips) - top)
    if size is ShotSize.FULL:
        return 1.25 * (bottom - top)
    return (1 + 2 * spec.margin) * (bottom - top)


def _include_box(extents: list[Extent], size: ShotSize, meta: SourceMeta) -> BBox:
    """Must-keep region: head boxes, plus feet for the wide classes."""
    parts: list[BBox] = []
    for e in extents:
        if e.head_box is not None:
            parts.append(e.head_box)
        else:
            parts.append(BBox(e.center_x, e.top_y, e.center_x, e.top_y))
        if size in (ShotSize.FULL, ShotSize.ENSEMBLE):
            parts.append(BBox(e.center_x, e.bottom_y, e.center_x, e.bottom_y))
    return _clamp_box(_union_box(parts), meta)


def nudge_center(c: float, half: float, img_lo: float, img_hi: float,
                 inc_lo: float | None, inc_hi: float | None) -> float:
    """Snap a clamped center so the recomputed constraints hold bit-exactly.

    Window clamping computes fl(bound - half); re-adding half can then miss
    the bound by an ulp. The true slack is a few ulps at most, so scanning
    the neighboring floats (nearest first, image bounds taking priority over
    inclusion) restores exactness deterministically.
    """
    def ok_bounds(v: float) -> bool:
        return v - half >= img_lo and v + half <= img_hi

    def ok_inc(v: float) -> bool:
        if inc_lo is None:
            return True
        return v - half <= inc_lo and v + half >= inc_hi

    if ok_bounds(c) and ok_inc(c):
        return c
    cands = [c]
    up = dn = c
    for _ in range(4):
        up = float(np.nextafter(up, np.inf))
        dn = float(np.nextafter(dn, -np.inf))
        cands += [up, dn]
    for v in cands:
        if ok_bounds(v) and ok_inc(v):
            return v
    for v in cands:
        if ok_bounds(v):
            return v
    return c


def _fit_and_clamp(cx: float, cy: float, h: float, include: BBox,
                   spec: ShotSpec, meta: SourceMeta) -> tuple[float, float, float]:
    """Make (cx, cy, h) honor include containment and stage bounds exactly.

    Containment needs a big enough frame and a center near the include box;
    the stage bound caps the frame at the image. Both are satisfiable at
    once because include lies inside the image, so the h window below is
    never empty.
    """
    rho = spec.aspect
    h_fit = max(include.height / 2, include.width / (2 * rho))
    h_max = min(meta.height / 2, meta.width / (2 * rho))
    h = min(max(h, h_fit, 1.0), h_max)
    # center window = contain include AND stay on the image, per axis
    lo_x = max(rho * h, include.x1 - rho * h)
    hi_x = min(meta.width - rho * h, include.x0 + rho * h)
    lo_y = max(h, include.y1 - h)
    hi_y = min(meta.height - h, include.y0 + h)
    cx = min(max(cx, lo_x), hi_x)
    cy = min(max(cy, lo_y), hi_y)
    cx = nudge_center(cx, rho * h, 0.0, meta.width, include.x0, include.x1)
    cy = nudge_center(cy, h, 0.0, meta.height, include.y0, include.y1)
    return cx, cy, h


def _compose_from_extents(
    extents: list[Extent],
    gazes: list[GazeDirection],
    spec: ShotSpec,
    meta: SourceMeta,
    size: ShotSize | None = None,
    extra_include: BBox | None = None,
) -> tuple[DesiredFrame, bool]:
    """Core placement; returns (frame, whether h outgrew the size rule)."""
    size = size or spec.size
    extents = [
        Extent(
            top_y=min(max(e.top_y, 0.0), meta.height),
            bottom_y=min(max(e.bottom_y, 0.0), meta.height),
            center_x=min(max(e.center_x, 0.0), meta.width),
            head_box=_clamp_box(e.head_box, meta) if e.head_box else None,
            mid_hip_y=min(max(e.mid_hip_y, 0.0), meta.height)
            if e.mid_hip_y is not None else None,
        )
        for e in extents
    ]
    frame_h = _size_rule_height(extents, size, spec)
    h = frame_h / 2

    top = min(e.top_y for e in extents)
    centers = [e.center_x for e in extents]
    cx = (min(centers) + max(centers)) / 2
    cy = top - spec.headroom * frame_h + h

    gaze = _majority_gaze(gazes)
    if gaze is GazeDirection.LEFT:
        cx -= spec.lead_room * 2 * spec.aspect * h
    elif gaze is GazeDirection.RIGHT:
        cx += spec.lead_room * 2 * spec.aspect * h

    include = _include_box(extents, size, meta)
    if extra_include is not None:
        include = _clamp_box(_union_box([include, extra_include]), meta)
    cx2, cy2, h2 = _fit_and_clamp(cx, cy, h, include, spec, meta)
    expanded = h2 > h + 1e-9
    df = DesiredFrame(
        cx=cx2, cy=cy2, h=h2, include=include, valid=True,
        effective_subjects=None, effective_size=size,
    )
    return df, expanded


def compose_desired(
    subject_skeletons: list[Skeleton],
    spec: ShotSpec,
    meta: SourceMeta,
    tau_conf: float = 0.1,
) -> DesiredFrame:
    """Desired frame for one video frame from the subjects' skeletons."""
    extents: list[Extent] = []
    gazes: list[GazeDirection] = []
    for s in subject_skeletons:
        e = body_extent(s, tau_conf)
        if e is None:
            continue
        extents.append(e)
        gazes.append(estimate_gaze(s, tau_conf))
    if not extents:
        return DesiredFrame(valid=False)
    df, _ = _compose_from_extents(extents, gazes, spec, meta)
    return df


def _keepout_shift(
    frame: BBox, intruder: BBox, include: BBox, meta: SourceMeta
) -> tuple[float, float] | None:
    """Smallest axis shift that zeroes the overlap and keeps the frame legal.

    Candidates push the frame until it just touches the intruder on each of
    the four sides. Ties prefer horizontal motion, then the leftward or
    upward direction.
    """
    candidates = [
        (intruder.x0 - frame.x1, 0.0),
        (intruder.x1 - frame.x0, 0.0),
        (0.0, intruder.y0 - frame.y1),
        (0.0, intruder.y1 - frame.y0),
    ]
    best = None
    for dx, dy in candidates:
        moved = BBox(frame.x0 + dx, frame.y0 + dy, frame.x1 + dx, frame.y1 + dy)
        if moved.x0 < -1e-9 or moved.y0 < -1e-9:
            continue
        if moved.x1 > meta.width + 1e-9 or moved.y1 > meta.height + 1e-9:
            continue
        if (moved.x0 > include.x0 + 1e-9 or moved.y0 > include.y0 + 1e-9
                or moved.x1 < include.x1 - 1e-9 or moved.y1 < include.y1 - 1e-9):
            continue
        key = (abs(dx) + abs(dy), 0 if dy == 0 else 1, dx, dy)
        if best is None or key < best[0]:
            best = (key, (dx, dy))
    return best[1] if best else None


def resolve_conflicts(
    df: DesiredFrame,
    all_actors: dict[str, Skeleton],
    spec: ShotSpec,
    meta: SourceMeta,
    subjects: frozenset[str] | None = None,
    tau_conf: float = 0.1,
) -> DesiredFrame:
    """Pull nearby non-subjects into the shot or push the frame off them.

    Overlap is measured on the actor's padded upper box against the frame
    rectangle. At or above theta_in the actor joins the shot (escalating
    the size class one step when the grown include box no longer fits the
    size rule); below it the frame is translated just enough to expel the
    actor, falling back to pull-in when no legal translation exists.
    Repeats until no actor triggers, so a second call is a no-op.
    """
    if not df.valid:
        return df
    df = replace(df)
    if df.effective_subjects is None:
        df.effective_subjects = subjects if subjects is not None else spec.subjects
    if df.effective_size is None:
        df.effective_size = spec.size
    notes: list[str] = [df.conflict_note] if df.conflict_note else []

    for _ in range(1 + len(all_actors)):
        acted = False
        for name in sorted(all_actors):
            if name in df.effective_subjects:
                continue
            box = upper_bbox(all_actors[name], tau_conf)
            if box is None:
                continue
            frame = df.rect(spec.aspect)
            if box.area <= 0:
                continue
            overlap = intersect_area(box, frame) / box.area
            if overlap <= 0:
                continue
            if overlap < spec.theta_in:
                shift = _keepout_shift(frame, box, df.include, meta)
                if shift is not None:
                    dx, dy = shift
                    df.cx += dx
                    df.cy += dy
                    notes.append(f"keepout:{name} dx={dx:g} dy={dy:g}")
                    acted = True
                    continue
            # pull-in: recompose with the intruder as an extra subject
            new_subjects = df.effective_subjects | {name}
            extents, gazes = [], []
            for n in sorted(new_subjects):
                s = all_actors.get(n)
                e = body_extent(s, tau_conf) if s is not None else None
                if e is not None:
                    extents.append(e)
                    gazes.append(estimate_gaze(s, tau_conf))
            size = df.effective_size
            new_df, expanded = _compose_from_extents(
                extents, gazes, spec, meta, size=size, extra_include=df.include)
            if expanded:
                idx = _SIZE_LADDER.index(size)
                if idx + 1 < len(_SIZE_LADDER):
                    size = _SIZE_LADDER[idx + 1]
                    new_df, _ = _compose_from_extents(
                        extents, gazes, spec, meta, size=size,
                        extra_include=df.include)
            df = new_df
            df.effective_subjects = new_subjects
            df.effective_size = size
            notes.append(f"pullin:{name}")
            acted = True
        if not acted:
            break
    df.conflict_note = "; ".join(notes) if notes else None
    return df


def _interp_extent(a: Extent, b: Extent, t: float) -> Extent:
    def mix(u: float, v: float) -> float:
        return u + (v - u) * t

    head = None
    if a.head_box is not None and b.head_box is not None:
        head = BBox(
            mix(a.head_box.x0, b.head_box.x0), mix(a.head_box.y0, b.head_box.y0),
            mix(a.head_box.x1, b.head_box.x1), mix(a.head_box.y1, b.head_box.y1))
    hip = None
    if a.mid_hip_y is not None and b.mid_hip_y is not None:
        hip = mix(a.mid_hip_y, b.mid_hip_y)
    return Extent(
        top_y=mix(a.top_y, b.top_y), bottom_y=mix(a.bottom_y, b.bottom_y),
        center_x=mix(a.center_x, b.center_x), head_box=head, mid_hip_y=hip)


def _subject_timeline(
    store: TrackStore, name: str, n: int, gap_frames: int, tau_conf: float
) -> tuple[list[Extent | None], list[GazeDirection]]:
    """Real extents where covered, linear fill across short gaps."""
    extents: list[Extent | None] = [None] * n
    gazes: list[GazeDirection] = [GazeDirection.UNKNOWN] * n
    for frame, si in actor_coverage(store, name).items():
        if 0 <= frame < n:
            s = store.skeleton(frame, si)
            e = body_extent(s, tau_conf)
            if e is not None:
                extents[frame] = e
                gazes[frame] = estimate_gaze(s, tau_conf)
    covered = [i for i, e in enumerate(extents) if e is not None]
    for a, b in zip(covered, covered[1:]):
        gap = b - a - 1
        if 0 < gap <= gap_frames:
            for f in range(a + 1, b):
                extents[f] = _interp_extent(extents[a], extents[b], (f - a) / (b - a))
                gazes[f] = gazes[a]
    return extents, gazes


def build_desired_series(
    store: TrackStore,
    spec: ShotSpec,
    meta: SourceMeta,
    gap_seconds: float = 2.0,
    hold_seconds: float = 4.0,
    tau_conf: float | None = None,
) -> DesiredSeries:
    """Desired frame per video frame for one shot specification.

    Subject dropouts shorter than gap_seconds are bridged by interpolating
    extents; when every subject is gone the last composed frame is held for
    hold_seconds, after which entries go invalid until a subject returns.
    """
    if store.seq is None:
        raise ValueError("store has no detection sequence bound")
    tau = store.params.tau_conf if tau_conf is None else tau_conf
    n = len(store.seq)
    labels = store.labels()
    if spec.size is ShotSize.ENSEMBLE:
        subjects = sorted(labels)
    else:
        subjects = sorted(spec.subjects)
        for name in subjects:
            if name not in labels:
                raise KeyError(f"no tracklet labeled {name!r}")

    gap_frames = int(round(gap_seconds * meta.fps))
    hold_frames = int(round(hold_seconds * meta.fps))
    timelines = {name: _subject_timeline(store, name, n, gap_frames, tau)
                 for name in subjects}
    other_coverage = {name: actor_coverage(store, name)
                      for name in labels if name not in subjects}

    frames: list[DesiredFrame] = []
    last_valid: DesiredFrame | None = None
    held = 0
    for f in range(n):
        extents = [timelines[name][0][f] for name in subjects]
        gazes = [timelines[name][1][f] for name in subjects]
        present = [(e, g) for e, g in zip(extents, gazes) if e is not None]
        if present:
            df, _ = _compose_from_extents(
                [e for e, _ in present], [g for _, g in present], spec, meta)
            df.effective_subjects = frozenset(subjects)
            actors = {name: store.skeleton(f, cov[f])
                      for name, cov in other_coverage.items() if f in cov}
            if actors:
                df = resolve_conflicts(df, actors, spec, meta, tau_conf=tau)
            last_valid = df
            held = 0
            frames.append(df)
        elif last_valid is not None and held < hold_frames:
            held += 1
            hf = replace(last_valid)
            hf.conflict_note = "hold"
            frames.append(hf)
        else:
            frames.append(DesiredFrame(valid=False))
    return DesiredSeries(frames=frames, spec=spec)
