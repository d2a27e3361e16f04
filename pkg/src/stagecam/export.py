"""Exports: crop EDLs, transcoder scripts, cut lists, annotation subtitles.

Everything here is a pure emitter over solved artifacts. All documents are
UTF-8 with LF line endings; the byte layout is part of the contract and is
covered by golden-file tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .camplan import CameraPath, CamParams, solve_sequence
from .framing import DesiredSeries, ShotSpec, build_desired_series
from .pose import SourceMeta
from .tracking import BBox, TrackStore, actor_coverage, intersect_area, upper_bbox


RUSH_SCHEMA = "stagecam/rush/1"


@dataclass
class Rush:
    """One generated virtual-camera clip: a shot spec plus its solved path.

    visible_actors[t] lists the labeled performers whose upper box meets the
    crop rectangle at frame t, so downstream tools know who is on screen.
    """

    id: str
    spec: ShotSpec
    path: CameraPath
    visible_actors: list[list[str]] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "schema": RUSH_SCHEMA,
            "id": self.id,
            "spec": self.spec.to_doc(),
            "path": self.path.to_doc(),
            "visible_actors": self.visible_actors,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Rush":
        if doc.get("schema") != RUSH_SCHEMA:
            raise ValueError(f"unsupported rush schema: {doc.get('schema')!r}")
        return cls(
            id=doc["id"],
            spec=ShotSpec.from_doc(doc["spec"]),
            path=CameraPath.from_doc(doc["path"]),
            visible_actors=[list(v) for v in doc.get("visible_actors", [])],
        )


def compute_visible_actors(
    path: CameraPath, store: TrackStore, tau_conf: float | None = None
) -> list[list[str]]:
    """Names whose padded upper box intersects the crop, per frame."""
    tau = store.params.tau_conf if tau_conf is None else tau_conf
    coverages = {name: actor_coverage(store, name) for name in store.labels()}
    out: list[list[str]] = []
    for f in range(path.frame_count):
        cam = path.frame(f)
        w = path.rho * cam.h
        rect = BBox(cam.cx - w, cam.cy - cam.h, cam.cx + w, cam.cy + cam.h)
        names = []
        for name in sorted(coverages):
            cov = coverages[name]
            if f not in cov:
                continue
            box = upper_bbox(store.skeleton(f, cov[f]), tau,
                             store.params.beta, store.params.s_min)
            if box is not None and intersect_area(box, rect) > 0:
                names.append(name)
        out.append(names)
    return out


def build_rush(
    rush_id: str,
    spec: ShotSpec,
    store: TrackStore,
    meta: SourceMeta,
    params: CamParams | None = None,
) -> tuple[Rush, DesiredSeries]:
    """Frame + solve: the full pipeline from labeled tracks to one rush."""
    series = build_desired_series(store, spec, meta)
    path = solve_sequence(series, params or CamParams(), meta)
    rush = Rush(id=rush_id, spec=spec, path=path,
                visible_actors=compute_visible_actors(path, store))
    return rush, series


def scale_path(path: CameraPath, source: SourceMeta,
               to_width: int, to_height: int) -> CameraPath:
    """Rescale a path to a proxy resolution of the same aspect ratio."""
    if to_width <= 0 or to_height <= 0:
        raise ValueError("target size must be positive")
    if abs(to_width / to_height - source.aspect) > 1e-3:
        raise ValueError(
            f"aspect mismatch: {to_width}x{to_height} vs source {source.aspect:.6f}")
    s = to_height / source.height
    return CameraPath(
        cx=path.cx * s, cy=path.cy * s, h=path.h * s, rho=path.rho,
        objectives=[o * s for o in path.objectives],
        violations=list(path.violations),
    )


def round_even(v: float) -> int:
    """Nearest even integer (codec-friendly dimension rounding)."""
    return 2 * int(round(v / 2))


def _edl_rows(path: CameraPath, width: int, height: int) -> list[tuple[int, ...]]:
    rows = []
    max_w = width - width % 2
    max_h = height - height % 2
    for f in range(path.frame_count):
        cam = path.frame(f)
        w = min(2 * round_even(path.rho * cam.h), max_w)
        h_px = min(2 * round_even(cam.h), max_h)
        x = min(max(round(cam.cx - w / 2), 0), width - w)
        y = min(max(round(cam.cy - h_px / 2), 0), height - h_px)
        rows.append((f, x, y, w, h_px))
    return rows


def emit_rush_edl(rush: Rush, source: SourceMeta,
                  to_width: int, to_height: int) -> str:
    """Per-frame crop rectangles at the target resolution, as CSV text."""
    path = scale_path(rush.path, source, to_width, to_height)
    lines = ["frame,x,y,w,h"]
    for row in _edl_rows(path, to_width, to_height):
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_crop_script(
    rush: Rush,
    source_path: str,
    to_width: int,
    to_height: int,
    template: str,
) -> str:
    """Shell script that runs the user's transcoder over this rush's EDL.

    The template supplies the tool invocation with {input}, {output} and
    {filter} placeholders; nothing about the tool itself is assumed here.
    """
    if not rush.id:
        raise ValueError("rush id must be non-empty")
    for ph in ("{input}", "{output}", "{filter}"):
        if ph not in template:
            raise ValueError(f"transcoder template is missing {ph}")
    stem = f"{rush.id}_{to_width}x{to_height}"
    command = template.format(
        input=source_path,
        output=f"{stem}.mp4",
        filter=f"crop_edl={stem}.edl",
    )
    return (
        "#!/bin/sh\n"
        "# generated transcode script; expects the EDL next to this file\n"
        "set -e\n"
        f"{command}\n"
    )


TIMELINE_SCHEMA = "stagecam/timeline/1"


@dataclass(frozen=True)
class EditTimeline:
    """Program cut list: which rush is on screen from each start frame.

    Segments tile [0, frame_count): the first cut is at frame 0 and each
    segment runs until the next cut or the end.
    """

    frame_count: int
    cuts: tuple[tuple[int, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple((int(f), str(r)) for f, r in self.cuts))
        if self.frame_count <= 0:
            raise ValueError("frame_count must be positive")
        if not self.cuts or self.cuts[0][0] != 0:
            raise ValueError("first cut must start at frame 0")
        starts = [f for f, _ in self.cuts]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("cut start frames must be strictly increasing")
        if starts[-1] >= self.frame_count:
            raise ValueError("cut start beyond frame_count")

    def segments(self) -> list[tuple[int, int, str]]:
        """(start, end, rush_id) triples tiling [0, frame_count)."""
        out = []
        for i, (start, rid) in enumerate(self.cuts):
            end = self.cuts[i + 1][0] if i + 1 < len(self.cuts) else self.frame_count
            out.append((start, end, rid))
        return out

    def rush_at(self, frame: int) -> str:
        if not 0 <= frame < self.frame_count:
            raise IndexError(f"frame {frame} out of range")
        rid = self.cuts[0][1]
        for start, r in self.cuts:
            if start > frame:
                break
            rid = r
        return rid

    def to_doc(self) -> dict:
        return {
            "schema": TIMELINE_SCHEMA,
            "frame_count": self.frame_count,
            "cuts": [[f, r] for f, r in self.cuts],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "EditTimeline":
        if doc.get("schema") != TIMELINE_SCHEMA:
            raise ValueError(f"unsupported timeline schema: {doc.get('schema')!r}")
        return cls(frame_count=doc["frame_count"],
                   cuts=tuple((f, r) for f, r in doc["cuts"]))


def _merged(cuts: list[tuple[int, str]]) -> tuple[tuple[int, str], ...]:
    out: list[tuple[int, str]] = []
    for f, r in cuts:
        if out and out[-1][1] == r:
            continue
        out.append((f, r))
    return tuple(out)


def set_cut(tl: EditTimeline, frame: int, rush_id: str,
            rushes: set[str] | None = None) -> EditTimeline:
    """Show rush_id from `frame` until the next existing cut."""
    if not 0 <= frame < tl.frame_count:
        raise IndexError(f"frame {frame} out of range")
    if rushes is not None and rush_id not in rushes:
        raise KeyError(f"unknown rush: {rush_id}")
    cuts = dict(tl.cuts)
    cuts[frame] = rush_id
    ordered = sorted(cuts.items())
    return EditTimeline(frame_count=tl.frame_count, cuts=_merged(ordered))


def move_cut(tl: EditTimeline, old_frame: int, new_frame: int) -> EditTimeline:
    """Slide one cut boundary, strictly between its neighbors."""
    starts = [f for f, _ in tl.cuts]
    if old_frame not in starts:
        raise KeyError(f"no cut at frame {old_frame}")
    if new_frame == old_frame:
        return tl
    i = starts.index(old_frame)
    if i == 0:
        raise ValueError("the cut at frame 0 cannot move")
    prev_start = starts[i - 1]
    next_start = starts[i + 1] if i + 1 < len(starts) else tl.frame_count
    if not prev_start < new_frame < next_start:
        raise ValueError(
            f"new frame {new_frame} not strictly between {prev_start} and {next_start}")
    cuts = list(tl.cuts)
    cuts[i] = (new_frame, cuts[i][1])
    return EditTimeline(frame_count=tl.frame_count, cuts=tuple(cuts))


def emit_cutlist(tl: EditTimeline) -> str:
    lines = ["start_frame,rush_id"]
    for f, r in tl.cuts:
        lines.append(f"{f},{r}")
    return "\n".join(lines) + "\n"


def parse_cutlist(text: str, frame_count: int) -> EditTimeline:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != "start_frame,rush_id":
        raise ValueError("not a cut list document")
    cuts = []
    for ln in lines[1:]:
        f, r = ln.split(",", 1)
        cuts.append((int(f), r))
    return EditTimeline(frame_count=frame_count, cuts=tuple(cuts))


class AnnotationCategory(enum.Enum):
    SPEECH = "speech"
    STAGE_DIRECTION = "stage_direction"
    SCENOGRAPHY = "scenography"


@dataclass(frozen=True)
class Annotation:
    """A timed note, rendered downstream as a video-description subtitle."""

    start_time: float
    end_time: float
    text: str
    category: AnnotationCategory
    target: str | None = None

    def __post_init__(self):
        if not 0 <= self.start_time < self.end_time:
            raise ValueError("need 0 <= start_time < end_time")

    def to_doc(self) -> dict:
        doc = {
            "start_time": self.start_time,
            "end_time": self.end_time,
            "text": self.text,
            "category": self.category.value,
        }
        if self.target is not None:
            doc["target"] = self.target
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "Annotation":
        return cls(
            start_time=doc["start_time"],
            end_time=doc["end_time"],
            text=doc["text"],
            category=AnnotationCategory(doc["category"]),
            target=doc.get("target"),
        )


def vtt_timestamp(seconds: float) -> str:
    ms = int(round(seconds * 1000))
    s, ms = divmod(ms, 1000)
    m, s = divmod(s, 60)
    h, m = divmod(m, 60)
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


def emit_vtt(annotations: list[Annotation]) -> str:
    """WebVTT document with one cue per annotation, sorted by start time."""
    out = "WEBVTT\n"
    for a in sorted(annotations, key=lambda a: a.start_time):
        out += (
            f"\n{vtt_timestamp(a.start_time)} --> {vtt_timestamp(a.end_time)}\n"
            f"[{a.category.value}] {a.text}\n"
        )
    return out
