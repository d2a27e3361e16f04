"""Parsing and validation of per-frame pose detection documents.

The detector emits one JSON document per source frame, named
``<prefix>_NNNNNNNNNNNN_keypoints.json`` (12-digit zero-padded frame number).
Each document holds a ``people`` array; each person carries a flat
``pose_keypoints_2d`` array of 75 numbers: 25 (x, y, confidence) triples in
Body-25 order. Confidence 0 marks a missing keypoint, which the detector
writes as (0, 0, 0).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

# Body-25 keypoint indices used downstream.
NOSE = 0
NECK = 1
MID_HIP = 8
R_ANKLE = 11
L_ANKLE = 14
R_EYE = 15
L_EYE = 16
R_EAR = 17
L_EAR = 18

NUM_KEYPOINTS = 25
VALUES_PER_PERSON = NUM_KEYPOINTS * 3

# Keypoints forming the head box used for tracking association.
HEAD_KEYPOINTS = (NOSE, NECK, R_EYE, L_EYE, R_EAR, L_EAR)
# Keypoints eligible as the lower body extent (ankles, toes, heels).
FOOT_KEYPOINTS = (R_ANKLE, L_ANKLE, 19, 20, 21, 22, 23, 24)

_KEYPOINT_FILE_RE = re.compile(r"_(\d{12})_keypoints\.json$")


class PoseFormatError(ValueError):
    """A pose document violates the detector's output format."""


@dataclass(frozen=True)
class Skeleton:
    """One performer's 25 keypoints for one frame.

    ``keypoints`` has shape (25, 3) holding (x, y, confidence) rows in
    Body-25 order. At least one keypoint has confidence > 0.
    """

    keypoints: np.ndarray

    def valid(self, tau_conf: float = 0.0) -> np.ndarray:
        """Boolean mask of keypoints with confidence > tau_conf."""
        return self.keypoints[:, 2] > tau_conf

    def __eq__(self, other) -> bool:
        return isinstance(other, Skeleton) and np.array_equal(
            self.keypoints, other.keypoints
        )


@dataclass
class FrameDetections:
    """All skeletons detected in one frame, in document order."""

    frame_index: int
    skeletons: list[Skeleton] = field(default_factory=list)
    dropped: int = 0  # all-zero-confidence persons removed at parse time

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FrameDetections)
            and self.frame_index == other.frame_index
            and self.skeletons == other.skeletons
        )


@dataclass(frozen=True)
class SourceMeta:
    """Geometry and timing of the source recording."""

    width: int
    height: int
    fps: float
    frame_count: int
    part_length_frames: int = 0  # 0 resolves to 10 minutes at fps

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.frame_count < 0:
            raise ValueError("frame_count must be >= 0")
        if self.part_length_frames == 0:
            object.__setattr__(
                self, "part_length_frames", int(round(10 * 60 * self.fps))
            )

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def to_doc(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "fps": self.fps,
            "frame_count": self.frame_count,
            "part_length_frames": self.part_length_frames,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SourceMeta":
        return cls(
            width=doc["width"],
            height=doc["height"],
            fps=doc["fps"],
            frame_count=doc["frame_count"],
            part_length_frames=doc.get("part_length_frames", 0),
        )


def parse_pose_frame(document: str | bytes | dict, frame_index: int) -> FrameDetections:
    """Parse one detector document into a FrameDetections.

    Persons whose 25 keypoints all have confidence 0 carry no geometry and
    are dropped; the count is kept on the result. Skeleton order follows the
    document's ``people`` order.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise PoseFormatError(f"malformed pose document: {exc}") from exc
    if not isinstance(document, dict) or "people" not in document:
        raise PoseFormatError("pose document must be an object with a 'people' array")
    people = document["people"]
    if not isinstance(people, list):
        raise PoseFormatError("'people' must be an array")

    skeletons: list[Skeleton] = []
    dropped = 0
    for i, person in enumerate(people):
        if not isinstance(person, dict) or "pose_keypoints_2d" not in person:
            raise PoseFormatError(f"person {i} lacks 'pose_keypoints_2d'")
        flat = person["pose_keypoints_2d"]
        if len(flat) != VALUES_PER_PERSON:
            raise PoseFormatError(
                f"person {i}: keypoint array length {len(flat)} != {VALUES_PER_PERSON}"
            )
        kps = np.asarray(flat, dtype=float).reshape(NUM_KEYPOINTS, 3)
        conf = kps[:, 2]
        if np.any(conf < 0):
            raise PoseFormatError(f"person {i}: negative confidence")
        if np.any(conf > 1):
            raise PoseFormatError(f"person {i}: confidence above 1")
        if not np.any(conf > 0):
            dropped += 1
            continue
        skeletons.append(Skeleton(kps))
    if dropped:
        log.warning("frame %d: dropped %d empty skeleton(s)", frame_index, dropped)
    return FrameDetections(frame_index=frame_index, skeletons=skeletons, dropped=dropped)


def dump_pose_frame(fd: FrameDetections) -> dict:
    """Serialize back to the detector document format (inverse of parsing)."""
    return {
        "version": 1.3,
        "people": [
            {"pose_keypoints_2d": [float(v) for v in s.keypoints.ravel()]}
            for s in fd.skeletons
        ],
    }


def load_pose_sequence(
    location: str | Path,
    meta: SourceMeta,
    max_gap: int | None = None,
    frame_offset: int = 0,
) -> list[FrameDetections]:
    """Load detections for frames 0..frame_count-1 from a directory.

    ``frame_offset`` maps local frame 0 to that global file number (used when
    a long recording is split into parts). A missing file yields an empty
    FrameDetections with a warning; a gap between existing files larger than
    ``max_gap`` is an error (default: no limit, warn only).
    """
    root = Path(location)
    if not root.is_dir():
        raise FileNotFoundError(f"pose directory not readable: {root}")

    by_frame: dict[int, Path] = {}
    for path in root.iterdir():
        m = _KEYPOINT_FILE_RE.search(path.name)
        if m:
            by_frame.setdefault(int(m.group(1)), path)

    present = sorted(n for n in by_frame if frame_offset <= n < frame_offset + meta.frame_count)
    for a, b in zip(present, present[1:]):
        gap = b - a - 1
        if gap > 0:
            if max_gap is not None and gap > max_gap:
                raise PoseFormatError(
                    f"frame numbering gap of {gap} between {a} and {b} exceeds limit {max_gap}"
                )
            log.warning("frame numbering gap of %d between %d and %d", gap, a, b)

    seq: list[FrameDetections] = []
    missing = 0
    for local in range(meta.frame_count):
        num = frame_offset + local
        path = by_frame.get(num)
        if path is None:
            missing += 1
            seq.append(FrameDetections(frame_index=local))
            continue
        fd = parse_pose_frame(path.read_text(encoding="utf-8"), local)
        seq.append(fd)
    if missing:
        log.warning("%d of %d frame files missing; emitted empty detections", missing, meta.frame_count)
    return seq


@dataclass
class ValidationReport:
    """Outcome of a report-only sanity pass over a detection sequence."""

    out_of_bounds: list[tuple[int, int, int, float, float]]  # frame, skel, kp, x, y
    empty_frames: int
    mean_detections: float

    def to_doc(self) -> dict:
        return {
            "out_of_bounds": [list(v) for v in self.out_of_bounds],
            "empty_frames": self.empty_frames,
            "mean_detections": self.mean_detections,
        }


def validate_sequence(seq: list[FrameDetections], meta: SourceMeta) -> ValidationReport:
    """List out-of-bounds keypoints and basic coverage statistics.

    A keypoint counts as out of bounds when x > width or y > height while its
    confidence is positive; missing keypoints (confidence 0) are exempt.
    Violations are reported, not removed: the framing stage clamps, and
    deleting them here would bias bounding boxes.
    """
    violations: list[tuple[int, int, int, float, float]] = []
    empty = 0
    total = 0
    for fd in seq:
        if not fd.skeletons:
            empty += 1
        total += len(fd.skeletons)
        for si, s in enumerate(fd.skeletons):
            kps = s.keypoints
            bad = (kps[:, 2] > 0) & ((kps[:, 0] > meta.width) | (kps[:, 1] > meta.height))
            for ki in np.flatnonzero(bad):
                violations.append(
                    (fd.frame_index, si, int(ki), float(kps[ki, 0]), float(kps[ki, 1]))
                )
    mean = total / len(seq) if seq else 0.0
    return ValidationReport(out_of_bounds=violations, empty_frames=empty, mean_detections=mean)
