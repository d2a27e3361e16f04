"""Synthetic detection sequences with known ground truth.

Tests and demos need scenes where the right answer is known by
construction: who is where on every frame, when they are absent, and which
way they face. Skeletons are generated with the keypoint subset a real
detector reliably produces (head cluster, neck, mid-hip, ankles, feet).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .pose import (
    L_ANKLE,
    L_EAR,
    L_EYE,
    MID_HIP,
    NECK,
    NOSE,
    NUM_KEYPOINTS,
    R_ANKLE,
    R_EAR,
    R_EYE,
    FrameDetections,
    Skeleton,
    SourceMeta,
    dump_pose_frame,
)

# toe keypoints used to ground the synthetic body
L_BIG_TOE, L_HEEL, R_BIG_TOE, R_HEEL = 19, 21, 22, 24


@dataclass
class ActorMotion:
    """One synthetic performer on a sinusoidal stage path."""

    name: str
    x0: float
    y0: float                      # nose height anchor
    amp_x: float = 200.0
    amp_y: float = 15.0
    period: float = 8.0            # seconds per oscillation
    phase: float = 0.0
    head: float = 40.0             # head size in pixels; body is ~7.5 heads
    gaze: str = "frontal"          # frontal | left | right
    present: list[tuple[int, int]] = field(default_factory=list)  # [) ranges

    def on_stage(self, frame: int) -> bool:
        if not self.present:
            return True
        return any(a <= frame < b for a, b in self.present)

    def position(self, frame: int, fps: float) -> tuple[float, float]:
        t = 2 * math.pi * frame / (fps * self.period) + self.phase
        return (self.x0 + self.amp_x * math.sin(t),
                self.y0 + self.amp_y * math.cos(t))


def make_skeleton(
    x: float, y: float, head: float, gaze: str = "frontal",
    conf: float = 0.9, rng: np.random.Generator | None = None,
    jitter: float = 0.0,
) -> Skeleton:
    """Plausible partial skeleton with the nose at (x, y)."""
    kps = np.zeros((NUM_KEYPOINTS, 3))

    def put(i: int, px: float, py: float) -> None:
        kps[i] = (px, py, conf)

    put(NOSE, x, y)
    put(R_EYE, x - 0.2 * head, y - 0.15 * head)
    put(L_EYE, x + 0.2 * head, y - 0.15 * head)
    if gaze in ("frontal", "right"):
        put(R_EAR, x - 0.45 * head, y)
    if gaze in ("frontal", "left"):
        put(L_EAR, x + 0.45 * head, y)
    put(NECK, x, y + 0.9 * head)
    put(MID_HIP, x, y + 3.6 * head)
    put(R_ANKLE, x - 0.3 * head, y + 6.8 * head)
    put(L_ANKLE, x + 0.3 * head, y + 6.8 * head)
    for i in (L_BIG_TOE, L_HEEL):
        put(i, x + 0.35 * head, y + 7.1 * head)
    for i in (R_BIG_TOE, R_HEEL):
        put(i, x - 0.35 * head, y + 7.1 * head)
    if rng is not None and jitter > 0:
        mask = kps[:, 2] > 0
        kps[mask, :2] += rng.normal(0.0, jitter, size=(int(mask.sum()), 2))
    return Skeleton(keypoints=kps)


def make_scene(
    actors: list[ActorMotion],
    frames: int,
    meta: SourceMeta,
    seed: int = 0,
    jitter: float = 0.5,
    shuffle: bool = True,
) -> tuple[list[FrameDetections], list[dict[int, str]]]:
    """Detection sequence plus ground truth skeleton_index -> actor name."""
    rng = np.random.default_rng(seed)
    seq: list[FrameDetections] = []
    truth: list[dict[int, str]] = []
    for f in range(frames):
        on_stage = [a for a in actors if a.on_stage(f)]
        if shuffle:
            order = list(rng.permutation(len(on_stage)))
        else:
            order = list(range(len(on_stage)))
        skeletons: list[Skeleton] = []
        names: dict[int, str] = {}
        for si, ai in enumerate(order):
            actor = on_stage[ai]
            x, y = actor.position(f, meta.fps)
            skeletons.append(make_skeleton(
                x, y, actor.head, actor.gaze, rng=rng, jitter=jitter))
            names[si] = actor.name
        seq.append(FrameDetections(frame_index=f, skeletons=skeletons))
        truth.append(names)
    return seq, truth


def default_meta(width: int = 3840, height: int = 2160, fps: float = 25.0,
                 frame_count: int = 600) -> SourceMeta:
    return SourceMeta(width=width, height=height, fps=fps,
                      frame_count=frame_count)


def write_scene_files(seq: list[FrameDetections], directory: str,
                      stem: str = "take", frame_offset: int = 0) -> list[str]:
    """Write one detector-style JSON document per frame, loader-compatible."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for fd in seq:
        num = frame_offset + fd.frame_index
        path = os.path.join(directory, f"{stem}_{num:012d}_keypoints.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dump_pose_frame(fd), fh)
        paths.append(path)
    return paths
