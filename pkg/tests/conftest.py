from __future__ import annotations

import collections
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stagecam import assign_actor, build_tracklets, TrackParams, TrackStore
from stagecam.synth import ActorMotion, default_meta, make_scene


def three_actor_motions() -> list[ActorMotion]:
    # amp 180 keeps the lanes 840+ px apart; heads are ~50 px boxes
    return [
        ActorMotion("alice", 700.0, 600.0, amp_x=180.0, phase=0.0, gaze="left"),
        ActorMotion("bob", 1900.0, 620.0, amp_x=180.0, phase=2.1, gaze="frontal"),
        ActorMotion("carol", 3100.0, 590.0, amp_x=180.0, phase=4.2, gaze="right"),
    ]


def label_by_truth(store: TrackStore, truth: list[dict[int, str]]) -> TrackStore:
    """Attach the generator's actor names to tracklets by majority vote."""
    for tid, t in sorted(store.tracklets.items()):
        votes = collections.Counter(truth[f][si] for f, si in t.entries())
        assign_actor(store, tid, votes.most_common(1)[0][0])
    return store


@pytest.fixture
def meta():
    return default_meta(frame_count=200)


@pytest.fixture
def scene(meta):
    return make_scene(three_actor_motions(), meta.frame_count, meta, seed=7)


@pytest.fixture
def labeled_store(meta, scene):
    seq, truth = scene
    store = build_tracklets(seq, TrackParams())
    return label_by_truth(store, truth)
