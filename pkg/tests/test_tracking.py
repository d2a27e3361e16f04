from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stagecam import (
    BBox,
    FrameDetections,
    Skeleton,
    TrackParams,
    TrackStore,
    actor_coverage,
    assign_actor,
    build_tracklets,
    iou,
    link_frame,
    upper_bbox,
)
from stagecam.pose import NOSE, NECK, R_EYE, L_EYE, R_EAR, L_EAR
from stagecam.synth import ActorMotion, default_meta, make_scene, make_skeleton

from conftest import label_by_truth, three_actor_motions
from oracles import iou_raster


def head_skeleton(points: list[tuple[float, float]], conf: float = 0.9) -> Skeleton:
    """Skeleton whose first head keypoints sit at the given positions."""
    order = [NOSE, NECK, R_EYE, L_EYE, R_EAR, L_EAR]
    kps = np.zeros((25, 3))
    for idx, (x, y) in zip(order, points):
        kps[idx] = (x, y, conf)
    return Skeleton(kps)


def test_upper_bbox_needs_two_confident_points() -> None:
    assert upper_bbox(head_skeleton([(100.0, 100.0)])) is None


def test_upper_bbox_padding_arithmetic() -> None:
    s = head_skeleton([(100.0, 100.0), (120.0, 110.0)])
    box = upper_bbox(s, tau_conf=0.1, beta=0.25, s_min=10.0)
    assert box.as_tuple() == (95.0, 97.5, 125.0, 112.5)


def test_upper_bbox_contains_all_head_points() -> None:
    pts = [(100.0, 100.0), (101.0, 112.0), (95.0, 95.0),
           (105.0, 95.0), (90.0, 100.0), (110.0, 100.0)]
    box = upper_bbox(head_skeleton(pts))
    for x, y in pts:
        assert box.x0 <= x <= box.x1 and box.y0 <= y <= box.y1


def test_upper_bbox_ignores_low_confidence_and_body_points() -> None:
    kps = np.zeros((25, 3))
    kps[NOSE] = (100.0, 100.0, 0.9)
    kps[NECK] = (100.0, 120.0, 0.9)
    kps[R_EAR] = (500.0, 500.0, 0.05)   # below tau
    kps[8] = (100.0, 300.0, 0.9)        # mid-hip is not a head point
    box = upper_bbox(Skeleton(kps), tau_conf=0.1)
    assert box.y1 <= 120.0 + 0.25 * max(20.0, 10.0)


def test_bbox_rejects_inverted_corners() -> None:
    with pytest.raises(ValueError):
        BBox(10.0, 0.0, 0.0, 10.0)


def test_iou_identical_boxes() -> None:
    a = BBox(0.0, 0.0, 10.0, 10.0)
    assert iou(a, a) == 1.0


def test_iou_disjoint_boxes() -> None:
    assert iou(BBox(0, 0, 1, 1), BBox(2, 2, 3, 3)) == 0.0


def test_iou_analytic_third() -> None:
    assert iou(BBox(0, 0, 2, 1), BBox(1, 0, 3, 1)) == pytest.approx(1 / 3)


def test_iou_zero_area_union() -> None:
    a = BBox(5.0, 5.0, 5.0, 5.0)
    assert iou(a, a) == 0.0


grid_boxes = st.builds(
    lambda x0, y0, w, h: BBox(x0 / 10, y0 / 10, (x0 + w) / 10, (y0 + h) / 10),
    st.integers(0, 600), st.integers(0, 600),
    st.integers(1, 200), st.integers(1, 200),
)


@given(grid_boxes, grid_boxes)
@settings(max_examples=150)
def test_iou_symmetry_and_range(a: BBox, b: BBox) -> None:
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0
    assert iou(a, a) == 1.0


@given(grid_boxes, grid_boxes)
@settings(max_examples=60, deadline=None)
def test_iou_matches_rasterization_oracle(a: BBox, b: BBox) -> None:
    assert iou(a, b) == pytest.approx(
        iou_raster(a.as_tuple(), b.as_tuple()), abs=1e-3)


def test_link_frame_dominant_pairs_both_match() -> None:
    prev = [BBox(0, 0, 10, 10), BBox(100, 0, 110, 10)]
    cur = [BBox(0, 1, 10, 11), BBox(100, 2, 110, 12)]
    assert link_frame(prev, cur, tau_iou=0.3) == [(0, 0), (1, 1)]


def test_link_frame_below_threshold_matches_nothing() -> None:
    prev = [BBox(0, 0, 10, 10)]
    cur = [BBox(9, 9, 19, 19)]   # IoU ~ 0.005
    assert link_frame(prev, cur, tau_iou=0.3) == []


def test_link_frame_greedy_leaves_loser_unmatched() -> None:
    prev = [BBox(0, 0, 10, 10), BBox(0, 5, 10, 15)]
    cur = [BBox(0, 2, 10, 12)]
    assert link_frame(prev, cur, tau_iou=0.3) == [(0, 0)]


def test_link_frame_tie_breaks_by_smaller_index() -> None:
    box = BBox(0, 0, 10, 10)
    assert link_frame([box, box], [box, box], tau_iou=0.3) == [(0, 0), (1, 1)]


def stationary_sequence(frames: int, skip: set[int] | None = None,
                        x: float = 300.0) -> list[FrameDetections]:
    skip = skip or set()
    seq = []
    for f in range(frames):
        sk = [] if f in skip else [make_skeleton(x, 200.0, 40.0)]
        seq.append(FrameDetections(frame_index=f, skeletons=sk))
    return seq


def test_build_single_stationary_tracklet() -> None:
    store = build_tracklets(stationary_sequence(100), TrackParams())
    assert len(store.tracklets) == 1
    (t,) = store.tracklets.values()
    assert t.start_frame == 0 and t.length == 100


def test_build_gap_splits_tracklet() -> None:
    store = build_tracklets(stationary_sequence(100, skip={50}), TrackParams())
    lengths = sorted(t.length for t in store.tracklets.values())
    assert lengths == [49, 50]
    starts = sorted(t.start_frame for t in store.tracklets.values())
    assert starts == [0, 51]


def test_build_two_separated_actors_stay_pure() -> None:
    meta = default_meta(frame_count=100)
    actors = [ActorMotion("a", 800.0, 500.0, amp_x=0.0, amp_y=0.0),
              ActorMotion("b", 1300.0, 500.0, amp_x=0.0, amp_y=0.0)]
    seq, truth = make_scene(actors, 100, meta, seed=3, jitter=0.0)
    store = build_tracklets(seq, TrackParams())
    assert len(store.tracklets) == 2
    for t in store.tracklets.values():
        names = {truth[f][si] for f, si in t.entries()}
        assert len(names) == 1


def test_build_is_deterministic() -> None:
    meta = default_meta(frame_count=60)
    seq, _ = make_scene(three_actor_motions(), 60, meta, seed=11)
    a = build_tracklets(seq, TrackParams())
    b = build_tracklets(seq, TrackParams())
    assert a.to_doc() == b.to_doc()


def test_partition_and_contiguity_over_random_scenes() -> None:
    meta = default_meta(frame_count=80)
    for seed in range(5):
        actors = three_actor_motions()
        actors[1].present = [(0, 30), (45, 80)]
        seq, _ = make_scene(actors, 80, meta, seed=seed, jitter=1.0)
        store = build_tracklets(seq, TrackParams())
        seen: set[tuple[int, int]] = set()
        for t in store.tracklets.values():
            for k, (f, si) in enumerate(t.entries()):
                assert f == t.start_frame + k
                assert (f, si) not in seen
                seen.add((f, si))


def test_assign_actor_sets_and_clears_label() -> None:
    store = build_tracklets(stationary_sequence(10), TrackParams())
    (tid,) = store.tracklets
    assign_actor(store, tid, "Victor")
    assert store.tracklets[tid].label == "Victor"
    assign_actor(store, tid, None)
    assert store.tracklets[tid].label is None


def test_assign_actor_unknown_tracklet_errors() -> None:
    store = build_tracklets(stationary_sequence(10), TrackParams())
    with pytest.raises(KeyError):
        assign_actor(store, "t999", "Victor")


def overlapping_pair_store() -> tuple[TrackStore, list[dict[int, str]]]:
    meta = default_meta(frame_count=15)
    actors = [
        ActorMotion("a1", 800.0, 500.0, amp_x=0.0, present=[(0, 10)]),
        ActorMotion("a2", 1600.0, 500.0, amp_x=0.0, present=[(5, 15)]),
    ]
    seq, truth = make_scene(actors, 15, meta, seed=2, jitter=0.0)
    return build_tracklets(seq, TrackParams()), truth


def test_assign_same_name_overlap_warns_but_accepts() -> None:
    store, truth = overlapping_pair_store()
    assert len(store.tracklets) == 2
    before = len(store.warnings)
    for tid in sorted(store.tracklets):
        assign_actor(store, tid, "Victor")
    assert store.tracklets[sorted(store.tracklets)[1]].label == "Victor"
    assert len(store.warnings) == before + 1


def test_actor_coverage_spans_exactly_the_labeled_frames() -> None:
    store = build_tracklets(stationary_sequence(100), TrackParams())
    (tid,) = store.tracklets
    assign_actor(store, tid, "Victor")
    cov = actor_coverage(store, "Victor")
    assert sorted(cov) == list(range(100))


def test_actor_coverage_unknown_name_errors() -> None:
    store = build_tracklets(stationary_sequence(10), TrackParams())
    with pytest.raises(KeyError):
        actor_coverage(store, "Nobody")


def test_actor_coverage_overlap_earlier_start_wins() -> None:
    store, truth = overlapping_pair_store()
    label_by_truth(store, truth)   # labels are the generator names a1, a2
    for tid in store.tracklets:
        assign_actor(store, tid, "Victor")
    cov = actor_coverage(store, "Victor")
    assert sorted(cov) == list(range(15))
    for f in range(5, 10):   # overlap region: tracklet started at 0 wins
        si_early = next(si for si, n in truth[f].items() if n == "a1")
        assert cov[f] == si_early


def test_track_params_round_trip() -> None:
    p = TrackParams(tau_conf=0.2, beta=0.3, s_min=12.0, tau_iou=0.4)
    assert TrackParams.from_doc(p.to_doc()) == p


def test_store_round_trip_preserves_tracklets_and_labels(labeled_store, scene) -> None:
    seq, _ = scene
    doc = labeled_store.to_doc()
    again = TrackStore.from_doc(doc, seq)
    assert again.to_doc() == doc
    assert sorted(again.labels()) == sorted(labeled_store.labels())
    for tid, t in labeled_store.tracklets.items():
        assert again.tracklets[tid].entries() == t.entries()
