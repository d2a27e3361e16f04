from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stagecam import (
    Annotation,
    AnnotationCategory,
    CameraPath,
    EditTimeline,
    Rush,
    ShotSize,
    ShotSpec,
    build_rush,
    emit_crop_script,
    emit_cutlist,
    emit_rush_edl,
    emit_vtt,
    move_cut,
    parse_cutlist,
    round_even,
    scale_path,
    set_cut,
)
from stagecam.synth import default_meta


def flat_path(n: int = 1, cx: float = 200.0, cy: float = 150.0,
              h: float = 100.0) -> CameraPath:
    return CameraPath(cx=np.full(n, cx), cy=np.full(n, cy), h=np.full(n, h),
                      rho=16 / 9)


def flat_rush(n: int = 1, **kw) -> Rush:
    return Rush(id="r1", spec=ShotSpec(subjects={"a"}, size=ShotSize.FULL),
                path=flat_path(n, **kw))


def test_scale_path_identity() -> None:
    meta = default_meta()
    path = flat_path(cx=600.0, h=300.0)
    out = scale_path(path, meta, 3840, 2160)
    assert out.cx[0] == 600.0 and out.h[0] == 300.0


def test_scale_path_halves_to_1080p() -> None:
    meta = default_meta()
    out = scale_path(flat_path(cx=600.0, h=300.0), meta, 1920, 1080)
    assert out.cx[0] == 300.0
    assert out.cy[0] == 75.0
    assert out.h[0] == 150.0


def test_scale_path_factor_is_height_ratio() -> None:
    meta = default_meta()
    out = scale_path(flat_path(cx=600.0, h=300.0), meta, 1280, 720)
    assert out.cx[0] == pytest.approx(200.0)
    assert out.h[0] == pytest.approx(100.0)


def test_scale_path_rejects_aspect_mismatch() -> None:
    with pytest.raises(ValueError, match="aspect"):
        scale_path(flat_path(), default_meta(), 1000, 1000)


def test_scale_path_rejects_nonpositive_target() -> None:
    with pytest.raises(ValueError):
        scale_path(flat_path(), default_meta(), 0, 0)


def test_edl_rounds_to_even_crop_dimensions() -> None:
    text = emit_rush_edl(flat_rush(), default_meta(), 3840, 2160)
    assert text == "frame,x,y,w,h\n0,22,50,356,200\n"


def test_edl_clamps_crop_to_the_corner() -> None:
    text = emit_rush_edl(flat_rush(cx=100.0, cy=100.0), default_meta(),
                         3840, 2160)
    assert text == "frame,x,y,w,h\n0,0,0,356,200\n"


def test_edl_constant_path_repeats_one_rectangle() -> None:
    text = emit_rush_edl(flat_rush(5), default_meta(), 3840, 2160)
    lines = text.strip().split("\n")
    assert lines[0] == "frame,x,y,w,h"
    assert [ln.split(",", 1)[1] for ln in lines[1:]] == ["22,50,356,200"] * 5


def test_edl_downscales_with_the_path() -> None:
    big = emit_rush_edl(flat_rush(cx=1900.0, cy=1000.0, h=400.0),
                        default_meta(), 3840, 2160)
    small = emit_rush_edl(flat_rush(cx=1900.0, cy=1000.0, h=400.0),
                          default_meta(), 1920, 1080)
    bf, bx, by, bw, bh = map(int, big.strip().split("\n")[1].split(","))
    sf, sx, sy, sw, sh = map(int, small.strip().split("\n")[1].split(","))
    assert abs(sx - bx / 2) <= 1 and abs(sy - by / 2) <= 1
    assert abs(sw - bw / 2) <= 2 and abs(sh - bh / 2) <= 2


@given(
    cx=st.floats(0.0, 3840.0), cy=st.floats(0.0, 2160.0),
    h=st.floats(54.0, 1080.0),
    size=st.sampled_from([(3840, 2160), (1920, 1080), (1280, 720)]),
)
@settings(max_examples=150, deadline=None)
def test_edl_rows_always_fit_the_target(cx, cy, h, size) -> None:
    w_t, h_t = size
    text = emit_rush_edl(flat_rush(cx=cx, cy=cy, h=h), default_meta(),
                         w_t, h_t)
    _, x, y, w, hp = map(int, text.strip().split("\n")[1].split(","))
    assert w % 2 == 0 and hp % 2 == 0
    assert 0 <= x and x + w <= w_t
    assert 0 <= y and y + hp <= h_t


def test_round_even_basic_values() -> None:
    assert round_even(177.7777) == 178
    assert round_even(100.0) == 100
    assert round_even(0.2) == 0


def test_crop_script_substitutes_all_three_placeholders() -> None:
    text = emit_crop_script(flat_rush(), "/takes/main.mov", 1920, 1080,
                            "transcode {input} -o {output} -vf {filter}")
    assert text.startswith("#!/bin/sh\n")
    assert "transcode /takes/main.mov" in text
    assert "-o r1_1920x1080.mp4" in text
    assert "crop_edl=r1_1920x1080.edl" in text


def test_crop_script_rejects_template_without_filter() -> None:
    with pytest.raises(ValueError, match="filter"):
        emit_crop_script(flat_rush(), "in.mov", 1920, 1080,
                         "transcode {input} -o {output}")


def test_crop_script_rejects_empty_rush_id() -> None:
    rush = flat_rush()
    rush.id = ""
    with pytest.raises(ValueError, match="rush id"):
        emit_crop_script(rush, "in.mov", 1920, 1080,
                         "t {input} {output} {filter}")


def one_cut(frame_count: int = 500) -> EditTimeline:
    return EditTimeline(frame_count=frame_count, cuts=((0, "A"),))


def test_set_cut_splits_the_timeline() -> None:
    tl = set_cut(one_cut(), 100, "B")
    assert tl.segments() == [(0, 100, "A"), (100, 500, "B")]


def test_set_cut_back_to_same_rush_merges() -> None:
    tl = set_cut(one_cut(), 100, "B")
    tl = set_cut(tl, 100, "A")
    assert tl.cuts == ((0, "A"),)


def test_set_cut_past_the_end_errors() -> None:
    with pytest.raises(IndexError):
        set_cut(one_cut(), 500, "B")


def test_set_cut_validates_known_rushes() -> None:
    with pytest.raises(KeyError):
        set_cut(one_cut(), 100, "Z", rushes={"A", "B"})


def three_cuts() -> EditTimeline:
    return EditTimeline(frame_count=300,
                        cuts=((0, "A"), (100, "B"), (200, "C")))


def test_move_cut_slides_between_neighbors() -> None:
    tl = move_cut(three_cuts(), 100, 150)
    assert [f for f, _ in tl.cuts] == [0, 150, 200]
    assert [r for _, r in tl.cuts] == ["A", "B", "C"]


def test_move_cut_onto_neighbor_errors() -> None:
    with pytest.raises(ValueError):
        move_cut(three_cuts(), 100, 200)


def test_move_cut_to_same_frame_is_identity() -> None:
    tl = three_cuts()
    assert move_cut(tl, 100, 100) == tl


def test_move_cut_first_cut_is_fixed() -> None:
    with pytest.raises(ValueError):
        move_cut(three_cuts(), 0, 50)


def test_move_cut_unknown_boundary_errors() -> None:
    with pytest.raises(KeyError):
        move_cut(three_cuts(), 150, 160)


def test_timeline_validates_tiling() -> None:
    with pytest.raises(ValueError):
        EditTimeline(frame_count=100, cuts=((5, "A"),))
    with pytest.raises(ValueError):
        EditTimeline(frame_count=100, cuts=((0, "A"), (50, "B"), (50, "C")))
    with pytest.raises(ValueError):
        EditTimeline(frame_count=100, cuts=((0, "A"), (100, "B")))


def test_rush_at_selects_by_segment() -> None:
    tl = three_cuts()
    assert tl.rush_at(0) == "A"
    assert tl.rush_at(99) == "A"
    assert tl.rush_at(100) == "B"
    assert tl.rush_at(299) == "C"
    with pytest.raises(IndexError):
        tl.rush_at(300)


def test_cutlist_single_segment() -> None:
    assert emit_cutlist(one_cut()) == "start_frame,rush_id\n0,A\n"


def test_cutlist_three_segments() -> None:
    assert emit_cutlist(three_cuts()) == \
        "start_frame,rush_id\n0,A\n100,B\n200,C\n"


def test_cutlist_round_trip() -> None:
    tl = three_cuts()
    assert parse_cutlist(emit_cutlist(tl), 300) == tl


def test_cutlist_rejects_foreign_header() -> None:
    with pytest.raises(ValueError):
        parse_cutlist("frame,rush\n0,A\n", 300)


timeline_ops = st.lists(
    st.tuples(st.sampled_from(["set", "move"]), st.integers(0, 299),
              st.integers(0, 299), st.sampled_from(["A", "B", "C", "D"])),
    max_size=40,
)


@given(ops=timeline_ops)
@settings(max_examples=100, deadline=None)
def test_timeline_ops_never_break_tiling(ops) -> None:
    tl = one_cut(300)
    for kind, a, b, rush in ops:
        try:
            if kind == "set":
                tl = set_cut(tl, a, rush)
            else:
                old = tl.cuts[a % len(tl.cuts)][0]
                tl = move_cut(tl, old, b)
        except (ValueError, KeyError, IndexError):
            pass
        starts = [f for f, _ in tl.cuts]
        assert starts[0] == 0
        assert all(x < y for x, y in zip(starts, starts[1:]))
        assert starts[-1] < tl.frame_count
        assert sum(e - s for s, e, _ in tl.segments()) == tl.frame_count
        assert parse_cutlist(emit_cutlist(tl), tl.frame_count) == tl


def test_vtt_single_speech_cue_bytes() -> None:
    text = emit_vtt([Annotation(1.0, 4.0, "Hello", AnnotationCategory.SPEECH)])
    assert text == "WEBVTT\n\n00:00:01.000 --> 00:00:04.000\n[speech] Hello\n"


def test_vtt_empty_is_header_only() -> None:
    assert emit_vtt([]) == "WEBVTT\n"


def test_vtt_sorts_overlapping_cues_by_start() -> None:
    later = Annotation(2.0, 3.0, "Two", AnnotationCategory.STAGE_DIRECTION)
    earlier = Annotation(1.0, 4.0, "One", AnnotationCategory.SPEECH)
    text = emit_vtt([later, earlier])
    assert text.index("One") < text.index("Two")
    assert text.count("WEBVTT") == 1
    stamps = [ln.split(" --> ")[0] for ln in text.split("\n") if " --> " in ln]
    assert stamps == sorted(stamps)


def test_vtt_timestamp_covers_hours() -> None:
    text = emit_vtt([Annotation(3661.25, 3662.0, "Late",
                                AnnotationCategory.SCENOGRAPHY)])
    assert "01:01:01.250 --> 01:01:02.000" in text


def test_annotation_validates_times() -> None:
    with pytest.raises(ValueError):
        Annotation(4.0, 1.0, "x", AnnotationCategory.SPEECH)
    with pytest.raises(ValueError):
        Annotation(-1.0, 1.0, "x", AnnotationCategory.SPEECH)


def test_annotation_document_round_trip() -> None:
    a = Annotation(1.5, 2.5, "Door opens", AnnotationCategory.STAGE_DIRECTION,
                   target="r1")
    assert Annotation.from_doc(a.to_doc()) == a


def test_build_rush_keeps_subject_visible(labeled_store, meta) -> None:
    spec = ShotSpec(subjects={"alice"}, size=ShotSize.MEDIUM)
    rush, series = build_rush("alice_med", spec, labeled_store, meta)
    assert rush.path.frame_count == meta.frame_count
    assert series.frame_count == meta.frame_count
    assert all("alice" in names for names in rush.visible_actors)


def test_rush_document_round_trip() -> None:
    rush = flat_rush(3)
    rush.visible_actors = [["a"], [], ["a", "b"]]
    doc = rush.to_doc()
    again = Rush.from_doc(doc)
    assert again.to_doc() == doc
