"""Virtual pan-tilt-zoom post-production for fixed-camera recordings.

The pipeline: pose documents are parsed into skeleton sequences, chained
into tracklets and labeled with actor names; shot specifications turn the
labeled tracks into desired camera frames; an L1 program smooths them into
a stable crop path; exports produce crop EDLs, cut lists, subtitles and
transcode scripts. A small HTTP service and CLI orchestrate the steps.
"""

__version__ = "0.1.0"

from .pose import (
    FrameDetections,
    PoseFormatError,
    Skeleton,
    SourceMeta,
    dump_pose_frame,
    load_pose_sequence,
    parse_pose_frame,
    validate_sequence,
)
from .tracking import (
    BBox,
    TrackParams,
    TrackStore,
    Tracklet,
    actor_coverage,
    assign_actor,
    build_tracklets,
    iou,
    link_frame,
    upper_bbox,
)
from .framing import (
    DesiredFrame,
    DesiredSeries,
    GazeDirection,
    ShotSize,
    ShotSpec,
    body_extent,
    build_desired_series,
    compose_desired,
    estimate_gaze,
    resolve_conflicts,
)
from .camplan import (
    CamParams,
    CameraFrame,
    CameraPath,
    SliceProblem,
    SolveError,
    check_include,
    evaluate_objective,
    formulate_slice,
    smoothness_report,
    solve_l1,
    solve_sequence,
    solve_slice,
)
from .export import (
    Annotation,
    AnnotationCategory,
    EditTimeline,
    Rush,
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

__all__ = [
    "__version__",
    "Annotation", "AnnotationCategory", "BBox", "CamParams", "CameraFrame",
    "CameraPath", "DesiredFrame", "DesiredSeries", "EditTimeline",
    "FrameDetections", "GazeDirection", "PoseFormatError", "Rush",
    "ShotSize", "ShotSpec", "Skeleton", "SliceProblem", "SolveError",
    "SourceMeta", "TrackParams", "TrackStore", "Tracklet",
    "actor_coverage", "assign_actor", "body_extent", "build_desired_series",
    "build_rush", "build_tracklets", "check_include", "compose_desired",
    "dump_pose_frame", "emit_crop_script", "emit_cutlist", "emit_rush_edl",
    "emit_vtt", "estimate_gaze", "evaluate_objective", "formulate_slice",
    "iou", "link_frame", "load_pose_sequence", "move_cut", "parse_cutlist",
    "parse_pose_frame", "resolve_conflicts", "round_even", "scale_path",
    "set_cut", "smoothness_report", "solve_l1", "solve_sequence",
    "solve_slice", "upper_bbox", "validate_sequence",
]
