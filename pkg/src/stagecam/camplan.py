"""L1 camera-path optimization over ten-second slices.

The virtual camera state per frame is p_t = (cx_t, cy_t, h_t). Each slice
solves

    minimize  sum_t sum_c w_c |p_tc - d_tc|  +  sum_k lambda_k sum_t |D^k p|

subject to frame-in-image bounds, the h range, hard containment of the
per-frame must-include boxes, and equality pins on a short prefix shared
with the previous slice. Every absolute value becomes one slack variable
with two inequality rows, and the result is a sparse LP solved exactly by
HiGHS. Pins are substituted as constants, so the assembled path is
bit-identical across slice joins by construction.

All terms and constraints are positively homogeneous of degree 1 in the
pixel quantities, which makes the optimum independent of the recording
resolution: scaling the inputs by s scales the path and objective by s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .framing import DesiredSeries, nudge_center
from .pose import SourceMeta
from .tracking import BBox


class SolveError(RuntimeError):
    """The LP backend failed; with sane inputs only contradictory pins do this."""


@dataclass(frozen=True)
class CamParams:
    """Objective weights and slicing policy.

    h_min of None resolves to 0.05 * image height, which keeps the default
    resolution independent.
    """

    w: tuple[float, float, float] = (1.0, 1.0, 1.0)
    lambda1: float = 10.0
    lambda2: float = 100.0
    lambda3: float = 1000.0
    slice_seconds: float = 10.0
    overlap_frames: int = 3
    h_min: float | None = None
    tolerance: float = 1e-6

    def __post_init__(self):
        if any(x < 0 for x in self.w):
            raise ValueError("data weights must be nonnegative")
        if self.lambda1 < 0 or self.lambda2 < 0 or self.lambda3 < 0:
            raise ValueError("derivative weights must be nonnegative")
        if self.lambda3 > 0 and self.overlap_frames < 3:
            raise ValueError("third differences need at least 3 pinned frames")
        if self.overlap_frames < 1:
            raise ValueError("overlap_frames must be at least 1")

    @property
    def lambdas(self) -> tuple[float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3)

    def resolved_h_min(self, meta: SourceMeta) -> float:
        return 0.05 * meta.height if self.h_min is None else self.h_min

    def to_doc(self) -> dict:
        return {
            "w": list(self.w),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda3": self.lambda3,
            "slice_seconds": self.slice_seconds,
            "overlap_frames": self.overlap_frames,
            "h_min": self.h_min,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CamParams":
        doc = dict(doc)
        doc["w"] = tuple(doc.get("w", (1.0, 1.0, 1.0)))
        return cls(**doc)


@dataclass(frozen=True)
class CameraFrame:
    """Crop center and half-height for one frame; half-width is rho * h."""

    cx: float
    cy: float
    h: float


def _diff_coeffs(k: int) -> list[int]:
    # D^1 = (-1, 1), D^2 = (1, -2, 1), D^3 = (-1, 3, -3, 1)
    return [((-1) ** (k - j)) * comb(k, j) for j in range(k + 1)]


@dataclass
class SliceProblem:
    """One slice's LP data, before the slack-variable reformulation.

    d has one row per free frame and one column per coordinate; pins are
    the solved values of the overlap frames immediately before the slice.
    Camera problems have K = 3 coordinates plus geometry; K = 1 instances
    express scalar toys for oracle testing and carry no geometry.
    """

    d: np.ndarray                       # (T, K)
    w: np.ndarray                       # (K,)
    lambdas: tuple[float, float, float]
    pins: np.ndarray | None = None      # (P, K)
    start: int = 0
    # camera geometry; all None for scalar problems
    include: np.ndarray | None = None   # (T, 4) x0, y0, x1, y1; NaN = none
    rho: float | None = None
    width: float | None = None
    height: float | None = None
    h_min: float | None = None
    h_max: float | None = None
    lo: np.ndarray | None = None        # (K,) plain variable bounds
    hi: np.ndarray | None = None
    tolerance: float = 1e-6
    violations: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        if self.d.ndim != 2 or self.d.shape[0] == 0:
            raise ValueError("empty segment")
        if self.pins is not None:
            self.pins = np.asarray(self.pins, dtype=float)

    @property
    def T(self) -> int:
        return self.d.shape[0]

    @property
    def K(self) -> int:
        return self.d.shape[1]

    @property
    def P(self) -> int:
        return 0 if self.pins is None else self.pins.shape[0]

    @property
    def num_variables(self) -> int:
        """Path variables only; slack count is a solver detail."""
        return self.T * self.K

    @property
    def num_pin_constraints(self) -> int:
        """Pinned scalars; each is an equality, enforced by substitution."""
        return self.P * self.K

    def num_diff_terms(self, k: int) -> int:
        """Absolute k-th difference terms that touch a free variable."""
        if self.lambdas[k - 1] == 0:
            return 0
        return (self.T - k + min(self.P, k)) * self.K if self.T >= 1 else 0

    @property
    def num_first_diff_terms(self) -> int:
        return self.num_diff_terms(1)


def solve_slice(p: SliceProblem) -> tuple[np.ndarray, float]:
    """Exact LP solve of one slice; returns (values (T, K), objective).

    The objective counts data terms of free frames and difference terms
    that touch at least one free frame; terms entirely inside the pinned
    prefix were already paid by the previous slice.
    """
    T, K, P = p.T, p.K, p.P
    n_path = T * K

    # COO triplets for the inequality matrix
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    b_ub: list[np.ndarray] = []
    slack_w: list[np.ndarray] = []
    n_rows = 0
    n_slack = 0

    def add_abs_terms(term_cols, term_vals, term_b, weight):
        """Rows u >= e and u >= -e for terms e_i = sum_j vals_ij x_cols_ij - b_i."""
        nonlocal n_rows, n_slack
        m, width = term_cols.shape
        if m == 0:
            return
        sl = n_path + n_slack + np.arange(m)
        r_pos = n_rows + 2 * np.arange(m)
        r_neg = r_pos + 1
        # e - u <= b
        rows.append(np.repeat(r_pos, width))
        cols.append(term_cols.ravel())
        vals.append(term_vals.ravel())
        rows.append(r_pos)
        cols.append(sl)
        vals.append(np.full(m, -1.0))
        # -e - u <= -b
        rows.append(np.repeat(r_neg, width))
        cols.append(term_cols.ravel())
        vals.append(-term_vals.ravel())
        rows.append(r_neg)
        cols.append(sl)
        vals.append(np.full(m, -1.0))
        b = np.empty(2 * m)
        b[0::2] = term_b
        b[1::2] = -term_b
        b_ub.append(b)
        slack_w.append(np.full(m, float(weight)))
        n_rows += 2 * m
        n_slack += m

    for c in range(K):
        if p.w[c] > 0:
            add_abs_terms(
                (c * T + np.arange(T))[:, None],
                np.ones((T, 1)),
                p.d[:, c].copy(),
                p.w[c],
            )

    for k in (1, 2, 3):
        lam = p.lambdas[k - 1]
        if lam == 0 or P + T <= k:
            continue
        coeff = np.array(_diff_coeffs(k), dtype=float)
        for c in range(K):
            # rows fully over free frames
            m = T - k
            if m > 0:
                t0 = np.arange(m)
                add_abs_terms(
                    c * T + t0[:, None] + np.arange(k + 1)[None, :],
                    np.tile(coeff, (m, 1)),
                    np.zeros(m),
                    lam,
                )
            # rows straddling the pinned prefix
            for ft in range(max(0, P - k), P):
                js = np.arange(k + 1)
                frames = ft + js
                free = frames >= P
                if not free.any() or frames[-1] >= P + T:
                    continue
                const = float(np.dot(coeff[~free], p.pins[frames[~free], c]))
                add_abs_terms(
                    (c * T + (frames[free] - P))[None, :],
                    coeff[free][None, :],
                    np.array([-const]),
                    lam,
                )

    bounds: list[tuple[float | None, float | None]]
    if p.rho is not None:
        icx, icy, ih = 0, T, 2 * T
        t = np.arange(T)
        one = np.ones(T)

        def add_rows(entries, rhs):
            """One inequality row per frame: sum of (col, val) entries <= rhs."""
            nonlocal n_rows
            r = n_rows + t
            for col_base, val in entries:
                rows.append(r)
                cols.append(col_base + t)
                vals.append(val if isinstance(val, np.ndarray) else val * one)
            b_ub.append(np.asarray(rhs, dtype=float) * one
                        if np.ndim(rhs) == 0 else np.asarray(rhs, dtype=float))
            n_rows += T

        # frame inside the image
        add_rows([(icx, -1.0), (ih, p.rho)], 0.0)
        add_rows([(icx, 1.0), (ih, p.rho)], p.width)
        add_rows([(icy, -1.0), (ih, 1.0)], 0.0)
        add_rows([(icy, 1.0), (ih, 1.0)], p.height)

        if p.include is not None:
            has = ~np.isnan(p.include[:, 0])
            if has.any():
                ti = t[has]
                inc = p.include[has]

                def add_inc_rows(entries, rhs):
                    nonlocal n_rows
                    r = n_rows + np.arange(len(ti))
                    for col_base, val in entries:
                        rows.append(r)
                        cols.append(col_base + ti)
                        vals.append(np.full(len(ti), val))
                    b_ub.append(np.asarray(rhs, dtype=float))
                    n_rows += len(ti)

                add_inc_rows([(icx, 1.0), (ih, -p.rho)], inc[:, 0])   # x0 >= left
                add_inc_rows([(icx, -1.0), (ih, -p.rho)], -inc[:, 2])  # x1 <= right
                add_inc_rows([(icy, 1.0), (ih, -1.0)], inc[:, 1])
                add_inc_rows([(icy, -1.0), (ih, -1.0)], -inc[:, 3])

        bounds = (
            [(0.0, float(p.width))] * T
            + [(0.0, float(p.height))] * T
            + [(float(p.h_min), float(p.h_max))] * T
        )
    else:
        lo = p.lo if p.lo is not None else [None] * K
        hi = p.hi if p.hi is not None else [None] * K
        bounds = []
        for c in range(K):
            bounds.extend([(lo[c], hi[c])] * T)
    bounds.extend([(0.0, None)] * n_slack)

    c_vec = np.zeros(n_path + n_slack)
    if n_slack:
        c_vec[n_path:] = np.concatenate(slack_w)

    a = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_rows, n_path + n_slack),
    ).tocsc()
    res = linprog(c_vec, A_ub=a, b_ub=np.concatenate(b_ub), bounds=bounds,
                  method="highs")
    if not res.success:
        raise SolveError(f"slice at frame {p.start}: {res.message}")
    values = res.x[:n_path].reshape(K, T).T
    return values, float(res.fun)


def solve_l1(
    d: np.ndarray,
    w=1.0,
    lambdas: tuple[float, float, float] = (10.0, 100.0, 1000.0),
    pins: np.ndarray | None = None,
    lo=None,
    hi=None,
) -> tuple[np.ndarray, float]:
    """Convenience L1 trend solve without camera geometry.

    d may be (T,) or (T, K); the result matches its shape. Used directly by
    tests and demos against brute-force oracles.
    """
    d = np.asarray(d, dtype=float)
    scalar = d.ndim == 1
    if scalar:
        d = d[:, None]
        if pins is not None:
            pins = np.asarray(pins, dtype=float)[:, None]
    K = d.shape[1]
    w_arr = np.full(K, float(w)) if np.ndim(w) == 0 else np.asarray(w, dtype=float)
    lo_arr = None if lo is None else np.full(K, float(lo))
    hi_arr = None if hi is None else np.full(K, float(hi))
    p = SliceProblem(d=d, w=w_arr, lambdas=tuple(lambdas), pins=pins,
                     lo=lo_arr, hi=hi_arr)
    values, obj = solve_slice(p)
    return (values[:, 0] if scalar else values), obj


def check_include(include: BBox, meta: SourceMeta, params: CamParams,
                  rho: float) -> tuple[BBox, bool]:
    """Shrink a must-include box that no admissible frame can contain.

    The largest admissible frame is 2 rho h_max wide and 2 h_max tall; an
    oversized box is shrunk about its center to 95 percent of that limit in
    the offending dimension and flagged. The box is also clipped to the
    image so the containment constraints stay compatible with the bounds.
    """
    h_max = min(meta.height / 2, meta.width / (2 * rho))
    max_w, max_h = 2 * rho * h_max, 2 * h_max
    x0, y0, x1, y1 = include.as_tuple()
    flagged = False
    if x1 - x0 > max_w:
        cx = (x0 + x1) / 2
        x0, x1 = cx - 0.475 * max_w, cx + 0.475 * max_w
        flagged = True
    if y1 - y0 > max_h:
        cy = (y0 + y1) / 2
        y0, y1 = cy - 0.475 * max_h, cy + 0.475 * max_h
        flagged = True
    clipped = BBox(
        min(max(x0, 0.0), meta.width), min(max(y0, 0.0), meta.height),
        min(max(x1, 0.0), meta.width), min(max(y1, 0.0), meta.height))
    if clipped.as_tuple() != (x0, y0, x1, y1):
        flagged = True
    return clipped, flagged


def _fill_invalid(d: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace invalid rows by the nearest valid row (earlier wins ties)."""
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        raise ValueError("series has no valid frame")
    pos = np.arange(d.shape[0])
    left = idx[np.clip(np.searchsorted(idx, pos, side="right") - 1, 0, idx.size - 1)]
    right = idx[np.clip(np.searchsorted(idx, pos, side="left"), 0, idx.size - 1)]
    nearest = np.where(pos - left <= right - pos, left, right)
    return d[nearest]


def formulate_slice(
    segment: DesiredSeries,
    params: CamParams,
    meta: SourceMeta,
    pins: np.ndarray | None = None,
    start: int = 0,
) -> SliceProblem:
    """Build one slice's LP from a (hold-filled) desired segment."""
    arrays = segment.arrays()
    valid = arrays["valid"]
    d = np.stack([arrays["cx"], arrays["cy"], arrays["h"]], axis=1)
    inc = np.stack([arrays["ix0"], arrays["iy0"], arrays["ix1"], arrays["iy1"]],
                   axis=1)
    d = _fill_invalid(d, valid)
    has_inc = valid & ~np.isnan(inc[:, 0])
    if has_inc.any():
        inc = _fill_invalid(inc, has_inc)
    return _formulate_arrays(d, inc, segment.spec.aspect, params, meta, pins, start)


def _formulate_arrays(
    d: np.ndarray,
    include: np.ndarray,
    rho: float,
    params: CamParams,
    meta: SourceMeta,
    pins: np.ndarray | None,
    start: int,
) -> SliceProblem:
    h_min = params.resolved_h_min(meta)
    h_max = min(meta.height / 2, meta.width / (2 * rho))
    if h_min > h_max:
        raise SolveError(f"h_min {h_min} exceeds h_max {h_max}")
    checked = include.copy()
    violations: list[tuple[int, str]] = []
    for i in range(include.shape[0]):
        if np.isnan(include[i, 0]):
            continue
        box, flagged = check_include(BBox(*include[i]), meta, params, rho)
        checked[i] = box.as_tuple()
        if flagged:
            violations.append((start + i, "include box shrunk to fit"))
    return SliceProblem(
        d=d, w=np.asarray(params.w, dtype=float), lambdas=params.lambdas,
        pins=pins, start=start, include=checked, rho=rho,
        width=float(meta.width), height=float(meta.height),
        h_min=h_min, h_max=h_max, tolerance=params.tolerance,
        violations=violations,
    )


PATH_SCHEMA = "stagecam/path/1"


@dataclass
class CameraPath:
    """Solved crop path for one rush over a whole part."""

    cx: np.ndarray
    cy: np.ndarray
    h: np.ndarray
    rho: float
    objectives: list[float] = field(default_factory=list)
    violations: list[tuple[int, str]] = field(default_factory=list)

    @property
    def frame_count(self) -> int:
        return len(self.cx)

    def frame(self, i: int) -> CameraFrame:
        return CameraFrame(float(self.cx[i]), float(self.cy[i]), float(self.h[i]))

    def values(self) -> np.ndarray:
        return np.stack([self.cx, self.cy, self.h], axis=1)

    def to_doc(self) -> dict:
        return {
            "schema": PATH_SCHEMA,
            "rho": self.rho,
            "frames": [
                [i, float(self.cx[i]), float(self.cy[i]), float(self.h[i])]
                for i in range(self.frame_count)
            ],
            "objectives": [float(o) for o in self.objectives],
            "violations": [[f, note] for f, note in self.violations],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CameraPath":
        if doc.get("schema") != PATH_SCHEMA:
            raise ValueError(f"unsupported path schema: {doc.get('schema')!r}")
        frames = doc["frames"]
        n = len(frames)
        cx, cy, h = np.empty(n), np.empty(n), np.empty(n)
        for rec in frames:
            i = rec[0]
            cx[i], cy[i], h[i] = rec[1], rec[2], rec[3]
        return cls(cx=cx, cy=cy, h=h, rho=doc["rho"],
                   objectives=list(doc.get("objectives", [])),
                   violations=[(f, n_) for f, n_ in doc.get("violations", [])])


def _exactify(values: np.ndarray, include: np.ndarray, rho: float,
              h_min: float, h_max: float, width: float, height: float) -> None:
    """Clip solver output so the hard constraints hold exactly, in place.

    The LP satisfies them to solver tolerance; this pass removes the last
    epsilon. Each frame is clipped independently and the map is positively
    homogeneous, so joins and scale equivariance are unaffected.
    """
    n = values.shape[0]
    has = ~np.isnan(include[:, 0])
    fit = np.full(n, h_min)
    fit[has] = np.maximum(
        h_min,
        np.maximum((include[has, 3] - include[has, 1]) / 2,
                   (include[has, 2] - include[has, 0]) / (2 * rho)),
    )
    values[:, 2] = np.clip(values[:, 2], fit, h_max)
    h = values[:, 2]
    lo_x = np.where(has, np.maximum(rho * h, include[:, 2] - rho * h), rho * h)
    hi_x = np.where(has, np.minimum(width - rho * h, include[:, 0] + rho * h),
                    width - rho * h)
    lo_y = np.where(has, np.maximum(h, include[:, 3] - h), h)
    hi_y = np.where(has, np.minimum(height - h, include[:, 1] + h), height - h)
    values[:, 0] = np.clip(values[:, 0], lo_x, hi_x)
    values[:, 1] = np.clip(values[:, 1], lo_y, hi_y)
    # clipping computes fl(bound - half); the recomputed sum can still miss
    # the bound by an ulp, so snap the rare offenders to a neighboring float
    bad = np.flatnonzero(
        (values[:, 0] - rho * h < 0) | (values[:, 0] + rho * h > width)
        | (values[:, 1] - h < 0) | (values[:, 1] + h > height)
        | (has & ((values[:, 0] - rho * h > include[:, 0])
                  | (values[:, 0] + rho * h < include[:, 2])
                  | (values[:, 1] - h > include[:, 1])
                  | (values[:, 1] + h < include[:, 3]))))
    for i in bad:
        inc = include[i] if has[i] else (None, None, None, None)
        values[i, 0] = nudge_center(values[i, 0], rho * h[i], 0.0, width,
                                    inc[0], inc[2])
        values[i, 1] = nudge_center(values[i, 1], h[i], 0.0, height,
                                    inc[1], inc[3])


def solve_sequence(
    series: DesiredSeries,
    params: CamParams | None = None,
    meta: SourceMeta | None = None,
) -> CameraPath:
    """Stabilize a whole desired series into a camera path, slice by slice.

    Slices are solved in order; each one's first overlap_frames values are
    pinned to the previous solution, which makes the join frames identical
    by construction. Memory stays proportional to one slice plus the output.
    """
    if meta is None:
        raise ValueError("meta is required")
    params = params or CamParams()
    arrays = series.arrays()
    valid = arrays["valid"]
    if not valid.any():
        raise ValueError("series has no valid frame")
    n = len(valid)
    d = np.stack([arrays["cx"], arrays["cy"], arrays["h"]], axis=1)
    inc = np.stack([arrays["ix0"], arrays["iy0"], arrays["ix1"], arrays["iy1"]],
                   axis=1)
    d = _fill_invalid(d, valid)
    has_inc = valid & ~np.isnan(inc[:, 0])
    if has_inc.any():
        inc = _fill_invalid(inc, has_inc)
    rho = series.spec.aspect

    slice_frames = max(int(round(params.slice_seconds * meta.fps)),
                       params.overlap_frames + 1)
    out = np.empty((n, 3))
    objectives: list[float] = []
    violations: list[tuple[int, str]] = []
    checked_inc = np.full((n, 4), np.nan)
    for s0 in range(0, n, slice_frames):
        s1 = min(n, s0 + slice_frames)
        pins = None
        if s0 > 0:
            p0 = max(0, s0 - params.overlap_frames)
            pins = out[p0:s0].copy()
        problem = _formulate_arrays(
            d[s0:s1], inc[s0:s1], rho, params, meta, pins, s0)
        vals, obj = solve_slice(problem)
        out[s0:s1] = vals
        checked_inc[s0:s1] = problem.include
        objectives.append(obj)
        violations.extend(problem.violations)

    h_min = params.resolved_h_min(meta)
    h_max = min(meta.height / 2, meta.width / (2 * rho))
    _exactify(out, checked_inc, rho, h_min, h_max,
              float(meta.width), float(meta.height))
    return CameraPath(cx=out[:, 0], cy=out[:, 1], h=out[:, 2], rho=rho,
                      objectives=objectives, violations=violations)


def evaluate_objective(
    values: np.ndarray,
    desired: np.ndarray,
    w=(1.0, 1.0, 1.0),
    lambdas: tuple[float, float, float] = (10.0, 100.0, 1000.0),
) -> float:
    """Whole-horizon objective of an arbitrary path against a desired path."""
    values = np.atleast_2d(np.asarray(values, dtype=float).T).T
    desired = np.atleast_2d(np.asarray(desired, dtype=float).T).T
    w_arr = np.full(values.shape[1], w) if np.ndim(w) == 0 else np.asarray(w)
    total = float(np.sum(np.abs(values - desired) * w_arr[None, :]))
    for k in (1, 2, 3):
        if lambdas[k - 1] > 0 and values.shape[0] > k:
            total += lambdas[k - 1] * float(
                np.sum(np.abs(np.diff(values, n=k, axis=0))))
    return total


def smoothness_report(path: CameraPath, eps: float) -> dict:
    """Fractions of frames whose k-th differences exceed eps, per coordinate."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    report: dict = {}
    coords = {"cx": path.cx, "cy": path.cy, "h": path.h}
    for k in (1, 2, 3):
        per = {}
        for name, arr in coords.items():
            if len(arr) > k:
                dk = np.abs(np.diff(arr, n=k))
                per[name] = {
                    "fraction": float(np.mean(dk > eps)),
                    "max": float(dk.max()),
                }
            else:
                per[name] = {"fraction": 0.0, "max": 0.0}
        report[k] = per
    return report
