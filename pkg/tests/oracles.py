"""Brute-force reference implementations used to cross-check the library.

Each oracle recomputes a result by an independent method: cell-counting
rasterization for IoU, dense grid search for the L1 program, exhaustive
shift enumeration for keepout. None of them share code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def iou_raster(a, b, cell: float = 0.1) -> float:
    """IoU by counting cell centers inside each box on a fixed 0.1-px grid.

    Exact for boxes whose coordinates are multiples of ``cell``: centers sit
    at half-cells, so no center ever lies on a box edge.
    """
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    x_lo, x_hi = min(ax0, bx0), max(ax1, bx1)
    y_lo, y_hi = min(ay0, by0), max(ay1, by1)
    nx = int(round((x_hi - x_lo) / cell))
    ny = int(round((y_hi - y_lo) / cell))
    if nx <= 0 or ny <= 0:
        return 0.0
    xs = x_lo + (np.arange(nx) + 0.5) * cell
    ys = y_lo + (np.arange(ny) + 0.5) * cell
    in_a = ((xs > ax0) & (xs < ax1))[:, None] & ((ys > ay0) & (ys < ay1))[None, :]
    in_b = ((xs > bx0) & (xs < bx1))[:, None] & ((ys > by0) & (ys < by1))[None, :]
    union = int(np.count_nonzero(in_a | in_b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(in_a & in_b)) / union


def diff_coeffs(k: int) -> list[int]:
    return [(-1) ** (k - j) * math.comb(k, j) for j in range(k + 1)]


def l1_grid_solve(d, w, lambdas, lo: float, hi: float,
                  res: float = 0.01) -> tuple[np.ndarray, float]:
    """Dense grid search over all T path values at ``res`` resolution.

    Evaluates the full L1 objective (data plus difference penalties) on the
    T-dimensional product grid and returns the argmin. Only viable for small
    T; the acceptance criterion caps T at 4.
    """
    d = np.asarray(d, dtype=float)
    T = d.shape[0]
    n = int(round((hi - lo) / res))
    axis = lo + np.arange(n + 1) * res
    grids = np.meshgrid(*([axis] * T), indexing="ij", sparse=True)
    cost = np.zeros((1,) * T)
    for t in range(T):
        cost = cost + w * np.abs(grids[t] - d[t])
    for k, lam in enumerate(lambdas, start=1):
        if lam <= 0 or T <= k:
            continue
        coeffs = diff_coeffs(k)
        for t0 in range(T - k):
            term = 0.0
            for j, c in enumerate(coeffs):
                term = term + c * grids[t0 + j]
            cost = cost + lam * np.abs(term)
    idx = np.unravel_index(int(np.argmin(cost)), cost.shape)
    return axis[list(idx)], float(cost[idx])


def min_zeroing_shift(frame, intruder, include, width: float,
                      height: float) -> tuple[int, int] | None:
    """Exhaustive integer search for the smallest overlap-zeroing move.

    Tries every pure-horizontal and pure-vertical integer shift, keeps the
    moved frame inside the image and around the include box, and ranks
    survivors by (total distance, horizontal before vertical, signed dx,
    signed dy) like the library does.
    """
    fx0, fy0, fx1, fy1 = frame
    ix0, iy0, ix1, iy1 = include
    nx0, ny0, nx1, ny1 = intruder
    span = int(math.ceil(max(width, height)))
    shifts = [(dx, 0) for dx in range(-span, span + 1)]
    shifts += [(0, dy) for dy in range(-span, span + 1)]
    best = None
    for dx, dy in shifts:
        x0, y0, x1, y1 = fx0 + dx, fy0 + dy, fx1 + dx, fy1 + dy
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
            continue
        if x0 > ix0 or y0 > iy0 or x1 < ix1 or y1 < iy1:
            continue
        ow = min(x1, nx1) - max(x0, nx0)
        oh = min(y1, ny1) - max(y0, ny0)
        if ow > 0 and oh > 0:
            continue
        key = (abs(dx) + abs(dy), 0 if dy == 0 else 1, dx, dy)
        if best is None or key < best[0]:
            best = (key, (dx, dy))
    return None if best is None else best[1]
