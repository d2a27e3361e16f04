import { expect, test } from "vitest";

import { cropRect, fitScale, scaleRect } from "../src/overlay.js";

const RHO = 16 / 9;

// the same six-frame path the backend uses as its export golden
const SOURCE_ROWS = [0, 1, 2, 3, 4, 5].map((i) => [
  i,
  400 + 10 * i,
  300,
  [200, 200, 210, 210, 220, 220][i],
]);

test("crop rect centers on cx cy with half extents rho*h and h", () => {
  const r = cropRect([7, 100, 50, 20], 2);
  expect(r).toEqual({ x: 60, y: 30, w: 80, h: 40 });
});

test("rect is symmetric around the center", () => {
  const row = [0, 963.25, 541.5, 123.75];
  const r = cropRect(row, RHO);
  expect(r.x + r.w / 2).toBeCloseTo(row[1], 9);
  expect(r.y + r.h / 2).toBeCloseTo(row[2], 9);
});

test("scaling rows then building rects matches scaling the rects", () => {
  // the API scales a path by to_height/source.height; the overlay must
  // land within one pixel of that, and in fact matches to float noise
  for (const s of [0.5, 1 / 3, 0.2625]) {
    for (const row of SOURCE_ROWS) {
      const served = [row[0], row[1] * s, row[2] * s, row[3] * s];
      const a = cropRect(served, RHO);
      const b = scaleRect(cropRect(row, RHO), s);
      for (const k of ["x", "y", "w", "h"] as const) {
        expect(Math.abs(a[k] - b[k])).toBeLessThan(1e-9);
        expect(Math.abs(a[k] - b[k])).toBeLessThan(1.0);
      }
    }
  }
});

test("display scaling keeps the rect inside the scaled stage", () => {
  const s = fitScale(3840, 2160, 640, 360);
  for (const row of SOURCE_ROWS) {
    const r = scaleRect(cropRect(row, RHO), s);
    expect(r.x).toBeGreaterThanOrEqual(0);
    expect(r.y).toBeGreaterThanOrEqual(0);
    expect(r.x + r.w).toBeLessThanOrEqual(3840 * s + 1e-9);
    expect(r.y + r.h).toBeLessThanOrEqual(2160 * s + 1e-9);
  }
});

test("fit scale is bounded by the tighter display dimension", () => {
  expect(fitScale(1920, 1080, 640, 360)).toBeCloseTo(1 / 3, 12);
  expect(fitScale(1920, 1080, 960, 360)).toBeCloseTo(1 / 3, 12);
  expect(fitScale(1920, 1080, 640, 720)).toBeCloseTo(1 / 3, 12);
});
