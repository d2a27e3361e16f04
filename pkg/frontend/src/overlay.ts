/**
 * Crop-window overlay geometry.
 *
 * Path rows arrive as [frame, cx, cy, h] in the pixel space of whatever
 * scale was requested from the API; rho is the crop's half-width to
 * half-height ratio. The overlay never re-derives geometry from source
 * resolution on its own: it either asks the API for the display scale or
 * applies one uniform factor, which is exactly what the server does.
 */

export type Rect = { x: number; y: number; w: number; h: number };

export function cropRect(row: number[], rho: number): Rect {
  const cx = row[1];
  const cy = row[2];
  const h = row[3];
  return { x: cx - rho * h, y: cy - h, w: 2 * rho * h, h: 2 * h };
}

export function scaleRect(r: Rect, s: number): Rect {
  return { x: r.x * s, y: r.y * s, w: r.w * s, h: r.h * s };
}

/** Uniform factor that fits a source frame into a display box. */
export function fitScale(
  srcW: number,
  srcH: number,
  boxW: number,
  boxH: number,
): number {
  return Math.min(boxW / srcW, boxH / srcH);
}

export type OverlayFrame = {
  row: number[];
  rho: number;
  color: string;
  dash?: number[];
};

/**
 * Draw the stage bounds and one or more crop rectangles onto a canvas.
 * pathW/pathH are the pixel dimensions the rows are expressed in.
 */
export function drawOverlay(
  canvas: HTMLCanvasElement,
  pathW: number,
  pathH: number,
  frames: OverlayFrame[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const s = fitScale(pathW, pathH, canvas.width, canvas.height);

  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(0.5, 0.5, pathW * s - 1, pathH * s - 1);

  for (const f of frames) {
    const r = scaleRect(cropRect(f.row, f.rho), s);
    ctx.strokeStyle = f.color;
    ctx.lineWidth = 2;
    ctx.setLineDash(f.dash ?? []);
    ctx.strokeRect(r.x, r.y, r.w, r.h);
  }
  ctx.setLineDash([]);
}
