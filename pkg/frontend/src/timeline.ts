/**
 * Pure helpers over the program cut-list document.
 *
 * The server owns the invariants (cuts tile [0, frame_count), strictly
 * increasing, first at 0, known rushes only). These helpers mirror its
 * edit semantics just enough to turn a gesture into the document the PUT
 * expects; anything the server rejects comes back as a 409 and the view
 * re-fetches, so a bad gesture can never corrupt what is shown.
 */

import type { Cut, TimelineDoc } from "./api.js";

export type Segment = { start: number; end: number; rushId: string };

export function segments(doc: TimelineDoc): Segment[] {
  const out: Segment[] = [];
  for (let i = 0; i < doc.cuts.length; i++) {
    const [start, rushId] = doc.cuts[i];
    const end = i + 1 < doc.cuts.length ? doc.cuts[i + 1][0] : doc.frame_count;
    out.push({ start, end, rushId });
  }
  return out;
}

export function rushAt(doc: TimelineDoc, frame: number): string {
  let rushId = doc.cuts[0][1];
  for (const [start, r] of doc.cuts) {
    if (start > frame) break;
    rushId = r;
  }
  return rushId;
}

/** Show rushId from `frame` on, like the server's set_cut: insert or
 * overwrite the cut, then drop cuts that repeat their predecessor. */
export function applySetCut(doc: TimelineDoc, frame: number, rushId: string): TimelineDoc {
  const byFrame = new Map<number, string>(doc.cuts);
  byFrame.set(frame, rushId);
  const ordered = [...byFrame.entries()].sort((a, b) => a[0] - b[0]);
  const cuts: Cut[] = [];
  for (const [f, r] of ordered) {
    if (cuts.length && cuts[cuts.length - 1][1] === r) continue;
    cuts.push([f, r]);
  }
  return { frame_count: doc.frame_count, cuts };
}

/** Slide one cut boundary. No clamping here: an out-of-order result is
 * the server's call to reject (409), after which the view re-fetches. */
export function applyMoveCut(doc: TimelineDoc, oldFrame: number, newFrame: number): TimelineDoc {
  const cuts: Cut[] = doc.cuts.map(([f, r]) =>
    f === oldFrame ? [newFrame, r] : [f, r],
  );
  return { frame_count: doc.frame_count, cuts };
}

/** Map a pointer x position on a strip of the given width to a frame. */
export function frameFromX(x: number, width: number, frameCount: number): number {
  if (width <= 0) return 0;
  const f = Math.floor((x / width) * frameCount);
  return Math.max(0, Math.min(frameCount - 1, f));
}
