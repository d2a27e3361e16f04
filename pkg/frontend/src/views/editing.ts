/**
 * Editing view: one program timeline per part. A click on the strip
 * places a cut to the selected rush at that frame (set_cut); each cut
 * row can slide its boundary (move_cut). The document is PUT whole and
 * the server revalidates the tiling, so a rejected edit just means a
 * 409 note and a re-fetch of the unchanged timeline.
 */

import { ApiError, Client, TimelineDoc } from "../api.js";
import { clear, el, statusLine } from "../dom.js";
import { applyMoveCut, applySetCut, frameFromX, segments } from "../timeline.js";

const STRIP_W = 800;
const COLORS = ["#2a6", "#d72", "#46c", "#a4a", "#882", "#288"];

export async function renderEditing(
  root: HTMLElement,
  client: Client,
  pid: string,
  part: number,
  note?: HTMLElement,
  selected?: string,
): Promise<void> {
  const project = await client.getProject(pid);
  const rushes = project.parts.find((p) => p.part === part)?.rushes ?? [];
  let tl: TimelineDoc | null = null;
  try {
    tl = await client.getTimeline(pid, part);
  } catch (e) {
    if (!(e instanceof ApiError) || e.status !== 404) throw e;
  }

  clear(root);
  root.append(el("h2", {}, `program, part ${part}`));
  if (note) root.append(note);

  if (tl === null || rushes.length === 0) {
    root.append(
      el("p", {}, "no timeline yet: solve at least one rush, which seeds it"),
    );
    return;
  }
  const doc = tl;

  const redraw = (n?: HTMLElement, sel?: string) =>
    renderEditing(root, client, pid, part, n, sel);

  const put = async (next: TimelineDoc, sel: string, okText: string) => {
    try {
      await client.putTimeline(pid, next, part);
      await redraw(statusLine("ok", okText), sel);
    } catch (e) {
      if (!(e instanceof ApiError)) throw e;
      // revert: the re-render below re-fetches the authoritative timeline
      await redraw(statusLine("err", e.message), sel);
    }
  };

  // rush palette: which rush a strip click will cut to
  const palette = el("select", { class: "palette" });
  for (const r of rushes) palette.append(el("option", { value: r }, r));
  if (selected && rushes.includes(selected)) palette.value = selected;
  root.append(el("div", {}, "cut to: ", palette));

  const colorOf = new Map(rushes.map((r, i) => [r, COLORS[i % COLORS.length]]));
  const strip = el("div", {
    class: "strip",
    style: `width:${STRIP_W}px`,
    "data-frames": String(doc.frame_count),
  });
  for (const seg of segments(doc)) {
    const w = ((seg.end - seg.start) / doc.frame_count) * STRIP_W;
    const block = el(
      "div",
      {
        class: "segment",
        style: `width:${w}px;background:${colorOf.get(seg.rushId) ?? "#555"}`,
        title: `${seg.rushId} ${seg.start}..${seg.end - 1}`,
      },
      seg.rushId.split(".").pop() ?? seg.rushId,
    );
    strip.append(block);
  }
  strip.addEventListener("click", (ev) => {
    const rect = strip.getBoundingClientRect();
    const frame = frameFromX(ev.clientX - rect.left, rect.width, doc.frame_count);
    void put(
      applySetCut(doc, frame, palette.value),
      palette.value,
      `cut to ${palette.value} at frame ${frame}`,
    );
  });
  root.append(strip);

  const table = el("table", { class: "rows" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "start"),
      el("th", {}, "rush"),
      el("th", {}, "move to"),
      el("th", {}, ""),
    ),
  );
  for (const [frame, rushId] of doc.cuts) {
    const dest = el("input", {
      type: "number",
      value: String(frame),
      "data-cut": String(frame),
    });
    const move = el("button", {}, "move");
    move.addEventListener("click", () => {
      void put(
        applyMoveCut(doc, frame, Number(dest.value)),
        palette.value,
        `moved cut ${frame} to ${dest.value}`,
      );
    });
    const cells = [
      el("td", {}, String(frame)),
      el("td", {}, rushId),
    ];
    if (frame === 0) {
      // the opening cut is fixed at frame 0
      cells.push(el("td", {}, ""), el("td", {}, ""));
    } else {
      cells.push(el("td", {}, dest), el("td", {}, move));
    }
    table.append(el("tr", {}, ...cells));
  }
  root.append(table);

  root.append(
    el(
      "p",
      {},
      el(
        "a",
        { href: client.exportUrl(pid, "cutlist", { part }) },
        "export cut list",
      ),
    ),
  );
}
