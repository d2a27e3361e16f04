/**
 * Framing view: compose a shot spec, run frame+solve, and preview the
 * resulting crop window over a stage outline. The preview draws rows
 * exactly as the path endpoint serves them, scaled by one uniform
 * factor, so the rectangle on screen is the server's geometry.
 */

import { ApiError, Client, PathDoc, RushRow } from "../api.js";
import { clear, el, statusLine } from "../dom.js";
import { drawOverlay, OverlayFrame } from "../overlay.js";

const SIZES = ["closeup", "medium", "full", "ensemble"];

function specForm(labels: string[], onSubmit: (spec: {
  subjects: string[];
  size: string;
  aspect: number;
  headroom: number;
  lead_room: number;
  margin: number;
  theta_in: number;
}) => void): HTMLElement {
  const boxes = labels.map((name) => {
    const cb = el("input", { type: "checkbox", value: name });
    return { name, cb, wrap: el("label", { class: "subject" }, cb, name) };
  });
  const size = el("select", {});
  for (const s of SIZES) size.append(el("option", { value: s }, s));
  const nums: Record<string, HTMLInputElement> = {};
  const numRow = el("div", { class: "numrow" });
  for (const [key, dflt] of [
    ["aspect", "1.7778"],
    ["headroom", "0.10"],
    ["lead_room", "0.15"],
    ["margin", "0.10"],
    ["theta_in", "0.30"],
  ] as const) {
    nums[key] = el("input", { type: "number", step: "0.01", value: dflt });
    numRow.append(el("label", {}, key, nums[key]));
  }
  const submit = el("button", {}, "frame + solve");
  submit.addEventListener("click", () => {
    onSubmit({
      subjects: boxes.filter((b) => b.cb.checked).map((b) => b.name),
      size: size.value,
      aspect: Number(nums.aspect.value),
      headroom: Number(nums.headroom.value),
      lead_room: Number(nums.lead_room.value),
      margin: Number(nums.margin.value),
      theta_in: Number(nums.theta_in.value),
    });
  });
  return el(
    "div",
    { class: "specform" },
    el("div", {}, "subjects: ", ...boxes.map((b) => b.wrap)),
    el("div", {}, "size: ", size),
    numRow,
    submit,
  );
}

function preview(
  meta: { width: number; height: number },
  optimized: PathDoc,
  desired: PathDoc,
): HTMLElement {
  const canvas = el("canvas", { width: "640", height: "360" });
  const slider = el("input", {
    type: "range",
    min: "0",
    max: String(optimized.frames.length - 1),
    value: "0",
  });
  const counter = el("span", {}, "frame 0");
  const draw = () => {
    const i = Number(slider.value);
    counter.textContent = `frame ${i}`;
    const layers: OverlayFrame[] = [
      { row: optimized.frames[i], rho: optimized.rho, color: "#e33" },
    ];
    const drow = desired.frames[i];
    // desired rows carry a valid flag; skip the dashed twin on gaps
    if (drow && drow[4]) {
      layers.push({ row: drow, rho: desired.rho, color: "#39f", dash: [6, 4] });
    }
    drawOverlay(canvas, meta.width, meta.height, layers);
  };
  slider.addEventListener("input", draw);
  draw();
  return el("div", { class: "preview" }, canvas, el("div", {}, slider, counter));
}

export async function renderFraming(
  root: HTMLElement,
  client: Client,
  pid: string,
  part: number,
  note?: HTMLElement,
  previewRush?: string,
): Promise<void> {
  const [project, listing] = await Promise.all([
    client.getProject(pid),
    client.listRushes(pid, part),
  ]);
  const labels = project.parts.find((p) => p.part === part)?.labels ?? [];

  clear(root);
  root.append(el("h2", {}, `rushes, part ${part}`));
  if (note) root.append(note);

  const redraw = (n?: HTMLElement, rush?: string) =>
    renderFraming(root, client, pid, part, n, rush);

  root.append(
    specForm(labels, async (spec) => {
      try {
        const res = await client.postRush(pid, spec, part);
        await client.waitJob(res.job_id);
        await redraw(statusLine("ok", `solved ${res.rush_id}`), res.rush_id);
      } catch (e) {
        if (!(e instanceof ApiError)) throw e;
        await redraw(statusLine("err", e.message));
      }
    }),
  );

  const table = el("table", { class: "rows" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "rush"),
      el("th", {}, "size"),
      el("th", {}, "subjects"),
      el("th", {}, "frames"),
      el("th", {}, "flagged"),
      el("th", {}, ""),
    ),
  );
  for (const r of listing.rushes as RushRow[]) {
    const show = el("button", {}, "preview");
    show.addEventListener("click", () => redraw(undefined, r.id));
    const edl = el(
      "a",
      { href: client.exportUrl(pid, "edl", { part, rush: r.id }) },
      "edl",
    );
    table.append(
      el(
        "tr",
        {},
        el("td", {}, r.id),
        el("td", {}, r.spec.size),
        el("td", {}, r.spec.subjects.join(", ") || "(ensemble)"),
        el("td", {}, String(r.frames)),
        el("td", {}, String(r.violations)),
        el("td", {}, show, " ", edl),
      ),
    );
  }
  root.append(table);

  if (previewRush) {
    const [optimized, desired] = await Promise.all([
      client.getPath(previewRush, undefined, "optimized"),
      client.getPath(previewRush, undefined, "desired"),
    ]);
    root.append(el("h3", {}, previewRush));
    root.append(preview(project.meta, optimized, desired));
  }
}
