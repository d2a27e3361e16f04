/**
 * Labeling view: the whole human-in-the-loop surface is one name per
 * tracklet. The table is rendered straight from the tracklet listing;
 * every save round-trips through the API and re-fetches, so what is on
 * screen is always the server's copy.
 */

import { ApiError, Client } from "../api.js";
import { clear, el, statusLine } from "../dom.js";

export async function renderLabeling(
  root: HTMLElement,
  client: Client,
  pid: string,
  part: number,
  note?: HTMLElement,
): Promise<void> {
  const [project, listing] = await Promise.all([
    client.getProject(pid),
    client.getTracklets(pid, part),
  ]);
  const fps = project.meta.fps;

  clear(root);
  root.append(el("h2", {}, `tracklets, part ${part}`));
  if (note) root.append(note);

  const redraw = (n?: HTMLElement) => renderLabeling(root, client, pid, part, n);

  const table = el("table", { class: "rows" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "id"),
      el("th", {}, "frames"),
      el("th", {}, "seconds"),
      el("th", {}, "label"),
      el("th", {}, ""),
    ),
  );
  for (const t of listing.tracklets) {
    const input = el("input", {
      value: t.label ?? "",
      placeholder: "unlabeled",
      "data-tracklet": String(t.id),
    });
    const save = el("button", {}, "save");
    save.addEventListener("click", async () => {
      const name = input.value.trim();
      try {
        await client.putLabel(pid, t.id, name === "" ? null : name, part);
        await redraw(statusLine("ok", `tracklet ${t.id}: ${name || "cleared"}`));
      } catch (e) {
        if (!(e instanceof ApiError)) throw e;
        await redraw(statusLine("err", e.message));
      }
    });
    const end = t.start_frame + t.length - 1;
    table.append(
      el(
        "tr",
        {},
        el("td", {}, String(t.id)),
        el("td", {}, `${t.start_frame}..${end}`),
        el(
          "td",
          {},
          `${(t.start_frame / fps).toFixed(2)}..${(end / fps).toFixed(2)}`,
        ),
        el("td", {}, input),
        el("td", {}, save),
      ),
    );
  }
  root.append(table);

  for (const w of listing.warnings) {
    root.append(el("p", { class: "status warn" }, w));
  }
}
