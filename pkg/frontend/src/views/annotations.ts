/**
 * Annotation view: timed notes that export as a WebVTT description
 * track. Rows are staged in the form and saved as one whole list; the
 * server validates targets against known rushes, so an unknown target
 * comes back as a 409 and the table re-renders from the stored copy.
 */

import { AnnotationDoc, ApiError, Client } from "../api.js";
import { clear, el, statusLine } from "../dom.js";

const CATEGORIES = ["speech", "stage_direction", "scenography"];

function annotationRow(
  a: AnnotationDoc,
  targets: string[],
  onDelete: () => void,
): HTMLTableRowElement {
  const start = el("input", {
    type: "number",
    step: "0.05",
    value: String(a.start_time),
    "data-field": "start",
  });
  const end = el("input", {
    type: "number",
    step: "0.05",
    value: String(a.end_time),
    "data-field": "end",
  });
  const category = el("select", { "data-field": "category" });
  for (const c of CATEGORIES) category.append(el("option", { value: c }, c));
  category.value = a.category;
  const text = el("input", { value: a.text, "data-field": "text" });
  const target = el("select", { "data-field": "target" });
  target.append(el("option", { value: "" }, "(whole program)"));
  for (const t of targets) target.append(el("option", { value: t }, t));
  target.value = a.target ?? "";
  const del = el("button", {}, "delete");
  del.addEventListener("click", onDelete);
  return el(
    "tr",
    { class: "annotation" },
    el("td", {}, start),
    el("td", {}, end),
    el("td", {}, category),
    el("td", {}, text),
    el("td", {}, target),
    el("td", {}, del),
  );
}

function collectRows(table: HTMLTableElement): AnnotationDoc[] {
  const docs: AnnotationDoc[] = [];
  for (const row of table.querySelectorAll("tr.annotation")) {
    const get = (field: string) =>
      row.querySelector<HTMLInputElement | HTMLSelectElement>(
        `[data-field="${field}"]`,
      )!.value;
    const doc: AnnotationDoc = {
      start_time: Number(get("start")),
      end_time: Number(get("end")),
      text: get("text"),
      category: get("category"),
    };
    const target = get("target");
    if (target !== "") doc.target = target;
    docs.push(doc);
  }
  return docs;
}

export async function renderAnnotations(
  root: HTMLElement,
  client: Client,
  pid: string,
  part: number,
  note?: HTMLElement,
): Promise<void> {
  const [project, stored] = await Promise.all([
    client.getProject(pid),
    client.getAnnotations(pid, part),
  ]);
  const targets = [
    "timeline",
    ...(project.parts.find((p) => p.part === part)?.rushes ?? []),
  ];

  clear(root);
  root.append(el("h2", {}, `annotations, part ${part}`));
  if (note) root.append(note);

  const redraw = (n?: HTMLElement) =>
    renderAnnotations(root, client, pid, part, n);

  const table = el("table", { class: "rows" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "start (s)"),
      el("th", {}, "end (s)"),
      el("th", {}, "category"),
      el("th", {}, "text"),
      el("th", {}, "target"),
      el("th", {}, ""),
    ),
  );
  for (const a of stored.annotations) {
    const row: HTMLTableRowElement = annotationRow(a, targets, () => row.remove());
    table.append(row);
  }
  root.append(table);

  const add = el("button", {}, "add row");
  add.addEventListener("click", () => {
    const blank: AnnotationDoc = {
      start_time: 0,
      end_time: 1,
      text: "",
      category: "speech",
    };
    const row: HTMLTableRowElement = annotationRow(blank, targets, () => row.remove());
    table.append(row);
  });

  const save = el("button", {}, "save all");
  save.addEventListener("click", async () => {
    try {
      const res = await client.putAnnotations(pid, collectRows(table), part);
      await redraw(statusLine("ok", `saved ${res.count} annotations`));
    } catch (e) {
      if (!(e instanceof ApiError)) throw e;
      await redraw(statusLine("err", e.message));
    }
  });

  root.append(
    el("div", { class: "actions" }, add, " ", save),
    el(
      "p",
      {},
      el("a", { href: client.exportUrl(pid, "vtt", { part }) }, "export WebVTT"),
    ),
  );
}
