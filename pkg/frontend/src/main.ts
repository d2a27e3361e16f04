/**
 * Entry point: a hash router over the four views. The route carries the
 * whole navigation state (#/{project}/{view}/{part}); nothing renders
 * from anything but the route plus fresh API responses, so reloading at
 * any moment reproduces the same screen.
 */

import { ApiError, Client } from "./api.js";
import { clear, el } from "./dom.js";
import { renderAnnotations } from "./views/annotations.js";
import { renderEditing } from "./views/editing.js";
import { renderFraming } from "./views/framing.js";
import { renderLabeling } from "./views/labeling.js";

type Route = { pid: string | null; view: string; part: number };

const VIEWS = ["label", "frame", "edit", "notes"] as const;

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p !== "");
  if (parts.length === 0) return { pid: null, view: "label", part: 0 };
  const view = parts[1] && (VIEWS as readonly string[]).includes(parts[1])
    ? parts[1]
    : "label";
  const part = parts[2] ? Number(parts[2]) : 0;
  return { pid: parts[0], view, part: Number.isFinite(part) ? part : 0 };
}

function landing(root: HTMLElement): void {
  clear(root);
  const input = el("input", { placeholder: "project id" });
  const open = el("button", {}, "open");
  open.addEventListener("click", () => {
    const pid = input.value.trim();
    if (pid) location.hash = `#/${pid}/label/0`;
  });
  root.append(
    el("h2", {}, "open a project"),
    el("p", {}, "paste the project id printed by ingest"),
    el("div", {}, input, " ", open),
  );
}

function nav(route: Route, partCount: number): HTMLElement {
  const bar = el("nav", {});
  for (const v of VIEWS) {
    const a = el(
      "a",
      {
        href: `#/${route.pid}/${v}/${route.part}`,
        class: v === route.view ? "current" : "",
      },
      v,
    );
    bar.append(a);
  }
  const partSel = el("select", {});
  for (let p = 0; p < partCount; p++) {
    partSel.append(el("option", { value: String(p) }, `part ${p}`));
  }
  partSel.value = String(route.part);
  partSel.addEventListener("change", () => {
    location.hash = `#/${route.pid}/${route.view}/${partSel.value}`;
  });
  bar.append(partSel);
  bar.append(el("a", { href: "#/", class: "home" }, "switch project"));
  return bar;
}

export async function renderRoute(
  app: HTMLElement,
  client: Client,
  hash: string,
): Promise<void> {
  const route = parseRoute(hash);
  clear(app);
  if (!route.pid) {
    landing(app);
    return;
  }
  const body = el("main", {});
  try {
    const project = await client.getProject(route.pid);
    app.append(
      el("header", {}, el("h1", {}, `stagecam ${project.id}`),
        nav(route, Math.max(1, project.parts.length))),
      body,
    );
    if (route.view === "label") {
      await renderLabeling(body, client, route.pid, route.part);
    } else if (route.view === "frame") {
      await renderFraming(body, client, route.pid, route.part);
    } else if (route.view === "edit") {
      await renderEditing(body, client, route.pid, route.part);
    } else {
      await renderAnnotations(body, client, route.pid, route.part);
    }
  } catch (e) {
    if (!(e instanceof ApiError)) throw e;
    clear(app);
    app.append(
      el("p", { class: "status err" }, `${e.status}: ${e.message}`),
      el("p", {}, el("a", { href: "#/" }, "back")),
    );
  }
}

function start(): void {
  const app = document.getElementById("app");
  if (!app) return;
  const base = new URLSearchParams(location.search).get("api") ?? "";
  const client = new Client(base);
  const rerender = () => void renderRoute(app, client, location.hash);
  window.addEventListener("hashchange", rerender);
  rerender();
}

// tests import the pieces; the browser runs start()
if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
