import { expect, test } from "vitest";

import { ApiError, Client, newRequestId } from "../src/api.js";

type Call = { url: string; method: string; headers: Record<string, string>; body?: string };

function scripted(responses: Array<{ status?: number; body?: unknown }>) {
  const calls: Call[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body as string | undefined,
    });
    const next = responses.shift() ?? { status: 200, body: {} };
    const payload =
      typeof next.body === "string" ? next.body : JSON.stringify(next.body ?? {});
    return new Response(payload, { status: next.status ?? 200 });
  };
  return { calls, fetchFn };
}

test("label mutation sends json with a request id", async () => {
  const { calls, fetchFn } = scripted([{ body: { id: 2, label: "alice" } }]);
  const client = new Client("http://api", fetchFn);
  const res = await client.putLabel("p1", 2, "alice", 0);
  expect(res.label).toBe("alice");
  expect(calls[0].method).toBe("PUT");
  expect(calls[0].url).toBe("http://api/projects/p1/tracklets/2/label?part=0");
  expect(calls[0].headers["content-type"]).toBe("application/json");
  expect(calls[0].headers["x-request-id"]).toBeTruthy();
  expect(JSON.parse(calls[0].body!)).toEqual({ name: "alice" });
});

test("request ids are fresh per mutation", () => {
  expect(newRequestId()).not.toBe(newRequestId());
});

test("plain reads carry no request id", async () => {
  const { calls, fetchFn } = scripted([
    { body: { id: "p1", meta: {}, parts: [] } },
  ]);
  await new Client("", fetchFn).getProject("p1");
  expect(calls[0].headers["x-request-id"]).toBeUndefined();
});

test("error responses surface the detail field", async () => {
  const { fetchFn } = scripted([
    { status: 409, body: { detail: "timeline invariant violated: bad" } },
  ]);
  const client = new Client("", fetchFn);
  const err = await client
    .putTimeline("p1", { frame_count: 10, cuts: [[0, "r"]] })
    .catch((e) => e);
  expect(err).toBeInstanceOf(ApiError);
  expect(err.status).toBe(409);
  expect(err.message).toBe("timeline invariant violated: bad");
});

test("non json error bodies fall back to the raw text", async () => {
  const { fetchFn } = scripted([{ status: 500, body: "boom" }]);
  const err = await new Client("", fetchFn).getProject("p").catch((e) => e);
  expect(err.status).toBe(500);
  expect(err.message).toBe("boom");
});

test("path requests build scale and series query params", async () => {
  const { calls, fetchFn } = scripted([
    { body: { rush_id: "p.0.r0", series: "optimized", rho: 1.5, frames: [] } },
  ]);
  await new Client("", fetchFn).getPath("p.0.r0", "1920x1080", "desired");
  expect(calls[0].url).toBe("/rushes/p.0.r0/path?series=desired&scale=1920x1080");
});

test("job polling resolves once the job is done", async () => {
  const rec = (state: string) => ({
    body: { id: "p.j0", kind: "track", state, progress: 0, error: null },
  });
  const { calls, fetchFn } = scripted([rec("pending"), rec("running"), rec("done")]);
  const out = await new Client("", fetchFn).waitJob("p.j0", 5000, 1);
  expect(out.state).toBe("done");
  expect(calls.length).toBe(3);
});

test("job polling raises the job error on failure", async () => {
  const { fetchFn } = scripted([
    {
      body: {
        id: "p.j0",
        kind: "track",
        state: "failed",
        progress: 0,
        error: "missing prerequisite: no poses",
      },
    },
  ]);
  const err = await new Client("", fetchFn).waitJob("p.j0", 5000, 1).catch((e) => e);
  expect(err).toBeInstanceOf(ApiError);
  expect(err.message).toBe("missing prerequisite: no poses");
});

test("export urls include part, rush and scale", () => {
  const client = new Client("http://api");
  expect(client.exportUrl("p1", "vtt")).toBe(
    "http://api/projects/p1/export/vtt?part=0",
  );
  expect(
    client.exportUrl("p1", "edl", { part: 1, rush: "p1.1.r0", scale: "1920x1080" }),
  ).toBe("http://api/projects/p1/export/edl?part=1&rush=p1.1.r0&scale=1920x1080");
});
