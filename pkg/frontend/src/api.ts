/**
 * Typed client for the stagecam HTTP API.
 *
 * The server owns all state; this module only shapes requests and
 * responses. Mutating calls carry an X-Request-Id header so a retry of
 * the same logical mutation replays the recorded response instead of
 * applying it twice.
 */

export type SourceMeta = {
  width: number;
  height: number;
  fps: number;
  frame_count: number;
};

export type PartInfo = {
  part: number;
  has_poses: boolean;
  has_tracks: boolean;
  rushes: string[];
  labels: string[];
};

export type ProjectInfo = { id: string; meta: SourceMeta; parts: PartInfo[] };

export type TrackletRow = {
  id: number;
  start_frame: number;
  length: number;
  label: string | null;
};

export type TrackletListing = {
  part: number;
  tracklets: TrackletRow[];
  warnings: string[];
};

export type ShotSpecDoc = {
  subjects: string[];
  size: string;
  aspect?: number;
  headroom?: number;
  lead_room?: number;
  margin?: number;
  theta_in?: number;
};

export type RushRow = {
  id: string;
  spec: ShotSpecDoc;
  frames: number;
  violations: number;
};

// optimized rows are [frame, cx, cy, h]; desired rows carry a fifth
// element, the valid flag
export type PathDoc = {
  rush_id: string;
  series: string;
  rho: number;
  width?: number;
  height?: number;
  frames: number[][];
};

export type Cut = [number, string];

export type TimelineDoc = { frame_count: number; cuts: Cut[] };

export type AnnotationDoc = {
  start_time: number;
  end_time: number;
  text: string;
  category: string;
  target?: string;
};

export type JobRecord = {
  id: string;
  kind: string;
  state: "pending" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
};

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export function newRequestId(): string {
  if (typeof crypto !== "undefined" && crypto.randomUUID) {
    return crypto.randomUUID();
  }
  return `req-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export class Client {
  constructor(
    public base = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(
    method: string,
    path: string,
    body?: unknown,
    requestId?: string,
  ): Promise<unknown> {
    const headers: Record<string, string> = {};
    let payload: string | undefined;
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      payload = JSON.stringify(body);
    }
    if (method !== "GET") {
      headers["x-request-id"] = requestId ?? newRequestId();
    }
    const res = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: payload,
    });
    const text = await res.text();
    if (!res.ok) {
      let detail = text;
      try {
        const doc = JSON.parse(text);
        if (doc && typeof doc.detail === "string") detail = doc.detail;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(res.status, detail || `${res.status} on ${path}`);
    }
    return text ? JSON.parse(text) : null;
  }

  private get(path: string): Promise<unknown> {
    return this.request("GET", path);
  }

  async getText(path: string): Promise<string> {
    const res = await this.fetchFn(this.base + path, { method: "GET" });
    const text = await res.text();
    if (!res.ok) throw new ApiError(res.status, text);
    return text;
  }

  getProject(pid: string): Promise<ProjectInfo> {
    return this.get(`/projects/${pid}`) as Promise<ProjectInfo>;
  }

  getTracklets(pid: string, part = 0): Promise<TrackletListing> {
    return this.get(
      `/projects/${pid}/tracklets?part=${part}`,
    ) as Promise<TrackletListing>;
  }

  putLabel(
    pid: string,
    trackletId: number,
    name: string | null,
    part = 0,
  ): Promise<{ id: number; label: string | null }> {
    return this.request(
      "PUT",
      `/projects/${pid}/tracklets/${trackletId}/label?part=${part}`,
      { name },
    ) as Promise<{ id: number; label: string | null }>;
  }

  postRush(
    pid: string,
    spec: ShotSpecDoc,
    part = 0,
  ): Promise<{ job_id: string; rush_id: string }> {
    return this.request("POST", `/projects/${pid}/rushes?part=${part}`, {
      spec,
    }) as Promise<{ job_id: string; rush_id: string }>;
  }

  listRushes(pid: string, part = 0): Promise<{ part: number; rushes: RushRow[] }> {
    return this.get(`/projects/${pid}/rushes?part=${part}`) as Promise<{
      part: number;
      rushes: RushRow[];
    }>;
  }

  getPath(
    rushId: string,
    scale?: string,
    series: "optimized" | "desired" = "optimized",
  ): Promise<PathDoc> {
    const q = new URLSearchParams({ series });
    if (scale) q.set("scale", scale);
    return this.get(`/rushes/${rushId}/path?${q}`) as Promise<PathDoc>;
  }

  getTimeline(pid: string, part = 0): Promise<TimelineDoc> {
    return this.get(
      `/projects/${pid}/timeline?part=${part}`,
    ) as Promise<TimelineDoc>;
  }

  putTimeline(pid: string, doc: TimelineDoc, part = 0): Promise<TimelineDoc> {
    return this.request(
      "PUT",
      `/projects/${pid}/timeline?part=${part}`,
      doc,
    ) as Promise<TimelineDoc>;
  }

  getAnnotations(
    pid: string,
    part = 0,
  ): Promise<{ part: number; annotations: AnnotationDoc[] }> {
    return this.get(`/projects/${pid}/annotations?part=${part}`) as Promise<{
      part: number;
      annotations: AnnotationDoc[];
    }>;
  }

  putAnnotations(
    pid: string,
    annotations: AnnotationDoc[],
    part = 0,
  ): Promise<{ part: number; count: number }> {
    return this.request("PUT", `/projects/${pid}/annotations?part=${part}`, {
      annotations,
    }) as Promise<{ part: number; count: number }>;
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.get(`/jobs/${jobId}`) as Promise<JobRecord>;
  }

  /** Poll a job until it settles; throws ApiError(409) on failure. */
  async waitJob(jobId: string, timeoutMs = 120000, pollMs = 250): Promise<JobRecord> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const rec = await this.getJob(jobId);
      if (rec.state === "done") return rec;
      if (rec.state === "failed") {
        throw new ApiError(409, rec.error ?? `job ${jobId} failed`);
      }
      if (Date.now() >= deadline) {
        throw new ApiError(408, `job ${jobId} still ${rec.state}`);
      }
      await sleep(pollMs);
    }
  }

  exportUrl(
    pid: string,
    fmt: "edl" | "cutlist" | "vtt" | "script",
    opts: { part?: number; rush?: string; scale?: string } = {},
  ): string {
    const q = new URLSearchParams({ part: String(opts.part ?? 0) });
    if (opts.rush) q.set("rush", opts.rush);
    if (opts.scale) q.set("scale", opts.scale);
    return `${this.base}/projects/${pid}/export/${fmt}?${q}`;
  }
}
