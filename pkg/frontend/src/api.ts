/** Thin HTTP client for the solver API plus the manual-mode polling
 * loop.  `fetch` is injected so tests can stub the server. */

import { Catalog, JobState, Trace } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export interface JobRequest {
  puzzle?: string;
  instance?: string;
  spec_id?: string;
  mode?: "auto" | "manual" | "force";
  force?: string;
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request<T>(
    path: string,
    init?: Parameters<FetchLike>[1],
  ): Promise<T> {
    const res = await this.fetchImpl(this.base + path, init);
    if (res.status >= 400) {
      throw new ApiError(res.status, `${init?.method ?? "GET"} ${path}`);
    }
    return (await res.json()) as T;
  }

  catalog(): Promise<Catalog> {
    return this.request("/catalog");
  }

  async createJob(req: JobRequest): Promise<string> {
    const out = await this.request<{ id: string }>("/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    return out.id;
  }

  job(id: string): Promise<JobState> {
    return this.request(`/jobs/${id}`);
  }

  async choose(id: string, index: number): Promise<void> {
    try {
      await this.request(`/jobs/${id}/choice`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ index }),
      });
    } catch (e) {
      // a 409 means the job moved on; the poll loop re-fetches state
      if (!(e instanceof ApiError && e.status === 409)) throw e;
    }
  }
}

export interface PollCallbacks {
  /** Called on every state refresh. */
  onState?: (state: JobState) => void;
  /** Manual mode: pick one of the tied-MUS options; return its index. */
  onChoice?: (state: JobState) => number | Promise<number>;
}

/** Poll one job to completion, posting choices when the job asks for
 * them.  Resolves with the final trace. */
export async function runJob(
  client: ApiClient,
  id: string,
  callbacks: PollCallbacks = {},
  intervalMs = 150,
  sleep: (ms: number) => Promise<void> = (ms) =>
    new Promise((r) => setTimeout(r, ms)),
): Promise<Trace> {
  for (;;) {
    const state = await client.job(id);
    callbacks.onState?.(state);
    if (state.status === "failed") {
      throw new ApiError(500, state.error ?? "job failed");
    }
    if (state.status === "done") {
      if (!state.result) throw new ApiError(500, "done without result");
      return state.result;
    }
    if (state.awaiting_choice && state.choices?.length) {
      const pick = callbacks.onChoice
        ? await callbacks.onChoice(state)
        : 0;
      await client.choose(id, pick);
      continue;
    }
    await sleep(intervalMs);
  }
}
