/** Thin fetch client for the triage service. All state lives server-side;
 *  this module only maps endpoints to typed calls. */

import type {
  Job,
  KappaResponse,
  LessonsResponse,
  MistakesResponse,
  ReportPayload,
  RunDetail,
  RunSummary,
  TagsResponse,
  TaxonomyResponse,
  Variant,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface TagSubmission {
  reviewer_id: string;
  taxonomy_version: string;
  tags: Record<string, string[]>;
  base_version?: string;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string | null = null,
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      ...(init.headers as Record<string, string> | undefined),
    };
    if (init.body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(this.baseUrl.replace(/\/$/, "") + path, {
      ...init,
      headers,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request("/runs");
  }

  getRun(runId: string): Promise<RunDetail> {
    return this.request(`/runs/${runId}`);
  }

  getReport(runId: string): Promise<ReportPayload> {
    return this.request(`/runs/${runId}/report`);
  }

  getReportText(runId: string): Promise<{ text: string }> {
    return this.request(`/runs/${runId}/report?format=text`);
  }

  getMistakes(runId: string, variant: Variant = "without"): Promise<MistakesResponse> {
    return this.request(`/runs/${runId}/mistakes?variant=${variant}`);
  }

  getPrevalence(runId: string): Promise<Record<string, unknown>> {
    return this.request(`/runs/${runId}/prevalence`);
  }

  getLessons(): Promise<LessonsResponse> {
    return this.request("/lessons");
  }

  postLessons(payload: LessonsResponse["payload"]): Promise<{ version: string }> {
    return this.request("/lessons", { method: "POST", body: JSON.stringify(payload) });
  }

  getTaxonomy(): Promise<TaxonomyResponse> {
    return this.request("/taxonomy");
  }

  postTaxonomy(payload: TaxonomyResponse["payload"]): Promise<{ version: string }> {
    return this.request("/taxonomy", { method: "POST", body: JSON.stringify(payload) });
  }

  postTags(runId: string, submission: TagSubmission): Promise<{ version: string }> {
    return this.request(`/runs/${runId}/tags`, {
      method: "POST",
      body: JSON.stringify(submission),
    });
  }

  getTags(runId: string): Promise<TagsResponse> {
    return this.request(`/runs/${runId}/tags`);
  }

  getKappa(runId: string): Promise<KappaResponse> {
    return this.request(`/runs/${runId}/kappa`);
  }

  triggerRun(body: {
    kind: "eval" | "ablation" | "mine";
    lesson_ids?: number[];
    lessons_version?: string;
    run_id?: string;
  }): Promise<Job> {
    return this.request("/runs", { method: "POST", body: JSON.stringify(body) });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/jobs/${jobId}`);
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** Poll a job until it settles; rejects on failure or timeout. */
export async function pollJob(api: ApiClient, job: Job, options: PollOptions = {}): Promise<Job> {
  const interval = options.intervalMs ?? 500;
  const timeout = options.timeoutMs ?? 60_000;
  const sleep = options.sleep ?? defaultSleep;
  const startedAt = Date.now();
  let current = job;
  while (current.status === "running") {
    if (Date.now() - startedAt > timeout) {
      throw new Error(`job ${job.job_id} still running after ${timeout}ms`);
    }
    await sleep(interval);
    current = await api.getJob(job.job_id);
  }
  if (current.status === "failed") {
    throw new Error(`job ${job.job_id} failed: ${current.error ?? "unknown error"}`);
  }
  return current;
}
