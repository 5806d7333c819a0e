/** Typed client over the /v1 endpoints; the only place that talks HTTP. */

import type {
  CheckerEvalResponse,
  JobPayload,
  LeaderboardPayload,
  ResponseReportPayload,
  SolverListing,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

export interface CheckRequest {
  text: string;
  config_name?: string;
  solvers?: { claim_processor: string; retriever: string; verifier: string };
}

export interface UserFields {
  name: string;
  email: string;
  optIn: boolean;
}

export interface UploadFile {
  name: string;
  content: string;
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? (body as { detail: unknown }).detail
        : body ?? response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listSolvers(): Promise<SolverListing> {
    const response = await this.fetchFn(this.url("/v1/solvers"));
    return parseOrThrow<SolverListing>(response);
  }

  async check(request: CheckRequest): Promise<ResponseReportPayload> {
    const response = await this.fetchFn(this.url("/v1/check"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return parseOrThrow<ResponseReportPayload>(response);
  }

  private userForm(user: UserFields): FormData {
    const form = new FormData();
    form.append("user_name", user.name);
    form.append("user_email", user.email);
    form.append("opt_in", user.optIn ? "true" : "false");
    return form;
  }

  async submitLlmEval(
    modelName: string,
    user: UserFields,
    file: UploadFile,
  ): Promise<{ job_id: string }> {
    const form = this.userForm(user);
    form.append("model_name", modelName);
    form.append("file", new Blob([file.content], { type: "text/csv" }), file.name);
    const response = await this.fetchFn(this.url("/v1/llm-eval"), {
      method: "POST",
      body: form,
    });
    return parseOrThrow<{ job_id: string }>(response);
  }

  async getLlmEval(jobId: string): Promise<JobPayload> {
    const response = await this.fetchFn(this.url(`/v1/llm-eval/${jobId}`));
    return parseOrThrow<JobPayload>(response);
  }

  async submitCheckerEval(
    checkerName: string,
    user: UserFields,
    file: UploadFile,
  ): Promise<CheckerEvalResponse> {
    const form = this.userForm(user);
    form.append("checker_name", checkerName);
    form.append("file", new Blob([file.content], { type: "text/csv" }), file.name);
    const response = await this.fetchFn(this.url("/v1/checker-eval"), {
      method: "POST",
      body: form,
    });
    return parseOrThrow<CheckerEvalResponse>(response);
  }

  async getLeaderboard(): Promise<LeaderboardPayload> {
    const response = await this.fetchFn(this.url("/v1/leaderboard"));
    return parseOrThrow<LeaderboardPayload>(response);
  }

  datasetUrl(name: "factqa" | "factbench"): string {
    return this.url(`/v1/datasets/${name}`);
  }
}
