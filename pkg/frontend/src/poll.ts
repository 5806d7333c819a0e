/** Job polling: 5 s base interval with multiplicative backoff and a cap. */

import type { JobPayload } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  backoffFactor?: number;
  maxIntervalMs?: number;
  maxAttempts?: number;
  sleep?: (ms: number) => Promise<void>;
  onUpdate?: (payload: JobPayload) => void;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class JobFailedError extends Error {
  constructor(readonly payload: JobPayload) {
    super(payload.job.error ?? `job ${payload.job.id} failed`);
    this.name = "JobFailedError";
  }
}

export async function pollJob(
  getJob: (jobId: string) => Promise<JobPayload>,
  jobId: string,
  options: PollOptions = {},
): Promise<JobPayload> {
  const {
    intervalMs = 5000,
    backoffFactor = 1.5,
    maxIntervalMs = 30000,
    maxAttempts = 120,
    sleep = defaultSleep,
    onUpdate,
  } = options;

  let wait = intervalMs;
  for (let attempt = 0; attempt < maxAttempts; attempt += 1) {
    const payload = await getJob(jobId);
    onUpdate?.(payload);
    if (payload.job.status === "done") {
      return payload;
    }
    if (payload.job.status === "failed") {
      throw new JobFailedError(payload);
    }
    await sleep(wait);
    wait = Math.min(wait * backoffFactor, maxIntervalMs);
  }
  throw new Error(`job ${jobId} did not finish within ${maxAttempts} polls`);
}
