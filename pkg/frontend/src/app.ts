/** Headless dashboard controller: state transitions plus API calls.
 * main.ts binds it to the DOM; tests drive it directly. */

import { ApiClient, ApiError } from "./api.js";
import type { UploadFile } from "./api.js";
import { pollJob, JobFailedError } from "./poll.js";
import type { PollOptions } from "./poll.js";
import {
  canSubmitCheck,
  initialState,
  selectSolver,
  validateUserForm,
} from "./state.js";
import type { DashboardState, LeaderboardSortKey, Section } from "./state.js";
import { renderApp } from "./render.js";
import type { CheckFailureDetail, StageKey } from "./types.js";

function describeApiError(error: unknown): string {
  if (error instanceof ApiError) {
    return typeof error.detail === "string"
      ? error.detail
      : JSON.stringify(error.detail);
  }
  return String(error);
}

export class App {
  readonly state: DashboardState;

  constructor(
    private readonly api: ApiClient,
    private readonly pollOptions: PollOptions = {},
  ) {
    this.state = initialState();
  }

  render(): string {
    return renderApp(this.state);
  }

  async init(): Promise<void> {
    await this.loadSolvers();
  }

  async loadSolvers(): Promise<void> {
    try {
      this.state.solvers = await this.api.listSolvers();
      this.state.solversError = null;
    } catch (error) {
      this.state.solversError = describeApiError(error);
    }
  }

  async setSection(section: Section): Promise<void> {
    this.state.activeSection = section;
    if (section === "leaderboard") {
      await this.loadLeaderboard();
    }
  }

  selectSolver(stage: StageKey, name: string): boolean {
    return selectSolver(this.state, stage, name);
  }

  setCheckText(text: string): void {
    this.state.checkText = text;
  }

  setUser(fields: Partial<DashboardState["user"]>): void {
    Object.assign(this.state.user, fields);
  }

  async submitCheck(): Promise<void> {
    if (!canSubmitCheck(this.state)) {
      return;
    }
    this.state.checkReport = null;
    this.state.checkError = null;
    try {
      this.state.checkReport = await this.api.check({
        text: this.state.checkText,
        solvers: {
          claim_processor: this.state.selected.claim_processor!,
          retriever: this.state.selected.retriever!,
          verifier: this.state.selected.verifier!,
        },
      });
    } catch (error) {
      if (error instanceof ApiError && typeof error.detail === "object" && error.detail !== null && "solver" in error.detail) {
        this.state.checkError = error.detail as CheckFailureDetail;
      } else {
        this.state.checkError = describeApiError(error);
      }
    }
  }

  async uploadCheckerCsv(checkerName: string, file: UploadFile): Promise<void> {
    if (this.state.uploadInFlight.checker_eval) {
      return;
    }
    const problems = validateUserForm(this.state.user);
    if (problems.length) {
      this.state.checkerError = problems.join("; ");
      return;
    }
    this.state.uploadInFlight.checker_eval = true;
    this.state.checkerError = null;
    this.state.checkerResult = null;
    try {
      this.state.checkerResult = await this.api.submitCheckerEval(
        checkerName,
        {
          name: this.state.user.name,
          email: this.state.user.email,
          optIn: this.state.user.optIn,
        },
        file,
      );
    } catch (error) {
      this.state.checkerError = describeApiError(error);
    } finally {
      this.state.uploadInFlight.checker_eval = false;
    }
  }

  async uploadLlmCsv(modelName: string, file: UploadFile): Promise<void> {
    if (this.state.uploadInFlight.llm_eval) {
      return;
    }
    const problems = validateUserForm(this.state.user);
    if (problems.length) {
      this.state.llmError = problems.join("; ");
      return;
    }
    this.state.uploadInFlight.llm_eval = true;
    this.state.llmError = null;
    this.state.llmReport = null;
    this.state.llmJob = null;
    try {
      const { job_id } = await this.api.submitLlmEval(
        modelName,
        {
          name: this.state.user.name,
          email: this.state.user.email,
          optIn: this.state.user.optIn,
        },
        file,
      );
      const payload = await pollJob((id) => this.api.getLlmEval(id), job_id, {
        ...this.pollOptions,
        onUpdate: (update) => {
          this.state.llmJob = update;
          this.pollOptions.onUpdate?.(update);
        },
      });
      this.state.llmJob = payload;
      this.state.llmReport = payload.report ?? null;
    } catch (error) {
      if (error instanceof JobFailedError) {
        this.state.llmJob = error.payload;
        this.state.llmError = error.payload.job.error ?? "job failed";
      } else {
        this.state.llmError = describeApiError(error);
      }
    } finally {
      this.state.uploadInFlight.llm_eval = false;
    }
  }

  async loadLeaderboard(): Promise<void> {
    try {
      const payload = await this.api.getLeaderboard();
      this.state.leaderboard = payload.entries;
    } catch (error) {
      this.state.leaderboard = [];
      this.state.checkerError = describeApiError(error);
    }
  }

  sortLeaderboardBy(key: LeaderboardSortKey): void {
    const current = this.state.leaderboardSort;
    this.state.leaderboardSort = {
      key,
      descending: current?.key === key ? !current.descending : false,
    };
  }
}
