/** Dashboard state and the small rules the UI enforces client-side. */

import type {
  CheckerEvalResponse,
  CheckFailureDetail,
  JobPayload,
  LeaderboardEntryPayload,
  LlmReportPayload,
  ResponseReportPayload,
  SolverListing,
  StageKey,
} from "./types.js";

export type Section = "response_eval" | "llm_eval" | "checker_eval" | "leaderboard";

export const SECTIONS: { id: Section; title: string }[] = [
  { id: "response_eval", title: "Check a response" },
  { id: "llm_eval", title: "Evaluate an LLM" },
  { id: "checker_eval", title: "Evaluate a fact-checker" },
  { id: "leaderboard", title: "Leaderboard" },
];

export interface SelectedSolvers {
  claim_processor: string | null;
  retriever: string | null;
  verifier: string | null;
}

export interface UserForm {
  name: string;
  email: string;
  optIn: boolean;
}

export interface DashboardState {
  activeSection: Section;
  solvers: SolverListing | null;
  solversError: string | null;
  selected: SelectedSolvers;
  checkText: string;
  checkReport: ResponseReportPayload | null;
  checkError: CheckFailureDetail | string | null;
  user: UserForm;
  llmJob: JobPayload | null;
  llmReport: LlmReportPayload | null;
  llmError: string | null;
  checkerResult: CheckerEvalResponse | null;
  checkerError: string | null;
  leaderboard: LeaderboardEntryPayload[] | null;
  leaderboardSort: { key: LeaderboardSortKey; descending: boolean } | null;
  uploadInFlight: { llm_eval: boolean; checker_eval: boolean };
}

export type LeaderboardSortKey =
  | "rank"
  | "checker_name"
  | "macro_f1"
  | "accuracy"
  | "total_cost_usd"
  | "total_time_seconds"
  | "submitted_at";

export function initialState(): DashboardState {
  return {
    activeSection: "response_eval",
    solvers: null,
    solversError: null,
    selected: { claim_processor: null, retriever: null, verifier: null },
    checkText: "",
    checkReport: null,
    checkError: null,
    user: { name: "", email: "", optIn: true },
    llmJob: null,
    llmReport: null,
    llmError: null,
    checkerResult: null,
    checkerError: null,
    leaderboard: null,
    leaderboardSort: null,
    uploadInFlight: { llm_eval: false, checker_eval: false },
  };
}

/**
 * Select a solver for one stage. Names not present in the GET-served
 * listing are rejected: the dropdowns are the only source of truth.
 */
export function selectSolver(
  state: DashboardState,
  stage: StageKey,
  name: string,
): boolean {
  const listing = state.solvers;
  if (!listing || !listing[stage].includes(name)) {
    return false;
  }
  state.selected[stage] = name;
  return true;
}

const EMAIL_PATTERN = /^[^\s@]+@[^\s@]+\.[^\s@]+$/;

export function validateUserForm(user: UserForm): string[] {
  const problems: string[] = [];
  if (!user.name.trim()) {
    problems.push("name must not be empty");
  }
  if (!EMAIL_PATTERN.test(user.email)) {
    problems.push("email address looks invalid");
  }
  return problems;
}

export function canSubmitCheck(state: DashboardState): boolean {
  return (
    state.checkText.trim().length > 0 &&
    state.selected.claim_processor !== null &&
    state.selected.retriever !== null &&
    state.selected.verifier !== null
  );
}

/** Client-side reordering of server-ranked rows; no values are computed. */
export function sortLeaderboard(
  entries: LeaderboardEntryPayload[],
  key: LeaderboardSortKey,
  descending: boolean,
): LeaderboardEntryPayload[] {
  const value = (entry: LeaderboardEntryPayload): string | number => {
    switch (key) {
      case "rank":
        return entry.rank;
      case "checker_name":
        return entry.checker_name;
      case "macro_f1":
        return entry.macro_f1;
      case "accuracy":
        return entry.metrics.accuracy;
      case "total_cost_usd":
        return entry.metrics.total_cost_usd;
      case "total_time_seconds":
        return entry.metrics.total_time_seconds;
      case "submitted_at":
        return entry.submitted_at;
    }
  };
  const sorted = [...entries].sort((a, b) => {
    const left = value(a);
    const right = value(b);
    if (left === right) {
      return a.rank - b.rank;
    }
    const ordered = left < right ? -1 : 1;
    return descending ? -ordered : ordered;
  });
  return sorted;
}
