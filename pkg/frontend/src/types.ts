/** Payload shapes of the /v1 service endpoints (mirrored, never computed). */

export type VerdictLabel = "true" | "false" | "unknown";

export interface SolverListing {
  claim_processor: string[];
  retriever: string[];
  verifier: string[];
}

export type StageKey = keyof SolverListing;

export interface ClaimPayload {
  id: string;
  text: string;
  source_span?: [number, number];
  context?: string;
}

export interface VerdictPayload {
  label: VerdictLabel;
  unknown_reason?: string;
  supporting_evidence: string[];
}

export interface ClaimReportPayload {
  claim: ClaimPayload;
  verdict: VerdictPayload;
  evidence_count: number;
}

export interface ResponseReportPayload {
  document: string;
  claims: ClaimReportPayload[];
  credibility?: number;
  overall: VerdictLabel;
  ledger_totals: { time_seconds: number; cost_usd: number };
}

export interface CheckFailureDetail {
  error: string;
  solver: string;
  stage: string;
}

export interface ClassMetricsPayload {
  precision: number;
  recall: number;
  f1: number;
}

export interface ConfusionPayload {
  labels: string[];
  matrix: number[][];
}

export interface CheckerMetricsPayload {
  n: number;
  accuracy: number;
  true: ClassMetricsPayload;
  false: ClassMetricsPayload;
  confusion: ConfusionPayload;
  n_gold_unknown: number;
  total_time_seconds: number;
  total_cost_usd: number;
}

export interface CheckerEvalResponse {
  entry_id: string;
  metrics: CheckerMetricsPayload;
  macro_f1: number;
  rank: number | null;
  coverage: { missing_ids: string[] };
}

export interface LeaderboardEntryPayload {
  rank: number;
  entry_id: string;
  checker_name: string;
  submitter: { name: string; opt_in: boolean };
  metrics: CheckerMetricsPayload;
  macro_f1: number;
  submitted_at: string;
}

export interface LeaderboardPayload {
  entries: LeaderboardEntryPayload[];
}

export interface LabeledValue {
  label: string;
  value: number;
}

export interface SubsetBlock {
  n_evaluated: number;
  accuracy?: number;
  confusion?: { row_labels: string[]; col_labels: string[]; matrix: number[][] };
  n_unparseable?: number;
  pie?: LabeledValue[];
  bars?: LabeledValue[];
  claims?: { true: number; false: number; unknown: number };
  n_undefined?: number;
}

export interface LlmReportPayload {
  model_name: string;
  subsets: Record<string, SubsetBlock>;
  error_types: Record<string, { n: number; accuracy?: number; correct_count?: number }>;
  totals: { n_evaluated: number; cost_usd: number; time_seconds: number };
  coverage: { missing_ids: string[]; skipped: { id: string; reason: string }[] };
}

export interface JobPayload {
  job: {
    id: string;
    kind: string;
    status: "queued" | "running" | "done" | "failed";
    error: string | null;
    result_ref: string | null;
    timestamps: Record<string, string | null>;
  };
  report?: LlmReportPayload;
}

/** Canonical subset order used by the report page. */
export const SUBSET_ORDER = [
  "snowballing",
  "selfaware",
  "freshqa",
  "factoolqa",
  "felm-wk",
  "factcheck-bench",
  "factscore-bio",
] as const;
