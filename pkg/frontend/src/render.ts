/** Pure HTML renderers. Every number shown comes from a payload field;
 * this module formats and arranges, it never computes metrics. */

import type {
  CheckerMetricsPayload,
  CheckFailureDetail,
  ClaimReportPayload,
  JobPayload,
  LabeledValue,
  LeaderboardEntryPayload,
  LlmReportPayload,
  ResponseReportPayload,
  SolverListing,
  SubsetBlock,
} from "./types.js";
import { SUBSET_ORDER } from "./types.js";
import type { DashboardState, LeaderboardSortKey, Section } from "./state.js";
import { SECTIONS, canSubmitCheck, sortLeaderboard, validateUserForm } from "./state.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

function capitalize(label: string): string {
  return label.charAt(0).toUpperCase() + label.slice(1);
}

function rate(value: number): string {
  return value.toFixed(3);
}

/** "50% · False" badge; credibility may be absent (all claims unknown). */
export function credibilityBadge(report: ResponseReportPayload): string {
  const label = capitalize(report.overall);
  const percent =
    report.credibility === undefined
      ? "n/a"
      : `${Math.round(report.credibility * 100)}%`;
  return `<span class="badge badge-${report.overall}">${percent} · ${escapeHtml(label)}</span>`;
}

export function renderNav(active: Section): string {
  const items = SECTIONS.map(({ id, title }) => {
    const current = id === active ? ' class="active"' : "";
    return `<li${current}><a href="#${id}" data-section="${id}">${escapeHtml(title)}</a></li>`;
  });
  return `<nav><ul>${items.join("")}</ul></nav>`;
}

export function renderErrorBanner(message: string, retry = false): string {
  const retryButton = retry
    ? '<button type="button" data-action="retry">Retry</button>'
    : "";
  return `<div class="banner banner-error">${escapeHtml(message)}${retryButton}</div>`;
}

export function renderCheckFailure(detail: CheckFailureDetail | string): string {
  if (typeof detail === "string") {
    return renderErrorBanner(detail);
  }
  return renderErrorBanner(
    `Solver ${detail.solver} (${detail.stage}) failed: ${detail.error}`,
  );
}

function solverDropdown(stage: keyof SolverListing, options: string[], selected: string | null): string {
  const rendered = options
    .map((name) => {
      const chosen = name === selected ? " selected" : "";
      return `<option value="${escapeHtml(name)}"${chosen}>${escapeHtml(name)}</option>`;
    })
    .join("");
  const placeholder = selected === null ? '<option value="" selected disabled>choose…</option>' : "";
  return (
    `<label class="solver-pick">${escapeHtml(stage)}` +
    `<select data-stage="${stage}">${placeholder}${rendered}</select></label>`
  );
}

export function renderClaimCard(claimReport: ClaimReportPayload): string {
  const { claim, verdict, evidence_count } = claimReport;
  const reason = verdict.unknown_reason
    ? `<span class="reason">(${escapeHtml(verdict.unknown_reason)})</span>`
    : "";
  return (
    `<article class="claim-card verdict-${verdict.label}">` +
    `<p class="claim-text">${escapeHtml(claim.text)}</p>` +
    `<p class="claim-meta"><span class="chip chip-${verdict.label}">${capitalize(verdict.label)}</span>${reason}` +
    `<span class="evidence-count">${evidence_count} evidence</span></p>` +
    `</article>`
  );
}

export function renderCheckPage(state: DashboardState): string {
  if (state.solversError) {
    return renderErrorBanner(
      `Cannot reach the evaluation service: ${state.solversError}`,
      true,
    );
  }
  if (!state.solvers) {
    return '<p class="loading">Loading solver registry…</p>';
  }
  const dropdowns =
    solverDropdown("claim_processor", state.solvers.claim_processor, state.selected.claim_processor) +
    solverDropdown("retriever", state.solvers.retriever, state.selected.retriever) +
    solverDropdown("verifier", state.solvers.verifier, state.selected.verifier);
  const disabled = canSubmitCheck(state) ? "" : " disabled";
  let results = "";
  if (state.checkError) {
    results = renderCheckFailure(state.checkError);
  } else if (state.checkReport) {
    const cards = state.checkReport.claims.map(renderClaimCard).join("");
    results =
      `<section class="check-results">` +
      `<h3>Verdict ${credibilityBadge(state.checkReport)}</h3>` +
      `<div class="claim-cards">${cards}</div>` +
      `</section>`;
  }
  return (
    `<section class="check-page">` +
    `<div class="solver-picks">${dropdowns}</div>` +
    `<textarea data-field="check-text" rows="5" placeholder="Paste the text to fact-check">${escapeHtml(state.checkText)}</textarea>` +
    `<button type="button" data-action="check"${disabled}>Check Factuality</button>` +
    results +
    `</section>`
  );
}

// --- upload flows ---------------------------------------------------------

function userFormBlock(state: DashboardState): string {
  const problems = validateUserForm(state.user);
  const note = state.user.optIn
    ? ""
    : '<p class="private-note">Leaderboard opt-out: your result stays private and will not be listed.</p>';
  const problemList = problems.length
    ? `<ul class="form-problems">${problems.map((p) => `<li>${escapeHtml(p)}</li>`).join("")}</ul>`
    : "";
  return (
    `<fieldset class="user-form">` +
    `<label>Name<input data-field="user-name" value="${escapeHtml(state.user.name)}"></label>` +
    `<label>Email<input data-field="user-email" value="${escapeHtml(state.user.email)}"></label>` +
    `<label class="opt-in"><input type="checkbox" data-field="opt-in"${state.user.optIn ? " checked" : ""}>Show me on the public leaderboard</label>` +
    note +
    problemList +
    `</fieldset>`
  );
}

export function renderUploadFlow(state: DashboardState, section: Section): string {
  if (section === "llm_eval") {
    const busy = state.uploadInFlight.llm_eval;
    let status = "";
    if (state.llmError) {
      status = renderErrorBanner(state.llmError);
    } else if (state.llmReport) {
      status = renderLlmReport(state.llmReport);
    } else if (state.llmJob) {
      status = renderJobStatus(state.llmJob);
    }
    return (
      `<section class="upload-flow">` +
      `<p><a href="/v1/datasets/factqa" download>Download the question set</a>, run your model, then upload its responses (CSV: question_id,response).</p>` +
      userFormBlock(state) +
      `<label>Model name<input data-field="model-name"></label>` +
      `<input type="file" data-field="llm-file" accept=".csv">` +
      `<button type="button" data-action="upload-llm"${busy ? " disabled" : ""}>${busy ? "Uploading…" : "Upload responses"}</button>` +
      status +
      `</section>`
    );
  }
  const busy = state.uploadInFlight.checker_eval;
  let results = "";
  if (state.checkerError) {
    results = renderErrorBanner(state.checkerError);
  } else if (state.checkerResult) {
    results = renderCheckerMetrics(state.checkerResult.metrics, state.checkerResult.rank);
  }
  return (
    `<section class="upload-flow">` +
    `<p><a href="/v1/datasets/factbench" download>Download the gold claims</a>, run your fact-checker, then upload its verdicts (CSV: claim_id,verdict[,time_s[,cost_usd]]).</p>` +
    userFormBlock(state) +
    `<label>Checker name<input data-field="checker-name"></label>` +
    `<input type="file" data-field="checker-file" accept=".csv">` +
    `<button type="button" data-action="upload-checker"${busy ? " disabled" : ""}>${busy ? "Uploading…" : "Upload verdicts"}</button>` +
    results +
    `</section>`
  );
}

export function renderJobStatus(payload: JobPayload): string {
  const { job } = payload;
  return (
    `<div class="job-status status-${job.status}">` +
    `<p>Job <code>${escapeHtml(job.id)}</code>: <strong>${escapeHtml(job.status)}</strong>` +
    (job.error ? ` — ${escapeHtml(job.error)}` : "") +
    `</p></div>`
  );
}

// --- report rendering ---------------------------------------------------------

export function renderConfusionHeatmap(
  rowLabels: string[],
  colLabels: string[],
  matrix: number[][],
): string {
  const peak = Math.max(1, ...matrix.flat());
  const header = colLabels
    .map((label) => `<th scope="col">${escapeHtml(label)}</th>`)
    .join("");
  const rows = matrix
    .map((cells, rowIndex) => {
      const rendered = cells
        .map((cell) => {
          const intensity = (cell / peak).toFixed(2);
          return `<td class="heat" style="--heat:${intensity}">${cell}</td>`;
        })
        .join("");
      return `<tr><th scope="row">${escapeHtml(rowLabels[rowIndex] ?? "")}</th>${rendered}</tr>`;
    })
    .join("");
  return (
    `<table class="confusion"><thead><tr><th>gold \\ predicted</th>${header}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

/** Segments sized by the payload's percentage values; they sum to 100
 * modulo the service's own rounding. */
export function renderBars(bars: LabeledValue[]): string {
  const segments = bars
    .map(
      (bar) =>
        `<span class="bar-segment bar-${escapeHtml(bar.label)}" style="width:${bar.value}%" title="${escapeHtml(bar.label)} ${bar.value}%">${escapeHtml(bar.label)} ${bar.value}%</span>`,
    )
    .join("");
  return `<div class="bars">${segments}</div>`;
}

export function renderPie(pie: LabeledValue[]): string {
  const total = pie.reduce((sum, slice) => sum + slice.value, 0) || 1;
  let angle = 0;
  const stops: string[] = [];
  pie.forEach((slice, index) => {
    const start = (angle / total) * 360;
    angle += slice.value;
    const end = (angle / total) * 360;
    stops.push(`var(--pie-${index}) ${start.toFixed(1)}deg ${end.toFixed(1)}deg`);
  });
  const legend = pie
    .map(
      (slice, index) =>
        `<li class="pie-legend-${index}">${escapeHtml(slice.label)}: ${slice.value}</li>`,
    )
    .join("");
  return (
    `<div class="pie-wrap"><div class="pie" style="background:conic-gradient(${stops.join(",")})"></div>` +
    `<ul class="pie-legend">${legend}</ul></div>`
  );
}

function subsetCard(name: string, block: SubsetBlock): string {
  if (!block.n_evaluated) {
    return `<article class="subset-card empty"><h4>${escapeHtml(name)}</h4><p class="placeholder">not evaluated</p></article>`;
  }
  let body = `<p class="subset-n">${block.n_evaluated} evaluated</p>`;
  if (block.accuracy !== undefined) {
    body += `<p class="subset-accuracy">accuracy ${rate(block.accuracy)}</p>`;
  }
  if (block.confusion) {
    body += renderConfusionHeatmap(
      block.confusion.row_labels,
      block.confusion.col_labels,
      block.confusion.matrix,
    );
  }
  if (block.n_unparseable) {
    body += `<p class="subset-note">${block.n_unparseable} unparseable</p>`;
  }
  if (block.pie) {
    body += renderPie(block.pie);
  }
  if (block.bars) {
    body += renderBars(block.bars);
  }
  if (block.n_undefined) {
    body += `<p class="subset-note">${block.n_undefined} responses had no checkable claims</p>`;
  }
  return `<article class="subset-card"><h4>${escapeHtml(name)}</h4>${body}</article>`;
}

export function renderLlmReport(report: LlmReportPayload): string {
  try {
    const cards = SUBSET_ORDER.map((name) =>
      subsetCard(name, report.subsets[name] ?? { n_evaluated: 0 }),
    ).join("");
    const errorTypes = Object.entries(report.error_types)
      .map(([name, block]) => {
        const accuracy =
          block.accuracy === undefined ? "n/a" : rate(block.accuracy);
        return `<tr><td>${escapeHtml(name)}</td><td>${block.n}</td><td>${accuracy}</td></tr>`;
      })
      .join("");
    return (
      `<section class="llm-report">` +
      `<h3>Factuality report: ${escapeHtml(report.model_name)}</h3>` +
      `<p class="totals">${report.totals.n_evaluated} rows evaluated · ` +
      `$${report.totals.cost_usd} · ${report.totals.time_seconds}s</p>` +
      `<div class="subset-cards">${cards}</div>` +
      `<h4>Accuracy by error type</h4>` +
      `<table class="error-types"><thead><tr><th>type</th><th>n</th><th>accuracy</th></tr></thead>` +
      `<tbody>${errorTypes}</tbody></table>` +
      `</section>`
    );
  } catch (error) {
    return renderRawFallback(report, error);
  }
}

export function renderCheckerMetrics(
  metrics: CheckerMetricsPayload,
  rank: number | null = null,
): string {
  try {
    const rankLine =
      rank === null
        ? ""
        : `<p class="rank-line">Current leaderboard rank: <strong>#${rank}</strong></p>`;
    return (
      `<section class="checker-report">` +
      rankLine +
      `<table class="metrics-summary"><tbody>` +
      `<tr><th>examples</th><td>${metrics.n}</td></tr>` +
      `<tr><th>accuracy</th><td>${rate(metrics.accuracy)}</td></tr>` +
      `<tr><th>total time</th><td>${metrics.total_time_seconds}s</td></tr>` +
      `<tr><th>total cost</th><td>$${metrics.total_cost_usd}</td></tr>` +
      `</tbody></table>` +
      `<table class="per-class"><thead><tr><th>class</th><th>precision</th><th>recall</th><th>F1</th></tr></thead><tbody>` +
      `<tr><td>true</td><td>${rate(metrics.true.precision)}</td><td>${rate(metrics.true.recall)}</td><td>${rate(metrics.true.f1)}</td></tr>` +
      `<tr><td>false</td><td>${rate(metrics.false.precision)}</td><td>${rate(metrics.false.recall)}</td><td>${rate(metrics.false.f1)}</td></tr>` +
      `</tbody></table>` +
      renderConfusionHeatmap(
        metrics.confusion.labels,
        metrics.confusion.labels,
        metrics.confusion.matrix,
      ) +
      `</section>`
    );
  } catch (error) {
    return renderRawFallback(metrics, error);
  }
}

const LEADERBOARD_COLUMNS: { key: LeaderboardSortKey; title: string }[] = [
  { key: "rank", title: "#" },
  { key: "checker_name", title: "checker" },
  { key: "macro_f1", title: "macro-F1" },
  { key: "accuracy", title: "accuracy" },
  { key: "total_cost_usd", title: "cost (USD)" },
  { key: "total_time_seconds", title: "time (s)" },
  { key: "submitted_at", title: "submitted" },
];

export function renderLeaderboard(
  entries: LeaderboardEntryPayload[],
  sort: { key: LeaderboardSortKey; descending: boolean } | null = null,
): string {
  try {
    const shown = sort ? sortLeaderboard(entries, sort.key, sort.descending) : entries;
    const header = LEADERBOARD_COLUMNS.map(
      ({ key, title }) =>
        `<th scope="col"><button type="button" data-sort="${key}">${escapeHtml(title)}</button></th>`,
    ).join("");
    const rows = shown
      .map(
        (entry) =>
          `<tr>` +
          `<td>${entry.rank}</td>` +
          `<td>${escapeHtml(entry.checker_name)}<span class="submitter"> by ${escapeHtml(entry.submitter.name)}</span></td>` +
          `<td>${rate(entry.macro_f1)}</td>` +
          `<td>${rate(entry.metrics.accuracy)}</td>` +
          `<td>${entry.metrics.total_cost_usd}</td>` +
          `<td>${entry.metrics.total_time_seconds}</td>` +
          `<td>${escapeHtml(entry.submitted_at)}</td>` +
          `</tr>`,
      )
      .join("");
    if (!rows) {
      return '<p class="placeholder">No public submissions yet.</p>';
    }
    return (
      `<table class="leaderboard"><thead><tr>${header}</tr></thead>` +
      `<tbody>${rows}</tbody></table>`
    );
  } catch (error) {
    return renderRawFallback(entries, error);
  }
}

/** Last-resort view for payloads the renderers cannot make sense of. */
export function renderRawFallback(payload: unknown, error?: unknown): string {
  const reason = error ? `<p class="fallback-reason">${escapeHtml(String(error))}</p>` : "";
  return (
    `<div class="raw-fallback">${reason}` +
    `<pre>${escapeHtml(JSON.stringify(payload, null, 2))}</pre></div>`
  );
}

export function renderSection(state: DashboardState): string {
  switch (state.activeSection) {
    case "response_eval":
      return renderCheckPage(state);
    case "llm_eval":
      return renderUploadFlow(state, "llm_eval");
    case "checker_eval":
      return renderUploadFlow(state, "checker_eval");
    case "leaderboard":
      if (state.leaderboard === null) {
        return '<p class="loading">Loading leaderboard…</p>';
      }
      return renderLeaderboard(state.leaderboard, state.leaderboardSort);
  }
}

export function renderApp(state: DashboardState): string {
  return renderNav(state.activeSection) + `<main>${renderSection(state)}</main>`;
}
