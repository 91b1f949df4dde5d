/** Pure HTML renderers. Everything model-produced (code, rationales) is
 *  escaped and shown in monospace exactly as received: model output is
 *  evidence, not content. Metric values come straight from the service. */

import type { TagState } from "./session.js";
import type {
  KappaResponse,
  Mistake,
  ReportPayload,
  RunSummary,
  Variant,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const show = (value: number | string | null | undefined): string =>
  value === null || value === undefined ? "undefined" : String(value);

export function renderRunList(runs: RunSummary[]): string {
  if (runs.length === 0) {
    return `<p class="empty">No completed runs. Run an eval or ablation first.</p>`;
  }
  const rows = runs
    .map(
      (run) => `
      <tr data-run="${escapeHtml(run.run_id)}">
        <td><a href="#run/${escapeHtml(run.run_id)}">${escapeHtml(run.run_id)}</a></td>
        <td>${escapeHtml(run.condition)}</td>
        <td class="num">${show(run.f1)}</td>
        <td class="num">${show(run.delta_f1_points)}</td>
        <td class="hash" title="${escapeHtml(run.lessons_hash)}">${escapeHtml(
          run.lessons_hash.slice(0, 12),
        )}</td>
      </tr>`,
    )
    .join("");
  return `
    <table class="runs">
      <thead><tr><th>run</th><th>condition</th><th>F1</th><th>&Delta;F1</th><th>lessons</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

export function renderNotFound(runId: string): string {
  return `<div class="notfound">
    <h2>Run not found</h2>
    <p>No run <code>${escapeHtml(runId)}</code> on the service. It may not have completed yet.</p>
    <p><a href="#runs">Back to runs</a></p>
  </div>`;
}

export function renderRetryBanner(message: string): string {
  return `<div class="banner error" role="alert">
    <span>Service unreachable: ${escapeHtml(message)}</span>
    <button data-action="retry">Retry</button>
  </div>`;
}

/** Server-rendered report table, verbatim, with the delta column called out. */
export function renderReport(report: ReportPayload, tableText: string): string {
  const delta = report.metrics.delta_f1_points;
  const highlight =
    delta === null
      ? ""
      : `<p class="delta ${delta > 0 ? "up" : delta < 0 ? "down" : "flat"}">
           &Delta;F1 vs <code>${escapeHtml(show(report.baseline_run_id))}</code>:
           <strong>${show(delta)}</strong> points
           (p = ${show(report.metrics.p_value)})
         </p>`;
  return `
    <section class="report">
      <h3>${escapeHtml(report.condition)} <code>${escapeHtml(report.run_id)}</code></h3>
      <pre class="table">${escapeHtml(tableText)}</pre>
      ${highlight}
      <p class="meta">pairs: ${report.pair_count}, unparsed: ${report.unparsed},
        gateway errors: ${report.gateway_errors},
        significance: ${escapeHtml(report.significance_method)}</p>
    </section>`;
}

function stateBadge(state: TagState): string {
  switch (state.kind) {
    case "untouched":
      return `<span class="badge todo">untagged</span>`;
    case "skipped":
      return `<span class="badge skipped">skipped</span>`;
    case "tagged":
      return `<span class="badge tagged">${state.categories.map(escapeHtml).join(", ")}</span>`;
  }
}

export function renderMistake(
  mistake: Mistake,
  state: TagState,
  variant: Variant,
): string {
  const confidence = mistake.confidence === null ? "?" : `${mistake.confidence}`;
  return `
    <article class="mistake" data-pair="${escapeHtml(mistake.pair_id)}">
      <header>
        <code>${escapeHtml(mistake.pair_id)}</code>
        <span>predicted <strong>${escapeHtml(mistake.predicted)}</strong>,
              gold <strong>${escapeHtml(mistake.gold)}</strong>,
              confidence <strong>${confidence}</strong></span>
        ${stateBadge(state)}
        <button data-action="toggle-variant" data-pair="${escapeHtml(mistake.pair_id)}">
          ${variant === "without" ? "show comments" : "hide comments"}
        </button>
      </header>
      <div class="side-by-side">
        <pre class="code"><span class="lang">${escapeHtml(mistake.lang_a)}</span>
${escapeHtml(mistake.code_a)}</pre>
        <pre class="code"><span class="lang">${escapeHtml(mistake.lang_b)}</span>
${escapeHtml(mistake.code_b)}</pre>
      </div>
      <pre class="rationale">${escapeHtml(mistake.rationale ?? "(no rationale mined)")}</pre>
      <footer class="machine-tags">
        machine: ${mistake.categories.length ? mistake.categories.map(escapeHtml).join(", ") : "(uncategorized)"}
      </footer>
    </article>`;
}

export function renderQueue(
  mistakes: Mistake[],
  stateOf: (pairId: string) => TagState,
  variant: Variant,
): string {
  if (mistakes.length === 0) {
    return `<p class="empty">Nothing to triage: this run has no reliable mistakes.</p>`;
  }
  return mistakes.map((m) => renderMistake(m, stateOf(m.pair_id), variant)).join("\n");
}

export function renderKappa(kappa: KappaResponse): string {
  const value = kappa.kappa === null ? "undefined (degenerate marginals)" : String(kappa.kappa);
  return `<p class="kappa">Cohen's kappa between ${kappa.reviewers.map(escapeHtml).join(" and ")}
    over ${kappa.pairs} pairs: <strong>${escapeHtml(value)}</strong></p>`;
}

export function renderSubmitBlocked(pending: string[]): string {
  const items = pending.map((p) => `<li><code>${escapeHtml(p)}</code></li>`).join("");
  return `<div class="banner warn">
    <p>Tag or skip every item before submitting. Remaining:</p>
    <ul>${items}</ul>
  </div>`;
}

export function renderConflict(head: string): string {
  return `<div class="banner warn" role="alert">
    <p>Another submission landed first (now at version <code>${escapeHtml(head)}</code>).</p>
    <p>Review the merged state and resubmit; nothing was overwritten.</p>
    <button data-action="reload-tags">Load latest</button>
  </div>`;
}
