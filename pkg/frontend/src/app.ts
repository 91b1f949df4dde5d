/** DOM wiring: a small hash-routed app over the pure renderers.
 *
 * State that matters lives on the service; this file only holds the
 * in-progress review session and lesson drafts, both reconstructable.
 */

import { ApiClient, ApiError } from "./api.js";
import { readConfig } from "./config.js";
import { LessonPanel, submitAndRerun } from "./lessons.js";
import {
  renderConflict,
  renderKappa,
  renderNotFound,
  renderQueue,
  renderReport,
  renderRetryBanner,
  renderRunList,
  renderSubmitBlocked,
  escapeHtml,
} from "./render.js";
import { SubmissionBlockedError, TriageSession } from "./session.js";
import type { MistakesResponse, TaxonomyResponse, Variant } from "./types.js";

interface AppState {
  api: ApiClient;
  reviewerId: string;
  session: TriageSession | null;
  panel: LessonPanel | null;
  taxonomy: TaxonomyResponse | null;
  variant: Variant;
  lastTagVersion: string | null;
}

export function mountApp(root: HTMLElement): void {
  const config = readConfig();
  const state: AppState = {
    api: new ApiClient(config.baseUrl, config.token),
    reviewerId: `reviewer-${Math.random().toString(36).slice(2, 8)}`,
    session: null,
    panel: null,
    taxonomy: null,
    variant: "without",
    lastTagVersion: null,
  };

  const route = () => {
    const hash = location.hash || "#runs";
    if (hash.startsWith("#run/")) {
      void showRun(root, state, hash.slice("#run/".length));
    } else {
      void showRuns(root, state);
    }
  };
  window.addEventListener("hashchange", route);
  root.addEventListener("click", (event) => void onClick(event, root, state));
  route();
}

async function showRuns(root: HTMLElement, state: AppState): Promise<void> {
  try {
    const runs = await state.api.listRuns();
    root.innerHTML = `<h2>Runs</h2>${renderRunList(runs)}`;
  } catch (error) {
    root.innerHTML = renderRetryBanner(String(error));
  }
}

async function showRun(root: HTMLElement, state: AppState, runId: string): Promise<void> {
  try {
    const [detail, reportText, taxonomy] = await Promise.all([
      state.api.getRun(runId),
      state.api.getReportText(runId),
      state.api.getTaxonomy(),
    ]);
    state.taxonomy = taxonomy;

    let mistakes: MistakesResponse | null = null;
    try {
      mistakes = await state.api.getMistakes(runId, state.variant);
    } catch (error) {
      if (!(error instanceof ApiError && error.status === 404)) throw error;
    }

    if (mistakes) {
      state.session = new TriageSession(
        runId,
        state.reviewerId,
        mistakes.mistakes,
        taxonomy.version,
      );
    } else {
      state.session = null;
    }

    const lessons = await state.api.getLessons();
    state.panel = new LessonPanel(lessons.payload.lessons, lessons.version);

    root.innerHTML = [
      `<p><a href="#runs">&larr; runs</a></p>`,
      renderReport(detail.report, reportText.text),
      `<h3>Reliable mistakes</h3>`,
      `<div id="queue">${
        mistakes
          ? renderQueue(
              mistakes.mistakes,
              (pairId) => state.session!.state(pairId),
              state.variant,
            )
          : `<p class="empty">Not mined yet; trigger mining to populate the queue.</p>`
      }</div>`,
      renderTriageControls(state),
      `<div id="kappa-slot"></div>`,
      renderLessonPanel(state),
      `<div id="rerun-slot"></div>`,
    ].join("\n");
    await refreshKappa(root, state, runId);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      root.innerHTML = renderNotFound(runId);
    } else {
      root.innerHTML = renderRetryBanner(String(error));
    }
  }
}

function renderTriageControls(state: AppState): string {
  if (!state.session || !state.taxonomy) return "";
  const options = state.taxonomy.payload.categories
    .map(
      (c) =>
        `<label><input type="checkbox" name="category" value="${escapeHtml(c.id)}">
         ${escapeHtml(c.name)}</label>`,
    )
    .join("\n");
  return `
    <section class="triage-controls">
      <fieldset id="category-picker"><legend>Categories for selected item</legend>
        ${options}
      </fieldset>
      <input type="text" id="selected-pair" placeholder="pair id" readonly>
      <button data-action="tag">Tag</button>
      <button data-action="skip">Skip</button>
      <button data-action="submit-tags">Submit session (${state.session.queue.length} items)</button>
    </section>`;
}

function renderLessonPanel(state: AppState): string {
  if (!state.panel) return "";
  const rows = state.panel.lessons
    .map(
      (lesson) => `
      <li>
        <label><input type="checkbox" name="lesson" value="${lesson.id}"> ${lesson.id}</label>
        <textarea data-lesson="${lesson.id}" rows="2">${escapeHtml(
          state.panel!.textOf(lesson.id),
        )}</textarea>
      </li>`,
    )
    .join("");
  return `
    <section class="lesson-panel">
      <h3>Lessons <code>${escapeHtml(state.panel.baseVersion.slice(0, 12))}</code></h3>
      <ol>${rows}</ol>
      <button data-action="rerun-eval">Rerun with selected lessons</button>
      <button data-action="rerun-ablation">Rerun full ablation</button>
    </section>`;
}

async function refreshKappa(root: HTMLElement, state: AppState, runId: string): Promise<void> {
  const slot = root.querySelector("#kappa-slot");
  if (!slot) return;
  try {
    slot.innerHTML = renderKappa(await state.api.getKappa(runId));
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      slot.innerHTML = `<p class="kappa muted">Kappa appears once two reviewers submit.</p>`;
    }
  }
}

async function onClick(event: Event, root: HTMLElement, state: AppState): Promise<void> {
  const target = event.target as HTMLElement | null;
  const action = target?.dataset?.action;
  if (!action) {
    // clicking a mistake selects it for tagging
    const article = target?.closest?.("article.mistake") as HTMLElement | null;
    const input = root.querySelector("#selected-pair") as HTMLInputElement | null;
    if (article && input) input.value = article.dataset.pair ?? "";
    return;
  }

  if (action === "retry") {
    location.reload();
    return;
  }

  if (action === "toggle-variant" && state.session) {
    state.variant = state.variant === "without" ? "with" : "without";
    void showRun(root, state, state.session.runId);
    return;
  }

  if ((action === "tag" || action === "skip") && state.session) {
    const input = root.querySelector("#selected-pair") as HTMLInputElement;
    const pairId = input?.value;
    if (!pairId) return;
    if (action === "skip") {
      state.session.skip(pairId);
    } else {
      const chosen = [...root.querySelectorAll<HTMLInputElement>("input[name=category]:checked")]
        .map((el) => el.value);
      if (chosen.length === 0) return;
      state.session.tag(pairId, chosen);
    }
    const queue = root.querySelector("#queue");
    if (queue) {
      queue.innerHTML = renderQueue(
        state.session.queue,
        (id) => state.session!.state(id),
        state.variant,
      );
    }
    return;
  }

  if (action === "submit-tags" && state.session) {
    const slot = root.querySelector("#kappa-slot");
    try {
      const submission = state.session.buildSubmission(state.lastTagVersion);
      const result = await state.api.postTags(state.session.runId, submission);
      state.lastTagVersion = result.version;
      await refreshKappa(root, state, state.session.runId);
    } catch (error) {
      if (error instanceof SubmissionBlockedError && slot) {
        slot.innerHTML = renderSubmitBlocked(error.pending);
      } else if (error instanceof ApiError && error.status === 409 && slot) {
        const head = /HEAD is (\w+)/.exec(error.detail)?.[1] ?? "unknown";
        slot.innerHTML = renderConflict(head);
      } else if (slot) {
        slot.innerHTML = renderRetryBanner(String(error));
      }
    }
    return;
  }

  if (action === "reload-tags" && state.session) {
    const tags = await state.api.getTags(state.session.runId);
    state.lastTagVersion = tags.sessions[state.reviewerId]?.version ?? null;
    await refreshKappa(root, state, state.session.runId);
    return;
  }

  if ((action === "rerun-eval" || action === "rerun-ablation") && state.panel) {
    for (const area of root.querySelectorAll<HTMLTextAreaElement>("textarea[data-lesson]")) {
      state.panel.edit(Number(area.dataset.lesson), area.value);
    }
    state.panel.selected.clear();
    for (const box of root.querySelectorAll<HTMLInputElement>("input[name=lesson]:checked")) {
      state.panel.toggle(Number(box.value));
    }
    const slot = root.querySelector("#rerun-slot");
    if (action === "rerun-eval" && !state.panel.canTrigger) {
      if (slot) slot.innerHTML = `<p class="muted">Select at least one lesson first.</p>`;
      return;
    }
    if (slot) slot.innerHTML = `<p class="muted">Running&hellip;</p>`;
    try {
      const result = await submitAndRerun(
        state.api,
        state.panel,
        action === "rerun-eval" ? "eval" : "ablation",
      );
      const last = result.runIds[result.runIds.length - 1];
      if (slot) {
        slot.innerHTML = `<p>Done. New lessons version
          <code>${escapeHtml(result.lessonsVersion.slice(0, 12))}</code>;
          see <a href="#run/${escapeHtml(last)}">${escapeHtml(last)}</a>.</p>`;
      }
    } catch (error) {
      if (slot) slot.innerHTML = renderRetryBanner(String(error));
    }
  }
}

declare global {
  interface Window {
    __cplMounted?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__cplMounted) {
  const root = document.getElementById("app");
  if (root) {
    window.__cplMounted = true;
    mountApp(root);
  }
}
