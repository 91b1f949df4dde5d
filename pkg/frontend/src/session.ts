/** Review-session state: one reviewer working through one run's mistakes.
 *
 * Every queue item must be tagged or explicitly skipped before the session
 * can submit; a skip is recorded as an empty category list so dual-reviewer
 * agreement covers the whole queue. Submissions carry the version they were
 * built on, so a concurrent edit surfaces as a conflict instead of a silent
 * overwrite.
 */

import type { TagSubmission } from "./api.js";
import type { Mistake } from "./types.js";

export type TagState =
  | { kind: "untouched" }
  | { kind: "skipped" }
  | { kind: "tagged"; categories: string[] };

export class SubmissionBlockedError extends Error {
  constructor(readonly pending: string[]) {
    super(`cannot submit: ${pending.length} untagged item(s): ${pending.join(", ")}`);
  }
}

export class TriageSession {
  private readonly states = new Map<string, TagState>();

  constructor(
    readonly runId: string,
    readonly reviewerId: string,
    readonly queue: Mistake[],
    readonly taxonomyVersion: string,
  ) {
    for (const mistake of queue) {
      this.states.set(mistake.pair_id, { kind: "untouched" });
    }
  }

  state(pairId: string): TagState {
    const state = this.states.get(pairId);
    if (!state) throw new Error(`pair ${pairId} is not in this session's queue`);
    return state;
  }

  tag(pairId: string, categories: string[]): void {
    this.state(pairId); // membership check
    if (categories.length === 0) throw new Error("tag needs at least one category; use skip()");
    this.states.set(pairId, { kind: "tagged", categories: [...new Set(categories)].sort() });
  }

  skip(pairId: string): void {
    this.state(pairId);
    this.states.set(pairId, { kind: "skipped" });
  }

  clear(pairId: string): void {
    this.state(pairId);
    this.states.set(pairId, { kind: "untouched" });
  }

  get pending(): string[] {
    return this.queue
      .filter((m) => this.state(m.pair_id).kind === "untouched")
      .map((m) => m.pair_id);
  }

  get taggedCount(): number {
    return this.queue.filter((m) => this.state(m.pair_id).kind === "tagged").length;
  }

  canSubmit(): boolean {
    return this.queue.length > 0 && this.pending.length === 0;
  }

  /** Build the POST body; throws listing the untouched items when incomplete. */
  buildSubmission(baseVersion: string | null = null): TagSubmission {
    const pending = this.pending;
    if (pending.length > 0) throw new SubmissionBlockedError(pending);
    const tags: Record<string, string[]> = {};
    for (const mistake of this.queue) {
      const state = this.state(mistake.pair_id);
      tags[mistake.pair_id] = state.kind === "tagged" ? state.categories : [];
    }
    const submission: TagSubmission = {
      reviewer_id: this.reviewerId,
      taxonomy_version: this.taxonomyVersion,
      tags,
    };
    if (baseVersion !== null) submission.base_version = baseVersion;
    return submission;
  }
}
