/** Lesson drafting and rerun triggering.
 *
 * Edits are drafts until submitted; submitting posts a new lesson-set
 * version (append-only server-side) and triggers a run citing that
 * version, so the resulting manifest is traceable to the exact wording.
 */

import { ApiClient, pollJob, type PollOptions } from "./api.js";
import type { Job, LessonEntry } from "./types.js";

export class LessonPanel {
  private readonly drafts = new Map<number, string>();
  readonly selected = new Set<number>();

  constructor(
    readonly lessons: LessonEntry[],
    readonly baseVersion: string,
  ) {}

  textOf(id: number): string {
    const draft = this.drafts.get(id);
    if (draft !== undefined) return draft;
    const lesson = this.lessons.find((l) => l.id === id);
    if (!lesson) throw new Error(`no lesson with id ${id}`);
    return lesson.text;
  }

  edit(id: number, text: string): void {
    const original = this.lessons.find((l) => l.id === id);
    if (!original) throw new Error(`no lesson with id ${id}`);
    const trimmed = text.trim();
    if (!trimmed.endsWith(".")) throw new Error("lesson text must end with a period");
    if (trimmed === original.text) {
      this.drafts.delete(id);
    } else {
      this.drafts.set(id, trimmed);
    }
  }

  toggle(id: number): void {
    if (this.selected.has(id)) {
      this.selected.delete(id);
    } else {
      this.selected.add(id);
    }
  }

  get isDirty(): boolean {
    return this.drafts.size > 0;
  }

  /** Rerun triggering is disabled until at least one lesson is selected. */
  get canTrigger(): boolean {
    return this.selected.size > 0;
  }

  buildPayload(): { lessons: LessonEntry[] } {
    return {
      lessons: this.lessons.map((l) => ({ id: l.id, text: this.textOf(l.id) })),
    };
  }

  selectedIds(): number[] {
    return [...this.selected].sort((a, b) => a - b);
  }
}

export interface RerunResult {
  lessonsVersion: string;
  job: Job;
  runIds: string[];
}

/** Post draft edits (if any), trigger the run, and poll it to completion. */
export async function submitAndRerun(
  api: ApiClient,
  panel: LessonPanel,
  kind: "eval" | "ablation",
  poll: PollOptions = {},
): Promise<RerunResult> {
  if (!panel.canTrigger) throw new Error("select at least one lesson before rerunning");
  let lessonsVersion = panel.baseVersion;
  if (panel.isDirty) {
    lessonsVersion = (await api.postLessons(panel.buildPayload())).version;
  }
  const body =
    kind === "eval"
      ? { kind, lesson_ids: panel.selectedIds(), lessons_version: lessonsVersion }
      : { kind, lessons_version: lessonsVersion };
  const job = await pollJob(api, await api.triggerRun(body), poll);
  return { lessonsVersion, job, runIds: job.run_ids };
}
