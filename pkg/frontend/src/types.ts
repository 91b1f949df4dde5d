/** Payload shapes of the triage service. The UI never recomputes metrics;
 *  whatever the service reports is what gets displayed. */

export type Variant = "with" | "without";

export interface RunSummary {
  run_id: string;
  condition: string;
  created_at: string;
  lesson_ids: number[];
  lessons_hash: string;
  f1: number | null;
  delta_f1_points: number | null;
}

export interface ConfusionPayload {
  tp: number;
  fp: number;
  tn: number;
  fn: number;
}

export interface MetricsPayload {
  precision: number | null;
  recall: number | null;
  accuracy: number | null;
  f1: number | null;
  delta_f1_points: number | null;
  p_value: number | null;
}

export interface ShiftPayload {
  wrong_to_right: number;
  right_to_wrong: number;
}

export interface ReportPayload {
  run_id: string;
  condition: string;
  pair_count: number;
  counts: ConfusionPayload;
  metrics: MetricsPayload;
  shift: ShiftPayload | null;
  unparsed: number;
  gateway_errors: number;
  significance_method: string;
  baseline_run_id: string | null;
}

export interface RunDetail {
  manifest: Record<string, unknown> & {
    run_id: string;
    condition: string;
    lesson_ids: number[];
    lessons_hash: string;
  };
  report: ReportPayload;
}

export interface Mistake {
  pair_id: string;
  predicted: string;
  gold: string;
  confidence: number | null;
  rationale: string | null;
  categories: string[];
  lang_a: string;
  lang_b: string;
  code_a: string;
  code_b: string;
}

export interface MistakesResponse {
  run_id: string;
  variant: Variant;
  mining_key: string;
  mistakes: Mistake[];
}

export interface LessonEntry {
  id: number;
  text: string;
}

export interface LessonsResponse {
  version: string;
  payload: { lessons: LessonEntry[] };
}

export interface CategoryEntry {
  id: string;
  name: string;
  seed_terms: string[];
  description: string;
}

export interface TaxonomyResponse {
  version: string;
  payload: { categories: CategoryEntry[]; alias_notes?: { name: string; note: string }[] };
}

export interface Job {
  job_id: string;
  status: "running" | "done" | "failed";
  run_ids: string[];
  error: string | null;
}

export interface TagSession {
  version: string;
  reviewer_id: string;
  taxonomy_version: string;
  tags: Record<string, string[]>;
}

export interface TagsResponse {
  run_id: string;
  sessions: Record<string, TagSession>;
}

export interface KappaResponse {
  run_id: string;
  reviewers: string[];
  pairs: number;
  kappa: number | null;
}
