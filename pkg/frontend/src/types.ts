// Payload types mirroring the annotation server's JSON, field for field.

export type Signal = "yes" | "no" | "failed";
export type Verdict = "YES" | "NO" | "UNSURE";
export type ModelKey = "A" | "B";
export type StyleKey = "direct" | "cot";

export const MODEL_KEYS: ModelKey[] = ["A", "B"];
export const STYLE_KEYS: StyleKey[] = ["direct", "cot"];
export const VERDICTS: Verdict[] = ["YES", "NO", "UNSURE"];

export interface TargetPayload {
  surface: string;
  span: [number, number];
  weight: number;
}

export interface AddedSubstitutePayload {
  text: string;
  annotator_id: string;
  timestamp: string;
}

export interface ProgressPayload {
  done: number;
  total: number;
}

// recommendations: substitute -> model -> style -> signal
export type Recommendations = Record<string, Partial<Record<ModelKey, Partial<Record<StyleKey, Signal>>>>>;

export interface TaskPayload {
  task_id: string;
  instance_id: string;
  target: TargetPayload;
  pseudo_substitutes: string[];
  recommendations: Recommendations;
  sentence: string;
  genre: string;
  marked_sentence: string;
  added_substitutes: AddedSubstitutePayload[];
  verdicts: Record<string, Verdict>;
  progress: ProgressPayload;
}

export interface TaskSummary {
  task_id: string;
  instance_id: string;
  target: TargetPayload;
  progress: ProgressPayload;
}

export class SchemaError extends Error {}
