/**
 * Pure view-state logic: batch labeling progress, keyboard navigation and
 * client-side session-config validation. No DOM, no network.
 */

import type { AnnotationItem } from "./api.js";

export type LabelValue = 0 | 1;

export interface LabelingState {
  items: AnnotationItem[];
  labels: Map<string, LabelValue>;
  cursor: number;
}

export function newLabelingState(items: AnnotationItem[]): LabelingState {
  return { items, labels: new Map(), cursor: items.length ? 0 : -1 };
}

export function assignLabel(state: LabelingState, label: LabelValue): LabelingState {
  if (state.cursor < 0 || state.cursor >= state.items.length) return state;
  const labels = new Map(state.labels);
  labels.set(state.items[state.cursor].doc_id, label);
  // auto-advance to the next unlabeled item, if any remain after this one
  let cursor = state.cursor;
  for (let step = 1; step <= state.items.length; step++) {
    const probe = (state.cursor + step) % state.items.length;
    if (!labels.has(state.items[probe].doc_id)) {
      cursor = probe;
      break;
    }
  }
  return { items: state.items, labels, cursor };
}

export function moveCursor(state: LabelingState, delta: number): LabelingState {
  if (!state.items.length) return state;
  const cursor = Math.min(Math.max(state.cursor + delta, 0), state.items.length - 1);
  return { ...state, cursor };
}

export function progress(state: LabelingState): { labeled: number; total: number } {
  return { labeled: state.labels.size, total: state.items.length };
}

export function canSubmit(state: LabelingState): boolean {
  return state.items.length > 0 && state.labels.size === state.items.length;
}

export function labelsPayload(state: LabelingState): Record<string, number> {
  if (!canSubmit(state)) {
    throw new Error("batch is not fully labeled");
  }
  const payload: Record<string, number> = {};
  for (const item of state.items) {
    payload[item.doc_id] = state.labels.get(item.doc_id)!;
  }
  return payload;
}

export const STRATEGIES = ["random", "lc", "pe", "bt", "gcs", "dal"] as const;

export interface ConfigForm {
  rounds: number;
  batch_size: number;
  seed_batch_size: number;
  strategy: string;
  seed: number;
}

/** Mirrors the service-side bounds so bad configs never leave the browser. */
export function validateConfig(form: ConfigForm): string[] {
  const problems: string[] = [];
  if (!Number.isInteger(form.rounds) || form.rounds < 1) {
    problems.push("rounds must be an integer >= 1");
  }
  if (!Number.isInteger(form.batch_size) || form.batch_size < 1) {
    problems.push("batch size must be an integer >= 1");
  }
  if (!Number.isInteger(form.seed_batch_size) || form.seed_batch_size < 1) {
    problems.push("seed batch size must be an integer >= 1");
  }
  if (!(STRATEGIES as readonly string[]).includes(form.strategy)) {
    problems.push(`strategy must be one of ${STRATEGIES.join(", ")}`);
  }
  if (!Number.isInteger(form.seed)) {
    problems.push("seed must be an integer");
  }
  return problems;
}
